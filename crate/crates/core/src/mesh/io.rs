//! Plain-text mesh format.
//!
//! ```text
//! wgmesh 1
//! vertices N
//! x y            (N lines)
//! cells M
//! p i1 ... ip    (M lines, 0-based vertex indices, counter-clockwise)
//! ```
//!
//! Blank lines and lines starting with `#` are ignored. Edges and adjacency
//! are always derived, never stored.

use std::io::{BufRead, Write};
use std::path::Path;

use super::{Mesh, Point, DEFAULT_SHAPE_BOUND};
use crate::error::{Error, Result};

struct Lines<R> {
    inner: std::io::Lines<R>,
    line: usize,
}

impl<R: BufRead> Lines<R> {
    /// Next non-empty, non-comment line with its 1-based number.
    fn next_content(&mut self) -> Result<Option<(usize, String)>> {
        for l in self.inner.by_ref() {
            self.line += 1;
            let l = l?;
            let t = l.trim();
            if t.is_empty() || t.starts_with('#') {
                continue;
            }
            return Ok(Some((self.line, t.to_string())));
        }
        Ok(None)
    }

    fn expect(&mut self, what: &str) -> Result<(usize, String)> {
        self.next_content()?.ok_or_else(|| Error::MeshFormat {
            line: self.line + 1,
            message: format!("unexpected end of file, expected {what}"),
        })
    }
}

fn bad(line: usize, message: impl Into<String>) -> Error {
    Error::MeshFormat {
        line,
        message: message.into(),
    }
}

fn parse_count(line: usize, text: &str, keyword: &str) -> Result<usize> {
    let mut it = text.split_whitespace();
    if it.next() != Some(keyword) {
        return Err(bad(line, format!("expected `{keyword} <count>`")));
    }
    let n = it
        .next()
        .and_then(|s| s.parse::<usize>().ok())
        .ok_or_else(|| bad(line, format!("expected `{keyword} <count>`")))?;
    if it.next().is_some() {
        return Err(bad(line, "trailing tokens"));
    }
    Ok(n)
}

pub fn load_mesh<R: BufRead>(reader: R) -> Result<Mesh> {
    load_mesh_with_bound(reader, DEFAULT_SHAPE_BOUND)
}

pub fn load_mesh_file(path: impl AsRef<Path>) -> Result<Mesh> {
    let f = std::fs::File::open(path)?;
    load_mesh(std::io::BufReader::new(f))
}

pub fn load_mesh_with_bound<R: BufRead>(reader: R, shape_bound: f64) -> Result<Mesh> {
    let mut lines = Lines {
        inner: reader.lines(),
        line: 0,
    };
    let (l, header) = lines.expect("header")?;
    if header.split_whitespace().collect::<Vec<_>>() != ["wgmesh", "1"] {
        return Err(bad(l, "expected header `wgmesh 1`"));
    }

    let (l, text) = lines.expect("vertex count")?;
    let nv = parse_count(l, &text, "vertices")?;
    let mut vertices: Vec<Point> = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (l, text) = lines.expect("vertex coordinates")?;
        let coords: Vec<f64> = text
            .split_whitespace()
            .map(|s| s.parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad(l, "malformed vertex coordinates"))?;
        if coords.len() != 2 || !coords.iter().all(|c| c.is_finite()) {
            return Err(bad(l, "expected two finite coordinates `x y`"));
        }
        vertices.push([coords[0], coords[1]]);
    }

    let (l, text) = lines.expect("cell count")?;
    let nc = parse_count(l, &text, "cells")?;
    let mut cells = Vec::with_capacity(nc);
    let mut cell_lines = Vec::with_capacity(nc);
    for _ in 0..nc {
        let (l, text) = lines.expect("cell")?;
        let ints: Vec<usize> = text
            .split_whitespace()
            .map(|s| s.parse::<usize>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|_| bad(l, "malformed cell line"))?;
        let Some((&p, rest)) = ints.split_first() else {
            return Err(bad(l, "empty cell line"));
        };
        if rest.len() != p {
            return Err(bad(
                l,
                format!("cell declares {p} vertices but lists {}", rest.len()),
            ));
        }
        cells.push(rest.to_vec());
        cell_lines.push(l);
    }
    if let Some((l, _)) = lines.next_content()? {
        return Err(bad(l, "unexpected content after the cell list"));
    }

    Mesh::build(vertices, cells, shape_bound).map_err(|issue| match issue.cell {
        Some(c) => bad(cell_lines[c], issue.message),
        None => Error::InvalidMesh(issue.message),
    })
}

pub fn write_mesh<W: Write>(mesh: &Mesh, mut w: W) -> Result<()> {
    writeln!(w, "wgmesh 1")?;
    writeln!(w, "vertices {}", mesh.num_vertices())?;
    for v in mesh.vertices() {
        writeln!(w, "{:?} {:?}", v[0], v[1])?;
    }
    writeln!(w, "cells {}", mesh.num_cells())?;
    for cell in mesh.cells() {
        write!(w, "{}", cell.len())?;
        for v in cell {
            write!(w, " {v}")?;
        }
        writeln!(w)?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::signed_area;

    fn load(text: &str) -> Result<Mesh> {
        load_mesh(text.as_bytes())
    }

    #[test]
    fn single_quad() {
        let m = load("wgmesh 1\nvertices 4\n0 0\n1 0\n1 1\n0 1\ncells 1\n4 0 1 2 3\n").unwrap();
        assert_eq!(m.num_cells(), 1);
        assert_eq!(m.boundary_edges().count(), 4);
    }

    #[test]
    fn edge_used_by_three_cells_is_rejected() {
        let text = "wgmesh 1\nvertices 5\n0 0\n1 0\n0.5 1\n0.5 -1\n0.5 2\ncells 3\n\
                    3 0 1 2\n3 1 0 3\n3 0 1 4\n";
        let err = load(text).unwrap_err();
        match err {
            Error::MeshFormat { line, .. } => assert_eq!(line, 11),
            other => panic!("unexpected error {other}"),
        }
    }

    #[test]
    fn pentagon_area_matches_hand_shoelace() {
        // (0,0) (2,0) (3,1.5) (1,3) (-1,1.5):
        // cross terms 0 + 3 + 7.5 + 4.5 + 0 = 15, area 7.5
        let text = "wgmesh 1\nvertices 5\n0 0\n2 0\n3 1.5\n1 3\n-1 1.5\ncells 1\n5 0 1 2 3 4\n";
        let m = load(text).unwrap();
        assert!((m.geometry(0).area - 7.5).abs() < 1e-14);
        assert!((signed_area(&m.geometry(0).vertices) - 7.5).abs() < 1e-14);
    }

    #[test]
    fn malformed_lines_report_line_numbers() {
        let cases = [
            ("wgmesh 2\n", 1),
            ("wgmesh 1\nvertices 2\n0 0\n1 x\n", 4),
            ("wgmesh 1\nvertices 3\n0 0\n1 0\n0 1\ncells 1\n4 0 1 2\n", 7),
            // clockwise triangle
            ("wgmesh 1\nvertices 3\n0 0\n1 0\n0 1\ncells 1\n3 0 2 1\n", 7),
        ];
        for (text, expected) in cases {
            match load(text) {
                Err(Error::MeshFormat { line, .. }) => assert_eq!(line, expected, "{text}"),
                other => panic!("expected a format error for {text:?}, got {other:?}"),
            }
        }
    }

    #[test]
    fn hanging_node_is_a_dangling_edge() {
        // conforming fan of three triangles
        let text = "wgmesh 1\nvertices 5\n0 0\n2 0\n1 1\n1 2\n0 2\ncells 3\n\
                    3 0 1 2\n3 0 2 4\n3 2 3 4\n";
        assert!(load(text).is_ok());
        // vertex 4 sits on the top edge of the quad without splitting it
        let t_junction = "wgmesh 1\nvertices 6\n0 0\n2 0\n2 1\n0 1\n1 1\n1 2\ncells 3\n\
                          4 0 1 2 3\n3 3 4 5\n3 4 2 5\n";
        let err = load(t_junction).unwrap_err();
        assert!(err.to_string().contains("dangling"), "{err}");
    }

    #[test]
    fn write_then_load_reproduces_mesh() {
        let m = crate::mesh::build_uniform_triangle_mesh(3).unwrap();
        let mut buf = Vec::new();
        write_mesh(&m, &mut buf).unwrap();
        let back = load_mesh(buf.as_slice()).unwrap();
        assert_eq!(back.cells(), m.cells());
        assert_eq!(back.vertices(), m.vertices());
    }
}
