//! Conforming 2D polygonal meshes.
//!
//! Cells are counter-clockwise vertex loops. Edges and cell adjacency are
//! derived from the loops; every edge stores the vertex order in which its
//! *left* cell traverses it, which also fixes the trace parametrization used
//! by the finite element spaces (from `vertices[0]` to `vertices[1]`).

mod generate;
mod io;
mod partition;

pub use generate::quad_pentagon_mesh;
pub use io::{load_mesh, load_mesh_file, write_mesh};
pub use partition::{partition_grid, partition_per_element, SubdomainPartition};

use std::collections::HashMap;

use crate::error::{Error, Result};

pub type Point = [f64; 2];

/// Default bound on diameter / inscribed diameter.
pub const DEFAULT_SHAPE_BOUND: f64 = 10.0;

#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    /// Endpoints in the order the left cell traverses them.
    pub vertices: [usize; 2],
    pub left: usize,
    /// `None` on the domain boundary.
    pub right: Option<usize>,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.right.is_none()
    }

    /// Side index of `cell` on this edge: 0 for the left cell, 1 for the right.
    pub fn side_of(&self, cell: usize) -> usize {
        if self.left == cell {
            0
        } else {
            debug_assert_eq!(self.right, Some(cell));
            1
        }
    }

    pub fn cell_on_side(&self, side: usize) -> Option<usize> {
        if side == 0 {
            Some(self.left)
        } else {
            self.right
        }
    }
}

/// Per-cell geometric data.
#[derive(Debug, Clone)]
pub struct CellGeometry {
    pub vertices: Vec<Point>,
    pub centroid: Point,
    pub area: f64,
    pub diameter: f64,
    pub perimeter: f64,
}

impl CellGeometry {
    pub fn from_vertices(vertices: Vec<Point>) -> Self {
        let area = signed_area(&vertices);
        let centroid = polygon_centroid(&vertices, area);
        let diameter = polygon_diameter(&vertices);
        let perimeter = (0..vertices.len())
            .map(|i| dist(vertices[i], vertices[(i + 1) % vertices.len()]))
            .sum();
        Self {
            vertices,
            centroid,
            area,
            diameter,
            perimeter,
        }
    }

    /// Ratio of the diameter to an inscribed-circle diameter estimate
    /// `4|T| / perimeter` (exact for triangles and tangential polygons).
    pub fn shape_ratio(&self) -> f64 {
        self.diameter * self.perimeter / (4.0 * self.area)
    }
}

#[derive(Debug, Clone)]
pub struct Mesh {
    vertices: Vec<Point>,
    cells: Vec<Vec<usize>>,
    edges: Vec<Edge>,
    cell_edges: Vec<Vec<usize>>,
    geometry: Vec<CellGeometry>,
    h: f64,
}

/// A validation failure, optionally attributed to a cell.
pub(crate) struct MeshIssue {
    pub cell: Option<usize>,
    pub message: String,
}

impl MeshIssue {
    fn cell(cell: usize, message: impl Into<String>) -> Self {
        Self {
            cell: Some(cell),
            message: message.into(),
        }
    }
}

impl Mesh {
    /// Builds and validates a mesh with the default shape-regularity bound.
    pub fn new(vertices: Vec<Point>, cells: Vec<Vec<usize>>) -> Result<Self> {
        Self::with_shape_bound(vertices, cells, DEFAULT_SHAPE_BOUND)
    }

    pub fn with_shape_bound(
        vertices: Vec<Point>,
        cells: Vec<Vec<usize>>,
        shape_bound: f64,
    ) -> Result<Self> {
        Self::build(vertices, cells, shape_bound).map_err(|issue| match issue.cell {
            Some(c) => Error::InvalidMesh(format!("cell {c}: {}", issue.message)),
            None => Error::InvalidMesh(issue.message),
        })
    }

    pub(crate) fn build(
        vertices: Vec<Point>,
        cells: Vec<Vec<usize>>,
        shape_bound: f64,
    ) -> std::result::Result<Self, MeshIssue> {
        if cells.is_empty() {
            return Err(MeshIssue {
                cell: None,
                message: "mesh has no cells".into(),
            });
        }
        let mut geometry = Vec::with_capacity(cells.len());
        for (c, cell) in cells.iter().enumerate() {
            if cell.len() < 3 {
                return Err(MeshIssue::cell(c, "cell has fewer than 3 vertices"));
            }
            if let Some(&bad) = cell.iter().find(|&&v| v >= vertices.len()) {
                return Err(MeshIssue::cell(c, format!("vertex index {bad} out of range")));
            }
            let mut sorted = cell.clone();
            sorted.sort_unstable();
            sorted.dedup();
            if sorted.len() != cell.len() {
                return Err(MeshIssue::cell(c, "repeated vertex in cell loop"));
            }
            let pts: Vec<Point> = cell.iter().map(|&v| vertices[v]).collect();
            if !is_simple_polygon(&pts) {
                return Err(MeshIssue::cell(c, "cell boundary self-intersects"));
            }
            let geo = CellGeometry::from_vertices(pts);
            if geo.area <= 0.0 {
                return Err(MeshIssue::cell(
                    c,
                    "cell is not counter-clockwise (non-positive signed area)",
                ));
            }
            if geo.shape_ratio() > shape_bound {
                return Err(MeshIssue::cell(
                    c,
                    format!(
                        "shape regularity violated: ratio {:.3} exceeds {shape_bound}",
                        geo.shape_ratio()
                    ),
                ));
            }
            geometry.push(geo);
        }

        let mut edges: Vec<Edge> = Vec::new();
        let mut lookup: HashMap<(usize, usize), usize> = HashMap::new();
        let mut cell_edges = Vec::with_capacity(cells.len());
        for (c, cell) in cells.iter().enumerate() {
            let n = cell.len();
            let mut local = Vec::with_capacity(n);
            for i in 0..n {
                let (p, q) = (cell[i], cell[(i + 1) % n]);
                let key = (p.min(q), p.max(q));
                match lookup.get(&key) {
                    None => {
                        lookup.insert(key, edges.len());
                        local.push(edges.len());
                        edges.push(Edge {
                            vertices: [p, q],
                            left: c,
                            right: None,
                        });
                    }
                    Some(&e) => {
                        let edge = &mut edges[e];
                        if edge.right.is_some() {
                            return Err(MeshIssue::cell(
                                c,
                                format!("edge ({p}, {q}) is shared by more than two cells"),
                            ));
                        }
                        if edge.vertices != [q, p] {
                            return Err(MeshIssue::cell(
                                c,
                                format!(
                                    "edge ({p}, {q}) is traversed in the same direction as cell {}",
                                    edge.left
                                ),
                            ));
                        }
                        edge.right = Some(c);
                        local.push(e);
                    }
                }
            }
            cell_edges.push(local);
        }

        // The boundary must be a union of closed curves: every vertex on it
        // touches exactly two boundary edges. Hanging nodes break this.
        let mut boundary_degree = vec![0usize; vertices.len()];
        for e in edges.iter().filter(|e| e.is_boundary()) {
            boundary_degree[e.vertices[0]] += 1;
            boundary_degree[e.vertices[1]] += 1;
        }
        for e in edges.iter().filter(|e| e.is_boundary()) {
            for &v in &e.vertices {
                if boundary_degree[v] != 2 {
                    return Err(MeshIssue::cell(
                        e.left,
                        format!(
                            "dangling edge ({}, {}): vertex {v} touches {} boundary edges",
                            e.vertices[0], e.vertices[1], boundary_degree[v]
                        ),
                    ));
                }
            }
        }

        let h = geometry.iter().map(|g| g.diameter).fold(0.0, f64::max);
        Ok(Self {
            vertices,
            cells,
            edges,
            cell_edges,
            geometry,
            h,
        })
    }

    pub fn vertices(&self) -> &[Point] {
        &self.vertices
    }

    pub fn cells(&self) -> &[Vec<usize>] {
        &self.cells
    }

    pub fn cell(&self, c: usize) -> &[usize] {
        &self.cells[c]
    }

    pub fn num_cells(&self) -> usize {
        self.cells.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn num_vertices(&self) -> usize {
        self.vertices.len()
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn edge(&self, e: usize) -> &Edge {
        &self.edges[e]
    }

    /// Edge indices of cell `c`; local edge `i` joins loop vertices `i` and `i + 1`.
    pub fn cell_edges(&self, c: usize) -> &[usize] {
        &self.cell_edges[c]
    }

    pub fn geometry(&self, c: usize) -> &CellGeometry {
        &self.geometry[c]
    }

    pub fn edge_endpoints(&self, e: usize) -> (Point, Point) {
        let [a, b] = self.edges[e].vertices;
        (self.vertices[a], self.vertices[b])
    }

    pub fn edge_length(&self, e: usize) -> f64 {
        let (a, b) = self.edge_endpoints(e);
        dist(a, b)
    }

    /// Unit normal of edge `e` pointing out of `cell`.
    pub fn outward_normal(&self, e: usize, cell: usize) -> Point {
        let (a, b) = self.edge_endpoints(e);
        let len = dist(a, b);
        let n = [(b[1] - a[1]) / len, -(b[0] - a[0]) / len];
        if self.edges[e].side_of(cell) == 0 {
            n
        } else {
            [-n[0], -n[1]]
        }
    }

    pub fn edge_midpoint(&self, e: usize) -> Point {
        let (a, b) = self.edge_endpoints(e);
        [(a[0] + b[0]) / 2.0, (a[1] + b[1]) / 2.0]
    }

    /// Global mesh size: the largest cell diameter.
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn boundary_edges(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.edges.len()).filter(|&e| self.edges[e].is_boundary())
    }

    pub fn total_area(&self) -> f64 {
        self.geometry.iter().map(|g| g.area).sum()
    }

    pub fn is_triangular(&self) -> bool {
        self.cells.iter().all(|c| c.len() == 3)
    }
}

/// The unit square cut into `n`×`n` squares, each split into two right
/// triangles by its lower-left to upper-right diagonal.
pub fn build_uniform_triangle_mesh(n: usize) -> Result<Mesh> {
    if n == 0 {
        return Err(Error::InvalidParameter("n must be positive".into()));
    }
    let idx = |i: usize, j: usize| j * (n + 1) + i;
    let mut vertices = Vec::with_capacity((n + 1) * (n + 1));
    for j in 0..=n {
        for i in 0..=n {
            vertices.push([i as f64 / n as f64, j as f64 / n as f64]);
        }
    }
    let mut cells = Vec::with_capacity(2 * n * n);
    for j in 0..n {
        for i in 0..n {
            let (p00, p10, p11, p01) = (idx(i, j), idx(i + 1, j), idx(i + 1, j + 1), idx(i, j + 1));
            cells.push(vec![p00, p10, p11]);
            cells.push(vec![p00, p11, p01]);
        }
    }
    Mesh::new(vertices, cells)
}

/// Splits every triangle into four congruent children through its edge midpoints.
pub fn refine_uniform(mesh: &Mesh) -> Result<Mesh> {
    if let Some(c) = mesh.cells.iter().position(|c| c.len() != 3) {
        return Err(Error::UnsupportedRefinement { cell: c });
    }
    let mut vertices = mesh.vertices.clone();
    let midpoint: Vec<usize> = (0..mesh.num_edges())
        .map(|e| {
            vertices.push(mesh.edge_midpoint(e));
            vertices.len() - 1
        })
        .collect();
    let mut cells = Vec::with_capacity(4 * mesh.num_cells());
    for (c, cell) in mesh.cells.iter().enumerate() {
        let [v0, v1, v2] = [cell[0], cell[1], cell[2]];
        let ce = &mesh.cell_edges[c];
        let (m01, m12, m20) = (midpoint[ce[0]], midpoint[ce[1]], midpoint[ce[2]]);
        cells.push(vec![v0, m01, m20]);
        cells.push(vec![m01, v1, m12]);
        cells.push(vec![m20, m12, v2]);
        cells.push(vec![m01, m12, m20]);
    }
    Mesh::new(vertices, cells)
}

pub fn dist(a: Point, b: Point) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt()
}

/// Shoelace formula; positive for counter-clockwise loops.
pub fn signed_area(pts: &[Point]) -> f64 {
    let n = pts.len();
    (0..n)
        .map(|i| {
            let (p, q) = (pts[i], pts[(i + 1) % n]);
            p[0] * q[1] - q[0] * p[1]
        })
        .sum::<f64>()
        / 2.0
}

fn polygon_centroid(pts: &[Point], area: f64) -> Point {
    let n = pts.len();
    let (mut cx, mut cy) = (0.0, 0.0);
    for i in 0..n {
        let (p, q) = (pts[i], pts[(i + 1) % n]);
        let cross = p[0] * q[1] - q[0] * p[1];
        cx += (p[0] + q[0]) * cross;
        cy += (p[1] + q[1]) * cross;
    }
    if area.abs() < f64::MIN_POSITIVE {
        let inv = 1.0 / n as f64;
        return [
            pts.iter().map(|p| p[0]).sum::<f64>() * inv,
            pts.iter().map(|p| p[1]).sum::<f64>() * inv,
        ];
    }
    [cx / (6.0 * area), cy / (6.0 * area)]
}

fn polygon_diameter(pts: &[Point]) -> f64 {
    let mut d: f64 = 0.0;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            d = d.max(dist(pts[i], pts[j]));
        }
    }
    d
}

fn orient(a: Point, b: Point, c: Point) -> f64 {
    (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
}

fn segments_touch(p1: Point, p2: Point, q1: Point, q2: Point) -> bool {
    let d1 = orient(q1, q2, p1);
    let d2 = orient(q1, q2, p2);
    let d3 = orient(p1, p2, q1);
    let d4 = orient(p1, p2, q2);
    if ((d1 > 0.0 && d2 < 0.0) || (d1 < 0.0 && d2 > 0.0))
        && ((d3 > 0.0 && d4 < 0.0) || (d3 < 0.0 && d4 > 0.0))
    {
        return true;
    }
    let on_segment = |a: Point, b: Point, p: Point| {
        p[0] >= a[0].min(b[0])
            && p[0] <= a[0].max(b[0])
            && p[1] >= a[1].min(b[1])
            && p[1] <= a[1].max(b[1])
    };
    (d1 == 0.0 && on_segment(q1, q2, p1))
        || (d2 == 0.0 && on_segment(q1, q2, p2))
        || (d3 == 0.0 && on_segment(p1, p2, q1))
        || (d4 == 0.0 && on_segment(p1, p2, q2))
}

fn is_simple_polygon(pts: &[Point]) -> bool {
    let n = pts.len();
    for i in 0..n {
        for j in i + 1..n {
            let adjacent = j == i + 1 || (i == 0 && j == n - 1);
            if adjacent {
                continue;
            }
            if segments_touch(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n]) {
                return false;
            }
        }
    }
    true
}
