//! Non-overlapping subdomain partitions whose interfaces follow mesh edges.

use std::collections::{BTreeMap, VecDeque};

use super::Mesh;
use crate::error::{Error, Result};

/// Cell-to-subdomain assignment together with the derived interface sets.
///
/// Only interfaces of positive length are recorded: subdomains that touch
/// at a single vertex share no interface.
#[derive(Debug, Clone)]
pub struct SubdomainPartition {
    cell_subdomain: Vec<usize>,
    subdomain_cells: Vec<Vec<usize>>,
    /// Keyed by ordered pair `(j, k)`; both orders are stored.
    interfaces: BTreeMap<(usize, usize), Vec<usize>>,
    outer_boundary: Vec<Vec<usize>>,
    inner_boundary: Vec<Vec<usize>>,
}

impl SubdomainPartition {
    /// Builds the partition from an explicit cell map and verifies that each
    /// subdomain is a nonempty, edge-connected set of cells.
    pub fn from_cell_map(mesh: &Mesh, cell_subdomain: Vec<usize>) -> Result<Self> {
        if cell_subdomain.len() != mesh.num_cells() {
            return Err(Error::InvalidParameter(format!(
                "cell map has {} entries for {} cells",
                cell_subdomain.len(),
                mesh.num_cells()
            )));
        }
        let m = cell_subdomain.iter().max().map_or(0, |&j| j + 1);
        let mut subdomain_cells = vec![Vec::new(); m];
        for (c, &j) in cell_subdomain.iter().enumerate() {
            subdomain_cells[j].push(c);
        }
        if let Some(j) = subdomain_cells.iter().position(|cells| cells.is_empty()) {
            return Err(Error::InvalidParameter(format!("subdomain {j} is empty")));
        }

        let mut interfaces: BTreeMap<(usize, usize), Vec<usize>> = BTreeMap::new();
        let mut outer_boundary = vec![Vec::new(); m];
        let mut inner_boundary = vec![Vec::new(); m];
        for (e, edge) in mesh.edges().iter().enumerate() {
            let j = cell_subdomain[edge.left];
            match edge.right {
                None => outer_boundary[j].push(e),
                Some(r) => {
                    let k = cell_subdomain[r];
                    if j != k {
                        interfaces.entry((j, k)).or_default().push(e);
                        interfaces.entry((k, j)).or_default().push(e);
                        inner_boundary[j].push(e);
                        inner_boundary[k].push(e);
                    }
                }
            }
        }
        for b in &mut inner_boundary {
            b.sort_unstable();
        }

        let part = Self {
            cell_subdomain,
            subdomain_cells,
            interfaces,
            outer_boundary,
            inner_boundary,
        };
        for j in 0..m {
            if let Some(c) = part.disconnected_cell(mesh, j) {
                return Err(Error::Partition {
                    cell: c,
                    message: format!("subdomain {j} is not edge-connected"),
                });
            }
        }
        Ok(part)
    }

    fn disconnected_cell(&self, mesh: &Mesh, j: usize) -> Option<usize> {
        let cells = &self.subdomain_cells[j];
        let mut seen = std::collections::HashSet::new();
        let mut queue = VecDeque::from([cells[0]]);
        seen.insert(cells[0]);
        while let Some(c) = queue.pop_front() {
            for &e in mesh.cell_edges(c) {
                let edge = mesh.edge(e);
                let other = if edge.left == c { edge.right } else { Some(edge.left) };
                if let Some(o) = other {
                    if self.cell_subdomain[o] == j && seen.insert(o) {
                        queue.push_back(o);
                    }
                }
            }
        }
        cells.iter().copied().find(|c| !seen.contains(c))
    }

    pub fn num_subdomains(&self) -> usize {
        self.subdomain_cells.len()
    }

    pub fn subdomain_of(&self, cell: usize) -> usize {
        self.cell_subdomain[cell]
    }

    pub fn cell_map(&self) -> &[usize] {
        &self.cell_subdomain
    }

    pub fn cells(&self, j: usize) -> &[usize] {
        &self.subdomain_cells[j]
    }

    /// Interface edges Γ_jk (empty when the subdomains do not share an edge).
    pub fn interface(&self, j: usize, k: usize) -> &[usize] {
        self.interfaces.get(&(j, k)).map_or(&[], Vec::as_slice)
    }

    /// Nonempty interfaces as ordered pairs.
    pub fn interface_pairs(&self) -> impl Iterator<Item = (usize, usize)> + '_ {
        self.interfaces.keys().copied()
    }

    /// Edges of ∂Ω_j on the outer boundary ∂Ω.
    pub fn outer_boundary(&self, j: usize) -> &[usize] {
        &self.outer_boundary[j]
    }

    /// B_j = ∂Ω_j \ Γ_j, the interface part of the subdomain boundary.
    pub fn inner_boundary(&self, j: usize) -> &[usize] {
        &self.inner_boundary[j]
    }

    /// Every interface edge once, in increasing order.
    pub fn interface_edges(&self, mesh: &Mesh) -> Vec<usize> {
        (0..mesh.num_edges())
            .filter(|&e| {
                let edge = mesh.edge(e);
                edge.right
                    .is_some_and(|r| self.cell_subdomain[r] != self.cell_subdomain[edge.left])
            })
            .collect()
    }

    pub fn subdomain_area(&self, mesh: &Mesh, j: usize) -> f64 {
        self.subdomain_cells[j].iter().map(|&c| mesh.geometry(c).area).sum()
    }
}

/// Splits the unit square into `m`×`m` congruent blocks and assigns each cell
/// to the block containing it. Subdomain `j = by * m + bx`.
///
/// Fails when a cell is not contained in a single closed block, i.e. when
/// mesh edges do not follow the block lines.
pub fn partition_grid(mesh: &Mesh, m: usize) -> Result<SubdomainPartition> {
    if m == 0 {
        return Err(Error::InvalidParameter("block count m must be positive".into()));
    }
    let tol = 1e-12;
    let mut map = Vec::with_capacity(mesh.num_cells());
    for c in 0..mesh.num_cells() {
        let geo = mesh.geometry(c);
        let [cx, cy] = geo.centroid;
        let bx = ((cx * m as f64).floor() as isize).clamp(0, m as isize - 1) as usize;
        let by = ((cy * m as f64).floor() as isize).clamp(0, m as isize - 1) as usize;
        let (x0, x1) = (bx as f64 / m as f64, (bx + 1) as f64 / m as f64);
        let (y0, y1) = (by as f64 / m as f64, (by + 1) as f64 / m as f64);
        let inside = |p: &[f64; 2]| {
            p[0] >= x0 - tol && p[0] <= x1 + tol && p[1] >= y0 - tol && p[1] <= y1 + tol
        };
        let strictly_inside = cx > x0 && cx < x1 && cy > y0 && cy < y1;
        if !strictly_inside || !geo.vertices.iter().all(inside) {
            return Err(Error::Partition {
                cell: c,
                message: format!("cell straddles the boundary of block ({bx}, {by}) for m = {m}"),
            });
        }
        map.push(by * m + bx);
    }
    SubdomainPartition::from_cell_map(mesh, map)
}

/// One subdomain per cell.
pub fn partition_per_element(mesh: &Mesh) -> SubdomainPartition {
    SubdomainPartition::from_cell_map(mesh, (0..mesh.num_cells()).collect())
        .expect("single cells are always connected")
}
