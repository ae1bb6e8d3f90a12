//! Hybridized domain decomposition.
//!
//! Every interface edge carries two trace copies (one per side) and two
//! multiplier copies `λ_jk`, `λ_kj`, all in the trace space of the element
//! family. Side `s` of an edge belongs to the subdomain of the mesh cell on
//! that side, so the per-side storage of [`WeakFunction`] doubles as the
//! per-subdomain trace storage.

mod diagnostics;
mod hybrid;
mod iteration;

pub use diagnostics::{energy_diagnostics, EnergyRecord};
pub use hybrid::{solve_hybrid_direct, HybridSolution};
pub use iteration::{
    build_subdomain_systems, grad_distance, l2_distance, InitialGuess, InterfaceState, IterationLog,
    IterationRecord, RunOutcome, StopRule, SubdomainSystem, SubdomainSystems, ORACLE_REL_DECREASE,
};

use std::collections::HashMap;

use crate::assembly::Slot;
use crate::mesh::{Mesh, SubdomainPartition};
use crate::wgcore::{OperatorSet, WeakFunction};

/// Interface edges of a partition with a fixed enumeration.
#[derive(Debug, Clone)]
pub struct Interfaces {
    edges: Vec<usize>,
    index: HashMap<usize, usize>,
    /// Subdomain on side 0 and side 1 of each interface edge.
    owners: Vec<[usize; 2]>,
}

impl Interfaces {
    pub fn new(mesh: &Mesh, partition: &SubdomainPartition) -> Self {
        let edges = partition.interface_edges(mesh);
        let index = edges.iter().enumerate().map(|(q, &e)| (e, q)).collect();
        let owners = edges
            .iter()
            .map(|&e| {
                let edge = mesh.edge(e);
                [
                    partition.subdomain_of(edge.left),
                    partition.subdomain_of(edge.right.expect("interface edges are interior")),
                ]
            })
            .collect();
        Self {
            edges,
            index,
            owners,
        }
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn edge(&self, q: usize) -> usize {
        self.edges[q]
    }

    pub fn edges(&self) -> &[usize] {
        &self.edges
    }

    pub fn index_of(&self, edge: usize) -> Option<usize> {
        self.index.get(&edge).copied()
    }

    pub fn owners(&self, q: usize) -> [usize; 2] {
        self.owners[q]
    }
}

/// Multiplier coefficients `λ` per interface edge and side.
///
/// Record `(q, s)` holds `λ_jk` on interface edge `q` where `j` owns side `s`
/// and `k` owns the other side.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceField {
    nb: usize,
    values: Vec<f64>,
}

impl InterfaceField {
    pub fn zeros(interfaces: &Interfaces, nb: usize) -> Self {
        Self {
            nb,
            values: vec![0.0; 2 * interfaces.len() * nb],
        }
    }

    pub fn get(&self, q: usize, side: usize) -> &[f64] {
        let r = 2 * q + side;
        &self.values[r * self.nb..(r + 1) * self.nb]
    }

    pub fn get_mut(&mut self, q: usize, side: usize) -> &mut [f64] {
        let r = 2 * q + side;
        &mut self.values[r * self.nb..(r + 1) * self.nb]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            nb: self.nb,
            values: self.values.iter().zip(&other.values).map(|(a, b)| a - b).collect(),
        }
    }
}

/// Local numbering of the degrees of freedom of one subdomain: interior
/// coefficients of its cells, then traces of its edges not on ∂Ω.
#[derive(Debug, Clone)]
pub struct SubdomainLayout {
    pub subdomain: usize,
    pub cells: Vec<usize>,
    /// Edges carrying unknown traces, increasing.
    pub trace_edges: Vec<usize>,
    cell_pos: HashMap<usize, usize>,
    edge_pos: HashMap<usize, usize>,
    n0: usize,
    nb: usize,
}

impl SubdomainLayout {
    pub fn new(mesh: &Mesh, partition: &SubdomainPartition, j: usize, n0: usize, nb: usize) -> Self {
        let cells = partition.cells(j).to_vec();
        let mut trace_edges: Vec<usize> = cells
            .iter()
            .flat_map(|&c| mesh.cell_edges(c).iter().copied())
            .filter(|&e| !mesh.edge(e).is_boundary())
            .collect();
        trace_edges.sort_unstable();
        trace_edges.dedup();
        let cell_pos = cells.iter().enumerate().map(|(i, &c)| (c, i)).collect();
        let edge_pos = trace_edges.iter().enumerate().map(|(i, &e)| (e, i)).collect();
        Self {
            subdomain: j,
            cells,
            trace_edges,
            cell_pos,
            edge_pos,
            n0,
            nb,
        }
    }

    pub fn ndof(&self) -> usize {
        self.cells.len() * self.n0 + self.trace_edges.len() * self.nb
    }

    pub fn interior_offset(&self, cell: usize) -> usize {
        self.cell_pos[&cell] * self.n0
    }

    /// Offset of the trace block of `edge`, if it carries unknowns.
    pub fn trace_offset(&self, edge: usize) -> Option<usize> {
        self.edge_pos
            .get(&edge)
            .map(|&i| self.cells.len() * self.n0 + i * self.nb)
    }

    /// Slots of the local element vector of `cell`; ∂Ω traces are fixed to
    /// the values stored in `u` (side 0).
    pub fn cell_slots(&self, mesh: &Mesh, cell: usize, u: &WeakFunction, offset: usize) -> Vec<Slot> {
        let mut slots = Vec::with_capacity(self.n0 + mesh.cell_edges(cell).len() * self.nb);
        let io = self.interior_offset(cell);
        slots.extend((0..self.n0).map(|a| Slot::Free(offset + io + a)));
        for &e in mesh.cell_edges(cell) {
            match self.trace_offset(e) {
                Some(to) => slots.extend((0..self.nb).map(|i| Slot::Free(offset + to + i))),
                None => slots.extend(u.trace(e, 0).iter().map(|&v| Slot::Fixed(v))),
            }
        }
        slots
    }

    /// Writes a local solution vector into the per-side function `u`.
    pub fn scatter_solution(&self, mesh: &Mesh, x: &[f64], u: &mut WeakFunction) {
        for &c in &self.cells {
            let io = self.interior_offset(c);
            u.interior_mut(c).copy_from_slice(&x[io..io + self.n0]);
        }
        for &e in &self.trace_edges {
            let to = self.trace_offset(e).unwrap();
            let vals = &x[to..to + self.nb];
            let edge = mesh.edge(e);
            for side in 0..2 {
                let owner_cell = edge.cell_on_side(side).unwrap();
                if self.cell_pos.contains_key(&owner_cell) {
                    u.trace_mut(e, side).copy_from_slice(vals);
                }
            }
        }
    }
}

/// Per-side function with every boundary trace set to `Q_b g` and zeros elsewhere.
pub(crate) fn boundary_lifted_zero(
    mesh: &Mesh,
    ops: &OperatorSet,
    problem: &crate::problem::Problem,
) -> crate::Result<WeakFunction> {
    let mut u = WeakFunction::zeros(mesh, ops.family, crate::wgcore::TraceLayout::PerSide);
    for (e, g) in crate::assembly::dirichlet_traces(mesh, ops.family, problem)?
        .into_iter()
        .enumerate()
    {
        if let Some(g) = g {
            u.trace_mut(e, 0).copy_from_slice(g.as_slice());
        }
    }
    Ok(u)
}

/// `sqrt(sum over ordered pairs of ||jump||^2 + ||λ_jk + λ_kj||^2)`, with
/// the separate jump and multiplier-sum parts.
pub fn interface_residual(
    interfaces: &Interfaces,
    ops: &OperatorSet,
    u: &WeakFunction,
    lambda: &InterfaceField,
) -> (f64, f64, f64) {
    let mut jump = 0.0;
    let mut sum = 0.0;
    for q in 0..interfaces.len() {
        let e = interfaces.edge(q);
        let d: Vec<f64> = u.trace(e, 0).iter().zip(u.trace(e, 1)).map(|(a, b)| a - b).collect();
        let s: Vec<f64> = lambda.get(q, 0).iter().zip(lambda.get(q, 1)).map(|(a, b)| a + b).collect();
        // each unordered edge appears in Γ_jk and in Γ_kj
        jump += 2.0 * ops.edge_norm_sq(e, &d);
        sum += 2.0 * ops.edge_norm_sq(e, &s);
    }
    ((jump + sum).sqrt(), jump.sqrt(), sum.sqrt())
}
