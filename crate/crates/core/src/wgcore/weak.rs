use nalgebra::DVector;

use super::{project_q0, project_qb, ElementFamily};
use crate::error::Result;
use crate::mesh::{Mesh, Point};

/// How trace coefficients are stored.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TraceLayout {
    /// One record per edge (functions in the global space).
    Single,
    /// One record per edge side, as seen from the cell on that side.
    /// Boundary edges only use side 0.
    PerSide,
}

/// Coefficients of a weak function `{v_0, v_b}` on a whole mesh.
#[derive(Debug, Clone, PartialEq)]
pub struct WeakFunction {
    pub family: ElementFamily,
    pub layout: TraceLayout,
    n0: usize,
    nb: usize,
    interior: Vec<f64>,
    traces: Vec<f64>,
}

impl WeakFunction {
    pub fn zeros(mesh: &Mesh, family: ElementFamily, layout: TraceLayout) -> Self {
        let n0 = family.interior_dim();
        let nb = family.trace_dim();
        let records = match layout {
            TraceLayout::Single => mesh.num_edges(),
            TraceLayout::PerSide => 2 * mesh.num_edges(),
        };
        Self {
            family,
            layout,
            n0,
            nb,
            interior: vec![0.0; mesh.num_cells() * n0],
            traces: vec![0.0; records * nb],
        }
    }

    /// `Q_h u = {Q_0 u, Q_b u}`.
    pub fn interpolate(
        mesh: &Mesh,
        family: ElementFamily,
        u: &dyn Fn(Point) -> f64,
        layout: TraceLayout,
    ) -> Result<Self> {
        let mut w = Self::zeros(mesh, family, layout);
        let qd = family.cell_quad_degree() + 2;
        for c in 0..mesh.num_cells() {
            let v0 = project_q0(u, mesh.geometry(c), family.degree, qd)?;
            w.interior_mut(c).copy_from_slice(v0.as_slice());
        }
        for e in 0..mesh.num_edges() {
            let (a, b) = mesh.edge_endpoints(e);
            let vb = project_qb(u, a, b, family.trace_degree(), family.edge_quad_degree() + 2)?;
            w.set_trace_all_sides(mesh, e, vb.as_slice());
        }
        Ok(w)
    }

    pub fn interior_dim(&self) -> usize {
        self.n0
    }

    pub fn trace_dim(&self) -> usize {
        self.nb
    }

    pub fn interior(&self, cell: usize) -> &[f64] {
        &self.interior[cell * self.n0..(cell + 1) * self.n0]
    }

    pub fn interior_mut(&mut self, cell: usize) -> &mut [f64] {
        &mut self.interior[cell * self.n0..(cell + 1) * self.n0]
    }

    fn record(&self, edge: usize, side: usize) -> usize {
        match self.layout {
            TraceLayout::Single => edge,
            TraceLayout::PerSide => 2 * edge + side,
        }
    }

    /// Trace on `edge` as seen from `side` (ignored for [`TraceLayout::Single`]).
    pub fn trace(&self, edge: usize, side: usize) -> &[f64] {
        let r = self.record(edge, side);
        &self.traces[r * self.nb..(r + 1) * self.nb]
    }

    pub fn trace_mut(&mut self, edge: usize, side: usize) -> &mut [f64] {
        let r = self.record(edge, side);
        &mut self.traces[r * self.nb..(r + 1) * self.nb]
    }

    /// Writes `values` to every stored side of `edge`.
    pub fn set_trace_all_sides(&mut self, mesh: &Mesh, edge: usize, values: &[f64]) {
        self.trace_mut(edge, 0).copy_from_slice(values);
        if self.layout == TraceLayout::PerSide && !mesh.edge(edge).is_boundary() {
            self.trace_mut(edge, 1).copy_from_slice(values);
        }
    }

    /// Local coefficient vector of `cell`, traces taken from the cell's side.
    pub fn gather(&self, mesh: &Mesh, cell: usize) -> DVector<f64> {
        let edges = mesh.cell_edges(cell);
        let mut v = DVector::zeros(self.n0 + edges.len() * self.nb);
        v.as_mut_slice()[..self.n0].copy_from_slice(self.interior(cell));
        for (le, &e) in edges.iter().enumerate() {
            let side = mesh.edge(e).side_of(cell);
            let off = self.n0 + le * self.nb;
            v.as_mut_slice()[off..off + self.nb].copy_from_slice(self.trace(e, side));
        }
        v
    }

    /// Copy with one trace record per edge side.
    pub fn to_per_side(&self, mesh: &Mesh) -> Self {
        if self.layout == TraceLayout::PerSide {
            return self.clone();
        }
        let mut out = Self::zeros(mesh, self.family, TraceLayout::PerSide);
        out.interior.copy_from_slice(&self.interior);
        for e in 0..mesh.num_edges() {
            out.set_trace_all_sides(mesh, e, self.trace(e, 0));
        }
        out
    }

    /// Largest coefficient difference over all cells and all used trace sides.
    pub fn max_abs_diff(&self, other: &Self, mesh: &Mesh) -> f64 {
        let a = self.to_per_side(mesh);
        let b = other.to_per_side(mesh);
        let mut m: f64 = 0.0;
        for (x, y) in a.interior.iter().zip(&b.interior) {
            m = m.max((x - y).abs());
        }
        for e in 0..mesh.num_edges() {
            let sides = if mesh.edge(e).is_boundary() { 1 } else { 2 };
            for s in 0..sides {
                for (x, y) in a.trace(e, s).iter().zip(b.trace(e, s)) {
                    m = m.max((x - y).abs());
                }
            }
        }
        m
    }

    /// `self - other`, entrywise (layouts must agree).
    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!(self.layout, other.layout);
        let mut out = self.clone();
        for (x, y) in out.interior.iter_mut().zip(&other.interior) {
            *x -= y;
        }
        for (x, y) in out.traces.iter_mut().zip(&other.traces) {
            *x -= y;
        }
        out
    }

    pub fn scale(&mut self, t: f64) {
        self.interior.iter_mut().for_each(|x| *x *= t);
        self.traces.iter_mut().for_each(|x| *x *= t);
    }

    pub fn interior_coefficients(&self) -> &[f64] {
        &self.interior
    }

    pub fn trace_coefficients(&self) -> &[f64] {
        &self.traces
    }

    pub fn interior_coefficients_mut(&mut self) -> &mut [f64] {
        &mut self.interior
    }

    pub fn trace_coefficients_mut(&mut self) -> &mut [f64] {
        &mut self.traces
    }
}
