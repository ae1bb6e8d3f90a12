use nalgebra::DVector;

use crate::error::Result;
use crate::mesh::{Mesh, Point, SubdomainPartition};
use crate::polybasis::{cell_quadrature, Basis};
use crate::wgcore::{OperatorSet, WeakFunction};

/// `(Σ_T ||w_0||²_T)^{1/2}`.
pub fn interior_l2_norm(mesh: &Mesh, ops: &OperatorSet, w: &WeakFunction) -> f64 {
    (0..mesh.num_cells())
        .map(|c| {
            let op = ops.cell(c);
            let v0 = DVector::from_column_slice(w.interior(c));
            v0.dot(&(&op.mass * &v0))
        })
        .sum::<f64>()
        .sqrt()
}

/// `(Σ_T ||grad_w w||²_T)^{1/2}`, each cell using its own traces.
pub fn weak_gradient_norm(mesh: &Mesh, ops: &OperatorSet, w: &WeakFunction) -> f64 {
    (0..mesh.num_cells())
        .map(|c| ops.cell(c).grad_norm_sq(&w.gather(mesh, c)))
        .sum::<f64>()
        .sqrt()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    /// `||Q_0 u - u_0||`.
    pub l2: f64,
    /// `||grad_w(Q_h u - u_h)||`.
    pub energy: f64,
}

pub fn error_norms(
    mesh: &Mesh,
    ops: &OperatorSet,
    exact: &dyn Fn(Point) -> f64,
    u: &WeakFunction,
) -> Result<ErrorNorms> {
    let qh = WeakFunction::interpolate(mesh, ops.family, exact, u.layout)?;
    let d = qh.sub(u);
    Ok(ErrorNorms {
        l2: interior_l2_norm(mesh, ops, &d),
        energy: weak_gradient_norm(mesh, ops, &d),
    })
}

pub fn l2_error(mesh: &Mesh, ops: &OperatorSet, exact: &dyn Fn(Point) -> f64, u: &WeakFunction) -> Result<f64> {
    Ok(error_norms(mesh, ops, exact, u)?.l2)
}

pub fn energy_error(
    mesh: &Mesh,
    ops: &OperatorSet,
    exact: &dyn Fn(Point) -> f64,
    u: &WeakFunction,
) -> Result<f64> {
    Ok(error_norms(mesh, ops, exact, u)?.energy)
}

/// `|||v|||_{1,Ω_j}² = Σ_T (a grad v_0, grad v_0)_T + Σ_T h_T^{-1} ||Q_b v_0 - v_b||²_{∂T} + ||v_b||²_{∂Ω_j}`.
///
/// The trace mismatch term is used for both element families.
pub fn triple_norm(
    mesh: &Mesh,
    ops: &OperatorSet,
    partition: &SubdomainPartition,
    j: usize,
    a: &dyn Fn(Point) -> f64,
    v: &WeakFunction,
) -> Result<f64> {
    let family = ops.family;
    let mut total = 0.0;
    for &c in partition.cells(j) {
        let geom = mesh.geometry(c);
        let space = family.cell_space(geom);
        let rule = cell_quadrature(geom, family.cell_quad_degree())?;
        let v0 = v.interior(c);
        let mut grads = vec![[0.0; 2]; space.dim()];
        for (p, w) in rule.iter() {
            space.gradients(p, &mut grads);
            let (mut gx, mut gy) = (0.0, 0.0);
            for (g, coef) in grads.iter().zip(v0) {
                gx += coef * g[0];
                gy += coef * g[1];
            }
            total += w * a(p) * (gx * gx + gy * gy);
        }
        let op = ops.cell(c);
        let v0 = DVector::from_column_slice(v0);
        for (le, &e) in op.edges.iter().enumerate() {
            let side = mesh.edge(e).side_of(c);
            let vb = DVector::from_column_slice(v.trace(e, side));
            let d = &op.trace_projection[le] * &v0 - vb;
            total += ops.edge_norm_sq(e, d.as_slice()) / geom.diameter;
        }
    }
    for &e in partition.outer_boundary(j).iter().chain(partition.inner_boundary(j)) {
        let edge = mesh.edge(e);
        let side = if partition.subdomain_of(edge.left) == j { 0 } else { 1 };
        total += ops.edge_norm_sq(e, v.trace(e, side));
    }
    Ok(total.sqrt())
}
