//! Direct solve of the coupled system: per-subdomain problems with
//! multiplier loads, weak trace continuity and multiplier antisymmetry.

use crate::assembly::{scatter_cell, SOLVE_TOLERANCE};
use crate::error::{Error, Result};
use crate::linalg::{norm2, SparseSolver, TripletMatrix};
use crate::mesh::{Mesh, SubdomainPartition};
use crate::problem::Problem;
use crate::wgcore::{OperatorSet, WeakFunction};

use super::{boundary_lifted_zero, InterfaceField, Interfaces, SubdomainLayout};

#[derive(Debug, Clone)]
pub struct HybridSolution {
    pub interfaces: Interfaces,
    /// Per-side function; side `s` holds the trace seen from its subdomain.
    pub u: WeakFunction,
    pub lambda: InterfaceField,
}

/// Unknowns: every subdomain's local vector in turn, then two multiplier
/// copies per interface edge. Rows: subdomain equations with `-<λ, v_b>`
/// on interface traces, then per interface edge one jump row block and one
/// antisymmetry row block. The system is nonsymmetric and solved by sparse LU.
pub fn solve_hybrid_direct(
    mesh: &Mesh,
    partition: &SubdomainPartition,
    ops: &OperatorSet,
    problem: &Problem,
) -> Result<HybridSolution> {
    let n0 = ops.family.interior_dim();
    let nb = ops.family.trace_dim();
    let interfaces = Interfaces::new(mesh, partition);
    let layouts: Vec<SubdomainLayout> = (0..partition.num_subdomains())
        .map(|j| SubdomainLayout::new(mesh, partition, j, n0, nb))
        .collect();
    let mut offsets = Vec::with_capacity(layouts.len());
    let mut n = 0;
    for l in &layouts {
        offsets.push(n);
        n += l.ndof();
    }
    let lambda_offset = n;
    n += 2 * interfaces.len() * nb;

    let mut u = boundary_lifted_zero(mesh, ops, problem)?;
    let mut matrix = TripletMatrix::new(n);
    let mut rhs = vec![0.0; n];
    for (l, &off) in layouts.iter().zip(&offsets) {
        for &c in &l.cells {
            let slots = l.cell_slots(mesh, c, &u, off);
            let op = ops.cell(c);
            scatter_cell(&mut matrix, &mut rhs, &op.stiffness, &op.load, &slots);
        }
    }
    for q in 0..interfaces.len() {
        let e = interfaces.edge(q);
        let gram = &ops.edge_gram[e];
        let owners = interfaces.owners(q);
        let trace_col = |s: usize| {
            let j = owners[s];
            offsets[j] + layouts[j].trace_offset(e).expect("interface traces are unknowns")
        };
        let lam = |s: usize| lambda_offset + (2 * q + s) * nb;
        let (t0, t1) = (trace_col(0), trace_col(1));
        let jump_row = lam(0);
        let anti_row = lam(1);
        for i in 0..nb {
            for l in 0..nb {
                let g = gram[(i, l)];
                // subdomain equations: -<λ_jk, v_b>
                matrix.push(t0 + i, lam(0) + l, -g);
                matrix.push(t1 + i, lam(1) + l, -g);
                // <μ, u_j - u_k> = 0
                matrix.push(jump_row + i, t0 + l, g);
                matrix.push(jump_row + i, t1 + l, -g);
                // λ_jk + λ_kj = 0
                matrix.push(anti_row + i, lam(0) + l, g);
                matrix.push(anti_row + i, lam(1) + l, g);
            }
        }
    }

    let solver = SparseSolver::lu(&matrix)?;
    let x = solver.solve_refined(&matrix, &rhs, 3);
    let r: Vec<f64> = matrix.mul_vec(&x).iter().zip(&rhs).map(|(a, b)| a - b).collect();
    let (rn, bn) = (norm2(&r), norm2(&rhs));
    if rn > SOLVE_TOLERANCE * bn && rn > 0.0 {
        return Err(Error::Factorization(format!(
            "hybrid system residual {rn:.3e} exceeds tolerance (rhs norm {bn:.3e})"
        )));
    }

    for (l, &off) in layouts.iter().zip(&offsets) {
        l.scatter_solution(mesh, &x[off..off + l.ndof()], &mut u);
    }
    let mut lambda = InterfaceField::zeros(&interfaces, nb);
    for q in 0..interfaces.len() {
        for s in 0..2 {
            let o = lambda_offset + (2 * q + s) * nb;
            lambda.get_mut(q, s).copy_from_slice(&x[o..o + nb]);
        }
    }
    Ok(HybridSolution {
        interfaces,
        u,
        lambda,
    })
}
