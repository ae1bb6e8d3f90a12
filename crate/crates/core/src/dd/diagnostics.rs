//! Energy functional of the iteration error.

use crate::mesh::Mesh;
use crate::wgcore::OperatorSet;

use super::{HybridSolution, InterfaceState, Interfaces};

/// Terms of the error functional at one iterate.
#[derive(Debug, Clone, PartialEq)]
pub struct EnergyRecord {
    /// `E = Σ β²|e_b|²_{B_j} + Σ |μ_jk|² + 2β energy(e)`.
    pub functional: f64,
    /// `Σ_j Σ_k |β e_j,b + μ_jk|²_{Γ_jk}`, equal to `functional` whenever the
    /// state solves the subdomain equations with its own multipliers.
    pub split_form: f64,
    /// `(a grad_w e, grad_w e) + s(e, e) + (c e_0, e_0)`.
    pub energy: f64,
}

/// Errors `e = u - u^(n)` and `μ = λ - λ^(n)` against the hybrid solution.
pub fn energy_diagnostics(
    mesh: &Mesh,
    ops: &OperatorSet,
    interfaces: &Interfaces,
    state: &InterfaceState,
    reference: &HybridSolution,
    beta: f64,
) -> EnergyRecord {
    let e = reference.u.sub(&state.u);
    let mu = reference.lambda.sub(&state.lambda);
    let energy: f64 = (0..mesh.num_cells())
        .map(|c| ops.cell(c).energy(&e.gather(mesh, c)))
        .sum();
    let mut trace_part = 0.0;
    let mut mult_part = 0.0;
    let mut split_form = 0.0;
    for q in 0..interfaces.len() {
        let edge = interfaces.edge(q);
        for s in 0..2 {
            let eb = e.trace(edge, s);
            let m = mu.get(q, s);
            trace_part += beta * beta * ops.edge_norm_sq(edge, eb);
            mult_part += ops.edge_norm_sq(edge, m);
            let comb: Vec<f64> = eb.iter().zip(m).map(|(x, y)| beta * x + y).collect();
            split_form += ops.edge_norm_sq(edge, &comb);
        }
    }
    EnergyRecord {
        functional: trace_part + mult_part + 2.0 * beta * energy,
        split_form,
        energy,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dd::{build_subdomain_systems, solve_hybrid_direct, InitialGuess, StopRule};
    use crate::mesh::{build_uniform_triangle_mesh, partition_grid};
    use crate::problem::test1;
    use crate::wgcore::ElementFamily;

    #[test]
    fn zero_error_has_zero_functional() {
        let mesh = build_uniform_triangle_mesh(2).unwrap();
        let part = partition_grid(&mesh, 2).unwrap();
        let p = test1();
        let ops = OperatorSet::build(&mesh, ElementFamily::standard(1).unwrap(), &p).unwrap();
        let h = solve_hybrid_direct(&mesh, &part, &ops, &p).unwrap();
        let state = InterfaceState { n: 0, u: h.u.clone(), lambda: h.lambda.clone() };
        let r = energy_diagnostics(&mesh, &ops, &h.interfaces, &state, &h, 8.0);
        assert_eq!(r.functional, 0.0);
        assert_eq!(r.split_form, 0.0);
    }

    #[test]
    fn decrement_identity_on_two_subdomains() {
        let mesh = build_uniform_triangle_mesh(4).unwrap();
        let part = crate::mesh::SubdomainPartition::from_cell_map(
            &mesh,
            (0..mesh.num_cells()).map(|c| usize::from(mesh.geometry(c).centroid[0] > 0.5)).collect(),
        )
        .unwrap();
        let p = test1();
        let ops = OperatorSet::build(&mesh, ElementFamily::standard(1).unwrap(), &p).unwrap();
        let h = solve_hybrid_direct(&mesh, &part, &ops, &p).unwrap();
        let beta = 8.0;
        let sys = build_subdomain_systems(&mesh, &part, &ops, &p, beta).unwrap();
        let s0 = sys.initial_state(&mesh, InitialGuess::LocalSolve);
        let out = sys.run(&mesh, &ops, s0, StopRule::Residual { tol: 0.0, max_iters: 15 }, Some(&h));
        let e0 = out.log.records[0].energy.as_ref().unwrap().functional;
        for (n, lhs, rhs) in out.log.decrements(beta) {
            assert!((lhs - rhs).abs() <= 1e-9 * e0, "n = {n}: {lhs} vs {rhs}");
        }
        for r in &out.log.records {
            let en = r.energy.as_ref().unwrap();
            assert!((en.functional - en.split_form).abs() <= 1e-9 * e0);
        }
    }
}
