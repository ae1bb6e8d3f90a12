//! Parallel Robin-type interface iteration.
//!
//! Subdomain `j` solves, with the local matrix factored once,
//!
//! ```text
//! A_j(u, v) + β <u_b, v_b>_{B_j} = (f, v_0) + Σ_k <β u_k,b^(n-1) - λ_kj^(n-1), v_b>_{Γ_jk}
//! ```
//!
//! and then sets `λ_jk^(n) = β (u_k,b^(n-1) - u_j,b^(n)) - λ_kj^(n-1)`. All
//! subdomains read only iteration `n - 1` data, so they run concurrently.

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use crate::assembly::scatter_cell;
use crate::error::{Error, Result};
use crate::linalg::{SparseSolver, TripletMatrix};
use crate::mesh::{Mesh, SubdomainPartition};
use crate::problem::Problem;
use crate::wgcore::{OperatorSet, WeakFunction};

use super::diagnostics::{energy_diagnostics, EnergyRecord};
use super::{boundary_lifted_zero, interface_residual, HybridSolution, InterfaceField, Interfaces, SubdomainLayout};

#[derive(Debug, Clone)]
struct InterfaceBlock {
    q: usize,
    side: usize,
    edge: usize,
    offset: usize,
    gram: DMatrix<f64>,
}

/// The β-augmented local problem of one subdomain, factored once.
#[derive(Debug)]
pub struct SubdomainSystem {
    pub layout: SubdomainLayout,
    solver: SparseSolver,
    /// Load minus the lifting of the ∂Ω traces.
    base_rhs: Vec<f64>,
    blocks: Vec<InterfaceBlock>,
    /// Assembled matrix, kept for inspection.
    pub matrix: TripletMatrix,
}

impl SubdomainSystem {
    pub fn ndof(&self) -> usize {
        self.layout.ndof()
    }
}

/// All subdomain systems of a partition and the data they share.
#[derive(Debug)]
pub struct SubdomainSystems {
    pub interfaces: Interfaces,
    pub systems: Vec<SubdomainSystem>,
    pub beta: f64,
    /// Zero function carrying `Q_b g` on ∂Ω; every state starts from it.
    boundary: WeakFunction,
    nb: usize,
}

pub fn build_subdomain_systems(
    mesh: &Mesh,
    partition: &SubdomainPartition,
    ops: &OperatorSet,
    problem: &Problem,
    beta: f64,
) -> Result<SubdomainSystems> {
    if !(beta > 0.0 && beta.is_finite()) {
        return Err(Error::InvalidParameter(format!("β must be positive, got {beta}")));
    }
    let n0 = ops.family.interior_dim();
    let nb = ops.family.trace_dim();
    let interfaces = Interfaces::new(mesh, partition);
    let boundary = boundary_lifted_zero(mesh, ops, problem)?;
    let systems = (0..partition.num_subdomains())
        .into_par_iter()
        .map(|j| {
            let layout = SubdomainLayout::new(mesh, partition, j, n0, nb);
            let mut matrix = TripletMatrix::new(layout.ndof());
            let mut base_rhs = vec![0.0; layout.ndof()];
            for &c in &layout.cells {
                let slots = layout.cell_slots(mesh, c, &boundary, 0);
                let op = ops.cell(c);
                scatter_cell(&mut matrix, &mut base_rhs, &op.stiffness, &op.load, &slots);
            }
            let mut blocks = Vec::new();
            for &e in partition.inner_boundary(j) {
                let q = interfaces.index_of(e).expect("inner boundary edges are interfaces");
                let side = if interfaces.owners(q)[0] == j { 0 } else { 1 };
                let offset = layout.trace_offset(e).expect("interface traces are unknowns");
                let gram = ops.edge_gram[e].clone();
                for i in 0..nb {
                    for l in 0..nb {
                        matrix.push(offset + i, offset + l, beta * gram[(i, l)]);
                    }
                }
                blocks.push(InterfaceBlock {
                    q,
                    side,
                    edge: e,
                    offset,
                    gram,
                });
            }
            let solver = SparseSolver::cholesky(&matrix)?;
            Ok(SubdomainSystem {
                layout,
                solver,
                base_rhs,
                blocks,
                matrix,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(SubdomainSystems {
        interfaces,
        systems,
        beta,
        boundary,
        nb,
    })
}

/// Iteration state: per-side traces and interiors, and multipliers.
#[derive(Debug, Clone, PartialEq)]
pub struct InterfaceState {
    pub n: usize,
    pub u: WeakFunction,
    pub lambda: InterfaceField,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum InitialGuess {
    /// `u = 0` (with `Q_b g` on ∂Ω) and `λ = 0`.
    #[default]
    Zero,
    /// The result of one sweep from the zero guess, relabelled as iteration 0.
    /// This start already satisfies the subdomain equations with its own
    /// multipliers, so the energy decrement identity holds from the first step.
    LocalSolve,
}

#[derive(Debug, Clone, Copy)]
pub enum StopRule<'a> {
    /// Stop when the interface residual is at most `tol`.
    Residual { tol: f64, max_iters: usize },
    /// Tracks `||grad_w(exact - u^(n))||` and `||exact_0 - u_0^(n)||` against
    /// the interpolant `exact` of the true solution and stops once one sweep
    /// lowers neither by the fraction `rel_decrease`, i.e. when the iteration
    /// error is buried in the discretization error.
    Oracle {
        exact: &'a WeakFunction,
        rel_decrease: f64,
        max_iters: usize,
    },
    /// Stop when `||grad_w(u^(n) - reference)||` is at most `target` and
    /// `||u_0^(n) - reference_0||` is at most `target_l2`.
    Truncation {
        target: f64,
        target_l2: f64,
        reference: &'a WeakFunction,
        max_iters: usize,
    },
}

/// Relative decrease used by the oracle stop rule.
pub const ORACLE_REL_DECREASE: f64 = 0.01;

impl StopRule<'_> {
    pub fn max_iters(&self) -> usize {
        match *self {
            StopRule::Residual { max_iters, .. }
            | StopRule::Oracle { max_iters, .. }
            | StopRule::Truncation { max_iters, .. } => max_iters,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct IterationRecord {
    pub n: usize,
    pub residual: f64,
    pub jump: f64,
    pub multiplier_sum: f64,
    /// The monitored gradient distance in oracle and truncation mode.
    pub oracle_error: Option<f64>,
    /// The monitored interior L² distance in oracle and truncation mode.
    pub oracle_l2: Option<f64>,
    pub energy: Option<EnergyRecord>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct IterationLog {
    /// Record 0 describes the initial state.
    pub records: Vec<IterationRecord>,
}

impl IterationLog {
    pub fn iterations(&self) -> usize {
        self.records.len().saturating_sub(1)
    }

    pub fn last(&self) -> Option<&IterationRecord> {
        self.records.last()
    }

    /// `(n, E^(n-1) - E^(n), 4β energy(e^(n-1)))` for every step with diagnostics.
    pub fn decrements(&self, beta: f64) -> Vec<(usize, f64, f64)> {
        self.records
            .windows(2)
            .filter_map(|w| {
                let (a, b) = (w[0].energy.as_ref()?, w[1].energy.as_ref()?);
                Some((w[1].n, a.functional - b.functional, 4.0 * beta * a.energy))
            })
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct RunOutcome {
    pub state: InterfaceState,
    pub log: IterationLog,
    pub converged: bool,
}

impl SubdomainSystems {
    pub fn num_subdomains(&self) -> usize {
        self.systems.len()
    }

    pub fn initial_state(&self, mesh: &Mesh, guess: InitialGuess) -> InterfaceState {
        let zero = InterfaceState {
            n: 0,
            u: self.boundary.clone(),
            lambda: InterfaceField::zeros(&self.interfaces, self.nb),
        };
        match guess {
            InitialGuess::Zero => zero,
            InitialGuess::LocalSolve => InterfaceState {
                n: 0,
                ..self.iterate_once(mesh, &zero)
            },
        }
    }

    fn local_solve(&self, j: usize, state: &InterfaceState) -> Vec<f64> {
        let sys = &self.systems[j];
        let mut rhs = sys.base_rhs.clone();
        for b in &sys.blocks {
            let other = 1 - b.side;
            let data: Vec<f64> = state
                .u
                .trace(b.edge, other)
                .iter()
                .zip(state.lambda.get(b.q, other))
                .map(|(u, l)| self.beta * u - l)
                .collect();
            let load = &b.gram * DVector::from_vec(data);
            for (r, v) in rhs[b.offset..b.offset + self.nb].iter_mut().zip(load.iter()) {
                *r += v;
            }
        }
        sys.solver.solve(&rhs)
    }

    fn combine(&self, mesh: &Mesh, state: &InterfaceState, local: Vec<Vec<f64>>) -> InterfaceState {
        let mut u = state.u.clone();
        for (sys, x) in self.systems.iter().zip(&local) {
            sys.layout.scatter_solution(mesh, x, &mut u);
        }
        let mut lambda = InterfaceField::zeros(&self.interfaces, self.nb);
        for q in 0..self.interfaces.len() {
            let e = self.interfaces.edge(q);
            for s in 0..2 {
                let o = 1 - s;
                let old_other = state.u.trace(e, o);
                let new_own = u.trace(e, s);
                let lam_other = state.lambda.get(q, o);
                for (i, v) in lambda.get_mut(q, s).iter_mut().enumerate() {
                    *v = self.beta * (old_other[i] - new_own[i]) - lam_other[i];
                }
            }
        }
        InterfaceState {
            n: state.n + 1,
            u,
            lambda,
        }
    }

    /// One Jacobi sweep, subdomains solved in parallel.
    pub fn iterate_once(&self, mesh: &Mesh, state: &InterfaceState) -> InterfaceState {
        let local: Vec<Vec<f64>> = (0..self.systems.len())
            .into_par_iter()
            .map(|j| self.local_solve(j, state))
            .collect();
        self.combine(mesh, state, local)
    }

    /// One sweep processing subdomains sequentially in `order`.
    pub fn iterate_once_ordered(&self, mesh: &Mesh, state: &InterfaceState, order: &[usize]) -> InterfaceState {
        let mut local = vec![Vec::new(); self.systems.len()];
        for &j in order {
            local[j] = self.local_solve(j, state);
        }
        self.combine(mesh, state, local)
    }

    fn record(
        &self,
        mesh: &Mesh,
        ops: &OperatorSet,
        state: &InterfaceState,
        stop: &StopRule<'_>,
        reference: Option<&HybridSolution>,
    ) -> IterationRecord {
        let (residual, jump, multiplier_sum) =
            interface_residual(&self.interfaces, ops, &state.u, &state.lambda);
        let oracle_error = match stop {
            StopRule::Oracle { exact: v, .. } | StopRule::Truncation { reference: v, .. } => {
                Some(grad_distance(mesh, ops, &state.u, v))
            }
            StopRule::Residual { .. } => None,
        };
        let oracle_l2 = match stop {
            StopRule::Oracle { exact: v, .. } | StopRule::Truncation { reference: v, .. } => {
                Some(l2_distance(mesh, ops, &state.u, v))
            }
            StopRule::Residual { .. } => None,
        };
        let energy = reference.map(|r| energy_diagnostics(mesh, ops, &self.interfaces, state, r, self.beta));
        IterationRecord {
            n: state.n,
            residual,
            jump,
            multiplier_sum,
            oracle_error,
            oracle_l2,
            energy,
        }
    }

    /// Iterates from `state` until the stop rule is met or the iteration
    /// budget runs out. With `reference`, every record carries the energy
    /// functional of the error.
    pub fn run(
        &self,
        mesh: &Mesh,
        ops: &OperatorSet,
        state: InterfaceState,
        stop: StopRule<'_>,
        reference: Option<&HybridSolution>,
    ) -> RunOutcome {
        let mut log = IterationLog::default();
        log.records.push(self.record(mesh, ops, &state, &stop, reference));
        let mut state = state;
        let mut converged = false;
        for _ in 0..stop.max_iters() {
            state = self.iterate_once(mesh, &state);
            let rec = self.record(mesh, ops, &state, &stop, reference);
            let prev = log.records.last().expect("initial record");
            converged = match stop {
                StopRule::Residual { tol, .. } => rec.residual <= tol,
                StopRule::Oracle { rel_decrease, .. } => {
                    let stalled = |a: Option<f64>, b: Option<f64>| {
                        let (a, b) = (a.unwrap(), b.unwrap());
                        a - b < rel_decrease * a
                    };
                    stalled(prev.oracle_error, rec.oracle_error) && stalled(prev.oracle_l2, rec.oracle_l2)
                }
                StopRule::Truncation { target, target_l2, .. } => {
                    rec.oracle_error.unwrap() <= target && rec.oracle_l2.unwrap() <= target_l2
                }
            };
            log.records.push(rec);
            if converged {
                break;
            }
        }
        RunOutcome {
            state,
            log,
            converged,
        }
    }
}

/// `(Σ_T ||u_0 - v_0||²_T)^{1/2}`.
pub fn l2_distance(mesh: &Mesh, ops: &OperatorSet, u: &WeakFunction, v: &WeakFunction) -> f64 {
    (0..mesh.num_cells())
        .map(|c| {
            let d = DVector::from_iterator(
                u.interior(c).len(),
                u.interior(c).iter().zip(v.interior(c)).map(|(a, b)| a - b),
            );
            d.dot(&(&ops.cell(c).mass * &d))
        })
        .sum::<f64>()
        .sqrt()
}

/// `||grad_w(u - v)||` summed over cells, each cell using its own traces.
pub fn grad_distance(mesh: &Mesh, ops: &OperatorSet, u: &WeakFunction, v: &WeakFunction) -> f64 {
    (0..mesh.num_cells())
        .map(|c| ops.cell(c).grad_norm_sq(&(u.gather(mesh, c) - v.gather(mesh, c))))
        .sum::<f64>()
        .sqrt()
}
