//! Monolithic weak Galerkin solver over the global space with strongly
//! imposed Dirichlet traces `Q_b g`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::{norm2, SparseSolver, TripletMatrix};
use crate::mesh::Mesh;
use crate::problem::Problem;
use crate::wgcore::{project_qb, ElementFamily, OperatorSet, TraceLayout, WeakFunction};

/// Relative residual accepted from a direct solve.
pub const SOLVE_TOLERANCE: f64 = 1e-10;

/// Position of a local degree of freedom in an assembled system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Slot {
    Free(usize),
    /// Prescribed value, moved to the right-hand side.
    Fixed(f64),
}

/// Adds one element block: free-free entries go to `matrix`, free-fixed
/// entries are lifted into `rhs`.
pub fn scatter_cell(
    matrix: &mut TripletMatrix,
    rhs: &mut [f64],
    local: &DMatrix<f64>,
    load: &DVector<f64>,
    slots: &[Slot],
) {
    for (p, sp) in slots.iter().enumerate() {
        let Slot::Free(i) = *sp else { continue };
        rhs[i] += load[p];
        for (q, sq) in slots.iter().enumerate() {
            match *sq {
                Slot::Free(j) => matrix.push(i, j, local[(p, q)]),
                Slot::Fixed(v) => rhs[i] -= local[(p, q)] * v,
            }
        }
    }
}

/// Global numbering: interior coefficients cell by cell, then trace
/// coefficients edge by edge; boundary traces are prescribed.
#[derive(Debug, Clone)]
pub struct DofMap {
    pub n0: usize,
    pub nb: usize,
    num_cells: usize,
    dirichlet: Vec<bool>,
    free_index: Vec<Option<usize>>,
    num_free: usize,
}

impl DofMap {
    pub fn new(mesh: &Mesh, family: ElementFamily) -> Self {
        let n0 = family.interior_dim();
        let nb = family.trace_dim();
        let dirichlet: Vec<bool> = mesh.edges().iter().map(|e| e.is_boundary()).collect();
        let total = mesh.num_cells() * n0 + mesh.num_edges() * nb;
        let mut free_index = vec![None; total];
        let mut next = 0;
        for (g, slot) in free_index.iter_mut().enumerate() {
            let constrained = g >= mesh.num_cells() * n0 && dirichlet[(g - mesh.num_cells() * n0) / nb];
            if !constrained {
                *slot = Some(next);
                next += 1;
            }
        }
        Self {
            n0,
            nb,
            num_cells: mesh.num_cells(),
            dirichlet,
            free_index,
            num_free: next,
        }
    }

    pub fn total(&self) -> usize {
        self.free_index.len()
    }

    pub fn num_free(&self) -> usize {
        self.num_free
    }

    pub fn num_dirichlet(&self) -> usize {
        self.total() - self.num_free
    }

    pub fn interior_dof(&self, cell: usize, a: usize) -> usize {
        cell * self.n0 + a
    }

    pub fn trace_dof(&self, edge: usize, i: usize) -> usize {
        self.num_cells * self.n0 + edge * self.nb + i
    }

    pub fn is_dirichlet_edge(&self, edge: usize) -> bool {
        self.dirichlet[edge]
    }

    pub fn free(&self, global: usize) -> Option<usize> {
        self.free_index[global]
    }

    /// Global indices of the local degrees of freedom of `cell`.
    pub fn cell_dofs(&self, mesh: &Mesh, cell: usize) -> Vec<usize> {
        let mut out: Vec<usize> = (0..self.n0).map(|a| self.interior_dof(cell, a)).collect();
        for &e in mesh.cell_edges(cell) {
            out.extend((0..self.nb).map(|i| self.trace_dof(e, i)));
        }
        out
    }
}

/// Assembled system over the free degrees of freedom.
#[derive(Debug, Clone)]
pub struct GlobalSystem {
    pub dofs: DofMap,
    pub matrix: TripletMatrix,
    pub rhs: Vec<f64>,
    /// Value of every global degree of freedom that is prescribed (zero elsewhere).
    pub lifting: Vec<f64>,
    pub family: ElementFamily,
}

/// `Q_b g` on every boundary edge, indexed by edge.
pub fn dirichlet_traces(
    mesh: &Mesh,
    family: ElementFamily,
    problem: &Problem,
) -> Result<Vec<Option<DVector<f64>>>> {
    (0..mesh.num_edges())
        .map(|e| {
            if !mesh.edge(e).is_boundary() {
                return Ok(None);
            }
            let (a, b) = mesh.edge_endpoints(e);
            project_qb(&*problem.g, a, b, family.trace_degree(), family.edge_quad_degree() + 2)
                .map(Some)
        })
        .collect()
}

pub fn assemble(mesh: &Mesh, ops: &OperatorSet, problem: &Problem) -> Result<GlobalSystem> {
    let family = ops.family;
    let dofs = DofMap::new(mesh, family);
    let mut lifting = vec![0.0; dofs.total()];
    for (e, g) in dirichlet_traces(mesh, family, problem)?.into_iter().enumerate() {
        if let Some(g) = g {
            for i in 0..dofs.nb {
                lifting[dofs.trace_dof(e, i)] = g[i];
            }
        }
    }
    let mut matrix = TripletMatrix::new(dofs.num_free());
    let mut rhs = vec![0.0; dofs.num_free()];
    for c in 0..mesh.num_cells() {
        let slots: Vec<Slot> = dofs
            .cell_dofs(mesh, c)
            .into_iter()
            .map(|g| match dofs.free(g) {
                Some(i) => Slot::Free(i),
                None => Slot::Fixed(lifting[g]),
            })
            .collect();
        let op = ops.cell(c);
        scatter_cell(&mut matrix, &mut rhs, &op.stiffness, &op.load, &slots);
    }
    Ok(GlobalSystem {
        dofs,
        matrix,
        rhs,
        lifting,
        family,
    })
}

/// Solves by sparse Cholesky and checks the residual.
pub fn solve(system: &GlobalSystem, mesh: &Mesh) -> Result<WeakFunction> {
    let solver = SparseSolver::cholesky(&system.matrix)?;
    let x = solver.solve(&system.rhs);
    let r: Vec<f64> = system
        .matrix
        .mul_vec(&x)
        .iter()
        .zip(&system.rhs)
        .map(|(a, b)| a - b)
        .collect();
    let (rn, bn) = (norm2(&r), norm2(&system.rhs));
    if rn > SOLVE_TOLERANCE * bn.max(f64::MIN_POSITIVE) && rn > 0.0 {
        return Err(Error::Factorization(format!(
            "residual {rn:.3e} exceeds {SOLVE_TOLERANCE:.0e} x rhs norm {bn:.3e}"
        )));
    }
    let d = &system.dofs;
    let mut u = WeakFunction::zeros(mesh, system.family, TraceLayout::Single);
    for c in 0..mesh.num_cells() {
        for (a, v) in u.interior_mut(c).iter_mut().enumerate() {
            let g = d.interior_dof(c, a);
            *v = d.free(g).map_or(system.lifting[g], |i| x[i]);
        }
    }
    for e in 0..mesh.num_edges() {
        for (i, v) in u.trace_mut(e, 0).iter_mut().enumerate() {
            let g = d.trace_dof(e, i);
            *v = d.free(g).map_or(system.lifting[g], |k| x[k]);
        }
    }
    Ok(u)
}

/// Monolithic solution together with the element operators used to get it.
#[derive(Debug, Clone)]
pub struct Monolithic {
    pub ops: OperatorSet,
    pub solution: WeakFunction,
}

pub fn solve_monolithic(mesh: &Mesh, family: ElementFamily, problem: &Problem) -> Result<Monolithic> {
    let ops = OperatorSet::build(mesh, family, problem)?;
    let system = assemble(mesh, &ops, problem)?;
    let solution = solve(&system, mesh)?;
    Ok(Monolithic { ops, solution })
}

/// `sum_T (a_T + s_T)(u, v) - (f, v_0)` over all cells.
pub fn galerkin_residual(mesh: &Mesh, ops: &OperatorSet, u: &WeakFunction, v: &WeakFunction) -> f64 {
    (0..mesh.num_cells())
        .map(|c| {
            let op = ops.cell(c);
            let (uc, vc) = (u.gather(mesh, c), v.gather(mesh, c));
            vc.dot(&(&op.stiffness * &uc)) - vc.dot(&op.load)
        })
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_uniform_triangle_mesh;
    use crate::problem::manufactured;

    #[test]
    fn zero_data_gives_zero_solution() {
        let m = build_uniform_triangle_mesh(3).unwrap();
        let p = Problem::new("zero", |_| 1.0, |_| 0.0, |_| 0.0, |_| 0.0);
        let sol = solve_monolithic(&m, ElementFamily::standard(2).unwrap(), &p).unwrap();
        assert!(sol.solution.interior_coefficients().iter().all(|&x| x == 0.0));
    }

    #[test]
    fn matrix_is_exactly_symmetric() {
        let m = build_uniform_triangle_mesh(3).unwrap();
        let p = crate::problem::test1();
        let ops = OperatorSet::build(&m, ElementFamily::standard(2).unwrap(), &p).unwrap();
        let a = assemble(&m, &ops, &p).unwrap().matrix.to_dense();
        assert_eq!(a, a.transpose());
    }

    #[test]
    fn dof_counts() {
        let m = build_uniform_triangle_mesh(2).unwrap();
        let d = DofMap::new(&m, ElementFamily::standard(2).unwrap());
        assert_eq!(d.total(), 8 * 6 + 16 * 2);
        assert_eq!(d.num_dirichlet(), 8 * 2);
        assert_eq!(d.num_free() + d.num_dirichlet(), d.total());
    }

    #[test]
    fn linear_solution_is_reproduced() {
        let m = build_uniform_triangle_mesh(4).unwrap();
        let p = manufactured();
        let u = p.exact.clone().unwrap();
        for fam in [
            ElementFamily::standard(1).unwrap(),
            ElementFamily::standard(3).unwrap(),
            ElementFamily::superconvergent(1).unwrap(),
        ] {
            let sol = solve_monolithic(&m, fam, &p).unwrap();
            let qh = WeakFunction::interpolate(&m, fam, &*u, TraceLayout::Single).unwrap();
            assert!(sol.solution.max_abs_diff(&qh, &m) < 1e-10, "{fam}");
        }
    }
}
