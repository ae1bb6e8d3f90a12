use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;

use super::{ElementFamily, FamilyKind};
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::polybasis::{cell_quadrature, edge_quadrature, gram_matrix, Basis, VectorBasis};
use crate::problem::Problem;

/// Element matrices of one cell.
#[derive(Debug, Clone)]
pub struct LocalOperators {
    pub cell: usize,
    /// Global edge indices, in local order.
    pub edges: Vec<usize>,
    pub n0: usize,
    pub nb: usize,
    /// Maps local coefficients to weak-gradient coefficients.
    pub grad: DMatrix<f64>,
    /// Unweighted Gram matrix of the gradient space.
    pub grad_mass: DMatrix<f64>,
    /// Gram matrix of the interior space.
    pub mass: DMatrix<f64>,
    /// `h_T^{-1} sum_e <Q_b v_0 - v_b, Q_b w_0 - w_b>_e`; zero without stabilizer.
    pub stabilizer: DMatrix<f64>,
    /// `(a grad_w u, grad_w v) + (c u_0, v_0) + s_T(u, v)`.
    pub stiffness: DMatrix<f64>,
    /// Moments of `f` against the interior basis; zero on trace entries.
    pub load: DVector<f64>,
    /// Per local edge: Q_b of interior basis traces, `nb x n0`.
    pub trace_projection: Vec<DMatrix<f64>>,
}

impl LocalOperators {
    pub fn new(mesh: &Mesh, cell: usize, family: ElementFamily, problem: &Problem) -> Result<Self> {
        let geom = mesh.geometry(cell);
        if family.kind == FamilyKind::Superconvergent && geom.vertices.len() != 3 {
            return Err(Error::InvalidParameter(format!(
                "the superconvergent element needs triangles; cell {cell} has {} vertices",
                geom.vertices.len()
            )));
        }
        let edges = mesh.cell_edges(cell).to_vec();
        let n0 = family.interior_dim();
        let nb = family.trace_dim();
        let ndof = n0 + edges.len() * nb;

        let space = family.cell_space(geom);
        let gspace = family.gradient_space(geom);
        let ng = gspace.dim();
        let rule = cell_quadrature(geom, family.cell_quad_degree())?;

        let mut grad_mass = DMatrix::zeros(ng, ng);
        let mut grad_mass_a = DMatrix::zeros(ng, ng);
        let mut mass = DMatrix::zeros(n0, n0);
        let mut c_mass = DMatrix::zeros(n0, n0);
        let mut rhs = DMatrix::zeros(ng, ndof);
        let mut load = DVector::zeros(ndof);

        let mut wv = vec![[0.0; 2]; ng];
        let mut wdiv = vec![0.0; ng];
        let mut phi = vec![0.0; n0];
        for (p, w) in rule.iter() {
            let a = (problem.a)(p);
            let c = (problem.c)(p);
            if !(a > 0.0 && a.is_finite()) {
                return Err(bound("a", a, cell, p));
            }
            if !(c >= 0.0 && c.is_finite()) {
                return Err(bound("c", c, cell, p));
            }
            let f = (problem.f)(p);
            gspace.values_and_divergence(p, &mut wv, &mut wdiv);
            space.values(p, &mut phi);
            for i in 0..ng {
                for j in 0..ng {
                    let d = wv[i][0] * wv[j][0] + wv[i][1] * wv[j][1];
                    grad_mass[(i, j)] += w * d;
                    grad_mass_a[(i, j)] += w * a * d;
                }
                for (al, ph) in phi.iter().enumerate() {
                    rhs[(i, al)] -= w * ph * wdiv[i];
                }
            }
            for al in 0..n0 {
                for be in 0..n0 {
                    mass[(al, be)] += w * phi[al] * phi[be];
                    c_mass[(al, be)] += w * c * phi[al] * phi[be];
                }
                load[al] += w * f * phi[al];
            }
        }

        let h = geom.diameter;
        let mut stabilizer = DMatrix::zeros(ndof, ndof);
        let mut trace_projection = Vec::with_capacity(edges.len());
        let mut psi = vec![0.0; nb];
        for (le, &e) in edges.iter().enumerate() {
            let (start, end) = mesh.edge_endpoints(e);
            let espace = family.edge_space(start, end);
            let erule = edge_quadrature(start, end, family.edge_quad_degree());
            let normal = mesh.outward_normal(e, cell);
            let egram = gram_matrix(&espace, &erule)?;
            let mut cross = DMatrix::zeros(nb, n0);
            let off = n0 + le * nb;
            for (p, w) in erule.iter() {
                espace.eval(p, &mut psi);
                gspace.values_and_divergence(p, &mut wv, &mut wdiv);
                space.values(p, &mut phi);
                for i in 0..ng {
                    let wn = wv[i][0] * normal[0] + wv[i][1] * normal[1];
                    for (j, ps) in psi.iter().enumerate() {
                        rhs[(i, off + j)] += w * ps * wn;
                    }
                }
                for (j, ps) in psi.iter().enumerate() {
                    for (al, ph) in phi.iter().enumerate() {
                        cross[(j, al)] += w * ps * ph;
                    }
                }
            }
            let chol = egram
                .clone()
                .cholesky()
                .ok_or_else(|| Error::SingularGram(format!("edge {e}")))?;
            let proj = chol.solve(&cross);
            if family.has_stabilizer() {
                // D = [proj | -I on this edge]; S += h^{-1} D^T E D
                let mut d = DMatrix::zeros(nb, ndof);
                d.view_mut((0, 0), (nb, n0)).copy_from(&proj);
                for j in 0..nb {
                    d[(j, off + j)] = -1.0;
                }
                stabilizer += (d.transpose() * &egram * &d) / h;
            }
            trace_projection.push(proj);
        }

        let chol = grad_mass
            .clone()
            .cholesky()
            .ok_or_else(|| Error::SingularGram(format!("gradient space on cell {cell}")))?;
        let grad = chol.solve(&rhs);

        let mut stiffness = grad.transpose() * &grad_mass_a * &grad;
        {
            let mut block = stiffness.view_mut((0, 0), (n0, n0));
            block += &c_mass;
        }
        stiffness += &stabilizer;
        symmetrize(&mut stiffness);
        symmetrize(&mut stabilizer);

        Ok(Self {
            cell,
            edges,
            n0,
            nb,
            grad,
            grad_mass,
            mass,
            stabilizer,
            stiffness,
            load,
            trace_projection,
        })
    }

    pub fn ndof(&self) -> usize {
        self.n0 + self.edges.len() * self.nb
    }

    /// `||grad_w v||^2` on the cell.
    pub fn grad_norm_sq(&self, v: &DVector<f64>) -> f64 {
        let g = &self.grad * v;
        g.dot(&(&self.grad_mass * &g))
    }

    pub fn stabilizer_form(&self, v: &DVector<f64>) -> f64 {
        v.dot(&(&self.stabilizer * v))
    }

    /// `a_T(v, v) + s_T(v, v)`.
    pub fn energy(&self, v: &DVector<f64>) -> f64 {
        v.dot(&(&self.stiffness * v))
    }

    /// `||v_0||^2` on the cell.
    pub fn interior_norm_sq(&self, v: &DVector<f64>) -> f64 {
        let v0 = v.rows(0, self.n0);
        v0.dot(&(&self.mass * v0))
    }
}

fn symmetrize(m: &mut DMatrix<f64>) {
    let t = m.transpose();
    *m += t;
    *m *= 0.5;
}

fn bound(name: &'static str, value: f64, cell: usize, p: [f64; 2]) -> Error {
    Error::CoefficientBound {
        name,
        value,
        cell,
        x: p[0],
        y: p[1],
    }
}

/// Element operators for every cell of a mesh, plus per-edge trace Gram
/// matrices.
#[derive(Debug, Clone)]
pub struct OperatorSet {
    pub family: ElementFamily,
    pub cells: Vec<LocalOperators>,
    pub edge_gram: Vec<DMatrix<f64>>,
}

impl OperatorSet {
    /// Builds all cells in parallel; output does not depend on scheduling.
    pub fn build(mesh: &Mesh, family: ElementFamily, problem: &Problem) -> Result<Self> {
        let cells = (0..mesh.num_cells())
            .into_par_iter()
            .map(|c| LocalOperators::new(mesh, c, family, problem))
            .collect::<Result<Vec<_>>>()?;
        let edge_gram = (0..mesh.num_edges())
            .map(|e| {
                let (a, b) = mesh.edge_endpoints(e);
                gram_matrix(&family.edge_space(a, b), &edge_quadrature(a, b, family.edge_quad_degree()))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            family,
            cells,
            edge_gram,
        })
    }

    pub fn cell(&self, c: usize) -> &LocalOperators {
        &self.cells[c]
    }

    /// `||v_b||^2` on edge `e` for trace coefficients `v`.
    pub fn edge_norm_sq(&self, e: usize, v: &[f64]) -> f64 {
        let g = &self.edge_gram[e];
        let n = v.len();
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                s += v[i] * g[(i, j)] * v[j];
            }
        }
        s
    }
}
