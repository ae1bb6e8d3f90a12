//! Element-level weak Galerkin algebra.
//!
//! Local degrees of freedom of a cell are ordered as the interior
//! coefficients `v_0` followed by the trace coefficients of each edge in the
//! order of [`Mesh::cell_edges`](crate::mesh::Mesh::cell_edges).

mod local;
mod weak;

pub use local::{LocalOperators, OperatorSet};
pub use weak::{TraceLayout, WeakFunction};

use std::fmt;
use std::str::FromStr;

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::mesh::{CellGeometry, Point};
use crate::polybasis::{
    cell_quadrature, edge_quadrature, gram_matrix, poly_dim, Basis, CellSpace, EdgeSpace,
    RaviartThomasSpace, VectorBasis, VectorPolySpace,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum FamilyKind {
    /// `{P_k, P_{k-1}}` with `[P_{k-1}]^2` weak gradients and a stabilizer.
    Standard,
    /// `{P_k, P_k}` with `RT_k` weak gradients and no stabilizer.
    Superconvergent,
}

impl fmt::Display for FamilyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            FamilyKind::Standard => "standard",
            FamilyKind::Superconvergent => "superconvergent",
        })
    }
}

impl FromStr for FamilyKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "standard" => Ok(FamilyKind::Standard),
            "superconvergent" => Ok(FamilyKind::Superconvergent),
            other => Err(Error::Config(format!("unknown family `{other}`"))),
        }
    }
}

/// Largest supported polynomial degree.
pub const MAX_DEGREE: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ElementFamily {
    pub kind: FamilyKind,
    pub degree: usize,
}

impl ElementFamily {
    pub fn new(kind: FamilyKind, degree: usize) -> Result<Self> {
        if !(1..=MAX_DEGREE).contains(&degree) {
            return Err(Error::InvalidParameter(format!(
                "degree {degree} outside 1..={MAX_DEGREE}"
            )));
        }
        Ok(Self { kind, degree })
    }

    pub fn standard(degree: usize) -> Result<Self> {
        Self::new(FamilyKind::Standard, degree)
    }

    pub fn superconvergent(degree: usize) -> Result<Self> {
        Self::new(FamilyKind::Superconvergent, degree)
    }

    pub fn interior_dim(&self) -> usize {
        poly_dim(self.degree)
    }

    pub fn trace_degree(&self) -> usize {
        match self.kind {
            FamilyKind::Standard => self.degree - 1,
            FamilyKind::Superconvergent => self.degree,
        }
    }

    pub fn trace_dim(&self) -> usize {
        self.trace_degree() + 1
    }

    pub fn gradient_dim(&self) -> usize {
        match self.kind {
            FamilyKind::Standard => 2 * poly_dim(self.degree - 1),
            FamilyKind::Superconvergent => (self.degree + 1) * (self.degree + 3),
        }
    }

    pub fn has_stabilizer(&self) -> bool {
        self.kind == FamilyKind::Standard
    }

    /// Exactness of cell rules: products of two gradient-space members.
    pub fn cell_quad_degree(&self) -> usize {
        match self.kind {
            FamilyKind::Standard => 2 * self.degree + 2,
            FamilyKind::Superconvergent => 2 * self.degree + 3,
        }
    }

    pub fn edge_quad_degree(&self) -> usize {
        match self.kind {
            FamilyKind::Standard => 2 * self.degree + 1,
            FamilyKind::Superconvergent => 2 * self.degree + 2,
        }
    }

    /// Default relaxation parameter of the interface iteration.
    pub fn default_beta(&self) -> f64 {
        match (self.kind, self.degree) {
            (FamilyKind::Superconvergent, _) => 4.0,
            (FamilyKind::Standard, 0..=3) => 8.0,
            (FamilyKind::Standard, 5) => 19.0,
            (FamilyKind::Standard, _) => 32.0,
        }
    }

    pub fn cell_space(&self, geom: &CellGeometry) -> CellSpace {
        CellSpace::new(self.degree, geom.centroid, geom.diameter)
    }

    pub fn gradient_space(&self, geom: &CellGeometry) -> GradientSpace {
        match self.kind {
            FamilyKind::Standard => GradientSpace::Vector(VectorPolySpace::new(
                self.degree - 1,
                geom.centroid,
                geom.diameter,
            )),
            FamilyKind::Superconvergent => GradientSpace::RaviartThomas(RaviartThomasSpace::new(
                self.degree,
                geom.centroid,
                geom.diameter,
            )),
        }
    }

    pub fn edge_space(&self, start: Point, end: Point) -> EdgeSpace {
        EdgeSpace::new(self.trace_degree(), start, end)
    }
}

impl fmt::Display for ElementFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.kind {
            FamilyKind::Standard => write!(f, "P{}/P{}", self.degree, self.degree - 1),
            FamilyKind::Superconvergent => {
                write!(f, "P{}/P{} (RT{})", self.degree, self.degree, self.degree)
            }
        }
    }
}

/// The space holding discrete weak gradients on one cell.
#[derive(Debug, Clone)]
pub enum GradientSpace {
    Vector(VectorPolySpace),
    RaviartThomas(RaviartThomasSpace),
}

impl Basis for GradientSpace {
    fn dim(&self) -> usize {
        match self {
            GradientSpace::Vector(s) => s.dim(),
            GradientSpace::RaviartThomas(s) => s.dim(),
        }
    }
    fn components(&self) -> usize {
        2
    }
    fn eval(&self, p: Point, out: &mut [f64]) {
        match self {
            GradientSpace::Vector(s) => s.eval(p, out),
            GradientSpace::RaviartThomas(s) => s.eval(p, out),
        }
    }
}

impl VectorBasis for GradientSpace {
    fn values_and_divergence(&self, p: Point, values: &mut [[f64; 2]], div: &mut [f64]) {
        match self {
            GradientSpace::Vector(s) => s.values_and_divergence(p, values, div),
            GradientSpace::RaviartThomas(s) => s.values_and_divergence(p, values, div),
        }
    }
}

/// L² projection of `f` onto `P_degree` of a cell, in the scaled monomial basis.
pub fn project_q0(
    f: &dyn Fn(Point) -> f64,
    geom: &CellGeometry,
    degree: usize,
    quad_degree: usize,
) -> Result<DVector<f64>> {
    let space = CellSpace::new(degree, geom.centroid, geom.diameter);
    let rule = cell_quadrature(geom, quad_degree.max(2 * degree))?;
    let gram = gram_matrix(&space, &rule)?;
    let mut rhs = DVector::zeros(space.dim());
    let mut phi = vec![0.0; space.dim()];
    for (p, w) in rule.iter() {
        space.values(p, &mut phi);
        let fv = f(p);
        for (r, ph) in rhs.iter_mut().zip(&phi) {
            *r += w * fv * ph;
        }
    }
    solve_spd(gram, rhs)
}

/// L² projection of `g` onto `P_degree` of the segment `start -> end`, in
/// the Legendre basis of that orientation.
pub fn project_qb(
    g: &dyn Fn(Point) -> f64,
    start: Point,
    end: Point,
    degree: usize,
    quad_degree: usize,
) -> Result<DVector<f64>> {
    let space = EdgeSpace::new(degree, start, end);
    let rule = edge_quadrature(start, end, quad_degree.max(2 * degree));
    let gram = gram_matrix(&space, &rule)?;
    let mut rhs = DVector::zeros(space.dim());
    let mut psi = vec![0.0; space.dim()];
    for (p, w) in rule.iter() {
        space.eval(p, &mut psi);
        let gv = g(p);
        for (r, ps) in rhs.iter_mut().zip(&psi) {
            *r += w * gv * ps;
        }
    }
    solve_spd(gram, rhs)
}

fn solve_spd(m: nalgebra::DMatrix<f64>, rhs: DVector<f64>) -> Result<DVector<f64>> {
    let n = m.nrows();
    m.cholesky()
        .map(|c| c.solve(&rhs))
        .ok_or_else(|| Error::SingularGram(format!("{n}x{n} projection")))
}

/// Values of a polynomial with coefficients `coef` in `space` at `p`.
pub fn eval_poly(space: &CellSpace, coef: &[f64], p: Point) -> f64 {
    let mut phi = vec![0.0; space.dim()];
    space.values(p, &mut phi);
    phi.iter().zip(coef).map(|(a, b)| a * b).sum()
}
