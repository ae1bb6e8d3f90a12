use nalgebra::DMatrix;

use super::quadrature::QuadratureRule;
use crate::error::{Error, Result};
use crate::mesh::Point;

/// A finite-dimensional function space with an explicit basis.
///
/// `eval` writes `dim() * components()` values, basis-major: entry
/// `i * components() + c` is component `c` of basis function `i`.
pub trait Basis {
    fn dim(&self) -> usize;
    fn components(&self) -> usize;
    fn eval(&self, p: Point, out: &mut [f64]);
}

/// Number of bivariate monomials of total degree at most `k`.
pub fn poly_dim(k: usize) -> usize {
    (k + 1) * (k + 2) / 2
}

/// Scaled monomials `((x - xc)/h)^a ((y - yc)/h)^b`, `a + b <= k`, ordered by
/// total degree, so the first `poly_dim(r)` members span P_r.
#[derive(Debug, Clone)]
pub struct CellSpace {
    degree: usize,
    center: Point,
    scale: f64,
    exponents: Vec<(usize, usize)>,
}

impl CellSpace {
    pub fn new(degree: usize, center: Point, scale: f64) -> Self {
        let mut exponents = Vec::with_capacity(poly_dim(degree));
        for d in 0..=degree {
            for j in 0..=d {
                exponents.push((d - j, j));
            }
        }
        Self {
            degree,
            center,
            scale,
            exponents,
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn center(&self) -> Point {
        self.center
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn exponents(&self) -> &[(usize, usize)] {
        &self.exponents
    }

    fn powers(&self, p: Point) -> (Vec<f64>, Vec<f64>) {
        let xi = (p[0] - self.center[0]) / self.scale;
        let eta = (p[1] - self.center[1]) / self.scale;
        let mut px = vec![1.0; self.degree + 1];
        let mut py = vec![1.0; self.degree + 1];
        for i in 1..=self.degree {
            px[i] = px[i - 1] * xi;
            py[i] = py[i - 1] * eta;
        }
        (px, py)
    }

    pub fn values(&self, p: Point, out: &mut [f64]) {
        let (px, py) = self.powers(p);
        for (o, &(a, b)) in out.iter_mut().zip(&self.exponents) {
            *o = px[a] * py[b];
        }
    }

    pub fn gradients(&self, p: Point, out: &mut [[f64; 2]]) {
        let (px, py) = self.powers(p);
        let inv = 1.0 / self.scale;
        for (o, &(a, b)) in out.iter_mut().zip(&self.exponents) {
            let dx = if a > 0 { a as f64 * px[a - 1] * py[b] * inv } else { 0.0 };
            let dy = if b > 0 { b as f64 * px[a] * py[b - 1] * inv } else { 0.0 };
            *o = [dx, dy];
        }
    }
}

impl Basis for CellSpace {
    fn dim(&self) -> usize {
        self.exponents.len()
    }
    fn components(&self) -> usize {
        1
    }
    fn eval(&self, p: Point, out: &mut [f64]) {
        self.values(p, out);
    }
}

/// Legendre polynomials in the arclength parameter `t ∈ [-1, 1]` running
/// from `start` (t = -1) to `end` (t = 1).
#[derive(Debug, Clone)]
pub struct EdgeSpace {
    degree: usize,
    start: Point,
    end: Point,
}

impl EdgeSpace {
    pub fn new(degree: usize, start: Point, end: Point) -> Self {
        Self { degree, start, end }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn length(&self) -> f64 {
        ((self.end[0] - self.start[0]).powi(2) + (self.end[1] - self.start[1]).powi(2)).sqrt()
    }

    /// Parameter of the orthogonal projection of `p` onto the edge line.
    pub fn param(&self, p: Point) -> f64 {
        let d = [self.end[0] - self.start[0], self.end[1] - self.start[1]];
        let mid = [
            0.5 * (self.start[0] + self.end[0]),
            0.5 * (self.start[1] + self.end[1]),
        ];
        2.0 * ((p[0] - mid[0]) * d[0] + (p[1] - mid[1]) * d[1]) / (d[0] * d[0] + d[1] * d[1])
    }

    pub fn values_at_param(&self, t: f64, out: &mut [f64]) {
        legendre(self.degree, t, out);
    }
}

/// Legendre values `P_0(t)..P_n(t)` by the three-term recurrence.
pub fn legendre(n: usize, t: f64, out: &mut [f64]) {
    out[0] = 1.0;
    if n >= 1 {
        out[1] = t;
    }
    for i in 2..=n {
        let fi = i as f64;
        out[i] = ((2.0 * fi - 1.0) * t * out[i - 1] - (fi - 1.0) * out[i - 2]) / fi;
    }
}

impl Basis for EdgeSpace {
    fn dim(&self) -> usize {
        self.degree + 1
    }
    fn components(&self) -> usize {
        1
    }
    fn eval(&self, p: Point, out: &mut [f64]) {
        legendre(self.degree, self.param(p), out);
    }
}

/// Vector spaces used for discrete weak gradients.
pub trait VectorBasis: Basis {
    /// Values (as 2-vectors) and divergences of every basis member at `p`.
    fn values_and_divergence(&self, p: Point, values: &mut [[f64; 2]], div: &mut [f64]);
}

/// `[P_r]^2` with basis `(φ_i, 0)` followed by `(0, φ_i)`.
#[derive(Debug, Clone)]
pub struct VectorPolySpace {
    scalar: CellSpace,
}

impl VectorPolySpace {
    pub fn new(degree: usize, center: Point, scale: f64) -> Self {
        Self {
            scalar: CellSpace::new(degree, center, scale),
        }
    }
}

impl Basis for VectorPolySpace {
    fn dim(&self) -> usize {
        2 * self.scalar.dim()
    }
    fn components(&self) -> usize {
        2
    }
    fn eval(&self, p: Point, out: &mut [f64]) {
        let n = self.scalar.dim();
        let mut vals = vec![[0.0; 2]; 2 * n];
        let mut div = vec![0.0; 2 * n];
        self.values_and_divergence(p, &mut vals, &mut div);
        for (i, v) in vals.iter().enumerate() {
            out[2 * i] = v[0];
            out[2 * i + 1] = v[1];
        }
    }
}

impl VectorBasis for VectorPolySpace {
    fn values_and_divergence(&self, p: Point, values: &mut [[f64; 2]], div: &mut [f64]) {
        let n = self.scalar.dim();
        let mut phi = vec![0.0; n];
        let mut grad = vec![[0.0; 2]; n];
        self.scalar.values(p, &mut phi);
        self.scalar.gradients(p, &mut grad);
        for i in 0..n {
            values[i] = [phi[i], 0.0];
            values[n + i] = [0.0, phi[i]];
            div[i] = grad[i][0];
            div[n + i] = grad[i][1];
        }
    }
}

/// Raviart-Thomas space RT_k = [P_k]^2 + x P_k on a cell, built as
/// `[P_k]^2` plus `x̃ p` for the homogeneous degree-k scaled monomials `p`,
/// with `x̃ = (x - x_c) / h`.
#[derive(Debug, Clone)]
pub struct RaviartThomasSpace {
    degree: usize,
    vector: VectorPolySpace,
}

impl RaviartThomasSpace {
    pub fn new(degree: usize, center: Point, scale: f64) -> Self {
        Self {
            degree,
            vector: VectorPolySpace::new(degree, center, scale),
        }
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    fn scalar(&self) -> &CellSpace {
        &self.vector.scalar
    }
}

impl Basis for RaviartThomasSpace {
    fn dim(&self) -> usize {
        (self.degree + 1) * (self.degree + 3)
    }
    fn components(&self) -> usize {
        2
    }
    fn eval(&self, p: Point, out: &mut [f64]) {
        let n = self.dim();
        let mut vals = vec![[0.0; 2]; n];
        let mut div = vec![0.0; n];
        self.values_and_divergence(p, &mut vals, &mut div);
        for (i, v) in vals.iter().enumerate() {
            out[2 * i] = v[0];
            out[2 * i + 1] = v[1];
        }
    }
}

impl VectorBasis for RaviartThomasSpace {
    fn values_and_divergence(&self, p: Point, values: &mut [[f64; 2]], div: &mut [f64]) {
        let nv = self.vector.dim();
        self.vector
            .values_and_divergence(p, &mut values[..nv], &mut div[..nv]);
        let s = self.scalar();
        let nk = s.dim();
        let mut phi = vec![0.0; nk];
        s.values(p, &mut phi);
        let xt = [
            (p[0] - s.center()[0]) / s.scale(),
            (p[1] - s.center()[1]) / s.scale(),
        ];
        // div(x̃ p) = (2 + k) p / h for p homogeneous of degree k
        let factor = (2 + self.degree) as f64 / s.scale();
        let first_homogeneous = nk - (self.degree + 1);
        for (i, &ph) in phi[first_homogeneous..].iter().enumerate() {
            values[nv + i] = [xt[0] * ph, xt[1] * ph];
            div[nv + i] = factor * ph;
        }
    }
}

/// Symmetric matrix of pairwise L² inner products under `rule`.
///
/// Fails when the matrix is not numerically positive definite.
pub fn gram_matrix<B: Basis + ?Sized>(space: &B, rule: &QuadratureRule) -> Result<DMatrix<f64>> {
    let n = space.dim();
    let nc = space.components();
    let mut vals = vec![0.0; n * nc];
    let mut g = DMatrix::zeros(n, n);
    for (p, w) in rule.iter() {
        space.eval(p, &mut vals);
        for i in 0..n {
            for j in 0..=i {
                let mut s = 0.0;
                for c in 0..nc {
                    s += vals[i * nc + c] * vals[j * nc + c];
                }
                g[(i, j)] += w * s;
            }
        }
    }
    for i in 0..n {
        for j in 0..i {
            g[(j, i)] = g[(i, j)];
        }
    }
    if g.clone().cholesky().is_none() {
        return Err(Error::SingularGram(format!("{n}x{n} Gram matrix is not positive definite")));
    }
    Ok(g)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::CellGeometry;
    use crate::polybasis::quadrature::{cell_quadrature, edge_quadrature};

    fn reference_triangle() -> CellGeometry {
        CellGeometry::from_vertices(vec![[0.0, 0.0], [1.0, 0.0], [0.0, 1.0]])
    }

    #[test]
    fn p0_gram_is_area() {
        let t = reference_triangle();
        let s = CellSpace::new(0, t.centroid, t.diameter);
        let g = gram_matrix(&s, &cell_quadrature(&t, 0).unwrap()).unwrap();
        assert_eq!(g.shape(), (1, 1));
        assert!((g[(0, 0)] - 0.5).abs() < 1e-15);
    }

    /// ∫ x^a y^b over the reference triangle = a! b! / (a + b + 2)!
    fn ref_monomial(a: u32, b: u32) -> f64 {
        let f = |n: u32| (1..=n).map(f64::from).product::<f64>();
        f(a) * f(b) / f(a + b + 2)
    }

    #[test]
    fn p1_gram_matches_exact_integrals() {
        let t = reference_triangle();
        let h = t.diameter;
        let c = t.centroid;
        let s = CellSpace::new(1, c, h);
        let g = gram_matrix(&s, &cell_quadrature(&t, 2).unwrap()).unwrap();
        // basis 1, (x - cx)/h, (y - cy)/h expanded in raw monomials
        let lin = |i: usize| -> [f64; 3] {
            match i {
                0 => [1.0, 0.0, 0.0],
                1 => [-c[0] / h, 1.0 / h, 0.0],
                _ => [-c[1] / h, 0.0, 1.0 / h],
            }
        };
        for i in 0..3 {
            for j in 0..3 {
                let (p, q) = (lin(i), lin(j));
                let exact = p[0] * q[0] * ref_monomial(0, 0)
                    + (p[0] * q[1] + p[1] * q[0]) * ref_monomial(1, 0)
                    + (p[0] * q[2] + p[2] * q[0]) * ref_monomial(0, 1)
                    + p[1] * q[1] * ref_monomial(2, 0)
                    + (p[1] * q[2] + p[2] * q[1]) * ref_monomial(1, 1)
                    + p[2] * q[2] * ref_monomial(0, 2);
                assert!((g[(i, j)] - exact).abs() < 1e-14, "({i},{j})");
            }
        }
    }

    #[test]
    fn rt0_gram_is_spd_and_matches_exact_integrals() {
        let t = reference_triangle();
        let (c, h) = (t.centroid, t.diameter);
        let rt = RaviartThomasSpace::new(0, c, h);
        assert_eq!(rt.dim(), 3);
        let g = gram_matrix(&rt, &cell_quadrature(&t, 2).unwrap()).unwrap();
        // members: (1,0), (0,1), ((x-cx)/h, (y-cy)/h); the centroid moments vanish
        assert!((g[(0, 0)] - 0.5).abs() < 1e-15);
        assert!(g[(0, 1)].abs() < 1e-15);
        assert!(g[(0, 2)].abs() < 1e-15 && g[(1, 2)].abs() < 1e-15);
        let second = |a: u32, b: u32| ref_monomial(a, b);
        let xx = second(2, 0) - c[0] * c[0] * 0.5;
        let yy = second(0, 2) - c[1] * c[1] * 0.5;
        assert!((g[(2, 2)] - (xx + yy) / (h * h)).abs() < 1e-15);
        assert!(g.clone().symmetric_eigen().eigenvalues.min() > 0.0);
    }

    #[test]
    fn rt_dimension_and_divergence_rank() {
        let t = reference_triangle();
        for k in 0..=6 {
            let rt = RaviartThomasSpace::new(k, t.centroid, t.diameter);
            assert_eq!(rt.dim(), (k + 1) * (k + 3));
            let rule = cell_quadrature(&t, 2 * k + 2).unwrap();
            gram_matrix(&rt, &rule).unwrap();
            // divergence coefficients in the P_k basis: project each divergence
            let pk = CellSpace::new(k, t.centroid, t.diameter);
            let m = gram_matrix(&pk, &rule).unwrap();
            let n = rt.dim();
            let np = pk.dim();
            let mut moments = DMatrix::zeros(np, n);
            let mut vals = vec![[0.0; 2]; n];
            let mut div = vec![0.0; n];
            let mut phi = vec![0.0; np];
            for (p, w) in rule.iter() {
                rt.values_and_divergence(p, &mut vals, &mut div);
                pk.values(p, &mut phi);
                for a in 0..np {
                    for i in 0..n {
                        moments[(a, i)] += w * phi[a] * div[i];
                    }
                }
            }
            let coeffs = m.cholesky().unwrap().solve(&moments);
            let rank = coeffs.rank(1e-10);
            assert_eq!(rank, np, "k = {k}");
            // divergence lies in P_k: projection residual vanishes
            let check = cell_quadrature(&t, 2 * k + 4).unwrap();
            for (p, _) in check.iter().take(5) {
                rt.values_and_divergence(p, &mut vals, &mut div);
                pk.values(p, &mut phi);
                for i in 0..n {
                    let rec: f64 = (0..np).map(|a| coeffs[(a, i)] * phi[a]).sum();
                    assert!((rec - div[i]).abs() < 1e-9);
                }
            }
        }
    }

    #[test]
    fn edge_gram_is_diagonal_legendre() {
        let e = EdgeSpace::new(3, [0.0, 0.0], [0.3, 0.4]);
        let g = gram_matrix(&e, &edge_quadrature([0.0, 0.0], [0.3, 0.4], 6)).unwrap();
        for i in 0..4 {
            for j in 0..4 {
                let exact = if i == j { 0.5 / (2 * i + 1) as f64 } else { 0.0 };
                assert!((g[(i, j)] - exact).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn gram_condition_is_scale_invariant() {
        let t = CellGeometry::from_vertices(vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]]);
        let child = CellGeometry::from_vertices(vec![[0.0, 0.0], [0.5, 0.0], [0.5, 0.5]]);
        let cond = |g: &CellGeometry| {
            let s = CellSpace::new(3, g.centroid, g.diameter);
            let m = gram_matrix(&s, &cell_quadrature(g, 6).unwrap()).unwrap();
            let ev = m.symmetric_eigen().eigenvalues;
            ev.max() / ev.min()
        };
        let (a, b) = (cond(&t), cond(&child));
        assert!(a / b < 2.0 && b / a < 2.0);
    }
}
