use std::sync::OnceLock;

use gauss_quad::GaussLegendre;

use crate::error::{Error, Result};
use crate::mesh::{signed_area, CellGeometry, Point};

/// Points and positive weights integrating polynomials up to `degree` exactly.
#[derive(Debug, Clone)]
pub struct QuadratureRule {
    pub points: Vec<Point>,
    pub weights: Vec<f64>,
    pub degree: usize,
}

impl QuadratureRule {
    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    pub fn integrate(&self, f: impl Fn(Point) -> f64) -> f64 {
        self.points.iter().zip(&self.weights).map(|(&p, &w)| w * f(p)).sum()
    }

    pub fn iter(&self) -> impl Iterator<Item = (Point, f64)> + '_ {
        self.points.iter().copied().zip(self.weights.iter().copied())
    }
}

const MAX_GAUSS_POINTS: usize = 64;

/// Gauss-Legendre nodes and weights on [-1, 1], cached per point count.
pub fn gauss_legendre(n: usize) -> &'static [(f64, f64)] {
    static TABLE: OnceLock<Vec<Vec<(f64, f64)>>> = OnceLock::new();
    let table = TABLE.get_or_init(|| {
        (0..=MAX_GAUSS_POINTS)
            .map(|n| {
                if n == 0 {
                    return Vec::new();
                }
                let rule = GaussLegendre::new(n.try_into().expect("n >= 1"));
                let mut pts: Vec<(f64, f64)> = rule.iter().map(|(x, w)| (*x, *w)).collect();
                pts.sort_by(|a, b| a.0.total_cmp(&b.0));
                pts
            })
            .collect()
    });
    assert!(
        (1..=MAX_GAUSS_POINTS).contains(&n),
        "Gauss-Legendre point count {n} outside 1..={MAX_GAUSS_POINTS}"
    );
    &table[n]
}

/// Collapsed (Duffy) tensor rule on a triangle, exact to `degree`.
pub fn triangle_quadrature(tri: [Point; 3], degree: usize) -> Result<QuadratureRule> {
    let area = signed_area(&tri);
    if area.abs() <= f64::EPSILON * (tri_scale(&tri).powi(2)) {
        return Err(Error::DegenerateGeometry(format!(
            "triangle {tri:?} has (near) zero area"
        )));
    }
    // the collapse adds one degree in the first direction: 2n - 1 >= degree + 1
    let n = (degree + 3) / 2;
    let gl = gauss_legendre(n);
    let [a, b, c] = tri;
    let jac = 2.0 * area.abs();
    let mut points = Vec::with_capacity(n * n);
    let mut weights = Vec::with_capacity(n * n);
    for &(tu, wu) in gl {
        let u = 0.5 * (tu + 1.0);
        for &(tv, wv) in gl {
            let v = 0.5 * (tv + 1.0);
            let (xi, eta) = (u, v * (1.0 - u));
            points.push([
                a[0] + xi * (b[0] - a[0]) + eta * (c[0] - a[0]),
                a[1] + xi * (b[1] - a[1]) + eta * (c[1] - a[1]),
            ]);
            weights.push(0.25 * wu * wv * (1.0 - u) * jac);
        }
    }
    Ok(QuadratureRule {
        points,
        weights,
        degree,
    })
}

fn tri_scale(tri: &[Point; 3]) -> f64 {
    let d = |p: Point, q: Point| ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
    d(tri[0], tri[1]).max(d(tri[1], tri[2])).max(d(tri[2], tri[0]))
}

/// Rule on a cell: triangles directly, polygons fan-triangulated from the centroid.
pub fn cell_quadrature(cell: &CellGeometry, degree: usize) -> Result<QuadratureRule> {
    let v = &cell.vertices;
    if v.len() == 3 {
        return triangle_quadrature([v[0], v[1], v[2]], degree);
    }
    let mut rule = QuadratureRule {
        points: Vec::new(),
        weights: Vec::new(),
        degree,
    };
    for i in 0..v.len() {
        let sub = triangle_quadrature([cell.centroid, v[i], v[(i + 1) % v.len()]], degree)?;
        rule.points.extend(sub.points);
        rule.weights.extend(sub.weights);
    }
    Ok(rule)
}

/// Gauss-Legendre on the segment from `a` to `b`.
pub fn edge_quadrature(a: Point, b: Point, degree: usize) -> QuadratureRule {
    let n = degree / 2 + 1;
    let len = ((b[0] - a[0]).powi(2) + (b[1] - a[1]).powi(2)).sqrt();
    let mut points = Vec::with_capacity(n);
    let mut weights = Vec::with_capacity(n);
    for &(t, w) in gauss_legendre(n) {
        let s = 0.5 * (t + 1.0);
        points.push([a[0] + s * (b[0] - a[0]), a[1] + s * (b[1] - a[1])]);
        weights.push(0.5 * w * len);
    }
    QuadratureRule {
        points,
        weights,
        degree,
    }
}
