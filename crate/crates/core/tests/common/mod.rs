//! Property checks shared by the proptest suites and the acceptance run.
//!
//! Every check returns `Err(message)` on violation so it can be driven by
//! `proptest!` or by an explicit `TestRunner`.

#![allow(dead_code)]

use nalgebra::{DVector, SymmetricEigen};
use proptest::prelude::*;

use wgdd::assembly::{galerkin_residual, solve_monolithic};
use wgdd::convergence::{error_norms, triple_norm};
use wgdd::dd::{build_subdomain_systems, interface_residual, solve_hybrid_direct, InitialGuess, StopRule};
use wgdd::mesh::{build_uniform_triangle_mesh, partition_grid, partition_per_element, Mesh, Point, SubdomainPartition};
use wgdd::polybasis::{cell_quadrature, gauss_legendre, poly_dim, Basis, CellSpace};
use wgdd::problem::{test1, Problem};
use wgdd::wgcore::{ElementFamily, FamilyKind, LocalOperators, OperatorSet, TraceLayout, WeakFunction};

pub type Check = Result<(), String>;

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        if !$cond {
            return Err(format!($($fmt)+));
        }
    };
}

fn err(e: wgdd::Error) -> String {
    e.to_string()
}

/// Convex polygon: jittered points on the unit circle under a bounded affine map.
#[derive(Debug, Clone)]
pub struct CellSpec {
    pub vertices: Vec<Point>,
}

pub fn cell_strategy(min_vertices: usize, max_vertices: usize) -> impl Strategy<Value = CellSpec> {
    (min_vertices..=max_vertices)
        .prop_flat_map(|n| {
            (
                proptest::collection::vec(-0.25f64..0.25, n),
                0.6f64..1.6,
                0.6f64..1.6,
                -0.4f64..0.4,
                0.05f64..2.0,
                -2.0f64..2.0,
                -2.0f64..2.0,
            )
        })
        .prop_map(|(jitter, sx, sy, shear, scale, tx, ty)| {
            let n = jitter.len();
            let step = std::f64::consts::TAU / n as f64;
            let vertices = jitter
                .iter()
                .enumerate()
                .map(|(i, j)| {
                    let t = (i as f64 + j) * step;
                    let (x, y) = (t.cos(), t.sin());
                    [scale * (sx * x + shear * y) + tx, scale * (sy * y) + ty]
                })
                .collect();
            CellSpec { vertices }
        })
}

pub fn single_cell_mesh(spec: &CellSpec) -> Result<Mesh, String> {
    Mesh::new(spec.vertices.clone(), vec![(0..spec.vertices.len()).collect()]).map_err(err)
}

pub fn unit_problem() -> Problem {
    Problem::new("unit", |_| 1.0, |_| 0.0, |_| 0.0, |_| 0.0)
}

/// `∫_P x^a y^b = 1/(a+1) ∮ x^(a+1) y^b dy` with a 1D Gauss rule per edge.
pub fn green_moment(poly: &[Point], center: Point, scale: f64, a: i32, b: i32) -> f64 {
    let mut total = 0.0;
    for i in 0..poly.len() {
        let p = poly[i];
        let q = poly[(i + 1) % poly.len()];
        let (p, q) = (
            [(p[0] - center[0]) / scale, (p[1] - center[1]) / scale],
            [(q[0] - center[0]) / scale, (q[1] - center[1]) / scale],
        );
        for &(t, w) in gauss_legendre(16) {
            let s = 0.5 * (t + 1.0);
            let x = p[0] + s * (q[0] - p[0]);
            let y = p[1] + s * (q[1] - p[1]);
            total += 0.5 * w * x.powi(a + 1) * y.powi(b) * (q[1] - p[1]);
        }
    }
    // back to physical area element
    total * scale * scale / (a as f64 + 1.0)
}

/// All scaled monomials up to `degree` against the Green oracle.
pub fn quadrature_exactness(spec: &CellSpec, degree: usize) -> Check {
    let mesh = single_cell_mesh(spec)?;
    let geom = mesh.geometry(0);
    let rule = cell_quadrature(geom, degree).map_err(err)?;
    let (c, h) = (geom.centroid, geom.diameter);
    for a in 0..=degree as i32 {
        for b in 0..=(degree as i32 - a) {
            let exact = green_moment(&spec.vertices, c, h, a, b);
            let got = rule.integrate(|p| ((p[0] - c[0]) / h).powi(a) * ((p[1] - c[1]) / h).powi(b));
            ensure!(
                (got - exact).abs() <= 1e-12 * exact.abs().max(geom.area),
                "degree {degree}, x^{a} y^{b}: {got:e} vs {exact:e}"
            );
        }
    }
    Ok(())
}

fn poly_eval(space: &CellSpace, coef: &[f64], p: Point) -> (f64, [f64; 2]) {
    let mut v = vec![0.0; space.dim()];
    let mut g = vec![[0.0; 2]; space.dim()];
    space.values(p, &mut v);
    space.gradients(p, &mut g);
    let val = v.iter().zip(coef).map(|(a, b)| a * b).sum();
    let gx = g.iter().zip(coef).map(|(a, b)| a[0] * b).sum();
    let gy = g.iter().zip(coef).map(|(a, b)| a[1] * b).sum();
    (val, [gx, gy])
}

/// `grad_w {p, p|∂T} = grad p` for `p ∈ P_k`. The stored trace is `Q_b p`,
/// which pairs identically with every normal component of the gradient space.
pub fn weak_gradient_exactness(spec: &CellSpec, kind: FamilyKind, degree: usize, coef: &[f64]) -> Check {
    let mesh = single_cell_mesh(spec)?;
    let family = ElementFamily::new(kind, degree).map_err(err)?;
    let geom = mesh.geometry(0).clone();
    let space = CellSpace::new(degree, geom.centroid, geom.diameter);
    let coef = &coef[..poly_dim(degree)];
    let op = LocalOperators::new(&mesh, 0, family, &unit_problem()).map_err(err)?;
    let p = |x: Point| poly_eval(&space, coef, x).0;
    let v = WeakFunction::interpolate(&mesh, family, &p, TraceLayout::Single).map_err(err)?;
    let g = &op.grad * v.gather(&mesh, 0);
    let gspace = family.gradient_space(&geom);
    let mut basis = vec![0.0; 2 * gspace.dim()];
    let (mut diff, mut norm) = (0.0, 0.0);
    for (x, w) in cell_quadrature(&geom, 2 * degree + 2).map_err(err)?.iter() {
        gspace.eval(x, &mut basis);
        let (mut wx, mut wy) = (0.0, 0.0);
        for (i, gi) in g.iter().enumerate() {
            wx += gi * basis[2 * i];
            wy += gi * basis[2 * i + 1];
        }
        let (_, d) = poly_eval(&space, coef, x);
        diff += w * ((wx - d[0]).powi(2) + (wy - d[1]).powi(2));
        norm += w * (d[0] * d[0] + d[1] * d[1]);
    }
    ensure!(
        diff.sqrt() <= 1e-9 * norm.sqrt().max(geom.area.sqrt() / geom.diameter),
        "{family}: ||grad_w p - grad p|| = {:.3e}, ||grad p|| = {:.3e}",
        diff.sqrt(),
        norm.sqrt()
    );
    Ok(())
}

/// `S` is symmetric PSD, `s(v, v) = 0` when `v_b = Q_b v_0`, and the kernel
/// has dimension exactly `n0`, so `s(v, v) = 0` forces `v_b = Q_b v_0`.
pub fn stabilizer_kernel(spec: &CellSpec, degree: usize, v0: &[f64], noise: &[f64]) -> Check {
    let mesh = single_cell_mesh(spec)?;
    let family = ElementFamily::standard(degree).map_err(err)?;
    let op = LocalOperators::new(&mesh, 0, family, &unit_problem()).map_err(err)?;
    let s = &op.stabilizer;
    let smax = s.amax();
    ensure!(smax > 0.0, "zero stabilizer");
    ensure!((s - s.transpose()).amax() <= 1e-14 * smax, "stabilizer not symmetric");
    let eig = SymmetricEigen::new(s.clone()).eigenvalues;
    let lmax = eig.max();
    ensure!(eig.min() >= -1e-11 * lmax, "negative eigenvalue {:e}", eig.min());
    let kernel = eig.iter().filter(|&&l| l <= 1e-10 * lmax).count();
    ensure!(kernel == op.n0, "kernel dimension {kernel}, expected {}", op.n0);

    let v0 = DVector::from_column_slice(&v0[..op.n0]);
    let mut v = DVector::zeros(op.ndof());
    v.rows_mut(0, op.n0).copy_from(&v0);
    for (le, proj) in op.trace_projection.iter().enumerate() {
        let t = proj * &v0;
        v.rows_mut(op.n0 + le * op.nb, op.nb).copy_from(&t);
    }
    let scale = smax * v.norm_squared();
    ensure!(op.stabilizer_form(&v) <= 1e-12 * scale, "s(v, v) = {:e} on matched traces", op.stabilizer_form(&v));
    let mut w = v.clone();
    let k = op.n0 + noise.len() % (op.ndof() - op.n0);
    w[k] += 0.5 + noise[0].abs();
    ensure!(op.stabilizer_form(&w) > 1e-10 * lmax, "mismatched trace has zero stabilizer");
    Ok(())
}

fn random_fill(values: &mut [f64], seed: &[f64]) {
    for (i, v) in values.iter_mut().enumerate() {
        *v = seed[i % seed.len()] * (1.0 + (i as f64 * 0.618).sin());
    }
}

pub fn test_partition(mesh: &Mesh, which: usize) -> SubdomainPartition {
    match which % 4 {
        0 => partition_grid(mesh, 1).unwrap(),
        1 => partition_grid(mesh, 2).unwrap(),
        2 => partition_grid(mesh, 4).unwrap(),
        _ => partition_per_element(mesh),
    }
}

/// `|||v|||_{1,Ω_j} > 0` for `v` nonzero on `Ω_j`, `= 0` for `v = 0`, and
/// positively homogeneous.
pub fn triple_norm_positivity(kind: FamilyKind, degree: usize, which: usize, seed: &[f64]) -> Check {
    let mesh = build_uniform_triangle_mesh(4).map_err(err)?;
    let family = ElementFamily::new(kind, degree).map_err(err)?;
    let part = test_partition(&mesh, which);
    let p = test1();
    let ops = OperatorSet::build(&mesh, family, &p).map_err(err)?;
    let j = seed.len() % part.num_subdomains();
    let zero = WeakFunction::zeros(&mesh, family, TraceLayout::PerSide);
    let n0 = triple_norm(&mesh, &ops, &part, j, &*p.a, &zero).map_err(err)?;
    ensure!(n0 == 0.0, "norm of zero is {n0:e}");
    let mut v = zero.clone();
    random_fill(v.interior_coefficients_mut(), seed);
    random_fill(v.trace_coefficients_mut(), &seed[1..]);
    let n1 = triple_norm(&mesh, &ops, &part, j, &*p.a, &v).map_err(err)?;
    ensure!(n1 > 0.0, "nonzero v has zero norm");
    let mut w = v.clone();
    w.scale(-2.5);
    let n2 = triple_norm(&mesh, &ops, &part, j, &*p.a, &w).map_err(err)?;
    ensure!((n2 - 2.5 * n1).abs() <= 1e-12 * n2, "not homogeneous: {n2} vs {}", 2.5 * n1);
    // a single nonzero interior coefficient on one cell of Ω_j
    let mut e = zero;
    let c = part.cells(j)[seed.len() % part.cells(j).len()];
    e.interior_mut(c)[(seed.len() / 3) % family.interior_dim()] = seed[0].abs() + 0.1;
    let n3 = triple_norm(&mesh, &ops, &part, j, &*p.a, &e).map_err(err)?;
    ensure!(n3 > 0.0, "unit interior coefficient has zero norm");
    Ok(())
}

/// `(grad_w v, grad_w v) + s(v, v)` against `(grad v_0, grad v_0) + s(v, v)`
/// over the whole square for `v = {Q_0 φ, Q_b ψ}` on two meshes; returns the
/// two ratios. Both forms vanish on constants.
pub fn norm_equivalence_ratios(degree: usize, phi: &dyn Fn(Point) -> f64, psi: &dyn Fn(Point) -> f64) -> Result<[f64; 2], String> {
    let family = ElementFamily::standard(degree).map_err(err)?;
    let mut out = [0.0; 2];
    for (slot, n) in [4usize, 8].into_iter().enumerate() {
        let mesh = build_uniform_triangle_mesh(n).map_err(err)?;
        let ops = OperatorSet::build(&mesh, family, &unit_problem()).map_err(err)?;
        let mut v = WeakFunction::interpolate(&mesh, family, phi, TraceLayout::Single).map_err(err)?;
        let traces = WeakFunction::interpolate(&mesh, family, psi, TraceLayout::Single).map_err(err)?;
        v.trace_coefficients_mut().copy_from_slice(traces.trace_coefficients());
        let (weak, strong) = forms(&mesh, &ops, &v)?;
        out[slot] = weak / strong;

        let c = WeakFunction::interpolate(&mesh, family, &|_| 1.7, TraceLayout::Single).map_err(err)?;
        let (w0, s0) = forms(&mesh, &ops, &c)?;
        // round-off relative to ||1.7||² over the unit square
        ensure!(w0 <= 1e-12 * 2.89 && s0 <= 1e-12 * 2.89, "constants: weak form {w0:e}, strong form {s0:e}");
    }
    Ok(out)
}

fn forms(mesh: &Mesh, ops: &OperatorSet, v: &WeakFunction) -> Result<(f64, f64), String> {
    let (mut weak, mut strong) = (0.0, 0.0);
    for c in 0..mesh.num_cells() {
        let op = ops.cell(c);
        let x = v.gather(mesh, c);
        let s = op.stabilizer_form(&x);
        weak += op.grad_norm_sq(&x) + s;
        let geom = mesh.geometry(c);
        let space = ops.family.cell_space(geom);
        let mut g = vec![[0.0; 2]; space.dim()];
        let mut grad = 0.0;
        for (p, w) in cell_quadrature(geom, ops.family.cell_quad_degree()).map_err(err)?.iter() {
            space.gradients(p, &mut g);
            let (mut gx, mut gy) = (0.0, 0.0);
            for (gi, ci) in g.iter().zip(v.interior(c)) {
                gx += gi[0] * ci;
                gy += gi[1] * ci;
            }
            grad += w * (gx * gx + gy * gy);
        }
        strong += grad + s;
    }
    Ok((weak, strong))
}

/// `iterate_once` gives bitwise identical output for any processing order.
pub fn order_independence(degree: usize, which: usize, order_seed: &[usize], seed: &[f64]) -> Check {
    let mesh = build_uniform_triangle_mesh(4).map_err(err)?;
    let family = ElementFamily::standard(degree).map_err(err)?;
    let part = test_partition(&mesh, which);
    let p = test1();
    let ops = OperatorSet::build(&mesh, family, &p).map_err(err)?;
    let sys = build_subdomain_systems(&mesh, &part, &ops, &p, 8.0).map_err(err)?;
    let mut state = sys.initial_state(&mesh, InitialGuess::Zero);
    random_fill(state.u.interior_coefficients_mut(), seed);
    random_fill(state.u.trace_coefficients_mut(), &seed[1..]);
    let nb = family.trace_dim();
    let mut lam = vec![0.0; state.lambda.values().len()];
    random_fill(&mut lam, &seed[2..]);
    for q in 0..lam.len() / (2 * nb) {
        for s in 0..2 {
            let o = (2 * q + s) * nb;
            state.lambda.get_mut(q, s).copy_from_slice(&lam[o..o + nb]);
        }
    }
    let reference = sys.iterate_once(&mesh, &state);
    let m = sys.num_subdomains();
    let mut order: Vec<usize> = (0..m).collect();
    for (i, &r) in order_seed.iter().enumerate() {
        let a = i % m;
        order.swap(a, r % m);
    }
    let other = sys.iterate_once_ordered(&mesh, &state, &order);
    ensure!(reference == other, "order {order:?} changes the iterate");
    Ok(())
}

/// The hybrid direct solution is reproduced by one sweep.
pub fn fixed_point(degree: usize, which: usize) -> Check {
    let mesh = build_uniform_triangle_mesh(4).map_err(err)?;
    let family = ElementFamily::standard(degree).map_err(err)?;
    let part = test_partition(&mesh, which);
    let p = test1();
    let ops = OperatorSet::build(&mesh, family, &p).map_err(err)?;
    let h = solve_hybrid_direct(&mesh, &part, &ops, &p).map_err(err)?;
    let sys = build_subdomain_systems(&mesh, &part, &ops, &p, 8.0).map_err(err)?;
    let state = wgdd::dd::InterfaceState { n: 0, u: h.u.clone(), lambda: h.lambda.clone() };
    let next = sys.iterate_once(&mesh, &state);
    let du = next.u.max_abs_diff(&h.u, &mesh);
    let dl = next.lambda.max_abs_diff(&h.lambda);
    ensure!(du <= 1e-11 && dl <= 1e-11 * (1.0 + h.lambda.values().iter().fold(0.0f64, |a, b| a.max(b.abs()))), "drift u {du:e}, λ {dl:e}");
    Ok(())
}

/// At termination of a residual-stopped run, jump and multiplier sum are
/// below `10 tol`.
pub fn consistency_at_termination(degree: usize, which: usize, tol: f64) -> Check {
    let mesh = build_uniform_triangle_mesh(4).map_err(err)?;
    let family = ElementFamily::standard(degree).map_err(err)?;
    let part = test_partition(&mesh, which);
    let p = test1();
    let ops = OperatorSet::build(&mesh, family, &p).map_err(err)?;
    let sys = build_subdomain_systems(&mesh, &part, &ops, &p, family.default_beta()).map_err(err)?;
    let out = sys.run(
        &mesh,
        &ops,
        sys.initial_state(&mesh, InitialGuess::Zero),
        StopRule::Residual { tol, max_iters: 20_000 },
        None,
    );
    ensure!(out.converged, "no convergence in 20000 iterations");
    let (_, jump, sum) = interface_residual(&sys.interfaces, &ops, &out.state.u, &out.state.lambda);
    ensure!(jump <= 10.0 * tol && sum <= 10.0 * tol, "jump {jump:e}, λ sum {sum:e}");
    Ok(())
}

/// `|a(u_h, v) + s(u_h, v) - (f, v_0)|` is round-off sized for `v ∈ W_h^0`.
pub fn galerkin_orthogonality(degree: usize, seeds: &[Vec<f64>]) -> Check {
    let mesh = build_uniform_triangle_mesh(4).map_err(err)?;
    let family = ElementFamily::standard(degree).map_err(err)?;
    let p = test1();
    let sol = solve_monolithic(&mesh, family, &p).map_err(err)?;
    let u_energy: f64 = (0..mesh.num_cells()).map(|c| sol.ops.cell(c).energy(&sol.solution.gather(&mesh, c))).sum();
    for seed in seeds {
        let mut v = WeakFunction::zeros(&mesh, family, TraceLayout::Single);
        random_fill(v.interior_coefficients_mut(), seed);
        random_fill(v.trace_coefficients_mut(), &seed[1..]);
        for e in mesh.boundary_edges().collect::<Vec<_>>() {
            v.trace_mut(e, 0).iter_mut().for_each(|x| *x = 0.0);
        }
        let v_energy: f64 = (0..mesh.num_cells()).map(|c| sol.ops.cell(c).energy(&v.gather(&mesh, c))).sum();
        let r = galerkin_residual(&mesh, &sol.ops, &sol.solution, &v);
        let scale = (u_energy * v_energy).sqrt();
        ensure!(r.abs() <= 1e-9 * scale, "residual {r:e} at scale {scale:e}");
    }
    Ok(())
}

/// Scaling `u_h - Q_h u` by `t` scales both error norms by `|t|`.
pub fn error_homogeneity(degree: usize, t: f64) -> Check {
    let mesh = build_uniform_triangle_mesh(4).map_err(err)?;
    let family = ElementFamily::standard(degree).map_err(err)?;
    let p = test1();
    let sol = solve_monolithic(&mesh, family, &p).map_err(err)?;
    let u = p.exact.clone().unwrap();
    let base = error_norms(&mesh, &sol.ops, &*u, &sol.solution).map_err(err)?;
    let qh = WeakFunction::interpolate(&mesh, family, &*u, TraceLayout::Single).map_err(err)?;
    let mut d = sol.solution.sub(&qh);
    d.scale(t);
    let mut ut = qh.clone();
    for (x, y) in ut.interior_coefficients_mut().iter_mut().zip(d.interior_coefficients()) {
        *x += y;
    }
    for (x, y) in ut.trace_coefficients_mut().iter_mut().zip(d.trace_coefficients()) {
        *x += y;
    }
    let e = error_norms(&mesh, &sol.ops, &*u, &ut).map_err(err)?;
    ensure!((e.l2 - t.abs() * base.l2).abs() <= 1e-10 * base.l2.max(e.l2), "l2 {} vs {}", e.l2, t.abs() * base.l2);
    ensure!(
        (e.energy - t.abs() * base.energy).abs() <= 1e-10 * base.energy.max(e.energy),
        "energy {} vs {}",
        e.energy,
        t.abs() * base.energy
    );
    Ok(())
}
