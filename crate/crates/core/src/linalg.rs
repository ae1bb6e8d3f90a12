//! Thin wrapper over faer's sparse direct solvers.

use std::sync::Once;

use faer::linalg::solvers::Solve;
use faer::sparse::{SparseColMat, Triplet};
use faer::{Mat, Par, Side};

use crate::error::{Error, Result};

/// faer's internal threading is switched off so that results never depend
/// on thread scheduling; parallelism happens one level up, across cells
/// and subdomains.
fn sequential_backend() {
    static INIT: Once = Once::new();
    INIT.call_once(|| faer::set_global_parallelism(Par::Seq));
}

/// Square sparse matrix in coordinate form; duplicates are summed.
#[derive(Debug, Clone, Default)]
pub struct TripletMatrix {
    n: usize,
    entries: Vec<Triplet<usize, usize, f64>>,
}

impl TripletMatrix {
    pub fn new(n: usize) -> Self {
        Self {
            n,
            entries: Vec::new(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn push(&mut self, row: usize, col: usize, val: f64) {
        debug_assert!(row < self.n && col < self.n);
        if val != 0.0 {
            self.entries.push(Triplet::new(row, col, val));
        }
    }

    pub fn to_csc(&self) -> Result<SparseColMat<usize, f64>> {
        SparseColMat::try_new_from_triplets(self.n, self.n, &self.entries)
            .map_err(|e| Error::Factorization(format!("sparse matrix construction: {e:?}")))
    }

    /// Dense copy (tests and small diagnostics only).
    pub fn to_dense(&self) -> nalgebra::DMatrix<f64> {
        let mut m = nalgebra::DMatrix::zeros(self.n, self.n);
        for t in &self.entries {
            m[(t.row, t.col)] += t.val;
        }
        m
    }

    pub fn mul_vec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for t in &self.entries {
            y[t.row] += t.val * x[t.col];
        }
        y
    }
}

enum Factor {
    Cholesky(faer::sparse::linalg::solvers::Llt<usize, f64>),
    Lu(faer::sparse::linalg::solvers::Lu<usize, f64>),
    Empty,
}

/// A factored sparse matrix, reusable for any number of right-hand sides.
pub struct SparseSolver {
    n: usize,
    factor: Factor,
}

impl std::fmt::Debug for SparseSolver {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let kind = match self.factor {
            Factor::Cholesky(_) => "cholesky",
            Factor::Lu(_) => "lu",
            Factor::Empty => "empty",
        };
        f.debug_struct("SparseSolver").field("n", &self.n).field("kind", &kind).finish()
    }
}

impl SparseSolver {
    /// Sparse Cholesky of a symmetric positive definite matrix.
    pub fn cholesky(m: &TripletMatrix) -> Result<Self> {
        sequential_backend();
        if m.n == 0 {
            return Ok(Self { n: 0, factor: Factor::Empty });
        }
        let a = m.to_csc()?;
        let llt = a
            .sp_cholesky(Side::Lower)
            .map_err(|e| Error::Factorization(format!("sparse Cholesky: {e:?}")))?;
        Ok(Self {
            n: m.n,
            factor: Factor::Cholesky(llt),
        })
    }

    /// Sparse LU with partial pivoting of a general square matrix.
    pub fn lu(m: &TripletMatrix) -> Result<Self> {
        sequential_backend();
        if m.n == 0 {
            return Ok(Self { n: 0, factor: Factor::Empty });
        }
        let a = m.to_csc()?;
        let lu = a
            .sp_lu()
            .map_err(|e| Error::Factorization(format!("sparse LU: {e:?}")))?;
        Ok(Self {
            n: m.n,
            factor: Factor::Lu(lu),
        })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, rhs: &[f64]) -> Vec<f64> {
        assert_eq!(rhs.len(), self.n);
        let b = Mat::from_fn(self.n, 1, |i, _| rhs[i]);
        let x = match &self.factor {
            Factor::Cholesky(f) => f.solve(&b),
            Factor::Lu(f) => f.solve(&b),
            Factor::Empty => return Vec::new(),
        };
        (0..self.n).map(|i| x[(i, 0)]).collect()
    }

    /// Solve followed by up to `steps` rounds of iterative refinement against
    /// `m`, stopping as soon as the residual no longer shrinks.
    pub fn solve_refined(&self, m: &TripletMatrix, rhs: &[f64], steps: usize) -> Vec<f64> {
        let residual = |x: &[f64]| -> Vec<f64> { m.mul_vec(x).iter().zip(rhs).map(|(a, b)| b - a).collect() };
        let mut x = self.solve(rhs);
        let mut r = residual(&x);
        let mut rn = norm2(&r);
        for _ in 0..steps {
            if rn == 0.0 {
                break;
            }
            let dx = self.solve(&r);
            let y: Vec<f64> = x.iter().zip(&dx).map(|(a, b)| a + b).collect();
            let ry = residual(&y);
            let yn = norm2(&ry);
            if yn >= rn {
                break;
            }
            (x, r, rn) = (y, ry, yn);
        }
        x
    }
}

pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}
