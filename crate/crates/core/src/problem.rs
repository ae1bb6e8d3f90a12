//! Model problems `-div(a grad u) + c u = f` on the unit square with
//! Dirichlet data `g`.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use crate::error::Error;
use crate::mesh::Point;

pub type Field = Arc<dyn Fn(Point) -> f64 + Send + Sync>;

#[derive(Clone)]
pub struct Problem {
    pub name: String,
    pub a: Field,
    pub c: Field,
    pub f: Field,
    pub g: Field,
    /// Exact solution when known.
    pub exact: Option<Field>,
}

impl fmt::Debug for Problem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Problem").field("name", &self.name).finish_non_exhaustive()
    }
}

fn field(f: impl Fn(Point) -> f64 + Send + Sync + 'static) -> Field {
    Arc::new(f)
}

impl Problem {
    pub fn new(
        name: impl Into<String>,
        a: impl Fn(Point) -> f64 + Send + Sync + 'static,
        c: impl Fn(Point) -> f64 + Send + Sync + 'static,
        f: impl Fn(Point) -> f64 + Send + Sync + 'static,
        g: impl Fn(Point) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            name: name.into(),
            a: field(a),
            c: field(c),
            f: field(f),
            g: field(g),
            exact: None,
        }
    }

    /// Uses `u` both as the exact solution and as boundary data.
    pub fn with_exact(mut self, u: impl Fn(Point) -> f64 + Send + Sync + 'static) -> Self {
        let u = field(u);
        self.g = u.clone();
        self.exact = Some(u);
        self
    }

    pub fn from_id(id: TestCase) -> Self {
        match id {
            TestCase::Test1 => test1(),
            TestCase::Test2 => test2(),
            TestCase::Test3 => test3(),
            TestCase::Manufactured => manufactured(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TestCase {
    Test1,
    Test2,
    Test3,
    Manufactured,
}

impl TestCase {
    pub fn as_str(self) -> &'static str {
        match self {
            TestCase::Test1 => "test1",
            TestCase::Test2 => "test2",
            TestCase::Test3 => "test3",
            TestCase::Manufactured => "manufactured",
        }
    }
}

impl fmt::Display for TestCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TestCase {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self, Error> {
        match s {
            "test1" => Ok(TestCase::Test1),
            "test2" => Ok(TestCase::Test2),
            "test3" => Ok(TestCase::Test3),
            "manufactured" => Ok(TestCase::Manufactured),
            other => Err(Error::Config(format!("unknown test `{other}`"))),
        }
    }
}

// x^2 (1-x)^2 and its first two derivatives
fn bump(x: f64) -> (f64, f64, f64) {
    let v = x * x * (1.0 - x) * (1.0 - x);
    let d1 = 2.0 * x * (1.0 - x) * (1.0 - 2.0 * x);
    let d2 = 2.0 - 12.0 * x + 12.0 * x * x;
    (v, d1, d2)
}

/// Variable diffusion `a = 2 - x(1 - x)`, `c = 1`,
/// `u = 64 x^2 (1-x)^2 y^2 (1-y)^2`.
pub fn test1() -> Problem {
    let f = |p: Point| {
        let (x, y) = (p[0], p[1]);
        let (bx, dbx, ddbx) = bump(x);
        let (by, _, ddby) = bump(y);
        let a = 2.0 - x * (1.0 - x);
        let ax = 2.0 * x - 1.0;
        let u = 64.0 * bx * by;
        -(a * 64.0 * (ddbx * by + bx * ddby) + ax * 64.0 * dbx * by) + u
    };
    Problem::new("test1", |p| 2.0 - p[0] * (1.0 - p[0]), |_| 1.0, f, |_| 0.0).with_exact(|p| {
        64.0 * bump(p[0]).0 * bump(p[1]).0
    })
}

/// Poisson with `u = 4 (x - x^3)(y - y^3)`.
pub fn test2() -> Problem {
    let f = |p: Point| {
        let (x, y) = (p[0], p[1]);
        24.0 * (x * (y - y.powi(3)) + y * (x - x.powi(3)))
    };
    Problem::new("test2", |_| 1.0, |_| 0.0, f, |_| 0.0)
        .with_exact(|p| 4.0 * (p[0] - p[0].powi(3)) * (p[1] - p[1].powi(3)))
}

/// Poisson with `u = sin(pi x) sin(pi y)`.
pub fn test3() -> Problem {
    let u = |p: Point| (PI * p[0]).sin() * (PI * p[1]).sin();
    Problem::new("test3", |_| 1.0, |_| 0.0, move |p| 2.0 * PI * PI * u(p), |_| 0.0).with_exact(u)
}

/// Linear solution `u = x + y` reproduced exactly by every element.
pub fn manufactured() -> Problem {
    Problem::new("manufactured", |_| 1.0, |_| 0.0, |_| 0.0, |_| 0.0)
        .with_exact(|p| p[0] + p[1])
}
