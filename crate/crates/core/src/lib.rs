//! Weak Galerkin finite elements on polygonal meshes, with a hybridized
//! domain decomposition solver and a parallel Robin-type interface iteration.

pub mod assembly;
pub mod convergence;
pub mod dd;
pub mod driver;
pub mod error;
pub mod linalg;
pub mod mesh;
pub mod polybasis;
pub mod problem;
pub mod wgcore;

pub use error::{Error, Result};
