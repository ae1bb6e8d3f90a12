use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("mesh file line {line}: {message}")]
    MeshFormat { line: usize, message: String },

    #[error("invalid mesh: {0}")]
    InvalidMesh(String),

    #[error("cell {cell} is not a triangle; uniform refinement only handles triangles")]
    UnsupportedRefinement { cell: usize },

    #[error("partition error at cell {cell}: {message}")]
    Partition { cell: usize, message: String },

    #[error("degenerate geometry: {0}")]
    DegenerateGeometry(String),

    #[error("singular Gram matrix ({0})")]
    SingularGram(String),

    #[error("coefficient {name} = {value} violates its bound at ({x}, {y}) in cell {cell}")]
    CoefficientBound {
        name: &'static str,
        value: f64,
        cell: usize,
        x: f64,
        y: f64,
    },

    #[error("factorization failed: {0}")]
    Factorization(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("diagnostic check failed: {0}")]
    Diagnostic(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
