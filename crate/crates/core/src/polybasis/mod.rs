//! Polynomial bases on cells and edges, quadrature, and Gram matrices.

pub mod quadrature;
pub mod spaces;

pub use quadrature::{cell_quadrature, edge_quadrature, gauss_legendre, triangle_quadrature, QuadratureRule};
pub use spaces::{
    gram_matrix, legendre, poly_dim, Basis, CellSpace, EdgeSpace, RaviartThomasSpace, VectorBasis,
    VectorPolySpace,
};
