//! Error norms against exact solutions, convergence rates and tables.

mod norms;
mod table;

pub use norms::{
    energy_error, error_norms, interior_l2_norm, l2_error, triple_norm, weak_gradient_norm, ErrorNorms,
};
pub use table::{
    format_sci, rates, ConvergenceRow, ConvergenceTable, Rate, TableFormat, TableMeta,
    DEFAULT_ROUNDOFF_FLOOR,
};
