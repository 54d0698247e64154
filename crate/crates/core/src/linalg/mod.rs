pub mod chebyshev;
pub mod fit;
pub mod krylov;
pub mod quadrature;
pub mod sparse;

pub use sparse::{CsrMatrix, LinearOperator, Shifted};
