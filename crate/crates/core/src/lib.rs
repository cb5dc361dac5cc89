//! Eigenvalues of the discretized fractional Laplacian (zero exterior data) on
//! intervals and planar domains, and the Weyl-type bounds on their partial sums.

pub mod bounds;
pub mod eigen;
pub mod error;
pub mod estimates;
pub mod geometry;
pub mod operator;
pub mod quadrature;
pub mod report;
pub mod special;
pub mod suite;

pub use error::{Error, Result};
pub use special::{ConstantsTable, FractionalOrder};
