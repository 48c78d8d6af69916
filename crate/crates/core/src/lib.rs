//! Matrix-scale laboratory for left m-invertible operators, m-isometries,
//! (m,C)-isometries and similarity to isometries.

pub mod cli;
pub mod conj;
pub mod error;
pub mod gen;
pub mod matcore;
pub mod metric;
pub mod minv;
pub mod report;
pub mod suite;

pub use error::{OpsError, Result};
pub use matcore::{ComplexMatrix, ToleranceConfig};
