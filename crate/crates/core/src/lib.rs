//! Principal component analysis for multivariate time series with standard
//! errors that account for serial dependence.
//!
//! The crate is `no_std` (it needs `alloc`). Enable the `parallel` feature to
//! run Monte Carlo and bootstrap replicates on rayon; results are identical
//! either way.

#![no_std]
extern crate alloc;

pub mod asymcov;
pub mod bootstrap;
pub mod dgp;
pub mod eigen;
pub mod error;
pub mod experiments;
pub mod inference;
pub mod linalg;
pub mod series;
pub mod spectral;
pub mod stats;

pub use error::{Error, Result};
pub use linalg::{CMatrix, Matrix};
pub use series::MultivariateSeries;
