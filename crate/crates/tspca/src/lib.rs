//! Command-line front end for `tspca-core`: CSV input, JSON configuration and
//! the result files written by `tspca analyze`, `simulate` and `experiment`.

pub mod analyze;
pub mod cli;
pub mod config;
pub mod error;
pub mod experiment;
pub mod fixtures;
pub mod io;
pub mod simulate;

pub use cli::{run, Cli};
pub use error::{CliError, CliResult};
