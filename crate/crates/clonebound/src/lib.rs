//! Command-line front end, file formats and parallel oracle restarts for
//! [`clonebound_core`].

pub mod cli;
pub mod error;
pub mod format;
pub mod parallel;

pub use error::CliError;
