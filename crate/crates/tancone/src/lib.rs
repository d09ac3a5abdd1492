//! Problem and body files, reports, and the `tancone` command line.

pub mod bodyfile;
pub mod cli;
pub mod commands;
pub mod problem;
pub mod report;

pub use cli::run;
pub use commands::{RunConfig, Source, EXIT_ERROR, EXIT_OK, EXIT_UNKNOWN};
pub use problem::{load_problem, LoadError};
