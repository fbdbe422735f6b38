//! Command-line front end: instance specification, solver selection,
//! reference-table reproduction and normal-limit diagnostics.

pub mod app;
pub mod clt;
pub mod rate;
pub mod record;
pub mod reference;
pub mod render;
pub mod tables;

pub use app::{run, Cli, EXIT_CHECK_FAILED, EXIT_PASS, EXIT_USAGE};
pub use rate::RateRule;
pub use record::{Instance, RunRecord};
