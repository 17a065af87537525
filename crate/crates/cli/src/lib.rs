//! Experiment runner, result reporting and acceptance checks for `symtoep`.

pub mod config;
pub mod error;
pub mod export;
pub mod report;
pub mod runner;
pub mod verify;

pub use config::{Example, MgOverrides, PrecondKind, RunConfig, SolverKind};
pub use error::{CliError, CliResult};
pub use report::ResultRow;
