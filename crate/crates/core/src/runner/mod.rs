//! Algorithm loops, configuration and run artifacts.

pub mod config;
pub mod rng;
mod run;

pub use config::{Algorithm, BatchSizes, RunConfig};
pub use run::{run, run_with, IterationReport, OffspringRecord, RunArtifacts, Runner};
