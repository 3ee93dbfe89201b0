//! Experiment harness for `gafzeros-core`: configuration, seeded parallel
//! trials, aggregation into goodness-of-fit reports, on-disk outputs and the
//! acceptance suites behind `gafzeros verify`.

pub mod config;
pub mod error;
pub mod output;
pub mod rho;
pub mod runner;
pub mod verify;

pub use config::ExperimentConfig;
pub use error::{HarnessError, Result};
pub use runner::{run_extremes, run_trials, AggregateOutput, TrialOutcome};
