//! Experiments for exact Monte Carlo fusion: configuration, targets,
//! sample generation, summaries and horizon sweeps, with CSV/JSON output.

pub mod config;
pub mod error;
pub mod experiment;
pub mod kde;
pub mod surrogate;
pub mod sweep;
pub mod targets;

pub use config::{ConfigSpec, ExperimentConfig, SurrogateSource, Target};
pub use error::{HarnessError, Result};
pub use experiment::{run_experiment, simulate, summarize, RunOutput, Summary};
pub use kde::kde;
pub use surrogate::preliminary_surrogate;
pub use sweep::{run_sweep, sweep_t, SweepRow};
