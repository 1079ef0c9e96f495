//! Experiment runner for QIM sweeps over synthesized broadcast hosts.

pub mod analysis;
pub mod error;
pub mod output;
pub mod plan;
pub mod runner;
pub mod seeds;
pub mod spectrum;

pub use error::{HarnessError, Result};
pub use output::{emit_csv, emit_series, parse_csv, Figure};
pub use plan::{AlphaSetting, ExperimentPlan};
pub use runner::{run_plan, SweepResult};
pub use spectrum::{emit_spectrum, run_spectrum, SpectrumResult};
