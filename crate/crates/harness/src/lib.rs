//! Experiment orchestration for the modal-estimation library: preset
//! benchmark signals, seeded Monte-Carlo sweeps over SNR with RMSE-vs-bound
//! tables, and runtime scaling studies. The `rdmodal` binary is a thin CLI
//! over this crate.

pub mod config;
pub mod experiment;
pub mod presets;
pub mod scaling;

pub use config::{Estimator, ExperimentConfig};
pub use experiment::{run_experiment, run_rows, ExperimentError, ExperimentOutput, ResultRow};
pub use presets::{list_presets, preset};
pub use scaling::{fit_exponent, run_scaling, ScalingConfig, ScalingRow};
