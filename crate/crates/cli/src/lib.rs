//! Configuration-driven runs of the denoiser pipeline: optimize, evaluate,
//! sample, analyze and sweep, each persisting CSV tables and a JSON artifact.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;

pub use commands::{cmd_analyze, cmd_evaluate, cmd_optimize, cmd_sample, cmd_sweep, optimize_denoiser, Denoisers};
pub use config::{RunConfig, Task};
pub use error::{CliError, CliResult, EXIT_CONFIG, EXIT_NUMERICAL};
pub use output::{fingerprint, DenoiserFile, RunArtifact};
