//! Config ingestion, job orchestration and report emission for the `oll` binary.

pub mod config;
pub mod job;
pub mod report;

pub use config::{parse_config, parse_config_str, JobConfig, OutputFormat, Overrides, SourceFormat};
pub use job::{run_job, run_norm, run_probe, run_rearrange, run_simulate, ProbeGrid, RunReport};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Schema violation at `path`.
    #[error("config error at {path}: {message}")]
    Config { path: String, message: String },
    #[error(transparent)]
    Core(#[from] oll_core::Error),
    #[error("{0}")]
    Usage(String),
    #[error("I/O error on {path}: {source}")]
    Io { path: String, source: std::io::Error },
}
