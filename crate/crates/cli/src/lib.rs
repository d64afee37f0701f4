//! Orchestration for the chiral bag toolkit: configuration loading, the verification suites
//! behind each command, result envelopes and plot data.

pub mod envelope;
pub mod plot;
pub mod run;
pub mod suites;

pub use envelope::{Assertion, Measured, Point, Report, ResultEnvelope};
pub use plot::emit_plot_data;
pub use run::{load_config, run, write_outputs, Command};

/// Environment variable naming the default configuration file.
pub const CONFIG_ENV: &str = "CHIRAL_BAG_CONFIG";

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    /// Bad arguments or configuration; exit status 2.
    #[error("usage error: {0}")]
    Usage(String),
    /// Output could not be written; exit status 2.
    #[error("i/o error: {0}")]
    Io(String),
}
