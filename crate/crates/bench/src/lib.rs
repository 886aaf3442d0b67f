//! Benchmark harness for `pint-core`: experiment configs, result files and
//! speedup reports.

pub mod check;
pub mod config;
pub mod experiment;
pub mod output;
pub mod report;

pub use config::{ExperimentConfig, Format};
pub use experiment::{rows_from_run, run_experiment, ResultRow, RunLabels};
pub use report::{speedup_report, SpeedupReport};

#[derive(Debug, thiserror::Error)]
pub enum BenchError {
    #[error("config error: {0}")]
    Config(String),
    #[error("numerical failure: {0}")]
    Numerical(String),
    #[error("i/o error: {0}")]
    Io(String),
}

impl BenchError {
    pub fn exit_code(&self) -> i32 {
        match self {
            BenchError::Config(_) => 2,
            BenchError::Numerical(_) => 3,
            BenchError::Io(_) => 4,
        }
    }
}
