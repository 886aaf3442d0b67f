use thiserror::Error;

use crate::linalg::LinalgError;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Linalg(#[from] LinalgError),
    #[error("invalid problem: {0}")]
    InvalidProblem(String),
    #[error("invalid settings: {0}")]
    InvalidSettings(String),
    #[error("mesh degenerate: |u| = {displacement:e} reaches limit {limit:e}")]
    MeshDegenerate { displacement: f64, limit: f64 },
    #[error("layout mismatch: {0}")]
    LayoutMismatch(String),
    #[error("window {window:e} is not an integer multiple of step {step:e}")]
    NonDivisibleWindow { window: f64, step: f64 },
    #[error("theta step at t = {time}, k = {step:e} failed: {source}")]
    StepFailed {
        time: f64,
        step: f64,
        #[source]
        source: Box<Error>,
    },
    #[error("propagation failed in iteration {iteration}, interval {interval}: {source}")]
    Propagation {
        iteration: usize,
        interval: usize,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
