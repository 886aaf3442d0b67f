//! Small dense and banded kernels used by the implicit integrator.
//!
//! Everything here works on plain `&[f64]` slices. Vectors handed to these
//! routines must be non-empty and finite; non-finite data is reported as
//! [`LinalgError::NumericBreakdown`] instead of being propagated silently.

mod dense;
mod newton;
mod tridiagonal;

pub use dense::DenseMatrix;
pub use newton::{newton_solve, NewtonOutcome, NewtonSettings};
pub use tridiagonal::{CyclicTridiagonal, Tridiagonal};

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
    #[error("empty vector")]
    Empty,
    #[error("zero pivot in row {row}")]
    ZeroPivot { row: usize },
    #[error("numeric breakdown: {0}")]
    NumericBreakdown(String),
    #[error("newton did not converge in {iters} iterations (residual {residual:e})")]
    MaxItersExceeded { iters: usize, residual: f64 },
    #[error("invalid settings: {0}")]
    InvalidSettings(String),
}

pub type Result<T> = std::result::Result<T, LinalgError>;

fn check_len(expected: usize, found: usize) -> Result<()> {
    if expected != found {
        return Err(LinalgError::LengthMismatch { expected, found });
    }
    Ok(())
}

pub(crate) fn check_finite(x: &[f64], what: &str) -> Result<()> {
    if x.is_empty() {
        return Err(LinalgError::Empty);
    }
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(LinalgError::NumericBreakdown(format!(
            "{what}[{i}] = {}",
            x[i]
        )));
    }
    Ok(())
}

/// `alpha * x + y`
pub fn axpy(alpha: f64, x: &[f64], y: &[f64]) -> Result<Vec<f64>> {
    check_len(x.len(), y.len())?;
    check_finite(x, "x")?;
    check_finite(y, "y")?;
    let out: Vec<f64> = x.iter().zip(y).map(|(a, b)| alpha * a + b).collect();
    check_finite(&out, "axpy")?;
    Ok(out)
}

pub fn dot(x: &[f64], y: &[f64]) -> Result<f64> {
    check_len(x.len(), y.len())?;
    check_finite(x, "x")?;
    check_finite(y, "y")?;
    Ok(x.iter().zip(y).map(|(a, b)| a * b).sum())
}

pub fn norm2(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn norm_inf(x: &[f64]) -> f64 {
    x.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
}

/// Euclidean distance `‖x - y‖₂`.
pub fn dist2(x: &[f64], y: &[f64]) -> Result<f64> {
    check_len(x.len(), y.len())?;
    Ok(x.iter()
        .zip(y)
        .map(|(a, b)| (a - b) * (a - b))
        .sum::<f64>()
        .sqrt())
}

/// Linearization of a residual in one of the storage formats the solvers know.
#[derive(Debug, Clone, PartialEq)]
pub enum Jacobian {
    Dense(DenseMatrix),
    Tridiagonal(Tridiagonal),
    CyclicTridiagonal(CyclicTridiagonal),
}

impl Jacobian {
    pub fn dim(&self) -> usize {
        match self {
            Jacobian::Dense(m) => m.dim(),
            Jacobian::Tridiagonal(t) => t.dim(),
            Jacobian::CyclicTridiagonal(c) => c.dim(),
        }
    }

    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        match self {
            Jacobian::Dense(m) => m.matvec(x),
            Jacobian::Tridiagonal(t) => t.matvec(x),
            Jacobian::CyclicTridiagonal(c) => c.matvec(x),
        }
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        match self {
            Jacobian::Dense(m) => m.solve(b),
            Jacobian::Tridiagonal(t) => t.solve(b),
            Jacobian::CyclicTridiagonal(c) => c.solve(b),
        }
    }

    /// Returns `I - alpha * self` in the same storage format.
    pub fn identity_minus(&self, alpha: f64) -> Jacobian {
        match self {
            Jacobian::Dense(m) => Jacobian::Dense(m.identity_minus(alpha)),
            Jacobian::Tridiagonal(t) => Jacobian::Tridiagonal(t.identity_minus(alpha)),
            Jacobian::CyclicTridiagonal(c) => Jacobian::CyclicTridiagonal(c.identity_minus(alpha)),
        }
    }
}
