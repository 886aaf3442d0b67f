//! Parallel-in-time integration with Parareal and θ-Parareal.
//!
//! - [`linalg`]: vector kernels, tridiagonal and dense solves, damped Newton
//! - [`integrators`]: the shifted Crank-Nicolson θ-scheme and propagators
//! - [`problems`]: Dahlquist, heat, advection and an ALE piston model
//! - [`parareal`]: the Parareal engine, its schedulers and the speedup model
//!
//! ```
//! use pint_core::integrators::{make_propagator, ThetaSettings};
//! use pint_core::parareal::{run_parareal, PararealConfig};
//! use pint_core::problems::{ProblemKind, ProblemSpec};
//!
//! let problem = ProblemSpec::default_for(ProblemKind::Dahlquist);
//! let coarse = make_propagator(problem.clone(), ThetaSettings::crank_nicolson(0.1)).unwrap();
//! let fine = make_propagator(problem.clone(), ThetaSettings::crank_nicolson(0.01)).unwrap();
//! let s0 = problem.initial_state().unwrap();
//! let run = run_parareal(&coarse, &fine, &s0, 2.0, &PararealConfig::new(4, 3), None).unwrap();
//! assert_eq!(run.states.len(), 5);
//! ```

pub mod error;
pub mod integrators;
pub mod linalg;
pub mod parareal;
pub mod problems;

pub use error::{Error, Result};
