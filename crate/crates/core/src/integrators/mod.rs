//! θ-scheme time stepping and the propagator contract used by Parareal.
//!
//! A θ-step solves
//!
//! ```text
//! y_n - y_{n-1} - k [θ f(y_n, t_n) + (1 - θ) f(y_{n-1}, t_{n-1})] = 0
//! ```
//!
//! with Newton's method. `θ = 1/2 + θ₀ k` gives Crank-Nicolson for `θ₀ = 0`
//! and a slightly damped variant for small positive `θ₀`.

mod order;
mod propagator;
mod state;
mod theta;

pub use order::{convergence_order, convergence_order_with, OrderFit};
pub use propagator::{
    make_propagator, steps_in_window, Propagator, PropagatorStats, SyntheticPropagator,
    ThetaPropagator, WINDOW_RTOL,
};
pub use state::{Block, Layout, State};
pub use theta::{theta_step, OdeSystem, ThetaSettings};
