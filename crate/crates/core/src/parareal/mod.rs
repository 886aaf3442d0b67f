//! Parareal and θ-Parareal.
//!
//! The time domain is split into `L` equal intervals. A cheap coarse
//! propagator predicts the boundary values, expensive fine propagations over
//! every interval run independently, and a sequential corrector sweep
//! combines them:
//!
//! ```text
//! U_b^i = θ C(U_{b-1}^i) + F(U_{b-1}^{i-1}) − θ C(U_{b-1}^{i-1})
//! ```
//!
//! Classic Parareal uses `θ = 1`; the θ variants pick `θ` per boundary from
//! the fine and coarse values. Both schedulers execute the same task graph
//! ([`pipelined_schedule`]) and produce identical numbers.

mod engine;
mod pipelined;
mod plan;
mod speedup;
mod trace;
mod weights;

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::integrators::{steps_in_window, Propagator, State};
use crate::linalg::{dist2, norm2};

pub use plan::{pipelined_schedule, SchedulePlan, Task, TaskKind};
pub use speedup::{theoretical_speedup, SpeedupModel};
pub use trace::{IterationRecord, RunTrace};
pub use weights::{parareal_update, theta_weight, DEGENERATE_INNER};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Variant {
    Classic,
    ThetaLeastSquares,
    ThetaAnglePenalized,
}

impl Variant {
    pub const ALL: [Variant; 3] = [
        Variant::Classic,
        Variant::ThetaLeastSquares,
        Variant::ThetaAnglePenalized,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Variant::Classic => "classic",
            Variant::ThetaLeastSquares => "theta_lsq",
            Variant::ThetaAnglePenalized => "theta_angle",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.name() == s)
            .ok_or_else(|| Error::InvalidSettings(format!("unknown variant {s:?}")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheduler {
    Serial,
    Pipelined { workers: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PararealConfig {
    pub intervals: usize,
    pub max_iters: usize,
    /// Relative successive-correction tolerance.
    pub tol: f64,
    pub variant: Variant,
    pub theta_clamp: (f64, f64),
    pub scheduler: Scheduler,
}

impl PararealConfig {
    pub fn new(intervals: usize, max_iters: usize) -> Self {
        Self {
            intervals,
            max_iters,
            tol: 1e-10,
            variant: Variant::Classic,
            theta_clamp: (0.0, 1.0),
            scheduler: Scheduler::Serial,
        }
    }

    pub fn with_variant(mut self, variant: Variant) -> Self {
        self.variant = variant;
        self
    }

    pub fn with_scheduler(mut self, scheduler: Scheduler) -> Self {
        self.scheduler = scheduler;
        self
    }

    pub fn with_tol(mut self, tol: f64) -> Self {
        self.tol = tol;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSettings(m));
        if self.intervals < 2 {
            return bad(format!("need at least 2 intervals, got {}", self.intervals));
        }
        if self.max_iters > self.intervals {
            return bad(format!(
                "max_iters {} exceeds the interval count {}",
                self.max_iters, self.intervals
            ));
        }
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return bad(format!("tolerance must be positive, got {}", self.tol));
        }
        let (lo, hi) = self.theta_clamp;
        if !(lo.is_finite() && hi.is_finite() && lo <= hi) {
            return bad(format!("invalid theta clamp [{lo}, {hi}]"));
        }
        if let Scheduler::Pipelined { workers: 0 } = self.scheduler {
            return bad("pipelined scheduler needs at least one worker".into());
        }
        Ok(())
    }
}

/// `L + 1` equally spaced boundaries from `t0` to `t_end`.
pub fn time_grid(t0: f64, t_end: f64, intervals: usize) -> Result<Vec<f64>> {
    if intervals == 0 || !(t_end > t0) {
        return Err(Error::InvalidSettings(format!(
            "cannot split [{t0}, {t_end}] into {intervals} intervals"
        )));
    }
    let dt = (t_end - t0) / intervals as f64;
    let mut grid: Vec<f64> = (0..=intervals).map(|l| t0 + l as f64 * dt).collect();
    grid[intervals] = t_end;
    Ok(grid)
}

/// One uninterrupted fine propagation, sampled at every grid point.
pub fn sequential_solve(fine: &dyn Propagator, s0: &State, t_grid: &[f64]) -> Result<Vec<State>> {
    if t_grid.len() < 2 {
        return Err(Error::InvalidSettings("time grid needs at least two points".into()));
    }
    if t_grid[0] != s0.time() {
        return Err(Error::InvalidSettings(format!(
            "grid starts at {} but the state is at {}",
            t_grid[0],
            s0.time()
        )));
    }
    if t_grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidSettings("time grid must be strictly increasing".into()));
    }
    let mut out = Vec::with_capacity(t_grid.len());
    out.push(s0.clone());
    for &t in &t_grid[1..] {
        let next = fine.advance(out.last().unwrap(), t)?;
        out.push(next);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryError {
    pub value: f64,
    /// Set when the sequential value is the zero vector and `value` is the
    /// absolute error.
    pub absolute: bool,
}

/// Relative Euclidean error `‖v_p − v_s‖ / ‖v_s‖` at each boundary.
pub fn boundary_error(parareal: &[State], sequential: &[State]) -> Result<Vec<BoundaryError>> {
    if parareal.len() != sequential.len() {
        return Err(Error::LayoutMismatch(format!(
            "{} parareal states against {} sequential ones",
            parareal.len(),
            sequential.len()
        )));
    }
    parareal
        .iter()
        .zip(sequential)
        .map(|(p, s)| {
            let diff = dist2(p.values(), s.values())?;
            let scale = norm2(s.values());
            Ok(if scale > 0.0 {
                BoundaryError {
                    value: diff / scale,
                    absolute: false,
                }
            } else {
                BoundaryError {
                    value: diff,
                    absolute: true,
                }
            })
        })
        .collect()
}

#[derive(Debug, Clone)]
pub struct PararealRun {
    /// Boundary values `U_0 .. U_L` after the last iteration.
    pub states: Vec<State>,
    pub trace: RunTrace,
}

/// Runs Parareal from `s0` over `[s0.time, t_end]`.
///
/// `oracle`, when given, is the sequential fine solution at the boundaries
/// and fills in the per-iteration boundary errors.
pub fn run_parareal(
    coarse: &dyn Propagator,
    fine: &dyn Propagator,
    s0: &State,
    t_end: f64,
    cfg: &PararealConfig,
    oracle: Option<&[State]>,
) -> Result<PararealRun> {
    cfg.validate()?;
    let grid = time_grid(s0.time(), t_end, cfg.intervals)?;
    for w in grid.windows(2) {
        steps_in_window(w[0], w[1], coarse.step())?;
        steps_in_window(w[0], w[1], fine.step())?;
    }
    if let Some(seq) = oracle {
        if seq.len() != cfg.intervals + 1 {
            return Err(Error::LayoutMismatch(format!(
                "oracle has {} states, expected {}",
                seq.len(),
                cfg.intervals + 1
            )));
        }
    }
    let plan = pipelined_schedule(cfg.intervals, cfg.max_iters);
    let ctx = engine::Context::new(coarse, fine, grid, cfg);
    let (states, trace) = match cfg.scheduler {
        Scheduler::Serial | Scheduler::Pipelined { workers: 1 } => {
            engine::run_serial(&ctx, &plan, s0, cfg, oracle)?
        }
        Scheduler::Pipelined { workers } => pipelined::run(&ctx, &plan, s0, cfg, oracle, workers)?,
    };
    Ok(PararealRun { states, trace })
}
