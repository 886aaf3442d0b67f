use std::sync::atomic::{AtomicU64, Ordering};
use std::time::{Duration, Instant};

use super::theta::{step_to, OdeSystem, ThetaSettings};
use super::State;
use crate::error::{Error, Result};

/// Window/step mismatch below this relative size is absorbed into the last step.
pub const WINDOW_RTOL: f64 = 1e-9;

/// Advances a state over a time window with a fixed internal step.
///
/// Implementations are immutable once built; `advance` must be deterministic
/// and `advance(s, s.time())` must return `s` unchanged.
pub trait Propagator: Send + Sync {
    fn advance(&self, s: &State, t_end: f64) -> Result<State>;

    fn step(&self) -> f64;

    /// Seconds per internal step, used by the speedup model.
    fn cost_hint(&self) -> f64;

    fn stats(&self) -> PropagatorStats {
        PropagatorStats::default()
    }
}

/// Number of internal steps in `[t_start, t_end]`, or an error if the window
/// is not a multiple of `step`.
pub fn steps_in_window(t_start: f64, t_end: f64, step: f64) -> Result<usize> {
    let window = t_end - t_start;
    if !(window >= 0.0) {
        return Err(Error::InvalidSettings(format!(
            "cannot advance backwards from {t_start} to {t_end}"
        )));
    }
    if window == 0.0 {
        return Ok(0);
    }
    let n = (window / step).round();
    if n < 1.0 || (n * step - window).abs() > WINDOW_RTOL * window {
        return Err(Error::NonDivisibleWindow { window, step });
    }
    Ok(n as usize)
}

/// Counters a propagator accumulates across all `advance` calls.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct PropagatorStats {
    pub advances: u64,
    pub steps: u64,
    pub newton_iterations: u64,
    pub newton_seconds: f64,
}

#[derive(Debug, Default)]
struct Counters {
    advances: AtomicU64,
    steps: AtomicU64,
    newton_iterations: AtomicU64,
    newton_nanos: AtomicU64,
}

impl Counters {
    fn snapshot(&self) -> PropagatorStats {
        PropagatorStats {
            advances: self.advances.load(Ordering::Relaxed),
            steps: self.steps.load(Ordering::Relaxed),
            newton_iterations: self.newton_iterations.load(Ordering::Relaxed),
            newton_seconds: self.newton_nanos.load(Ordering::Relaxed) as f64 * 1e-9,
        }
    }
}

/// Repeated θ-steps of one problem.
#[derive(Debug)]
pub struct ThetaPropagator<P> {
    problem: P,
    settings: ThetaSettings,
    cost_hint: f64,
    counters: Counters,
}

pub fn make_propagator<P: OdeSystem>(problem: P, settings: ThetaSettings) -> Result<ThetaPropagator<P>> {
    settings.validate()?;
    Ok(ThetaPropagator {
        problem,
        settings,
        cost_hint: 1.0,
        counters: Counters::default(),
    })
}

impl<P: OdeSystem> ThetaPropagator<P> {
    pub fn with_cost_hint(mut self, seconds_per_step: f64) -> Self {
        self.cost_hint = seconds_per_step;
        self
    }

    pub fn problem(&self) -> &P {
        &self.problem
    }

    pub fn settings(&self) -> &ThetaSettings {
        &self.settings
    }
}

impl<P: OdeSystem> Propagator for ThetaPropagator<P> {
    fn advance(&self, s: &State, t_end: f64) -> Result<State> {
        let t0 = s.time();
        let k = self.settings.step;
        let n = steps_in_window(t0, t_end, k)?;
        self.counters.advances.fetch_add(1, Ordering::Relaxed);
        if n == 0 {
            return Ok(s.clone());
        }
        let clock = Instant::now();
        let mut newton = 0;
        let mut state = s.clone();
        for j in 1..=n {
            let t_next = if j == n { t_end } else { t0 + j as f64 * k };
            let (next, iters) = step_to(&self.problem, &state, t_next, &self.settings)?;
            newton += iters;
            state = next;
        }
        state.set_time(t_end);
        self.counters.steps.fetch_add(n as u64, Ordering::Relaxed);
        self.counters
            .newton_iterations
            .fetch_add(newton as u64, Ordering::Relaxed);
        self.counters
            .newton_nanos
            .fetch_add(clock.elapsed().as_nanos() as u64, Ordering::Relaxed);
        Ok(state)
    }

    fn step(&self) -> f64 {
        self.settings.step
    }

    fn cost_hint(&self) -> f64 {
        self.cost_hint
    }

    fn stats(&self) -> PropagatorStats {
        self.counters.snapshot()
    }
}

/// Propagator with a prescribed wall-clock cost per step.
///
/// Numerically it applies backward Euler to `y' = rate * y`; each `advance`
/// sleeps for `steps * cost_per_step` in one go. Used to measure scheduler
/// overhead independently of solver cost.
#[derive(Debug)]
pub struct SyntheticPropagator {
    step: f64,
    rate: f64,
    cost_per_step: Duration,
    counters: Counters,
}

impl SyntheticPropagator {
    pub fn new(step: f64, rate: f64, cost_per_step: Duration) -> Result<Self> {
        if !(step.is_finite() && step > 0.0) || !rate.is_finite() || 1.0 - rate * step == 0.0 {
            return Err(Error::InvalidSettings(format!(
                "synthetic propagator step {step}, rate {rate}"
            )));
        }
        Ok(Self {
            step,
            rate,
            cost_per_step,
            counters: Counters::default(),
        })
    }
}

impl Propagator for SyntheticPropagator {
    fn advance(&self, s: &State, t_end: f64) -> Result<State> {
        let n = steps_in_window(s.time(), t_end, self.step)?;
        self.counters.advances.fetch_add(1, Ordering::Relaxed);
        if n == 0 {
            return Ok(s.clone());
        }
        std::thread::sleep(self.cost_per_step * n as u32);
        let factor = (1.0 / (1.0 - self.rate * self.step)).powi(n as i32);
        let values = s.values().iter().map(|v| v * factor).collect();
        self.counters.steps.fetch_add(n as u64, Ordering::Relaxed);
        s.with_values(values, t_end)
    }

    fn step(&self) -> f64 {
        self.step
    }

    fn cost_hint(&self) -> f64 {
        self.cost_per_step.as_secs_f64()
    }

    fn stats(&self) -> PropagatorStats {
        self.counters.snapshot()
    }
}
