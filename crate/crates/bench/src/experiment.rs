use std::time::Instant;

use pint_core::integrators::{make_propagator, Propagator, PropagatorStats, State, ThetaSettings};
use pint_core::parareal::{
    boundary_error, run_parareal, sequential_solve, theoretical_speedup, time_grid, PararealConfig,
    PararealRun, Scheduler, SpeedupModel, Variant,
};
use pint_core::problems::ProblemSpec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::config::ExperimentConfig;
use crate::BenchError;

/// Variant label of the rows holding the discretization error of the
/// sequential fine solution.
pub const DISCRETIZATION: &str = "discretization";

/// One output line.
///
/// Three shapes share the columns:
/// - boundary rows: `boundary` set, error and θ of that boundary at `iter`
/// - discretization rows: `variant == "discretization"`, `iter == 0`
/// - summary rows: `boundary` empty, timings and speedups filled in
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResultRow {
    pub problem: String,
    #[serde(rename = "K")]
    pub coarse_step: f64,
    pub k: f64,
    pub variant: String,
    pub iter: usize,
    pub boundary: Option<usize>,
    pub rel_err: Option<f64>,
    pub theta: Option<f64>,
    pub t_seq_s: Option<f64>,
    pub t_par_s: Option<f64>,
    pub speedup_meas: Option<f64>,
    pub speedup_theory: Option<f64>,
}

impl ResultRow {
    pub fn is_summary(&self) -> bool {
        self.boundary.is_none() && self.variant != DISCRETIZATION
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NewtonRecord {
    #[serde(rename = "K")]
    pub coarse_step: f64,
    pub variant: String,
    pub role: String,
    pub advances: u64,
    pub steps: u64,
    pub newton_iterations: u64,
    pub newton_seconds: f64,
}

impl NewtonRecord {
    fn new(coarse_step: f64, variant: &str, role: &str, s: PropagatorStats) -> Self {
        Self {
            coarse_step,
            variant: variant.to_string(),
            role: role.to_string(),
            advances: s.advances,
            steps: s.steps,
            newton_iterations: s.newton_iterations,
            newton_seconds: s.newton_seconds,
        }
    }
}

#[derive(Debug)]
pub struct ExperimentOutcome {
    pub rows: Vec<ResultRow>,
    pub newton: Vec<NewtonRecord>,
    /// Set when a propagation failed; `rows` then holds what was finished.
    pub failure: Option<BenchError>,
}

/// Labels attached to the rows of one Parareal run.
#[derive(Debug, Clone)]
pub struct RunLabels<'a> {
    pub problem: &'a str,
    pub coarse_step: f64,
    pub fine_step: f64,
    pub variant: &'a str,
}

/// Boundary rows for iterations `1..=last` and one summary row.
///
/// The summary picks the first iteration whose largest boundary error is
/// at most the largest entry of `discretization`. Without error data, or if
/// no iteration gets there, it uses the last iteration.
pub fn rows_from_run(
    labels: &RunLabels<'_>,
    run: &PararealRun,
    discretization: Option<&[f64]>,
    t_seq: f64,
) -> Result<Vec<ResultRow>, BenchError> {
    let row = |iter, boundary| ResultRow {
        problem: labels.problem.to_string(),
        coarse_step: labels.coarse_step,
        k: labels.fine_step,
        variant: labels.variant.to_string(),
        iter,
        boundary,
        rel_err: None,
        theta: None,
        t_seq_s: None,
        t_par_s: None,
        speedup_meas: None,
        speedup_theory: None,
    };
    let trace = &run.trace;
    let mut rows = Vec::new();
    for rec in trace.iterations.iter().skip(1) {
        for b in 1..=trace.intervals {
            rows.push(ResultRow {
                rel_err: rec.boundary_errors.as_ref().map(|e| e[b]),
                theta: rec.thetas[b],
                t_par_s: Some(rec.elapsed_s),
                ..row(rec.iteration, Some(b))
            });
        }
    }

    let target = discretization.map(|d| d.iter().cloned().fold(0.0, f64::max));
    let reached = target.and_then(|target| {
        trace
            .iterations
            .iter()
            .find(|r| r.max_error().is_some_and(|e| e <= target))
    });
    let chosen = reached.or(trace.iterations.last()).ok_or_else(|| {
        BenchError::Numerical("Parareal run produced no iterations".into())
    })?;
    let iters = chosen.iteration.max(1).min(trace.intervals);
    let r = labels.fine_step / labels.coarse_step;
    let model = SpeedupModel::new(r, iters, trace.intervals).map_err(|e| BenchError::Config(e.to_string()))?;
    // wall time can round to zero on trivial problems
    let t_par = chosen.elapsed_s.max(f64::MIN_POSITIVE);
    rows.push(ResultRow {
        rel_err: chosen.max_error(),
        t_seq_s: Some(t_seq),
        t_par_s: Some(t_par),
        speedup_meas: Some(t_seq / t_par),
        speedup_theory: Some(theoretical_speedup(&model)),
        ..row(chosen.iteration, None)
    });
    Ok(rows)
}

fn initial_state(cfg: &ExperimentConfig) -> Result<State, BenchError> {
    let mut s0 = cfg.problem.initial_state().map_err(|e| BenchError::Config(e.to_string()))?;
    if cfg.init_noise > 0.0 {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
        for v in s0.values_mut() {
            *v += rng.random_range(-cfg.init_noise..=cfg.init_noise);
        }
    }
    Ok(s0)
}

fn numerical(e: pint_core::Error) -> BenchError {
    BenchError::Numerical(e.to_string())
}

/// Reference values at the boundaries: the closed form for Dahlquist,
/// otherwise a sequential run with the fine step divided by the refinement
/// factor.
fn reference(cfg: &ExperimentConfig, s0: &State, grid: &[f64], fine: &ThetaSettings) -> Result<Vec<State>, BenchError> {
    if let ProblemSpec::Dahlquist(p) = cfg.problem {
        return grid
            .iter()
            .map(|&t| {
                let values = s0.values().iter().map(|y| y * (p.lambda * t).exp()).collect();
                s0.with_values(values, t).map_err(numerical)
            })
            .collect();
    }
    let refined = ThetaSettings {
        step: fine.step / cfg.reference_fine_factor as f64,
        ..*fine
    };
    let prop = make_propagator(cfg.problem, refined).map_err(numerical)?;
    sequential_solve(&prop, s0, grid).map_err(numerical)
}

/// Runs the whole (K, variant) matrix.
///
/// The sequential fine solution and the reference depend on neither K nor
/// the variant, so they are computed once. `progress` sees each finished
/// run.
pub fn run_experiment(cfg: &ExperimentConfig, mut progress: impl FnMut(&str)) -> ExperimentOutcome {
    let mut out = ExperimentOutcome {
        rows: Vec::new(),
        newton: Vec::new(),
        failure: None,
    };
    if let Err(e) = run_into(cfg, &mut out, &mut progress) {
        out.failure = Some(e);
    }
    out
}

fn run_into(
    cfg: &ExperimentConfig,
    out: &mut ExperimentOutcome,
    progress: &mut impl FnMut(&str),
) -> Result<(), BenchError> {
    let problem = cfg.problem.kind().name();
    let s0 = initial_state(cfg)?;
    let grid = time_grid(0.0, cfg.horizon, cfg.intervals).map_err(numerical)?;
    let fine_settings = ThetaSettings::new(cfg.theta0, cfg.fine_step);

    let fine = make_propagator(cfg.problem, fine_settings).map_err(numerical)?;
    let clock = Instant::now();
    let sequential = sequential_solve(&fine, &s0, &grid).map_err(numerical)?;
    let t_seq = clock.elapsed().as_secs_f64();
    progress(&format!("sequential fine solve: {t_seq:.3} s"));

    let reference = reference(cfg, &s0, &grid, &fine_settings)?;
    let disc: Vec<f64> = boundary_error(&sequential, &reference)
        .map_err(numerical)?
        .iter()
        .map(|e| e.value)
        .collect();

    for &coarse_step in &cfg.coarse_steps {
        for (b, &e) in disc.iter().enumerate().skip(1) {
            out.rows.push(ResultRow {
                problem: problem.to_string(),
                coarse_step,
                k: cfg.fine_step,
                variant: DISCRETIZATION.to_string(),
                iter: 0,
                boundary: Some(b),
                rel_err: Some(e),
                theta: None,
                t_seq_s: None,
                t_par_s: None,
                speedup_meas: None,
                speedup_theory: None,
            });
        }
        for &variant in &cfg.variants {
            let rows = run_one(cfg, &s0, &sequential, &disc, t_seq, coarse_step, variant, out)?;
            if let Some(summary) = rows.last() {
                progress(&format!(
                    "K = {coarse_step}, {variant}: iteration {}, speedup {:.3} (model {:.3})",
                    summary.iter,
                    summary.speedup_meas.unwrap_or(f64::NAN),
                    summary.speedup_theory.unwrap_or(f64::NAN),
                ));
            }
            out.rows.extend(rows);
        }
    }
    Ok(())
}

#[allow(clippy::too_many_arguments)]
fn run_one(
    cfg: &ExperimentConfig,
    s0: &State,
    sequential: &[State],
    disc: &[f64],
    t_seq: f64,
    coarse_step: f64,
    variant: Variant,
    out: &mut ExperimentOutcome,
) -> Result<Vec<ResultRow>, BenchError> {
    let coarse = make_propagator(cfg.problem, ThetaSettings::new(cfg.theta0, coarse_step)).map_err(numerical)?;
    let fine = make_propagator(cfg.problem, ThetaSettings::new(cfg.theta0, cfg.fine_step)).map_err(numerical)?;
    let pcfg = PararealConfig {
        tol: cfg.tol,
        variant,
        theta_clamp: cfg.theta_clamp,
        scheduler: Scheduler::Pipelined { workers: cfg.workers },
        ..PararealConfig::new(cfg.intervals, cfg.iterations)
    };
    let result = run_parareal(&coarse, &fine, s0, cfg.horizon, &pcfg, Some(sequential));
    out.newton.push(NewtonRecord::new(coarse_step, variant.name(), "coarse", coarse.stats()));
    out.newton.push(NewtonRecord::new(coarse_step, variant.name(), "fine", fine.stats()));
    let run = result.map_err(numerical)?;
    let labels = RunLabels {
        problem: cfg.problem.kind().name(),
        coarse_step,
        fine_step: cfg.fine_step,
        variant: variant.name(),
    };
    rows_from_run(&labels, &run, Some(&disc[1..]), t_seq)
}
