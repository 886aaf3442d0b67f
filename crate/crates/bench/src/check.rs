//! Smoke suite behind `pint-bench check`.

use pint_core::integrators::{make_propagator, ThetaSettings};
use pint_core::parareal::{run_parareal, theoretical_speedup, PararealConfig, Scheduler, SpeedupModel, Variant};
use pint_core::problems::{ProblemKind, ProblemSpec};

use crate::config;
use crate::experiment::run_experiment;
use crate::output::{read_csv, write_csv};

pub const DAHLQUIST_SMOKE: &str = "\
[experiment]
problem = dahlquist
horizon = 2.0
intervals = 4
coarse_steps = 0.1
fine_step = 0.01
iterations = 2
tol = 1e-300

[dahlquist]
lambda = -1.0
y0 = 1.0
";

pub const HEAT_SMOKE: &str = "\
[experiment]
problem = heat1d
horizon = 8.0
intervals = 20
coarse_steps = 0.05
fine_step = 0.005
iterations = 5
tol = 1e-300

[heat1d]
mesh_n = 31
";

type Outcome = Result<String, String>;

fn exactness() -> Outcome {
    let cfg = config::parse(DAHLQUIST_SMOKE, &[]).map_err(|e| e.to_string())?;
    let out = run_experiment(&cfg, |_| {});
    if let Some(e) = out.failure {
        return Err(e.to_string());
    }
    let boundary: Vec<_> = out.rows.iter().filter(|r| r.variant == "classic" && r.boundary.is_some()).collect();
    if boundary.len() != 8 {
        return Err(format!("{} boundary rows, expected 8", boundary.len()));
    }
    for r in &boundary {
        if r.boundary <= Some(r.iter) && r.rel_err != Some(0.0) {
            return Err(format!("iteration {} boundary {:?}: error {:?}", r.iter, r.boundary, r.rel_err));
        }
    }
    Ok("8 boundary rows, exact where b <= i".into())
}

fn heat_reaches_discretization_error() -> Outcome {
    let cfg = config::parse(HEAT_SMOKE, &[]).map_err(|e| e.to_string())?;
    let out = run_experiment(&cfg, |_| {});
    if let Some(e) = out.failure {
        return Err(e.to_string());
    }
    let summary = out.rows.iter().find(|r| r.is_summary()).ok_or("no summary row")?;
    let disc = out
        .rows
        .iter()
        .filter(|r| r.variant == crate::experiment::DISCRETIZATION)
        .filter_map(|r| r.rel_err)
        .fold(0.0, f64::max);
    match summary.rel_err {
        Some(e) if e <= disc && summary.iter <= 3 => Ok(format!("iteration {}", summary.iter)),
        e => Err(format!("iteration {}, error {e:?} vs {disc:e}", summary.iter)),
    }
}

fn schedulers_agree() -> Outcome {
    let p = ProblemSpec::default_for(ProblemKind::Heat1D);
    let c = make_propagator(p, ThetaSettings::crank_nicolson(0.1)).map_err(|e| e.to_string())?;
    let f = make_propagator(p, ThetaSettings::crank_nicolson(0.01)).map_err(|e| e.to_string())?;
    let s0 = p.initial_state().map_err(|e| e.to_string())?;
    let cfg = PararealConfig::new(8, 4).with_variant(Variant::ThetaLeastSquares).with_tol(1e-300);
    let serial = run_parareal(&c, &f, &s0, 4.0, &cfg, None).map_err(|e| e.to_string())?;
    for workers in [2, 4] {
        let piped = run_parareal(
            &c,
            &f,
            &s0,
            4.0,
            &cfg.clone().with_scheduler(Scheduler::Pipelined { workers }),
            None,
        )
        .map_err(|e| e.to_string())?;
        if piped.states != serial.states {
            return Err(format!("{workers} workers differ from the serial run"));
        }
    }
    Ok("serial, 2 and 4 workers identical".into())
}

fn speedup_model() -> Outcome {
    let model = SpeedupModel::new(0.02, 3, 20).map_err(|e| e.to_string())?;
    let s = theoretical_speedup(&model);
    if (s - 5.780346820809249).abs() < 1e-9 {
        Ok(format!("{s:.6}"))
    } else {
        Err(format!("{s}"))
    }
}

fn csv_round_trip() -> Outcome {
    let cfg = config::parse(DAHLQUIST_SMOKE, &[]).map_err(|e| e.to_string())?;
    let rows = run_experiment(&cfg, |_| {}).rows;
    let mut buf = Vec::new();
    write_csv(&rows, &mut buf).map_err(|e| e.to_string())?;
    let back = read_csv(buf.as_slice()).map_err(|e| e.to_string())?;
    if back == rows {
        Ok(format!("{} rows", rows.len()))
    } else {
        Err("rows changed".into())
    }
}

/// Runs every check and returns `(name, outcome)` pairs.
pub fn run_checks() -> Vec<(&'static str, Outcome)> {
    let checks: [(&str, fn() -> Outcome); 5] = [
        ("exactness", exactness),
        ("heat_reaches_discretization_error", heat_reaches_discretization_error),
        ("schedulers_agree", schedulers_agree),
        ("speedup_model", speedup_model),
        ("csv_round_trip", csv_round_trip),
    ];
    checks.into_iter().map(|(name, f)| (name, f())).collect()
}
