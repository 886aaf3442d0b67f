use super::propagator::{make_propagator, Propagator};
use super::theta::{OdeSystem, ThetaSettings};
use super::State;
use crate::error::{Error, Result};
use crate::linalg::{dist2, norm2};

/// Reference step is the smallest requested step divided by this.
const RICHARDSON_REFINEMENT: usize = 16;

#[derive(Debug, Clone, PartialEq)]
pub struct OrderFit {
    pub order: f64,
    pub steps: Vec<f64>,
    pub errors: Vec<f64>,
}

/// Least-squares slope of `log(error(T))` against `log(k)` for the shifted
/// scheme with a fixed `theta0`.
///
/// Errors are relative Euclidean errors at `horizon`, measured against the
/// system's closed-form solution when it has one and against a run with a
/// much smaller step otherwise.
pub fn convergence_order<P: OdeSystem>(
    problem: &P,
    initial: &State,
    theta0: f64,
    steps: &[f64],
    horizon: f64,
) -> Result<OrderFit> {
    convergence_order_with(problem, initial, steps, horizon, |k| ThetaSettings::new(theta0, k))
}

/// Like [`convergence_order`] with the settings chosen per step size, e.g.
/// [`ThetaSettings::backward_euler`] for a fixed `θ = 1`.
pub fn convergence_order_with<P: OdeSystem>(
    problem: &P,
    initial: &State,
    steps: &[f64],
    horizon: f64,
    settings_for: impl Fn(f64) -> ThetaSettings,
) -> Result<OrderFit> {
    if steps.len() < 3 {
        return Err(Error::InvalidSettings(format!(
            "order fit needs at least 3 step sizes, got {}",
            steps.len()
        )));
    }
    let reference = match problem.exact_solution(horizon) {
        Some(exact) => exact?,
        None => {
            let k_min = steps.iter().cloned().fold(f64::INFINITY, f64::min);
            let k_ref = k_min / RICHARDSON_REFINEMENT as f64;
            make_propagator(problem, settings_for(k_ref))?
                .advance(initial, horizon)?
                .into_values()
        }
    };
    let scale = norm2(&reference).max(f64::MIN_POSITIVE);

    let mut errors = Vec::with_capacity(steps.len());
    for &k in steps {
        let prop = make_propagator(problem, settings_for(k))?;
        let end = prop.advance(initial, horizon)?;
        errors.push(dist2(end.values(), &reference)? / scale);
    }
    Ok(OrderFit {
        order: log_log_slope(steps, &errors),
        steps: steps.to_vec(),
        errors,
    })
}

pub(crate) fn log_log_slope(x: &[f64], y: &[f64]) -> f64 {
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let n = lx.len() as f64;
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}
