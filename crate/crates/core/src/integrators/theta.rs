use std::sync::Arc;

use super::{Layout, State};
use crate::error::{Error, Result};
use crate::linalg::{newton_solve, Jacobian, NewtonSettings};

/// Semi-discrete system `y' = f(y, t)`.
pub trait OdeSystem: Send + Sync {
    fn layout(&self) -> Result<Arc<Layout>>;

    fn rhs(&self, y: &[f64], t: f64) -> Result<Vec<f64>>;

    /// `∂f/∂y`, when the system can provide it cheaply. `None` falls back to
    /// finite differences.
    fn rhs_jacobian(&self, _y: &[f64], _t: f64) -> Option<Result<Jacobian>> {
        None
    }

    /// Closed-form solution of the semi-discrete system, if one is known.
    fn exact_solution(&self, _t: f64) -> Option<Result<Vec<f64>>> {
        None
    }
}

impl<T: OdeSystem + ?Sized> OdeSystem for &T {
    fn layout(&self) -> Result<Arc<Layout>> {
        (**self).layout()
    }
    fn rhs(&self, y: &[f64], t: f64) -> Result<Vec<f64>> {
        (**self).rhs(y, t)
    }
    fn rhs_jacobian(&self, y: &[f64], t: f64) -> Option<Result<Jacobian>> {
        (**self).rhs_jacobian(y, t)
    }
    fn exact_solution(&self, t: f64) -> Option<Result<Vec<f64>>> {
        (**self).exact_solution(t)
    }
}

/// Shifted Crank-Nicolson parameters: `theta(k) = 1/2 + theta0 * k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThetaSettings {
    pub theta0: f64,
    pub step: f64,
    pub newton: NewtonSettings,
}

impl ThetaSettings {
    pub fn new(theta0: f64, step: f64) -> Self {
        Self {
            theta0,
            step,
            newton: NewtonSettings::default(),
        }
    }

    /// Plain Crank-Nicolson.
    pub fn crank_nicolson(step: f64) -> Self {
        Self::new(0.0, step)
    }

    /// `theta0` chosen so that `theta(step) = 1`.
    pub fn backward_euler(step: f64) -> Self {
        Self::new(0.5 / step, step)
    }

    pub fn theta_for(&self, k: f64) -> f64 {
        0.5 + self.theta0 * k
    }

    pub fn theta(&self) -> f64 {
        self.theta_for(self.step)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.step.is_finite() && self.step > 0.0) {
            return Err(Error::InvalidSettings(format!("step {} must be > 0", self.step)));
        }
        check_theta(self.theta())?;
        self.newton.validate()?;
        Ok(())
    }
}

fn check_theta(theta: f64) -> Result<()> {
    // tiny slack for the rounding in 0.5 + (0.5 / k) * k
    if !(0.5..=1.0 + 1e-12).contains(&theta) {
        return Err(Error::InvalidSettings(format!(
            "theta = {theta} outside [1/2, 1]"
        )));
    }
    Ok(())
}

/// One θ-step of size `settings.step` starting at `s`.
pub fn theta_step<P: OdeSystem + ?Sized>(
    problem: &P,
    s: &State,
    settings: &ThetaSettings,
) -> Result<State> {
    settings.validate()?;
    let t_next = s.time() + settings.step;
    step_to(problem, s, t_next, settings).map(|(state, _)| state)
}

/// θ-step from `s.time()` to `t_next`; returns the new state and the number
/// of Newton iterations spent.
pub(crate) fn step_to<P: OdeSystem + ?Sized>(
    problem: &P,
    s: &State,
    t_next: f64,
    settings: &ThetaSettings,
) -> Result<(State, usize)> {
    let t_prev = s.time();
    let k = t_next - t_prev;
    let theta = settings.theta_for(k).min(1.0);
    check_theta(theta)?;

    let annotate = |e: Error| Error::StepFailed {
        time: t_prev,
        step: k,
        source: Box::new(e),
    };

    let y_prev = s.values();
    let f_prev = problem.rhs(y_prev, t_prev).map_err(annotate)?;
    // y_prev + k (1 - θ) f(y_prev)
    let explicit: Vec<f64> = y_prev
        .iter()
        .zip(&f_prev)
        .map(|(y, f)| y + k * (1.0 - theta) * f)
        .collect();

    let residual = |y: &[f64]| -> Result<Vec<f64>> {
        let f = problem.rhs(y, t_next)?;
        Ok(y.iter()
            .zip(&f)
            .zip(&explicit)
            .map(|((yi, fi), ei)| yi - k * theta * fi - ei)
            .collect())
    };
    let jacobian = |y: &[f64]| -> Result<Jacobian> {
        problem
            .rhs_jacobian(y, t_next)
            .ok_or_else(|| Error::InvalidSettings("rhs Jacobian became unavailable".into()))?
            .map(|j| j.identity_minus(k * theta))
    };
    let has_jacobian = problem.rhs_jacobian(y_prev, t_next).is_some();
    let jac_ref: Option<&dyn Fn(&[f64]) -> Result<Jacobian>> =
        if has_jacobian { Some(&jacobian) } else { None };

    let outcome = newton_solve(residual, jac_ref, y_prev, &settings.newton).map_err(annotate)?;
    let state = s.with_values(outcome.x, t_next)?;
    Ok((state, outcome.iterations))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::DenseMatrix;

    struct Linear(f64);

    impl OdeSystem for Linear {
        fn layout(&self) -> Result<Arc<Layout>> {
            Layout::contiguous(&[("y", 1)])
        }
        fn rhs(&self, y: &[f64], _t: f64) -> Result<Vec<f64>> {
            Ok(vec![self.0 * y[0]])
        }
        fn rhs_jacobian(&self, _y: &[f64], _t: f64) -> Option<Result<Jacobian>> {
            Some(DenseMatrix::from_rows(&[vec![self.0]]).map(Jacobian::Dense).map_err(Into::into))
        }
    }

    struct Zero;

    impl OdeSystem for Zero {
        fn layout(&self) -> Result<Arc<Layout>> {
            Layout::contiguous(&[("y", 3)])
        }
        fn rhs(&self, y: &[f64], _t: f64) -> Result<Vec<f64>> {
            Ok(vec![0.0; y.len()])
        }
    }

    fn start(y0: f64) -> State {
        State::scalar_block("y", vec![y0], 0.0).unwrap()
    }

    #[test]
    fn backward_euler_closed_form() {
        let s = theta_step(&Linear(-1.0), &start(1.0), &ThetaSettings::backward_euler(0.1)).unwrap();
        assert!((s.values()[0] - 1.0 / 1.1).abs() < 1e-15);
        assert!((s.time() - 0.1).abs() < 1e-15);
    }

    #[test]
    fn trapezoidal_closed_form() {
        let s = theta_step(&Linear(-1.0), &start(2.0), &ThetaSettings::crank_nicolson(0.1)).unwrap();
        assert!((s.values()[0] - 2.0 * 0.95 / 1.05).abs() < 1e-15);
    }

    #[test]
    fn steady_state_only_advances_time() {
        let s0 = State::scalar_block("y", vec![1.0, -2.0, 3.0], 0.5).unwrap();
        let s1 = theta_step(&Zero, &s0, &ThetaSettings::crank_nicolson(0.25)).unwrap();
        assert_eq!(s1.values(), s0.values());
        assert_eq!(s1.time(), 0.75);
    }

    #[test]
    fn theta_out_of_range_rejected() {
        assert!(ThetaSettings::new(-1.0, 0.1).validate().is_err());
        assert!(ThetaSettings::new(10.0, 0.1).validate().is_err());
        assert!(ThetaSettings::new(0.0, 0.0).validate().is_err());
        assert!(ThetaSettings::backward_euler(0.3).validate().is_ok());
    }

    #[test]
    fn a_stable_for_large_negative_lambda() {
        for &lambda in &[-1.0, -1e2, -1e4, -1e8] {
            for &theta0 in &[0.0, 0.5, 2.0] {
                let st = ThetaSettings::new(theta0, 0.1);
                let s = theta_step(&Linear(lambda), &start(1.0), &st).unwrap();
                assert!(s.values()[0].abs() <= 1.0 + 1e-14, "lambda {lambda} theta0 {theta0}");
            }
        }
    }
}
