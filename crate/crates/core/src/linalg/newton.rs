use super::{check_finite, norm2, DenseMatrix, Jacobian, LinalgError};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonSettings {
    /// absolute tolerance on `‖r(x)‖₂`
    pub abs_tol: f64,
    /// tolerance relative to `‖r(x0)‖₂`
    pub rel_tol: f64,
    pub max_iters: usize,
    /// smallest line-search factor before a step is taken regardless
    pub damping_min: f64,
    /// relative increment for finite-difference Jacobian columns
    pub fd_epsilon: f64,
}

impl Default for NewtonSettings {
    fn default() -> Self {
        Self {
            abs_tol: 1e-10,
            rel_tol: 0.0,
            max_iters: 25,
            damping_min: 1.0 / 64.0,
            fd_epsilon: 1e-7,
        }
    }
}

impl NewtonSettings {
    pub fn validate(&self) -> Result<(), LinalgError> {
        let ok = self.abs_tol > 0.0
            && self.rel_tol >= 0.0
            && self.max_iters >= 1
            && self.damping_min > 0.0
            && self.damping_min <= 1.0
            && self.fd_epsilon > 0.0;
        if ok {
            Ok(())
        } else {
            Err(LinalgError::InvalidSettings(format!("{self:?}")))
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NewtonOutcome {
    pub x: Vec<f64>,
    pub iterations: usize,
    /// `‖r‖₂` before each update and after the last one
    pub residual_history: Vec<f64>,
}

impl NewtonOutcome {
    pub fn residual_norm(&self) -> f64 {
        *self.residual_history.last().unwrap_or(&0.0)
    }
}

/// Newton corrections this small relative to `x` count as converged.
const ROUNDOFF_STEP: f64 = 8.0 * f64::EPSILON;

/// Type of an optional analytic linearization callback.
pub type JacobianFn<'a, E> = &'a dyn Fn(&[f64]) -> Result<Jacobian, E>;

/// Damped Newton iteration for `residual(x) = 0`.
///
/// Without an analytic Jacobian the linearization is assembled column by
/// column from forward differences with increment `fd_epsilon * (1 + |x_j|)`.
/// Each update is halved until the residual norm decreases; once the factor
/// drops below `damping_min` the smallest trial step is taken anyway.
///
/// Besides the residual test the iteration also stops when the correction
/// falls below a few ulps of `x`: very stiff systems have residuals whose
/// round-off exceeds `abs_tol`.
pub fn newton_solve<E, R>(
    residual: R,
    jacobian: Option<JacobianFn<'_, E>>,
    x0: &[f64],
    settings: &NewtonSettings,
) -> Result<NewtonOutcome, E>
where
    E: From<LinalgError>,
    R: Fn(&[f64]) -> Result<Vec<f64>, E>,
{
    settings.validate()?;
    check_finite(x0, "x0")?;
    let mut x = x0.to_vec();
    let mut r = residual(&x)?;
    check_finite(&r, "residual")?;
    let mut rnorm = norm2(&r);
    let target = settings.abs_tol + settings.rel_tol * rnorm;
    let mut history = vec![rnorm];

    let mut iterations = 0;
    while rnorm > target {
        if iterations == settings.max_iters {
            return Err(LinalgError::MaxItersExceeded {
                iters: iterations,
                residual: rnorm,
            }
            .into());
        }
        let jac = match jacobian {
            Some(j) => j(&x)?,
            None => Jacobian::Dense(fd_jacobian(&residual, &x, &r, settings.fd_epsilon)?),
        };
        let delta = jac.solve(&r)?;
        if norm2(&delta) <= ROUNDOFF_STEP * norm2(&x) {
            // the residual is at the round-off level of its own terms and
            // cannot be pushed below abs_tol; keep the last correction
            for (a, d) in x.iter_mut().zip(&delta) {
                *a -= d;
            }
            iterations += 1;
            history.push(norm2(&residual(&x)?));
            break;
        }

        let mut lambda = 1.0;
        loop {
            let trial: Vec<f64> = x.iter().zip(&delta).map(|(a, d)| a - lambda * d).collect();
            let last_chance = lambda * 0.5 < settings.damping_min;
            match residual(&trial) {
                Ok(rt) if rt.iter().all(|v| v.is_finite()) => {
                    let tn = norm2(&rt);
                    if tn < rnorm || last_chance {
                        x = trial;
                        r = rt;
                        rnorm = tn;
                        break;
                    }
                }
                Ok(_) if last_chance => {
                    return Err(LinalgError::NumericBreakdown(
                        "non-finite residual along the Newton direction".into(),
                    )
                    .into());
                }
                Err(e) if last_chance => return Err(e),
                _ => {}
            }
            lambda *= 0.5;
        }
        iterations += 1;
        history.push(rnorm);
    }
    Ok(NewtonOutcome {
        x,
        iterations,
        residual_history: history,
    })
}

fn fd_jacobian<E, R>(residual: &R, x: &[f64], r0: &[f64], eps: f64) -> Result<DenseMatrix, E>
where
    E: From<LinalgError>,
    R: Fn(&[f64]) -> Result<Vec<f64>, E>,
{
    let n = x.len();
    if r0.len() != n {
        return Err(LinalgError::LengthMismatch {
            expected: n,
            found: r0.len(),
        }
        .into());
    }
    let mut jac = DenseMatrix::zeros(n);
    let mut xp = x.to_vec();
    for j in 0..n {
        let orig = xp[j];
        xp[j] = orig + eps * (1.0 + orig.abs());
        // the increment actually representable in floating point
        let h = xp[j] - orig;
        let rp = residual(&xp)?;
        xp[j] = orig;
        for i in 0..n {
            jac.set(i, j, (rp[i] - r0[i]) / h);
        }
    }
    Ok(jac)
}
