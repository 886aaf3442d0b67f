use crate::error::{Error, Result};

/// Cost model of a Parareal run: `r` is the fine/coarse step ratio, `iters`
/// the iteration count K and `intervals` the interval count N.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpeedupModel {
    pub r: f64,
    pub iters: usize,
    pub intervals: usize,
}

impl SpeedupModel {
    pub fn new(r: f64, iters: usize, intervals: usize) -> Result<Self> {
        // r = 0 is the free-coarse-solver limit and still well defined
        if !(r >= 0.0 && r.is_finite()) {
            return Err(Error::InvalidSettings(format!("cost ratio must be non-negative, got {r}")));
        }
        if iters == 0 || iters > intervals {
            return Err(Error::InvalidSettings(format!(
                "need 0 < K <= N, got K = {iters}, N = {intervals}"
            )));
        }
        Ok(Self { r, iters, intervals })
    }
}

/// `S = 1 / (r + K/N (1 + r))`.
pub fn theoretical_speedup(model: &SpeedupModel) -> f64 {
    let k_over_n = model.iters as f64 / model.intervals as f64;
    1.0 / (model.r + k_over_n * (1.0 + model.r))
}
