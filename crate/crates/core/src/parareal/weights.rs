use crate::error::{Error, Result};
use crate::integrators::State;

use super::Variant;

/// Blocks with `⟨C, C⟩` (or the angle-penalized denominator) at or below
/// this are treated as degenerate and weighted 1.
pub const DEGENERATE_INNER: f64 = 1e-28;

/// Weight of the coarse terms in the θ-Parareal update.
///
/// Each layout block gets its own weight, `⟨F, C⟩ / ⟨C, C⟩` for the
/// least-squares variant and `⟨F, C⟩ / (⟨C, C⟩ ⟨F, F⟩)` for the
/// angle-penalized one; the block weights are averaged and the mean is
/// clamped to `clamp`. `Classic` always returns 1.
pub fn theta_weight(fine: &State, coarse: &State, variant: Variant, clamp: (f64, f64)) -> Result<f64> {
    if variant == Variant::Classic {
        return Ok(1.0);
    }
    if !fine.same_layout(coarse) {
        return Err(Error::LayoutMismatch("theta weight of differently laid out states".into()));
    }
    let blocks = fine.layout().blocks();
    let mut sum = 0.0;
    for b in blocks {
        let f = &fine.values()[b.offset..b.offset + b.len];
        let c = &coarse.values()[b.offset..b.offset + b.len];
        let fc: f64 = f.iter().zip(c).map(|(x, y)| x * y).sum();
        let cc: f64 = c.iter().map(|x| x * x).sum();
        let denom = match variant {
            Variant::ThetaLeastSquares => cc,
            Variant::ThetaAnglePenalized => cc * f.iter().map(|x| x * x).sum::<f64>(),
            Variant::Classic => unreachable!(),
        };
        sum += if cc > DEGENERATE_INNER && denom > DEGENERATE_INNER {
            fc / denom
        } else {
            1.0
        };
    }
    let mean = sum / blocks.len() as f64;
    Ok(mean.clamp(clamp.0, clamp.1))
}

/// `θ·coarse_new + fine_old − θ·coarse_old`, evaluated as
/// `fine_old + θ·(coarse_new − coarse_old)` so that identical coarse values
/// cancel exactly.
pub fn parareal_update(coarse_new: &State, fine_old: &State, coarse_old: &State, theta: f64) -> Result<State> {
    if !(coarse_new.same_layout(fine_old) && coarse_new.same_layout(coarse_old)) {
        return Err(Error::LayoutMismatch("parareal update of differently laid out states".into()));
    }
    let t = coarse_new.time();
    if fine_old.time() != t || coarse_old.time() != t {
        return Err(Error::LayoutMismatch(format!(
            "parareal update at mismatched times {t}, {}, {}",
            fine_old.time(),
            coarse_old.time()
        )));
    }
    let values = fine_old
        .values()
        .iter()
        .zip(coarse_new.values())
        .zip(coarse_old.values())
        .map(|((f, cn), co)| f + theta * (cn - co))
        .collect();
    fine_old.with_values(values, t)
}
