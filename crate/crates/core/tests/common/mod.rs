//! Independent reference implementations for the integration tests.
#![allow(dead_code)]

use pint_core::integrators::{Propagator, State};
use pint_core::parareal::Variant;

/// Parareal as written in textbooks: every iteration recomputes every
/// boundary from the full update formula, with no pipelining and no reuse.
///
/// Returns the boundary values of iterations `0..=iters`.
pub fn textbook_parareal(
    coarse: &dyn Propagator,
    fine: &dyn Propagator,
    s0: &State,
    t_end: f64,
    intervals: usize,
    iters: usize,
    variant: Variant,
    clamp: (f64, f64),
) -> Vec<Vec<State>> {
    let dt = (t_end - s0.time()) / intervals as f64;
    let t = |b: usize| if b == intervals { t_end } else { s0.time() + b as f64 * dt };

    let mut u = vec![s0.clone()];
    for b in 1..=intervals {
        let next = coarse.advance(&u[b - 1], t(b)).unwrap();
        u.push(next);
    }
    let mut history = vec![u.clone()];
    for _ in 1..=iters {
        let f: Vec<State> = (1..=intervals)
            .map(|b| fine.advance(&u[b - 1], t(b)).unwrap())
            .collect();
        let g_old: Vec<State> = (1..=intervals)
            .map(|b| coarse.advance(&u[b - 1], t(b)).unwrap())
            .collect();
        let mut next = vec![s0.clone()];
        for b in 1..=intervals {
            let g_new = coarse.advance(&next[b - 1], t(b)).unwrap();
            let theta = weight(&f[b - 1], &g_new, variant, clamp);
            let values: Vec<f64> = (0..g_new.values().len())
                .map(|j| {
                    theta * g_new.values()[j] + f[b - 1].values()[j] - theta * g_old[b - 1].values()[j]
                })
                .collect();
            next.push(State::new(values, t(b), s0.layout().clone()).unwrap());
        }
        u = next;
        history.push(u.clone());
    }
    history
}

fn weight(f: &State, c: &State, variant: Variant, clamp: (f64, f64)) -> f64 {
    if variant == Variant::Classic {
        return 1.0;
    }
    let blocks = f.layout().blocks();
    let mut total = 0.0;
    for block in blocks {
        let range = block.offset..block.offset + block.len;
        let (fb, cb) = (&f.values()[range.clone()], &c.values()[range]);
        let mut fc = 0.0;
        let mut cc = 0.0;
        let mut ff = 0.0;
        for j in 0..fb.len() {
            fc += fb[j] * cb[j];
            cc += cb[j] * cb[j];
            ff += fb[j] * fb[j];
        }
        let denom = if variant == Variant::ThetaLeastSquares { cc } else { cc * ff };
        total += if cc > 1e-28 && denom > 1e-28 { fc / denom } else { 1.0 };
    }
    (total / blocks.len() as f64).max(clamp.0).min(clamp.1)
}

/// `‖a − b‖ / ‖b‖`, or the absolute difference when `b` is zero.
pub fn rel_diff(a: &[f64], b: &[f64]) -> f64 {
    let mut d = 0.0;
    let mut n = 0.0;
    for (x, y) in a.iter().zip(b) {
        d += (x - y) * (x - y);
        n += y * y;
    }
    if n > 0.0 {
        (d / n).sqrt()
    } else {
        d.sqrt()
    }
}

/// Completion time of the last task of a pipelined run, from the recurrence
/// over (iteration, boundary) with coarse cost `tc` and fine cost `tf` per
/// interval and unlimited workers.
pub fn pipeline_makespan(intervals: usize, iters: usize, tc: f64, tf: f64) -> f64 {
    let l = intervals;
    // corr[i][b]: time U_b^i is published
    let mut corr = vec![vec![0.0_f64; l + 1]; iters + 1];
    for b in 1..=l {
        corr[0][b] = corr[0][b - 1] + tc;
    }
    for i in 1..=iters {
        for b in 0..i {
            corr[i][b] = corr[i - 1][b];
        }
        for b in i..=l {
            let fine_done = corr[i - 1][b - 1] + tf;
            let ready = corr[i][b - 1].max(fine_done).max(corr[i - 1][b]);
            let cost = if b == i { 0.0 } else { tc };
            corr[i][b] = ready + cost;
        }
    }
    corr[iters][l]
}
