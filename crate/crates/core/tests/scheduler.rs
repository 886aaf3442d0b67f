mod common;

use std::time::{Duration, Instant};

use common::{pipeline_makespan, rel_diff, textbook_parareal};
use pint_core::integrators::{make_propagator, State, SyntheticPropagator, ThetaSettings};
use pint_core::parareal::{
    pipelined_schedule, run_parareal, sequential_solve, time_grid, PararealConfig, Scheduler, TaskKind,
    Variant,
};
use pint_core::problems::{DahlquistParams, Heat1DParams, ProblemKind, ProblemSpec};
use proptest::prelude::*;

#[test]
fn critical_path_matches_recurrence() {
    for l in [2, 5, 20] {
        for k in 1..=l.min(6) {
            for (tc, tf) in [(1.0, 50.0), (1.0, 3.0), (2.0, 1.0)] {
                let plan = pipelined_schedule(l, k);
                let cp = plan.critical_path(tc, tf);
                let oracle = pipeline_makespan(l, k, tc, tf);
                assert!((cp - oracle).abs() < 1e-9, "L {l} K {k}: {cp} vs {oracle}");
                let unlimited = plan.tasks().len();
                assert!((plan.simulated_makespan(unlimited, tc, tf) - cp).abs() < 1e-9);
                assert!(plan.simulated_makespan(l, tc, tf) >= cp - 1e-9);
            }
        }
    }
}

#[test]
fn fine_count_matches_serial_algorithm() {
    let plan = pipelined_schedule(20, 3);
    assert_eq!(plan.fine_count(), 20 + 19 + 18);
    let corrections = plan.tasks().iter().filter(|t| t.kind == TaskKind::Correct).count();
    assert_eq!(corrections, 20 + 3 * 20 - 3 - 2 - 1 + 3);
}

#[test]
fn sleep_makespan_near_critical_path() {
    let (l, iters) = (8, 3);
    let tc = Duration::from_millis(4);
    let coarse = SyntheticPropagator::new(1.0, -0.5, tc).unwrap();
    // 10 fine steps per interval
    let fine = SyntheticPropagator::new(0.1, -0.5, tc).unwrap();
    let s0 = State::scalar_block("y", vec![1.0], 0.0).unwrap();
    let cfg = PararealConfig::new(l, iters)
        .with_tol(1e-300)
        .with_scheduler(Scheduler::Pipelined { workers: l });
    let clock = Instant::now();
    let run = run_parareal(&coarse, &fine, &s0, l as f64, &cfg, None).unwrap();
    let wall = clock.elapsed().as_secs_f64();
    let bound = pipelined_schedule(l, iters).critical_path(0.004, 0.04);
    assert!(wall >= bound * 0.99, "{wall} below the critical path {bound}");
    assert!(wall <= 1.5 * bound, "{wall} vs critical path {bound}");
    assert_eq!(run.trace.fine_propagations, 8 + 7 + 6);
}

#[test]
fn workers_do_not_change_numbers() {
    let p = ProblemSpec::Heat1D(Heat1DParams {
        mesh_n: 31,
        ..Default::default()
    });
    let c = make_propagator(&p, ThetaSettings::crank_nicolson(0.1)).unwrap();
    let f = make_propagator(&p, ThetaSettings::crank_nicolson(0.01)).unwrap();
    let s0 = p.initial_state().unwrap();
    let run = |w| {
        let cfg = PararealConfig::new(10, 6)
            .with_variant(Variant::ThetaAnglePenalized)
            .with_scheduler(Scheduler::Pipelined { workers: w })
            .with_tol(1e-300);
        run_parareal(&c, &f, &s0, 5.0, &cfg, None).unwrap()
    };
    let base = run(1);
    for w in [2, 4, 8] {
        let other = run(w);
        assert_eq!(other.states, base.states);
        for (a, b) in other.trace.iterations.iter().zip(&base.trace.iterations) {
            assert_eq!(a.states, b.states);
            assert_eq!(a.thetas, b.thetas);
        }
    }
}

#[test]
fn heat_errors_never_increase() {
    let p = ProblemSpec::default_for(ProblemKind::Heat1D);
    let c = make_propagator(&p, ThetaSettings::crank_nicolson(0.05)).unwrap();
    let f = make_propagator(&p, ThetaSettings::crank_nicolson(0.005)).unwrap();
    let s0 = p.initial_state().unwrap();
    let seq = sequential_solve(&f, &s0, &time_grid(0.0, 8.0, 20).unwrap()).unwrap();
    let cfg = PararealConfig::new(20, 8).with_tol(1e-300);
    let run = run_parareal(&c, &f, &s0, 8.0, &cfg, Some(&seq)).unwrap();
    let errs: Vec<f64> = run.trace.iterations.iter().map(|r| r.max_error().unwrap()).collect();
    for w in errs.windows(2) {
        // round-off level noise once converged
        assert!(w[1] <= w[0] + 1e-14, "{errs:?}");
    }
}

#[test]
fn classic_parareal_matches_textbook_with_theta_variants() {
    let p = ProblemSpec::Dahlquist(DahlquistParams {
        lambda: -2.0,
        y0: 1.0,
    });
    let c = make_propagator(&p, ThetaSettings::crank_nicolson(0.5)).unwrap();
    let f = make_propagator(&p, ThetaSettings::crank_nicolson(0.01)).unwrap();
    let s0 = p.initial_state().unwrap();
    for variant in Variant::ALL {
        let oracle = textbook_parareal(&c, &f, &s0, 6.0, 6, 6, variant, (0.0, 1.0));
        let cfg = PararealConfig::new(6, 6)
            .with_variant(variant)
            .with_tol(1e-300)
            .with_scheduler(Scheduler::Pipelined { workers: 3 });
        let run = run_parareal(&c, &f, &s0, 6.0, &cfg, None).unwrap();
        for (rec, want) in run.trace.iterations.iter().zip(&oracle) {
            for (a, b) in rec.states.iter().zip(want) {
                assert!(rel_diff(a.values(), b.values()) <= 1e-12, "{variant}");
            }
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn pipelined_equals_serial(
        lambda in -3.0f64..-0.05,
        l in 2usize..10,
        workers in 2usize..9,
        iters_frac in 0.0f64..1.0,
        variant in 0usize..3,
    ) {
        let iters = ((l as f64) * iters_frac).round() as usize;
        let p = ProblemSpec::Dahlquist(DahlquistParams { lambda, y0: 1.0 });
        let c = make_propagator(&p, ThetaSettings::crank_nicolson(0.5)).unwrap();
        let f = make_propagator(&p, ThetaSettings::crank_nicolson(0.05)).unwrap();
        let s0 = p.initial_state().unwrap();
        let cfg = PararealConfig::new(l, iters).with_variant(Variant::ALL[variant]).with_tol(1e-9);
        let serial = run_parareal(&c, &f, &s0, l as f64, &cfg, None).unwrap();
        let piped = run_parareal(
            &c, &f, &s0, l as f64,
            &cfg.clone().with_scheduler(Scheduler::Pipelined { workers }),
            None,
        ).unwrap();
        prop_assert_eq!(&serial.states, &piped.states);
        prop_assert_eq!(serial.trace.last_iteration(), piped.trace.last_iteration());
        prop_assert_eq!(serial.trace.fine_propagations, piped.trace.fine_propagations);
        prop_assert_eq!(serial.trace.converged, piped.trace.converged);
    }
}
