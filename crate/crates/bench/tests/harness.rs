use std::time::{Duration, Instant};

use pint_bench::check::{run_checks, DAHLQUIST_SMOKE};
use pint_bench::config::{self, Format};
use pint_bench::experiment::{rows_from_run, run_experiment, ResultRow, RunLabels, DISCRETIZATION};
use pint_bench::output::{csv_record, emit_csv, emit_json, read_csv, read_rows, write_csv, Metadata, CSV_HEADER};
use pint_bench::{speedup_report, BenchError};
use pint_core::integrators::{State, SyntheticPropagator};
use pint_core::parareal::{
    pipelined_schedule, run_parareal, sequential_solve, theoretical_speedup, time_grid, PararealConfig, Scheduler,
    SpeedupModel,
};
use pint_core::problems::ProblemSpec;

fn row() -> ResultRow {
    ResultRow {
        problem: "dahlquist".into(),
        coarse_step: 0.1,
        k: 0.01,
        variant: "classic".into(),
        iter: 2,
        boundary: Some(3),
        rel_err: Some(0.0),
        theta: Some(1.0),
        t_seq_s: None,
        t_par_s: Some(0.5),
        speedup_meas: None,
        speedup_theory: None,
    }
}

fn summary(coarse_step: f64, variant: &str, t_seq: f64, t_par: f64) -> ResultRow {
    ResultRow {
        coarse_step,
        variant: variant.into(),
        iter: 1,
        boundary: None,
        rel_err: None,
        theta: None,
        t_seq_s: Some(t_seq),
        t_par_s: Some(t_par),
        speedup_meas: Some(t_seq / t_par),
        speedup_theory: None,
        ..row()
    }
}

fn csv_string(rows: &[ResultRow]) -> String {
    let mut buf = Vec::new();
    write_csv(rows, &mut buf).unwrap();
    String::from_utf8(buf).unwrap()
}

#[test]
fn golden_csv_line() {
    // 0.1 needs all 17 digits to read back
    let expected = "problem,K,k,variant,iter,boundary,rel_err,theta,t_seq_s,t_par_s,speedup_meas,speedup_theory\n\
        dahlquist,1.0000000000000001e-1,1.0000000000000000e-2,classic,2,3,0.0000000000000000e0,1.0000000000000000e0,,5.0000000000000000e-1,,\n";
    assert_eq!(csv_string(&[row()]), expected);
}

#[test]
fn empty_rows_give_header_only() {
    assert_eq!(csv_string(&[]), format!("{}\n", CSV_HEADER.join(",")));
}

#[test]
fn csv_and_json_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = config::parse(DAHLQUIST_SMOKE, &[]).unwrap();
    let rows = run_experiment(&cfg, |_| {}).rows;
    assert!(!rows.is_empty());

    let csv_path = dir.path().join("r.csv");
    emit_csv(&rows, &csv_path).unwrap();
    assert_eq!(read_rows(&csv_path).unwrap(), rows);
    let text = std::fs::read_to_string(&csv_path).unwrap();
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    assert_eq!(reader.headers().unwrap().len(), 12);
    for record in reader.records() {
        assert_eq!(record.unwrap().len(), 12);
    }

    let json_path = dir.path().join("r.json");
    let meta = Metadata::new(3, cfg.echo.clone(), vec![]);
    emit_json(&rows, &meta, &json_path).unwrap();
    assert_eq!(read_rows(&json_path).unwrap(), rows);
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&json_path).unwrap()).unwrap();
    assert_eq!(doc["metadata"]["workers"], 3);
    assert_eq!(doc["metadata"]["config"]["experiment"]["problem"], "dahlquist");
    assert_eq!(doc["rows"].as_array().unwrap().len(), rows.len());
}

#[test]
fn unwritable_path_is_an_io_error() {
    let err = emit_csv(&[row()], std::path::Path::new("/nonexistent-dir/r.csv")).unwrap_err();
    assert_eq!(err.exit_code(), 4);
}

#[test]
fn dahlquist_smoke_rows() {
    let cfg = config::parse(DAHLQUIST_SMOKE, &[]).unwrap();
    let out = run_experiment(&cfg, |_| {});
    assert!(out.failure.is_none());
    let boundary: Vec<&ResultRow> = out
        .rows
        .iter()
        .filter(|r| r.variant == "classic" && r.boundary.is_some())
        .collect();
    assert_eq!(boundary.len(), 8);
    for r in &boundary {
        let b = r.boundary.unwrap();
        assert!((1..=2).contains(&r.iter) && (1..=4).contains(&b));
        if b <= r.iter {
            assert_eq!(r.rel_err, Some(0.0), "iteration {} boundary {b}", r.iter);
        } else {
            assert!(r.rel_err.unwrap() > 0.0);
        }
    }
    assert_eq!(out.rows.iter().filter(|r| r.is_summary()).count(), 1);
    assert_eq!(out.rows.iter().filter(|r| r.variant == DISCRETIZATION).count(), 4);
}

#[test]
fn heat_reaches_discretization_error_within_three_iterations() {
    let text = "[experiment]\nproblem = heat1d\nhorizon = 8\nintervals = 20\ncoarse_steps = 0.05\n\
                fine_step = 0.005\nvariants = classic\niterations = 6\ntol = 1e-300\n";
    let cfg = config::parse(text, &[]).unwrap();
    let out = run_experiment(&cfg, |_| {});
    assert!(out.failure.is_none());
    let disc = out
        .rows
        .iter()
        .filter(|r| r.variant == DISCRETIZATION)
        .filter_map(|r| r.rel_err)
        .fold(0.0, f64::max);
    let s = out.rows.iter().find(|r| r.is_summary()).unwrap();
    assert!(s.iter <= 3, "iteration {}", s.iter);
    assert!(s.rel_err.unwrap() <= disc);
    // the chosen iteration is the first one that gets there
    let first = (1..=6)
        .find(|&i| {
            out.rows
                .iter()
                .filter(|r| r.variant == "classic" && r.iter == i && r.boundary.is_some())
                .all(|r| r.rel_err.unwrap() <= disc)
        })
        .unwrap();
    assert_eq!(s.iter, first);
}

#[test]
fn summary_rows_use_the_speedup_model() {
    let text = "[experiment]\nproblem = heat1d\nhorizon = 4\nintervals = 8\ncoarse_steps = 0.1, 0.25\n\
                fine_step = 0.01\nvariants = classic, theta_lsq, theta_angle\niterations = 4\n\
                [heat1d]\nmesh_n = 15\n";
    let cfg = config::parse(text, &[]).unwrap();
    let out = run_experiment(&cfg, |_| {});
    assert!(out.failure.is_none());
    let summaries: Vec<&ResultRow> = out.rows.iter().filter(|r| r.is_summary()).collect();
    assert_eq!(summaries.len(), 6);
    for s in summaries {
        let model = SpeedupModel::new(s.k / s.coarse_step, s.iter.max(1), 8).unwrap();
        assert!((s.speedup_theory.unwrap() - theoretical_speedup(&model)).abs() <= 1e-12);
        assert!(s.speedup_meas.unwrap() > 0.0);
        assert!(s.rel_err.unwrap() >= 0.0);
    }
    assert_eq!(out.newton.len(), 12);
}

fn numeric_columns(rows: &[ResultRow]) -> Vec<[String; 9]> {
    rows.iter()
        .map(|r| {
            let c = csv_record(r);
            // drop t_seq_s, t_par_s and speedup_meas
            [
                c[0].clone(),
                c[1].clone(),
                c[2].clone(),
                c[3].clone(),
                c[4].clone(),
                c[5].clone(),
                c[6].clone(),
                c[7].clone(),
                c[11].clone(),
            ]
        })
        .collect()
}

#[test]
fn same_seed_gives_same_numbers() {
    let text = "[experiment]\nproblem = advection1d\nhorizon = 1\nintervals = 5\ncoarse_steps = 0.05\n\
                fine_step = 0.01\nvariants = classic, theta_angle\niterations = 3\nseed = 42\ninit_noise = 0.01\n\
                [advection1d]\nmesh_n = 40\n";
    let run = |workers: &str| {
        let cfg = config::parse(text, &[format!("workers={workers}")]).unwrap();
        numeric_columns(&run_experiment(&cfg, |_| {}).rows)
    };
    let base = run("1");
    assert_eq!(run("1"), base);
    assert_eq!(run("2"), base);
    assert_eq!(run("8"), base);

    let other = config::parse(text, &["seed=43".into()]).unwrap();
    assert_ne!(numeric_columns(&run_experiment(&other, |_| {}).rows), base);
}

#[test]
fn overrides_and_validation() {
    let cfg = config::parse(
        DAHLQUIST_SMOKE,
        &["--dahlquist.lambda=-3".into(), "--format=json".into(), "--variants=theta_lsq".into()],
    )
    .unwrap();
    assert_eq!(cfg.format, Format::Json);
    assert_eq!(cfg.variants.len(), 1);
    match cfg.problem {
        ProblemSpec::Dahlquist(p) => assert_eq!(p.lambda, -3.0),
        other => panic!("{other:?}"),
    }

    let rejected = [
        "coarse_steps=0.3",
        "fine_step=0.1",
        "fine_step=0.2",
        "iterations=5",
        "workers=0",
        "nonsense=1",
        "dahlquist.mu=1",
        "heat1d.bogus=1",
        "format=xml",
        "theta0=10",
        "horizon=-1",
    ];
    for o in rejected {
        let err = config::parse(DAHLQUIST_SMOKE, &[o.to_string()]).unwrap_err();
        assert!(matches!(err, BenchError::Config(_)), "{o}: {err}");
        assert_eq!(err.exit_code(), 2);
    }
}

#[test]
fn report_of_synthetic_rows() {
    let report = speedup_report(&[summary(0.1, "classic", 10.0, 5.0)]);
    assert_eq!(report.entries.len(), 1);
    assert_eq!(report.entries[0].measured, 2.0);

    let mut single = summary(0.25, "theta_lsq", 4.0, 1.0);
    single.speedup_theory = Some(theoretical_speedup(&SpeedupModel::new(0.04, 1, 8).unwrap()));
    let report = speedup_report(&[single]);
    let e = &report.entries[0];
    assert!(e.efficiency.is_some());
    assert_eq!(report.best().unwrap().coarse_step, 0.25);
    assert!(report.to_string().contains("best K = 0.25"));
}

#[test]
fn best_k_requires_discretization_accuracy() {
    let disc = |coarse_step, err| ResultRow {
        coarse_step,
        variant: DISCRETIZATION.into(),
        iter: 0,
        boundary: Some(1),
        rel_err: Some(err),
        theta: None,
        t_par_s: None,
        ..row()
    };
    let mut fast = summary(0.5, "classic", 10.0, 1.0);
    fast.rel_err = Some(1e-3);
    let mut slow = summary(0.1, "classic", 10.0, 4.0);
    slow.rel_err = Some(1e-8);
    let rows = [disc(0.5, 1e-6), disc(0.1, 1e-6), fast, slow];
    let report = speedup_report(&rows);
    assert_eq!(report.entries.len(), 2);
    assert_eq!(report.best().unwrap().coarse_step, 0.1);
}

#[test]
fn sleep_based_run_reaches_the_model_speedup() {
    // r = 0.02, three iterations, twenty intervals
    let (l, iters) = (20, 3);
    let cost = Duration::from_millis(1);
    let coarse = SyntheticPropagator::new(1.0, -0.1, cost).unwrap();
    let fine = SyntheticPropagator::new(0.02, -0.1, cost).unwrap();
    let s0 = State::scalar_block("y", vec![1.0], 0.0).unwrap();
    let t_end = l as f64;

    let clock = Instant::now();
    sequential_solve(&fine, &s0, &time_grid(0.0, t_end, l).unwrap()).unwrap();
    let t_seq = clock.elapsed().as_secs_f64();

    let cfg = PararealConfig::new(l, iters)
        .with_tol(1e-300)
        .with_scheduler(Scheduler::Pipelined { workers: l });
    let run = run_parareal(&coarse, &fine, &s0, t_end, &cfg, None).unwrap();
    let labels = RunLabels {
        problem: "synthetic",
        coarse_step: 1.0,
        fine_step: 0.02,
        variant: "classic",
    };
    let rows = rows_from_run(&labels, &run, None, t_seq).unwrap();
    let report = speedup_report(&rows);
    let e = &report.entries[0];
    let theory = e.theoretical.unwrap();
    assert!((theory - 5.78).abs() < 0.005, "{theory}");
    // with unlimited workers the run can't beat its critical path
    let cp = pipelined_schedule(l, iters).critical_path(0.001, 0.05);
    assert!(e.measured >= 0.6 * theory, "{report}");
    assert!(e.measured <= 1.05 * t_seq / cp, "{report}");
}

#[test]
fn smoke_suite_passes() {
    for (name, outcome) in run_checks() {
        assert!(outcome.is_ok(), "{name}: {outcome:?}");
    }
}

#[test]
fn csv_reads_back_what_it_wrote() {
    let mut rows = vec![row(), summary(0.2, "theta_angle", 3.0, 7.0)];
    rows[1].rel_err = Some(1.0 / 3.0);
    rows[1].speedup_theory = Some(std::f64::consts::PI);
    assert_eq!(read_csv(csv_string(&rows).as_bytes()).unwrap(), rows);
}
