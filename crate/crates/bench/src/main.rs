use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use pint_bench::check::run_checks;
use pint_bench::output::{emit_csv, emit_json, read_rows, Metadata};
use pint_bench::{config, run_experiment, speedup_report, BenchError, Format};

/// Runs Parareal experiments and summarizes their speedup.
#[derive(Parser)]
#[command(name = "pint-bench", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the experiment matrix of an INI config. Any config key can be
    /// overridden with `--key=value` or `--section.key=value`.
    Run {
        config: PathBuf,
        /// Worker threads; falls back to the config, then PINT_BENCH_WORKERS.
        #[arg(long)]
        workers: Option<usize>,
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_parser = ["csv", "json"])]
        format: Option<String>,
        #[arg(long)]
        verbose: bool,
    },
    /// Print the speedup report of a results file.
    Speedup { results: PathBuf },
    /// Run the smoke suite.
    Check,
}

const RUN_FLAGS: [&str; 4] = ["workers", "output", "format", "verbose"];

/// Splits config overrides out of argv so clap only sees its own flags.
fn split_overrides(args: Vec<String>) -> (Vec<String>, Vec<String>) {
    let mut rest = Vec::new();
    let mut overrides = Vec::new();
    for a in args {
        let is_override = a
            .strip_prefix("--")
            .and_then(|s| s.split_once('='))
            .is_some_and(|(k, _)| !RUN_FLAGS.contains(&k));
        if is_override {
            overrides.push(a);
        } else {
            rest.push(a);
        }
    }
    (rest, overrides)
}

fn env_workers() -> Result<Option<usize>, BenchError> {
    match std::env::var("PINT_BENCH_WORKERS") {
        Err(_) => Ok(None),
        Ok(v) => v
            .trim()
            .parse()
            .map(Some)
            .map_err(|_| BenchError::Config(format!("PINT_BENCH_WORKERS = {v:?} is not a count"))),
    }
}

fn run(
    path: &Path,
    mut overrides: Vec<String>,
    workers: Option<usize>,
    output: Option<PathBuf>,
    format: Option<String>,
    verbose: bool,
) -> Result<(), BenchError> {
    if let Some(f) = &format {
        overrides.push(format!("format={f}"));
    }
    let text = std::fs::read_to_string(path)
        .map_err(|e| BenchError::Config(format!("cannot read {}: {e}", path.display())))?;
    let mut cfg = config::parse(&text, &overrides)?;
    let in_config = cfg.echo.get("experiment").is_some_and(|s| s.contains_key("workers"));
    if let Some(w) = workers {
        cfg.workers = w;
    } else if !in_config {
        if let Some(w) = env_workers()? {
            cfg.workers = w;
        }
    }
    cfg.validate()?;

    let output = output.or_else(|| cfg.output.clone()).unwrap_or_else(|| {
        PathBuf::from(match cfg.format {
            Format::Csv => "results.csv",
            Format::Json => "results.json",
        })
    });
    let outcome = run_experiment(&cfg, |msg| {
        if verbose {
            eprintln!("{msg}");
        }
    });
    if verbose {
        for n in &outcome.newton {
            eprintln!(
                "K = {}, {} {}: {} steps, {} Newton iterations, {:.3} s in Newton",
                n.coarse_step, n.variant, n.role, n.steps, n.newton_iterations, n.newton_seconds
            );
        }
    }
    match cfg.format {
        Format::Csv => emit_csv(&outcome.rows, &output)?,
        Format::Json => {
            let meta = Metadata::new(cfg.workers, cfg.echo.clone(), outcome.newton.clone());
            emit_json(&outcome.rows, &meta, &output)?
        }
    }
    eprintln!("wrote {} rows to {}", outcome.rows.len(), output.display());
    match outcome.failure {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn main() -> ExitCode {
    let (args, overrides) = split_overrides(std::env::args().collect());
    let cli = Cli::parse_from(args);
    let result = match cli.command {
        Command::Run {
            config,
            workers,
            output,
            format,
            verbose,
        } => run(&config, overrides, workers, output, format, verbose),
        Command::Speedup { results } => read_rows(&results).map(|rows| print!("{}", speedup_report(&rows))),
        Command::Check => {
            let mut failed = 0;
            for (name, outcome) in run_checks() {
                match outcome {
                    Ok(detail) => println!("PASS {name}: {detail}"),
                    Err(detail) => {
                        failed += 1;
                        println!("FAIL {name}: {detail}");
                    }
                }
            }
            if failed > 0 {
                Err(BenchError::Numerical(format!("{failed} checks failed")))
            } else {
                Ok(())
            }
        }
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("pint-bench: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}
