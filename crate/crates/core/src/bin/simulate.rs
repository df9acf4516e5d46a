//! `simulate` — run a configured scenario or a parameter sweep and write the
//! results as CSV, a mirroring JSON report, and optional per-run traces.
//!
//! Exit codes: 0 success, 2 configuration/validation error, 3 interference
//! verifier violation, 1 anything else. Errors are printed to stderr as a
//! single JSON object.

use std::path::PathBuf;
use std::process::ExitCode;

use clap::Parser;

use ntn_tdd_sim::config::{DelayScope, ScenarioConfig};
use ntn_tdd_sim::output::{sweep_rows, write_csv, write_json, write_traces};
use ntn_tdd_sim::scheduler::SelectionMethod;
use ntn_tdd_sim::sim::{run_point, run_sweep, SimError, SweepAxis, SweepPoint};
use ntn_tdd_sim::tdd::{DuplexPolicy, SlotPattern};

#[derive(Debug, Parser)]
#[command(
    name = "simulate",
    about = "Monte Carlo simulator for TDD slot allocation over LEO satellite links",
    version
)]
struct Cli {
    /// Scenario configuration file (TOML). Flags below override its fields.
    #[arg(long)]
    config: PathBuf,

    /// Root seed for the per-run random streams.
    #[arg(long)]
    seed: Option<u64>,

    /// Monte Carlo repetitions per point.
    #[arg(long)]
    runs: Option<usize>,

    /// Slot allocation policy.
    #[arg(long, value_parser = clap::value_parser!(DuplexPolicy))]
    policy: Option<DuplexPolicy>,

    /// UE selection method.
    #[arg(long, value_parser = clap::value_parser!(SelectionMethod))]
    scheduler: Option<SelectionMethod>,

    /// Slot pattern (dsu, 2dsu, 4dsu, 6dsu, ...).
    #[arg(long, value_parser = clap::value_parser!(SlotPattern))]
    pattern: Option<SlotPattern>,

    /// Delay extremes scope for slot allocation.
    #[arg(long, value_parser = clap::value_parser!(DelayScope))]
    delay_scope: Option<DelayScope>,

    /// Sweep axis; requires --values.
    #[arg(long, value_parser = clap::value_parser!(SweepAxis), requires = "values")]
    sweep: Option<SweepAxis>,

    /// Comma-separated sweep values, e.g. --values 300,400,500.
    #[arg(long, requires = "sweep")]
    values: Option<String>,

    /// Output directory (created if missing).
    #[arg(long, default_value = "out")]
    out: PathBuf,

    /// Also write one timeline trace file per run under <out>/traces/.
    #[arg(long)]
    emit_traces: bool,
}

fn fail(kind: &str, message: &str, code: u8) -> ExitCode {
    let err = serde_json::json!({ "error": kind, "message": message });
    eprintln!("{err}");
    ExitCode::from(code)
}

fn exit_code_for(err: &SimError) -> (u8, &'static str) {
    match err {
        SimError::Config(_) | SimError::BadSweepValue(_) => (2, "config"),
        SimError::Interference { .. } => (3, "interference"),
        _ => (1, "simulation"),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();

    let mut config = match ScenarioConfig::load(&cli.config) {
        Ok(c) => c,
        Err(e) => return fail("config", &e.to_string(), 2),
    };
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    if let Some(runs) = cli.runs {
        config.runs = runs;
    }
    if let Some(policy) = cli.policy {
        config.policy = policy;
    }
    if let Some(scheduler) = cli.scheduler {
        config.scheduler = scheduler;
    }
    if let Some(pattern) = cli.pattern {
        config.pattern = pattern;
    }
    if let Some(scope) = cli.delay_scope {
        config.delay_scope = scope;
    }
    if let Err(e) = config.validate() {
        return fail("config", &e.to_string(), 2);
    }

    let points: Result<Vec<SweepPoint>, SimError> = match (cli.sweep, &cli.values) {
        (Some(axis), Some(values)) => {
            let values: Vec<String> = values
                .split(',')
                .map(|v| v.trim().to_string())
                .filter(|v| !v.is_empty())
                .collect();
            if values.is_empty() {
                return fail("config", "--values must list at least one value", 2);
            }
            run_sweep(&config, axis, &values)
        }
        _ => run_point(&config).map(|(runs, aggregate)| {
            vec![SweepPoint {
                axis: SweepAxis::Altitude,
                label: format!("{}", config.altitude_km),
                config: config.clone(),
                runs,
                aggregate,
            }]
        }),
    };
    let points = match points {
        Ok(p) => p,
        Err(e) => {
            let (code, kind) = exit_code_for(&e);
            return fail(kind, &e.to_string(), code);
        }
    };

    if let Err(e) = std::fs::create_dir_all(&cli.out) {
        return fail("io", &e.to_string(), 1);
    }
    let rows = sweep_rows(&points);
    if let Err(e) = write_csv(&cli.out.join("sweep.csv"), &rows) {
        return fail("io", &e.to_string(), 1);
    }
    if let Err(e) = write_json(&cli.out.join("report.json"), &rows) {
        return fail("io", &e.to_string(), 1);
    }
    if cli.emit_traces {
        if let Err(e) = write_traces(&cli.out, &points) {
            return fail("io", &e.to_string(), 1);
        }
    }

    for row in &rows {
        println!(
            "{} {} {}-{} {} {} = {:.4}{}",
            row.axis,
            row.value,
            row.scheduler,
            row.policy,
            row.pattern,
            row.metric,
            row.mean,
            row.ci95.map(|c| format!(" +/- {c:.4}")).unwrap_or_default()
        );
    }
    ExitCode::SUCCESS
}
