use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use qdim_cli::output::{object_csv, table_csv, to_json, verify_csv, Format};
use qdim_cli::runner::{self, run_requests, RunOptions, RunReport};
use qdim_cli::scenario::{parse_scenario, Request, Scenario};
use qdim_cli::verify::run_suite;
use qdim_core::PhysicalConstants;

/// Reducible-representation field computations driven by JSON scenarios.
#[derive(Parser)]
#[command(name = "qdim", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Scenario file (JSON).
    #[arg(long)]
    scenario: PathBuf,
    #[command(flatten)]
    out: OutArgs,
    /// Record wall-clock time per request (makes output non-reproducible).
    #[arg(long)]
    timing: bool,
}

#[derive(Args)]
struct OutArgs {
    /// Write output here instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
}

#[derive(Subcommand)]
enum Command {
    /// Run every request of a scenario.
    Run {
        #[command(flatten)]
        common: Common,
        /// Seed for verify requests without their own.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Evaluate field expectation values at the points of the scenario's
    /// field-eval requests.
    FieldEval {
        #[command(flatten)]
        common: Common,
    },
    /// Quantum and classical energies.
    Energy {
        #[command(flatten)]
        common: Common,
    },
    /// Integrated Stokes parameters of a photon field.
    Stokes {
        #[command(flatten)]
        common: Common,
    },
    /// Cross-term cancellation check on a symmetric grid.
    AppendixB {
        #[command(flatten)]
        common: Common,
        /// Time at which the cross terms are evaluated.
        #[arg(long, allow_hyphen_values = true)]
        x0: Option<f64>,
    },
    /// Report the value of the product λl.
    Calibrate {
        /// Take the constants from this scenario (natural units otherwise).
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Use SI constants.
        #[arg(long, conflicts_with = "scenario")]
        si: bool,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Run the seeded invariant suite.
    Verify {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[command(flatten)]
        out: OutArgs,
    },
}

fn load(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_scenario(&text).with_context(|| format!("parsing {}", path.display()))
}

fn emit(out: &OutArgs, text: &str) -> Result<()> {
    match &out.out {
        Some(path) => std::fs::write(path, text).with_context(|| format!("writing {}", path.display())),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn render_report(report: &RunReport, format: Format) -> Result<String> {
    match format {
        Format::Json => to_json(report),
        Format::Csv => {
            let [record] = report.records.as_slice() else {
                bail!("csv output needs exactly one request (got {}); use json", report.records.len());
            };
            if let Some(e) = &record.error {
                bail!("request {} failed: {e}", record.request);
            }
            let p = &record.payload;
            if let (Some(cols), Some(rows)) = (p["columns"].as_array(), p["rows"].as_array()) {
                let cols: Vec<&str> = cols.iter().filter_map(|c| c.as_str()).collect();
                let rows: Vec<Vec<f64>> = rows
                    .iter()
                    .map(|r| r.as_array().map(|r| r.iter().filter_map(|v| v.as_f64()).collect()).unwrap_or_default())
                    .collect();
                table_csv(&cols, &rows)
            } else {
                object_csv(p)
            }
        }
    }
}

/// Runs a subset of the scenario's requests, or `fallback` if it has none.
fn run_kind(common: &Common, pick: impl Fn(&Request) -> bool, fallback: Option<Request>) -> Result<bool> {
    let scenario = load(&common.scenario)?;
    let mut requests: Vec<Request> = scenario.requests.iter().filter(|r| pick(r)).cloned().collect();
    if requests.is_empty() {
        match fallback {
            Some(r) => requests.push(r),
            None => bail!("scenario has no matching request"),
        }
    }
    let opts = RunOptions { timing: common.timing, seed: None };
    let report = run_requests(&scenario, &requests, &opts)?;
    emit(&common.out, &render_report(&report, common.out.format)?)?;
    Ok(report.passed())
}

fn main_inner() -> Result<bool> {
    let cli = Cli::parse();
    match cli.command {
        Command::Run { common, seed } => {
            let scenario = load(&common.scenario)?;
            let report = runner::run(&scenario, &RunOptions { timing: common.timing, seed })?;
            emit(&common.out, &render_report(&report, common.out.format)?)?;
            Ok(report.passed())
        }
        Command::FieldEval { common } => run_kind(&common, |r| matches!(r, Request::FieldEval { .. }), None),
        Command::Energy { common } => run_kind(&common, |r| matches!(r, Request::Energy), Some(Request::Energy)),
        Command::Stokes { common } => run_kind(&common, |r| matches!(r, Request::Stokes), Some(Request::Stokes)),
        Command::AppendixB { common, x0 } => match x0 {
            Some(x0) => run_kind(&common, |_| false, Some(Request::AppendixB { x0 })),
            None => run_kind(&common, |r| matches!(r, Request::AppendixB { .. }), Some(Request::AppendixB { x0: 0.0 })),
        },
        Command::Calibrate { scenario, si, out } => {
            let constants = match (scenario, si) {
                (Some(path), _) => load(&path)?.constants,
                (None, true) => PhysicalConstants::si(),
                (None, false) => PhysicalConstants::natural(),
            };
            let (payload, passed) = runner::calibrate(&constants)?;
            let text = match out.format {
                Format::Json => to_json(&payload)?,
                Format::Csv => object_csv(&payload)?,
            };
            emit(&out, &text)?;
            Ok(passed != Some(false))
        }
        Command::Verify { seed, out } => {
            let report = run_suite(seed);
            let text = match out.format {
                Format::Json => to_json(&report)?,
                Format::Csv => verify_csv(&report),
            };
            emit(&out, &text)?;
            Ok(report.passed)
        }
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match main_inner() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => {
            log::error!("one or more checks missed their tolerance");
            ExitCode::from(1)
        }
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
