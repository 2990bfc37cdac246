//! `qfim`: scenarios, sweeps and validation suites for deformed emitter grids.
//!
//! Exit codes: 0 success, 1 validation failure, 2 configuration error,
//! 3 numerical error.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

mod config;
mod output;
mod scenario;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use qfim_core::validate::{run_suite, Mutation, Suite, DEFAULT_SEED};

use config::{Format, ScenarioConfig};
use scenario::ResultRow;

const EXIT_VALIDATION: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_NUMERICAL: u8 = 3;

#[derive(Parser)]
#[command(name = "qfim", version, about = "Quantum Fisher information of deformed emitter grids")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the QFIM (and QCRB if a cost matrix is given) at the configured point.
    Compute {
        config: PathBuf,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Evaluate every point of the configured sweep.
    Sweep {
        config: PathBuf,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Run a self-consistency suite: generators, qfim, grid or all.
    Validate {
        suite: String,
        #[arg(long, default_value_t = DEFAULT_SEED)]
        seed: u64,
        /// Inject a known defect to confirm the suite detects it.
        #[arg(long, hide = true)]
        mutate: Option<String>,
    },
}

#[derive(Args)]
struct OutputArgs {
    /// Output format, overriding output.format.
    #[arg(long)]
    format: Option<Format>,
    /// Output file, overriding output.path; stdout when neither is set.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Append per-row wall time in milliseconds (output is then not reproducible).
    #[arg(long)]
    timing: bool,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match cli.command {
        Command::Compute { config, out } => run_scenario(&config, &out, false),
        Command::Sweep { config, out } => run_scenario(&config, &out, true),
        Command::Validate { suite, seed, mutate } => run_validate(&suite, seed, mutate.as_deref()),
    }
}

fn run_scenario(path: &std::path::Path, args: &OutputArgs, sweep: bool) -> ExitCode {
    let cfg = match ScenarioConfig::load(path) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("config error: {}: {e}", path.display());
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    if sweep && cfg.sweep.is_empty() {
        eprintln!("config error: {}: sweep needs a sweep.variable", path.display());
        return ExitCode::from(EXIT_CONFIG);
    }
    let rows: qfim_core::Result<Vec<ResultRow>> = if sweep {
        scenario::sweep(&cfg, args.timing)
    } else {
        scenario::compute(&cfg, args.timing).map(|r| vec![r])
    };
    let rows = match rows {
        Ok(r) => r,
        Err(e) => {
            eprintln!("numerical error: {e}");
            return ExitCode::from(EXIT_NUMERICAL);
        }
    };
    let format = args.format.unwrap_or(cfg.format);
    let target = args.out.clone().or_else(|| cfg.output_path.clone());
    let written = match &target {
        Some(p) => File::create(p).and_then(|f| {
            let mut w = BufWriter::new(f);
            output::write_rows(&mut w, &rows, &cfg.param_names, format)?;
            w.flush()
        }),
        None => output::write_rows(io::stdout().lock(), &rows, &cfg.param_names, format),
    };
    if let Err(e) = written {
        let place = target.map_or("stdout".to_string(), |p| p.display().to_string());
        eprintln!("cannot write {place}: {e}");
        return ExitCode::from(EXIT_CONFIG);
    }
    ExitCode::SUCCESS
}

fn run_validate(suite: &str, seed: u64, mutate: Option<&str>) -> ExitCode {
    let suite: Suite = match suite.parse() {
        Ok(s) => s,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    let mutation = match mutate.map(str::parse::<Mutation>).transpose() {
        Ok(m) => m,
        Err(e) => {
            eprintln!("{e}");
            return ExitCode::from(EXIT_CONFIG);
        }
    };
    match run_suite(suite, seed, mutation) {
        Ok(report) => {
            println!("{report}");
            if report.passed() {
                ExitCode::SUCCESS
            } else {
                for f in report.failures() {
                    eprintln!("failed: {} (worst {:.3e}, limit {:.1e})", f.name, f.worst, f.limit);
                }
                ExitCode::from(EXIT_VALIDATION)
            }
        }
        Err(e) => {
            eprintln!("numerical error: {e}");
            ExitCode::from(EXIT_NUMERICAL)
        }
    }
}
