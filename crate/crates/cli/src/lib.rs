//! `mcnet` — experiment runner for multi-connectivity network analysis.
//!
//! Subcommands:
//! * `analytic`  — closed-form capacities (and failure analysis) per
//!   sweep point; CSV/JSON/SVG artifacts.
//! * `simulate`  — Monte-Carlo runs of the same scenarios.
//! * `sweep`     — run the sweep declared in the config, honouring the
//!   config's `mode` (default: both analytic and simulated).
//! * `reproduce` — rebuild a published figure or table at desk scale and
//!   compare against stored expected values, emitting a JSON verdict.
//!
//! Exit codes: 0 success, 1 usage/config error, 2 numeric failure,
//! 3 reproduction outside tolerance.
//!
//! The TOML config grammar is documented in [`config`].

pub mod config;
pub mod figures;
pub mod runner;
pub mod svg;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand};
use config::{desk_region, full_region, parse_config, ConfigError, ExperimentSpec, Mode};
use figures::{FigureId, ReproduceOptions};
use runner::CliError;
use std::ffi::OsString;
use std::fs;
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "mcnet",
    version,
    about = "Per-user capacity and outage experiments for multi-connectivity cellular networks"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct CommonArgs {
    /// Experiment configuration (TOML); all defaults when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Directory for artifacts.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Override the master seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Override the replication count.
    #[arg(long)]
    replications: Option<u32>,
    /// Use the 500 m × 500 m torus window.
    #[arg(long, conflicts_with = "full_scale")]
    desk_scale: bool,
    /// Use the 1500 m × 1500 m torus window.
    #[arg(long)]
    full_scale: bool,
}

#[derive(Args)]
struct ReproduceArgs {
    /// Directory for artifacts.
    #[arg(long, default_value = "out")]
    out: PathBuf,
    /// Master seed for the simulated parts.
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Override the per-figure replication count.
    #[arg(long)]
    replications: Option<u32>,
    /// Use the 500 m × 500 m torus window (the default).
    #[arg(long, conflicts_with = "full_scale")]
    desk_scale: bool,
    /// Use the 1500 m × 1500 m torus window.
    #[arg(long)]
    full_scale: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Evaluate the closed forms for the configured scenario.
    Analytic(CommonArgs),
    /// Run the Monte-Carlo simulator for the configured scenario.
    Simulate(CommonArgs),
    /// Run the sweep declared in the config (requires a [sweep] section).
    Sweep(CommonArgs),
    /// Rebuild a published figure or table and verify tolerances.
    Reproduce {
        /// Figure or table to rebuild.
        #[arg(value_enum)]
        figure: FigureId,
        #[command(flatten)]
        args: ReproduceArgs,
    },
}

fn load_spec(common: &CommonArgs) -> Result<ExperimentSpec, CliError> {
    let text = match &common.config {
        Some(path) => fs::read_to_string(path)
            .map_err(|e| CliError::Io(format!("cannot read {}: {e}", path.display())))?,
        None => String::new(),
    };
    let mut spec = parse_config(&text)?;
    if let Some(seed) = common.seed {
        spec.sim.seed = seed;
    }
    if let Some(replications) = common.replications {
        spec.sim.replications = replications;
    }
    if common.desk_scale {
        spec.sim.region = desk_region();
    }
    if common.full_scale {
        spec.sim.region = full_region();
    }
    spec.sim.validate().map_err(|e| {
        CliError::Config(ConfigError {
            message: e.to_string(),
            line: None,
            column: None,
        })
    })?;
    Ok(spec)
}

fn dispatch(command: Command) -> Result<(), CliError> {
    match command {
        Command::Analytic(common) => {
            let mut spec = load_spec(&common)?;
            spec.mode = Mode::Analytic;
            report_files(&runner::execute(&spec, &common.out)?);
            Ok(())
        }
        Command::Simulate(common) => {
            let mut spec = load_spec(&common)?;
            spec.mode = Mode::Simulate;
            report_files(&runner::execute(&spec, &common.out)?);
            Ok(())
        }
        Command::Sweep(common) => {
            let spec = load_spec(&common)?;
            if spec.sweep.is_none() {
                return Err(CliError::Config(ConfigError {
                    message: "the sweep subcommand needs a [sweep] section in the config".into(),
                    line: None,
                    column: None,
                }));
            }
            report_files(&runner::execute(&spec, &common.out)?);
            Ok(())
        }
        Command::Reproduce { figure, args } => {
            let mut opts = ReproduceOptions::new(&args.out);
            opts.seed = args.seed;
            opts.replications = args.replications;
            if args.full_scale {
                opts.region = full_region();
            }
            let (verdict, files) = figures::reproduce(figure, &opts)?;
            report_files(&files);
            for c in &verdict.checks {
                println!(
                    "{} {}: expected {:.6}, got {:.6}, tolerance {:.6}",
                    if c.pass { "pass" } else { "FAIL" },
                    c.name,
                    c.expected,
                    c.got,
                    c.tolerance
                );
            }
            if verdict.pass {
                println!("verdict: PASS ({} checks)", verdict.checks.len());
                Ok(())
            } else {
                let failed = verdict.checks.iter().filter(|c| !c.pass).count();
                Err(CliError::Tolerance(format!(
                    "{failed} of {} checks outside tolerance (see {}_verdict.json)",
                    verdict.checks.len(),
                    verdict.figure
                )))
            }
        }
    }
}

fn report_files(files: &[PathBuf]) {
    for f in files {
        println!("wrote {}", f.display());
    }
}

/// Full CLI entry point; returns the process exit code.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if matches!(e.kind(), ErrorKind::DisplayHelp | ErrorKind::DisplayVersion) {
                0
            } else {
                1
            };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli.command) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
