use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use floqseirs_cli::commands::{self, PersistOptions, SweepOptions};
use floqseirs_cli::config::{AppError, RunConfig};

/// Seasonally forced SEIRS epidemic toolkit: simulation, disease-free
/// periodic solution, reproduction numbers, sweeps, and persistence checks.
#[derive(Parser)]
#[command(name = "floqseirs", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Integrate the model and emit a t,S,E,I,R time series as CSV.
    Simulate {
        #[arg(long)]
        config: PathBuf,
        /// Output path (stdout when omitted).
        #[arg(long)]
        out: Option<PathBuf>,
        /// Override the configured horizon, in years.
        #[arg(long)]
        horizon: Option<f64>,
    },
    /// Solve for the reproduction number and emit the report as JSON.
    R0 {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Bisection tolerance on lambda.
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
    },
    /// Emit one period of the disease-free solution as t,S_hat CSV.
    Dfe {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Reproduction numbers across a ladder of transmission offsets.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        beta0_min: f64,
        #[arg(long)]
        beta0_max: f64,
        #[arg(long)]
        steps: usize,
        /// Concurrent rows (defaults to the available parallelism).
        #[arg(long)]
        jobs: Option<usize>,
        #[arg(long, default_value_t = 1e-7)]
        tol: f64,
    },
    /// Long-horizon extinction/persistence verdict as JSON.
    PersistCheck {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
        /// Trailing periods the tail minima are taken over.
        #[arg(long, default_value_t = 20)]
        tail_periods: usize,
        /// Persistence floor on the tail minima, individuals.
        #[arg(long, default_value_t = 1e-3)]
        floor: f64,
        /// E + I below this counts as extinct, individuals.
        #[arg(long, default_value_t = 1.0)]
        extinction_threshold: f64,
        #[arg(long)]
        horizon: Option<f64>,
    },
    /// Verify the incidence assumptions and emit the report as JSON.
    CheckF {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("FLOQSEIRS_LOG", "error"))
        .format_timestamp(None)
        .init();
    match run() {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code() as u8)
        }
    }
}

fn load(path: &Path, horizon: Option<f64>) -> Result<RunConfig, AppError> {
    let mut config = RunConfig::load(path)?;
    if let Some(h) = horizon {
        config.horizon = h;
        config.validate()?;
    }
    Ok(config)
}

fn emit(text: &str, out: Option<&PathBuf>) -> Result<(), AppError> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

fn run() -> Result<ExitCode, AppError> {
    let cli = Cli::parse();
    match cli.command {
        Command::Simulate {
            config,
            out,
            horizon,
        } => {
            let config = load(&config, horizon)?;
            let csv = commands::simulate(&config)?;
            emit(&csv, out.as_ref())?;
        }
        Command::R0 { config, out, tol } => {
            let config = load(&config, None)?;
            let report = commands::r0(&config, tol)?;
            let json = serde_json::to_string_pretty(&report).expect("report serializes");
            emit(&format!("{json}\n"), out.as_ref())?;
        }
        Command::Dfe { config, out } => {
            let config = load(&config, None)?;
            let csv = commands::dfe_csv(&config)?;
            emit(&csv, out.as_ref())?;
        }
        Command::Sweep {
            config,
            out,
            beta0_min,
            beta0_max,
            steps,
            jobs,
            tol,
        } => {
            let config = load(&config, None)?;
            let jobs = jobs.unwrap_or_else(|| {
                std::thread::available_parallelism()
                    .map(|n| n.get())
                    .unwrap_or(1)
            });
            let opts = SweepOptions {
                beta0_min,
                beta0_max,
                steps,
                jobs,
                tol,
            };
            let (csv, ok) = commands::sweep(&config, &opts)?;
            emit(&csv, out.as_ref())?;
            if ok == 0 {
                eprintln!("error: every sweep row failed");
                return Ok(ExitCode::from(2));
            }
        }
        Command::PersistCheck {
            config,
            out,
            tail_periods,
            floor,
            extinction_threshold,
            horizon,
        } => {
            let config = load(&config, horizon)?;
            let opts = PersistOptions {
                tail_periods,
                floor,
                extinction_threshold,
            };
            let verdict = commands::persist_check(&config, &opts)?;
            let json = serde_json::to_string_pretty(&verdict).expect("verdict serializes");
            emit(&format!("{json}\n"), out.as_ref())?;
        }
        Command::CheckF { config, out } => {
            let config = load(&config, None)?;
            let report = commands::check_f(&config)?;
            let json = serde_json::to_string_pretty(&report).expect("report serializes");
            emit(&format!("{json}\n"), out.as_ref())?;
            if !report.all_pass() {
                eprintln!("error: incidence assumptions violated");
                return Ok(ExitCode::from(3));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}
