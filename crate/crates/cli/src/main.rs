use std::path::PathBuf;
use std::process::ExitCode;

use backflow_cli::config::{EigenMode, Kind, ScenarioConfig};
use backflow_cli::{parse_config, run_scenario, RunError};
use clap::{Parser, Subcommand, ValueEnum};

#[derive(Parser)]
#[command(name = "backflow", version, about = "Quantum backflow under friction, noise and a linear potential")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, ValueEnum)]
enum KernelArg {
    Free,
    Forced,
}

#[derive(Subcommand)]
enum Command {
    /// Run the sweep described by a config file.
    Run {
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Worker threads (default: all cores).
        #[arg(long)]
        jobs: Option<usize>,
    },
    /// Largest backflow eigenvalue of the free or forced kernel.
    Eigen {
        #[arg(long, value_enum)]
        kind: KernelArg,
        /// Kernel parameter; may be repeated. Ignored for the free kernel.
        #[arg(long, allow_negative_numbers = true)]
        xi: Vec<f64>,
        #[arg(long, default_value_t = 1e-4)]
        tol: f64,
        #[arg(long, default_value_t = 4096)]
        max_n: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

fn config_error(msg: String) -> ExitCode {
    eprintln!("backflow: config error: {msg}");
    ExitCode::from(2)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (config, out, jobs) = match cli.command {
        Command::Run { config, out, jobs } => {
            let text = match std::fs::read_to_string(&config) {
                Ok(t) => t,
                Err(e) => {
                    eprintln!("backflow: cannot read {}: {e}", config.display());
                    return ExitCode::from(1);
                }
            };
            match parse_config(&text) {
                Ok(c) => (c, out, jobs),
                Err(e) => return config_error(format!("{}: {e}", config.display())),
            }
        }
        Command::Eigen { kind, xi, tol, max_n, out } => {
            if tol.is_nan() || tol <= 0.0 {
                return config_error(format!("--tol = {tol} must be > 0"));
            }
            if max_n < 64 {
                return config_error(format!("--max-n = {max_n} must be >= 64"));
            }
            let (kind, xi) = match kind {
                KernelArg::Free => (Kind::EigenFree, vec![0.0]),
                KernelArg::Forced if xi.is_empty() => return config_error("--kind forced needs at least one --xi".into()),
                KernelArg::Forced => (Kind::EigenForce, xi),
            };
            if let Some(bad) = xi.iter().find(|x| !x.is_finite()) {
                return config_error(format!("--xi = {bad} must be finite"));
            }
            let mode = EigenMode::Refine { tolerance: tol, start_n: 64, max_n };
            (ScenarioConfig::eigen(kind, xi, mode), out, None)
        }
    };
    match run_scenario(&config, &out, jobs) {
        Ok(m) => {
            println!("wrote {} files to {}", m.files.len(), out.display());
            ExitCode::SUCCESS
        }
        Err(e) => {
            eprintln!("backflow: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

fn exit_code(e: &RunError) -> u8 {
    e.exit_code() as u8
}
