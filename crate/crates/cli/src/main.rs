//! `secdof`: bound tables, power sweeps, single simulations and invariant
//! verification from the command line.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use secdof::experiment::{
    run_bounds, run_sweep, run_verify, simulate, ExperimentConfig, ExperimentError, Overrides, SchemeKind,
};

const EXIT_RUNTIME: u8 = 1;
const EXIT_CONFIG: u8 = 2;
const EXIT_VERIFY: u8 = 3;

#[derive(Parser)]
#[command(name = "secdof", version, about = "Secure degrees-of-freedom experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Tabulate every DoF bound over the configured (M, J1, J2) grid.
    Bounds(Common),
    /// Run a scheme over the power grid and fit its DoF slope.
    Sweep(Common),
    /// Run a scheme once at the highest configured power, with Monte Carlo.
    Simulate(Common),
    /// Check the invariant suites.
    Verify {
        /// Suite to run; all suites when omitted.
        suite: Option<String>,
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Args)]
struct Common {
    /// JSON experiment configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output file; standard output when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    trials: Option<u64>,
    #[arg(long, value_parser = parse_scheme)]
    scheme: Option<SchemeKind>,
}

fn parse_scheme(s: &str) -> Result<SchemeKind, String> {
    s.parse()
}

enum Failure {
    Config(String),
    Runtime(String),
    Verify,
}

impl From<ExperimentError> for Failure {
    fn from(e: ExperimentError) -> Self {
        Failure::Config(e.to_string())
    }
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig, Failure> {
        let mut config = match &self.config {
            Some(path) => ExperimentConfig::load(path)?,
            None => ExperimentConfig::default(),
        };
        config.apply(&Overrides {
            seed: self.seed,
            out: self.out.clone(),
            trials: self.trials,
            scheme: self.scheme,
        });
        Ok(config)
    }
}

fn emit(out: Option<&Path>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text)
            .map_err(|e| Failure::Runtime(format!("cannot write {}: {e}", path.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Bounds(common) => {
            let config = common.load()?;
            config.validate()?;
            emit(config.out.as_deref(), &run_bounds(&config.bounds))
        }
        Command::Sweep(common) => {
            let config = common.load()?;
            let result = run_sweep(&config)?;
            emit(config.out.as_deref(), &result.to_csv())
        }
        Command::Simulate(common) => {
            let config = common.load()?;
            emit(config.out.as_deref(), &simulate(&config)?.to_json())
        }
        Command::Verify { suite, common } => {
            let config = common.load()?;
            let report = run_verify(suite.as_deref(), config.seed)?;
            emit(config.out.as_deref(), &report.to_csv())?;
            for f in report.failures() {
                eprintln!("FAIL {}/{}: {}", f.suite, f.invariant, f.counterexample);
            }
            if report.all_passed() {
                Ok(())
            } else {
                Err(Failure::Verify)
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let (code, kind, message) = match run(cli) {
        Ok(()) => return ExitCode::SUCCESS,
        Err(Failure::Verify) => return ExitCode::from(EXIT_VERIFY),
        Err(Failure::Config(m)) => (EXIT_CONFIG, "config", m),
        Err(Failure::Runtime(m)) => (EXIT_RUNTIME, "runtime", m),
    };
    eprintln!("{}", serde_json::json!({ "error": kind, "message": message }));
    ExitCode::from(code)
}
