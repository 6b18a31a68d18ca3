//! `qdarwin`: runs named decoherence and redundancy experiments and writes CSV tables
//! plus a JSON manifest.

mod config;
mod experiments;
mod output;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use config::{merge, ConfigFile};
use experiments::*;

/// Environment variable that sets the worker thread count.
pub const THREADS_VAR: &str = "QDARWIN_THREADS";

#[derive(Debug)]
pub enum Failure {
    /// Malformed config, flags or model parameters (exit 1).
    Config(String),
    /// A model size cap was exceeded (exit 2).
    Cap(String),
}

impl Failure {
    fn exit_code(&self) -> u8 {
        match self {
            Failure::Config(_) => 1,
            Failure::Cap(_) => 2,
        }
    }
}

impl std::fmt::Display for Failure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Failure::Config(m) => write!(f, "config error: {m}"),
            Failure::Cap(m) => write!(f, "cap exceeded: {m}"),
        }
    }
}

impl From<qdarwin::Error> for Failure {
    fn from(e: qdarwin::Error) -> Self {
        if e.is_cap() {
            Failure::Cap(e.to_string())
        } else {
            Failure::Config(e.to_string())
        }
    }
}

impl From<std::io::Error> for Failure {
    fn from(e: std::io::Error) -> Self {
        Failure::Config(format!("i/o: {e}"))
    }
}

impl From<serde_json::Error> for Failure {
    fn from(e: serde_json::Error) -> Self {
        Failure::Config(e.to_string())
    }
}

impl From<csv::Error> for Failure {
    fn from(e: csv::Error) -> Self {
        Failure::Config(format!("csv: {e}"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Units {
    #[default]
    Nats,
    Bits,
}

impl Units {
    pub fn scale(self) -> f64 {
        match self {
            Units::Nats => 1.0,
            Units::Bits => 1.0 / std::f64::consts::LN_2,
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Units::Nats => "nats",
            Units::Bits => "bits",
        }
    }
}

/// Settings shared by every experiment; also read from the `[run]` config section.
#[derive(Debug, Clone, Default, clap::Args, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunArgs {
    /// Seed of the random generator (default 0)
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Output directory (default `qdarwin-out`)
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Logarithm base of reported information
    #[arg(long, global = true, value_enum)]
    pub units: Option<Units>,
}

#[derive(Parser)]
#[command(version, about, long_about = None)]
struct Cli {
    /// TOML config with a `[run]` section and one section per subcommand
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[command(flatten)]
    run: RunArgs,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Partial information plot of a model
    Pip(PipArgs),
    /// Redundancy at a list of times
    Redundancy(RedundancyArgs),
    /// Pointer-selectivity sweep over measured observables
    Sweep(SweepArgs),
    /// Quantum Brownian motion snapshot
    Qbm(QbmArgs),
    /// Photon scattering off a dielectric sphere
    Photon(PhotonArgs),
    /// Born-rule probabilities by finegraining
    Envariance(EnvarianceArgs),
    /// Undoing a premeasurement with and without a record copy
    Reversal(ReversalArgs),
    /// Redundancy of Haar-random states
    Baseline(BaselineArgs),
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Pip(_) => "pip",
            Command::Redundancy(_) => "redundancy",
            Command::Sweep(_) => "sweep",
            Command::Qbm(_) => "qbm",
            Command::Photon(_) => "photon",
            Command::Envariance(_) => "envariance",
            Command::Reversal(_) => "reversal",
            Command::Baseline(_) => "baseline",
        }
    }
}

const SECTIONS: [&str; 8] = ["pip", "redundancy", "sweep", "qbm", "photon", "envariance", "reversal", "baseline"];

fn configure_threads() -> Result<(), Failure> {
    let Ok(v) = std::env::var(THREADS_VAR) else { return Ok(()) };
    let n: usize = v.parse().map_err(|_| Failure::Config(format!("{THREADS_VAR}={v} is not a thread count")))?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(n)
        .build_global()
        .map_err(|e| Failure::Config(format!("thread pool: {e}")))
}

fn run(cli: Cli) -> Result<(), Failure> {
    configure_threads()?;
    let file = match &cli.config {
        Some(p) => ConfigFile::load(p)?,
        None => ConfigFile::default(),
    };
    if let Some(s) = file.unknown_sections(&SECTIONS).first() {
        return Err(Failure::Config(format!("unknown section [{s}]")));
    }
    let run: RunArgs = merge("run", file.run.clone(), &cli.run)?;
    let name = cli.command.name();
    let section = file.section(name)?;
    let ctx = Context { seed: run.seed.unwrap_or(0), units: run.units.unwrap_or_default() };
    let (outcome, params): (Outcome, Value) = match &cli.command {
        Command::Pip(a) => {
            let a = merge(name, section, a)?;
            (pip(&a, &ctx)?, serde_json::to_value(a)?)
        }
        Command::Redundancy(a) => {
            let a = merge(name, section, a)?;
            (redundancy(&a, &ctx)?, serde_json::to_value(a)?)
        }
        Command::Sweep(a) => {
            let a = merge(name, section, a)?;
            (sweep(&a, &ctx)?, serde_json::to_value(a)?)
        }
        Command::Qbm(a) => {
            let a = merge(name, section, a)?;
            (qbm(&a, &ctx)?, serde_json::to_value(a)?)
        }
        Command::Photon(a) => {
            let a = merge(name, section, a)?;
            (photon(&a, &ctx)?, serde_json::to_value(a)?)
        }
        Command::Envariance(a) => {
            let a = merge(name, section, a)?;
            (envariance(&a, &ctx)?, serde_json::to_value(a)?)
        }
        Command::Reversal(a) => {
            let a = merge(name, section, a)?;
            (reversal(&a, &ctx)?, serde_json::to_value(a)?)
        }
        Command::Baseline(a) => {
            let a = merge(name, section, a)?;
            (baseline(&a, &ctx)?, serde_json::to_value(a)?)
        }
    };
    let out = run.out.clone().unwrap_or_else(|| PathBuf::from("qdarwin-out"));
    let written = output::write(&out, name, &ctx, params, &outcome)?;
    println!("{}", outcome.summary);
    println!("wrote {} and {}", written.csv.display(), written.manifest.display());
    Ok(())
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("{e}");
            ExitCode::from(e.exit_code())
        }
    }
}
