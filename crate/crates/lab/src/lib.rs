//! Reproducible command-line experiments on top of `kink-core`.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails (residual above
//! tolerance, non-PSD effective Hamiltonian, unconverged rows under `--strict`),
//! 2 when the configuration is rejected or output cannot be written.

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod output;
pub mod parse;

use config::{Experiment, Settings};

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("cannot write output: {0}")]
    Io(String),
}

impl From<kink_core::Error> for CliError {
    fn from(e: kink_core::Error) -> Self {
        CliError::Invalid(e.to_string())
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        2
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "kink-lab",
    version,
    about = "Kink and interface ground states of the XXZ ferromagnet"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Zero-energy check of kink states on chains (JSON).
    VerifyKink(RunArgs),
    /// Zero-energy check of interface states on rectangles (JSON).
    #[command(name = "interface-2d")]
    Interface2d(RunArgs),
    /// Magnetization profile of a kink with the tanh fit (CSV).
    Profile(RunArgs),
    /// Spectral gaps above the ground states over a family of sizes (CSV).
    GapScan(RunArgs),
    /// Projected height model on a strip of zig-zag chains (JSON).
    Qsos(RunArgs),
}

impl Command {
    fn split(self) -> (Experiment, RunArgs) {
        match self {
            Command::VerifyKink(a) => (Experiment::VerifyKink, a),
            Command::Interface2d(a) => (Experiment::Interface2d, a),
            Command::Profile(a) => (Experiment::Profile, a),
            Command::GapScan(a) => (Experiment::GapScan, a),
            Command::Qsos(a) => (Experiment::Qsos, a),
        }
    }
}

/// Flags shared by all experiments; each experiment rejects those it does not use.
/// List-valued flags take comma-separated values.
#[derive(Debug, Default, clap::Args)]
pub struct RunArgs {
    /// Config file (flat TOML with schema_version = 1); flags override its values.
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    /// Spin quantum number(s), e.g. 1/2 or 1/2,1.
    #[arg(long)]
    pub spin: Option<String>,
    /// Anisotropy value(s) delta >= 1; "inf" gives the Ising limit.
    #[arg(long)]
    pub delta: Option<String>,
    /// Chain length(s).
    #[arg(long)]
    pub length: Option<String>,
    /// Lattice width(s), or the number of zig-zag chains for qsos.
    #[arg(long)]
    pub width: Option<String>,
    #[arg(long)]
    pub height: Option<String>,
    /// Kink parameter: x, x+yi, r@theta, q, 1/q or q^k. Repeatable.
    #[arg(long, allow_hyphen_values = true)]
    pub z: Vec<String>,
    /// Height window MIN:MAX.
    #[arg(long, allow_hyphen_values = true)]
    pub window: Option<String>,
    #[arg(long)]
    pub tol: Option<String>,
    /// Seed for the Lanczos start vectors.
    #[arg(long)]
    pub seed: Option<String>,
    /// Output file, written atomically; stdout when absent.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
    /// Treat warnings (unconverged rows) as failures.
    #[arg(long)]
    pub strict: bool,
    /// Use the antikink boundary field and states.
    #[arg(long)]
    pub antikink: bool,
    /// Boundary field strength overriding S sqrt(1 - 1/delta^2).
    #[arg(long, allow_hyphen_values = true)]
    pub field: Option<String>,
    /// Sectors: central, one-magnon, all, or a value of 2M.
    #[arg(long, allow_hyphen_values = true)]
    pub sector: Option<String>,
    /// Eigensolver: lanczos or dense.
    #[arg(long)]
    pub solver: Option<String>,
    /// Common phase of the kink parameters (qsos).
    #[arg(long, allow_hyphen_values = true)]
    pub phase: Option<String>,
}

/// File values first, then every flag that was given.
pub fn settings_from(experiment: Experiment, args: &RunArgs) -> Result<Settings, CliError> {
    let mut s = Settings::new(experiment);
    if let Some(path) = &args.config {
        s.load_file(path)?;
    }
    let scalars = [
        ("spin", &args.spin),
        ("delta", &args.delta),
        ("length", &args.length),
        ("width", &args.width),
        ("height", &args.height),
        ("window", &args.window),
        ("tol", &args.tol),
        ("seed", &args.seed),
        ("field", &args.field),
        ("sector", &args.sector),
        ("solver", &args.solver),
        ("phase", &args.phase),
    ];
    for (key, value) in scalars {
        if let Some(v) = value {
            // A window is a single token even though it is not comma-separated.
            s.set_one(key, v);
        }
    }
    if !args.z.is_empty() {
        s.set(
            "z",
            args.z.iter().flat_map(|z| parse::split_list(z)).collect(),
        );
    }
    if let Some(out) = &args.out {
        s.set("out", vec![out.to_string_lossy().into_owned()]);
    }
    if args.strict {
        s.set("strict", vec!["true".into()]);
    }
    if args.antikink {
        s.set("antikink", vec!["true".into()]);
    }
    Ok(s)
}

fn execute(experiment: Experiment, args: &RunArgs) -> Result<commands::Report, CliError> {
    let settings = settings_from(experiment, args)?;
    let report = commands::run(&settings)?;
    match settings.text("out")? {
        Some(path) => output::write_atomic(std::path::Path::new(path), &report.body)?,
        None => print!("{}", report.body),
    }
    Ok(report)
}

/// Parses arguments, runs the experiment and returns the process exit code.
pub fn main_with<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
    };
    let (experiment, run_args) = cli.command.split();
    match execute(experiment, &run_args) {
        Ok(report) => {
            for w in &report.warnings {
                eprintln!("warning: {w}");
            }
            if report.passed {
                0
            } else {
                eprintln!("{}: check failed", experiment.name());
                1
            }
        }
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}
