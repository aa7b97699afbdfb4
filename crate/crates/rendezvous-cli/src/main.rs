//! `rendezvous`: sweeps, closed-form tables, exact checks, and replay.
//!
//! Every producing command resolves its arguments into a plan, executes it,
//! and emits a manifest describing the resolved plan; `replay` re-executes a
//! manifest and must reproduce the original bytes. Exit codes: 0 success,
//! 1 runtime/check failure, 2 usage, 3 infeasible instance, 4 enumeration
//! guard.

use std::fmt;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use rendezvous_cli::manifest::{OraclePlan, Plan, RunManifest, SimPlan, TheoryPlan};
use rendezvous_cli::runner::{self, PlanOutput};
use rendezvous_core::Error;

const SEED_ENV: &str = "RENDEZVOUS_SEED";

#[derive(Parser)]
#[command(
    name = "rendezvous",
    version,
    about = "Two-user multichannel rendezvous: hop-rule simulation and analysis"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Monte Carlo sweep over instance sizes and hop rules
    Sim(SimArgs),
    /// Closed-form table for a size profile
    Theory(TheoryArgs),
    /// Brute-force checks of single-slot probabilities and mean times
    Oracle(OracleArgs),
    /// Re-execute a recorded manifest and reproduce its output
    Replay(ReplayArgs),
}

#[derive(Args)]
struct SimArgs {
    /// Clock relation between the users: sync or async
    #[arg(long, default_value = "sync")]
    setting: String,
    /// Comma-separated hop rules: random, synmac, lsh, lsh2, lsh3, lsh4
    #[arg(long = "alg", value_delimiter = ',', default_value = "lsh2")]
    alg: Vec<String>,
    /// Label space size
    #[arg(long = "N")]
    n_total: u32,
    /// Channels available to user 1
    #[arg(long)]
    n1: u32,
    /// Channels available to user 2
    #[arg(long)]
    n2: u32,
    /// Common channel count (exactly one of --n12 / --n12-sweep)
    #[arg(long, conflicts_with = "n12_sweep", required_unless_present = "n12_sweep")]
    n12: Option<u32>,
    /// Common channel grid, lo:hi or lo:hi:step, inclusive
    #[arg(long = "n12-sweep")]
    n12_sweep: Option<String>,
    /// Instance shape: uniform or contiguous
    #[arg(long, default_value = "uniform")]
    layout: String,
    /// Clock offset of user 2 in async runs: fixed:D or uniform:LO:HI
    #[arg(long, default_value = "uniform:1:100")]
    drift: String,
    /// Independent experiments per grid cell
    #[arg(long)]
    experiments: Option<u32>,
    /// Slot budget per experiment
    #[arg(long)]
    slots: Option<u32>,
    /// Base seed (default: RENDEZVOUS_SEED env, else 0)
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses all cores (output does not depend on this)
    #[arg(long, default_value_t = 0)]
    threads: usize,
    /// Output format: csv or json
    #[arg(long, default_value = "csv")]
    format: String,
    /// Multiset window for lsh4
    #[arg(long, default_value_t = 20)]
    t0: u32,
    /// Multiset pick probability for lsh4
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    /// Preset 10000 experiments x 10000 slots (flags still override)
    #[arg(long = "paper-scale")]
    paper_scale: bool,
    /// Write output here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the manifest here (default: OUT.manifest.json, or stderr line)
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct TheoryArgs {
    /// Channels available to user 1
    #[arg(long)]
    n1: u32,
    /// Channels available to user 2
    #[arg(long)]
    n2: u32,
    /// Common channel count (exactly one of --n12 / --n12-sweep)
    #[arg(long, conflicts_with = "n12_sweep", required_unless_present = "n12_sweep")]
    n12: Option<u32>,
    /// Common channel grid, lo:hi or lo:hi:step, inclusive
    #[arg(long = "n12-sweep")]
    n12_sweep: Option<String>,
    /// Multiset window for the lsh4 column
    #[arg(long, default_value_t = 20)]
    t0: u32,
    /// Multiset pick probability for the lsh4 column
    #[arg(long, default_value_t = 0.5)]
    p: f64,
    /// Output format: csv or json
    #[arg(long, default_value = "csv")]
    format: String,
    /// Write output here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the manifest here (default: OUT.manifest.json, or stderr line)
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    /// Label space size
    #[arg(long = "N")]
    n_total: u32,
    /// User 1 channels, comma-separated labels
    #[arg(long, value_delimiter = ',', required = true)]
    c1: Vec<u32>,
    /// User 2 channels, comma-separated labels
    #[arg(long, value_delimiter = ',', required = true)]
    c2: Vec<u32>,
    /// Which check to run: all, lsh2, lsh3, or ettr
    #[arg(long, default_value = "all")]
    check: String,
    /// Monte Carlo samples per confirmation line
    #[arg(long, default_value_t = 20_000)]
    samples: u64,
    /// Base seed (default: RENDEZVOUS_SEED env, else 0)
    #[arg(long)]
    seed: Option<u64>,
    /// Write the report here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write the manifest here (default: OUT.manifest.json, or stderr line)
    #[arg(long)]
    manifest: Option<PathBuf>,
}

#[derive(Args)]
struct ReplayArgs {
    /// Manifest file from a previous run
    manifest: PathBuf,
    /// Write output here instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

enum AppError {
    Core(Error),
    Io(std::io::Error),
    BadManifest(serde_json::Error),
}

impl From<Error> for AppError {
    fn from(e: Error) -> Self {
        AppError::Core(e)
    }
}

impl From<std::io::Error> for AppError {
    fn from(e: std::io::Error) -> Self {
        AppError::Io(e)
    }
}

impl fmt::Display for AppError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            AppError::Core(e) => write!(f, "{e}"),
            AppError::Io(e) => write!(f, "io: {e}"),
            AppError::BadManifest(e) => write!(f, "manifest: {e}"),
        }
    }
}

impl AppError {
    fn exit_code(&self) -> u8 {
        match self {
            AppError::Core(Error::InvalidArgument(_)) => 2,
            AppError::Core(Error::InvalidInstance(_)) => 3,
            AppError::Core(Error::InfeasibleSpec { .. }) => 3,
            AppError::Core(Error::GuardViolation { .. }) => 4,
            AppError::Io(_) => 1,
            AppError::BadManifest(_) => 2,
        }
    }
}

fn resolve_seed(flag: Option<u64>) -> Result<u64, AppError> {
    if let Some(s) = flag {
        return Ok(s);
    }
    match std::env::var(SEED_ENV) {
        Ok(v) => v
            .trim()
            .parse::<u64>()
            .map_err(|_| Error::InvalidArgument("RENDEZVOUS_SEED must be an unsigned integer").into()),
        Err(_) => Ok(0),
    }
}

fn resolve_n12_values(n12: Option<u32>, sweep: Option<&str>) -> Result<Vec<u32>, AppError> {
    match (n12, sweep) {
        (Some(v), None) => Ok(vec![v]),
        (None, Some(s)) => Ok(runner::parse_sweep(s)?),
        // clap rejects both-present and both-absent before this point.
        _ => Err(Error::InvalidArgument("pass exactly one of n12 and n12-sweep").into()),
    }
}

impl SimArgs {
    fn resolve(&self) -> Result<SimPlan, AppError> {
        let experiments = self
            .experiments
            .unwrap_or(if self.paper_scale { 10_000 } else { 1_000 });
        let slots = self
            .slots
            .unwrap_or(if self.paper_scale { 10_000 } else { 2_000 });
        Ok(SimPlan {
            setting: self.setting.clone(),
            algorithms: self.alg.clone(),
            n_total: self.n_total,
            n1: self.n1,
            n2: self.n2,
            n12_values: resolve_n12_values(self.n12, self.n12_sweep.as_deref())?,
            layout: self.layout.clone(),
            drift: self.drift.clone(),
            experiments,
            slots,
            seed: resolve_seed(self.seed)?,
            threads: self.threads,
            format: self.format.clone(),
            t0: self.t0,
            p: self.p,
        })
    }
}

impl TheoryArgs {
    fn resolve(&self) -> Result<TheoryPlan, AppError> {
        Ok(TheoryPlan {
            n1: self.n1,
            n2: self.n2,
            n12_values: resolve_n12_values(self.n12, self.n12_sweep.as_deref())?,
            t0: self.t0,
            p: self.p,
            format: self.format.clone(),
        })
    }
}

impl OracleArgs {
    fn resolve(&self) -> Result<OraclePlan, AppError> {
        Ok(OraclePlan {
            n_total: self.n_total,
            c1: self.c1.clone(),
            c2: self.c2.clone(),
            check: self.check.clone(),
            samples: self.samples,
            seed: resolve_seed(self.seed)?,
        })
    }
}

fn manifest_path_for(out: &Path) -> PathBuf {
    let mut os = out.as_os_str().to_owned();
    os.push(".manifest.json");
    PathBuf::from(os)
}

fn write_output(text: &str, out: Option<&Path>) -> Result<(), AppError> {
    match out {
        Some(path) => fs::write(path, text)?,
        None => print!("{text}"),
    }
    Ok(())
}

/// Execute a plan, write its output, and record the manifest: next to an
/// --out file by default, or as one compact line on stderr for stdout runs.
fn execute_and_emit(
    plan: Plan,
    out: Option<&Path>,
    manifest: Option<&Path>,
) -> Result<u8, AppError> {
    let started = Instant::now();
    let output = runner::execute_plan(&plan)?;
    let duration_ms = started.elapsed().as_millis() as u64;
    let record = RunManifest::new(plan, duration_ms);
    write_output(output.text(), out)?;
    match (manifest, out) {
        (Some(mpath), _) => fs::write(mpath, record.to_json_pretty())?,
        (None, Some(opath)) => fs::write(manifest_path_for(opath), record.to_json_pretty())?,
        (None, None) => eprintln!("{}", record.to_json_line()),
    }
    Ok(output.exit_code())
}

fn replay(args: &ReplayArgs) -> Result<u8, AppError> {
    let text = fs::read_to_string(&args.manifest)?;
    let record = RunManifest::from_json(&text).map_err(AppError::BadManifest)?;
    let output: PlanOutput = runner::execute_plan(&record.plan)?;
    write_output(output.text(), args.out.as_deref())?;
    Ok(output.exit_code())
}

fn run(cli: Cli) -> Result<u8, AppError> {
    match cli.command {
        Command::Sim(args) => {
            let plan = Plan::Sim(args.resolve()?);
            execute_and_emit(plan, args.out.as_deref(), args.manifest.as_deref())
        }
        Command::Theory(args) => {
            let plan = Plan::Theory(args.resolve()?);
            execute_and_emit(plan, args.out.as_deref(), args.manifest.as_deref())
        }
        Command::Oracle(args) => {
            let plan = Plan::Oracle(args.resolve()?);
            execute_and_emit(plan, args.out.as_deref(), args.manifest.as_deref())
        }
        Command::Replay(args) => replay(&args),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
