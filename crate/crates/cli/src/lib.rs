//! Command-line front-end for `bohmdyn`.
//!
//! Exit codes: 0 success, 1 a check failed, 2 configuration or usage error,
//! 3 degenerate input (singular grid point, node-dominated grid, a start on a
//! node).

use std::ffi::OsString;
use std::path::PathBuf;

use clap::{Parser, Subcommand};

pub mod commands;
pub mod config;
pub mod output;
pub mod state_id;

use config::RunConfig;

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_DEGENERATE: i32 = 3;

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Io(String),
    Degenerate(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Io(_) => EXIT_CONFIG,
            CliError::Degenerate(_) => EXIT_DEGENERATE,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "config error: {m}"),
            CliError::Io(m) => write!(f, "output error: {m}"),
            CliError::Degenerate(m) => write!(f, "degenerate input: {m}"),
        }
    }
}

const STATE_HELP: &str = "\
State ids: name[:key=value[,key=value]*]
  ho1d[:n=<level>][,omega=<w>]            1D oscillator eigenstate (n=0, omega=1)
  hydrogen[:<1s|2s|2pz>][,Z=<charge>]     hydrogen-like orbital (1s, Z=1)
  gauss[:sigma=<s0>][,k=<k0>]             free Gaussian packet (sigma=1, k=0)
  hooke                                   Hooke's atom, E = 2
  super:<term>+<term>...[,omega=][,Z=]    equal-weight superposition
  product:<term>*<term>...[,omega=][,Z=]  product state
Terms: ho<n>, h1s, h2s, h2pz. Unknown keys are errors.

Environment: BOHMDYN_THREADS caps worker threads.
Exit codes: 0 pass, 1 check failure, 2 config error, 3 degenerate input.";

#[derive(Parser, Debug)]
#[command(name = "bohmdyn", version, about = "Bohmian fields, trajectories and identity checks", after_help = STATE_HELP)]
struct Cli {
    /// Run configuration file.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Output directory (overrides output_dir).
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// RNG seed (overrides seed).
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Print machine-readable JSON on stdout.
    #[arg(long, global = true)]
    json: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// List the catalog states.
    Catalog,
    /// Evaluate every field on a grid or line and write fields.csv.
    Fields { state: Option<String> },
    /// Integrate trajectories and write one traj_NNN.csv per initial condition.
    Traj { state: Option<String> },
    /// Run the identity suite and report per-check pass flags.
    Verify {
        state: Option<String>,
        /// Verify every catalog state.
        #[arg(long)]
        all: bool,
    },
    /// Sample or run an ensemble check and write ensemble.json.
    Ensemble { state: Option<String> },
}

fn configure_threads() -> Result<(), CliError> {
    let Ok(value) = std::env::var("BOHMDYN_THREADS") else {
        return Ok(());
    };
    let threads: usize = value
        .trim()
        .parse()
        .ok()
        .filter(|&n| n > 0)
        .ok_or_else(|| CliError::Config(format!("BOHMDYN_THREADS must be a positive integer, got '{value}'")))?;
    // A second call in the same process keeps the first pool.
    let _ = rayon::ThreadPoolBuilder::new().num_threads(threads).build_global();
    Ok(())
}

fn load_config(path: Option<&PathBuf>) -> Result<RunConfig, CliError> {
    match path {
        None => Ok(RunConfig::default()),
        Some(p) => {
            let text = std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))?;
            RunConfig::parse(&text).map_err(|e| CliError::Config(format!("{}: {e}", p.display())))
        }
    }
}

fn dispatch(cli: Cli) -> Result<commands::Outcome, CliError> {
    configure_threads()?;
    let config = load_config(cli.config.as_ref())?;
    let out = cli.out.clone().or_else(|| config.output_dir.clone());
    let out_or_cwd = out.clone().unwrap_or_else(|| PathBuf::from("."));
    let seed = cli.seed.or(config.seed).unwrap_or(0);
    match &cli.command {
        Command::Catalog => commands::catalog(cli.json),
        Command::Fields { state } => commands::fields(state.as_deref(), &config, &out_or_cwd),
        Command::Traj { state } => commands::traj(state.as_deref(), &config, &out_or_cwd),
        Command::Verify { state, all } => commands::verify(state.as_deref(), *all, &config, out.as_deref(), cli.json),
        Command::Ensemble { state } => commands::ensemble(state.as_deref(), &config, seed, &out_or_cwd, cli.json),
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let _ = e.print();
            return code;
        }
    };
    match dispatch(cli) {
        Ok(outcome) => {
            print!("{}", outcome.stdout);
            if outcome.passed {
                EXIT_OK
            } else {
                EXIT_CHECK_FAILED
            }
        }
        Err(e) => {
            eprintln!("bohmdyn: {e}");
            e.exit_code()
        }
    }
}
