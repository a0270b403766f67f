//! `tricoupler`: phase-space grids, coupler self-test, and simulated
//! triple-coupler homodyne detection.
//!
//! Exit codes: 0 success, 1 invalid input or failed check, 2 accuracy failure.

mod commands;
mod output;
mod spec;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use tricoupler::fock::StateSpec;

use crate::output::Format;

#[derive(Debug, Parser)]
#[command(name = "tricoupler", version, about = "Phase-space densities and triple-coupler homodyne detection")]
struct Cli {
    /// Worker threads; results do not depend on it.
    #[arg(long, global = true, env = "TRICOUPLER_THREADS")]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Unitarity, balance, photocurrent Fourier identity and decomposition checks.
    TritterCheck(TritterCheckArgs),
    /// Evaluate K_SP, a generalized Wigner function or the Q function on a window.
    #[command(visible_alias = "phasespace-grid")]
    Grid(GridArgs),
    /// Sample detector outcomes and compare their histogram with K_SP.
    Simulate(SimulateArgs),
    /// Noise-free l1 distance to K_SP as a function of |z|.
    Converge(ConvergeArgs),
}

#[derive(Debug, Args)]
pub struct IoArgs {
    /// JSON configuration; flags override its fields.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
}

#[derive(Debug, Args)]
pub struct TritterCheckArgs {
    /// Add this amount to T[1][1] before checking.
    #[arg(long)]
    pub perturb: Option<f64>,
    /// Per-mode cutoff for the Fourier identity.
    #[arg(long, default_value_t = 8)]
    pub ft_cutoff: usize,
    /// Where to write the JSON report (stdout if absent).
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Density {
    KSp,
    Wigner,
    Q,
}

#[derive(Debug, Args)]
pub struct GridArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[arg(long, value_enum)]
    pub density: Option<Density>,
    /// Ordering parameter for `--density wigner`, s <= 0.
    #[arg(long, allow_hyphen_values = true)]
    pub s: Option<f64>,
    /// vacuum | coherent:RE,IM | number:N | squeezed:R | squeezed-mean:NBAR
    #[arg(long, value_parser = spec::parse_state)]
    pub signal: Option<StateSpec>,
    #[arg(long, value_parser = spec::parse_state)]
    pub probe: Option<StateSpec>,
    #[arg(long)]
    pub cutoff: Option<usize>,
    /// X_MIN,X_MAX,Y_MIN,Y_MAX
    #[arg(long, value_parser = spec::parse_window, allow_hyphen_values = true)]
    pub window: Option<[f64; 4]>,
    /// NX,NY
    #[arg(long, value_parser = spec::parse_resolution)]
    pub resolution: Option<(usize, usize)>,
    #[arg(long)]
    pub quad_radius: Option<f64>,
    #[arg(long)]
    pub quad_points: Option<usize>,
}

#[derive(Debug, Args)]
pub struct SimArgs {
    #[arg(long)]
    pub z: Option<f64>,
    #[arg(long, value_parser = spec::parse_state)]
    pub signal: Option<StateSpec>,
    #[arg(long, value_parser = spec::parse_state)]
    pub probe: Option<StateSpec>,
    #[arg(long)]
    pub cutoff_sp: Option<usize>,
    #[arg(long)]
    pub count_cutoff: Option<usize>,
    /// Outcome window X_MIN,X_MAX,Y_MIN,Y_MAX; lattice-matched bins unless
    /// `--bins` is given.
    #[arg(long, value_parser = spec::parse_window, allow_hyphen_values = true)]
    pub window: Option<[f64; 4]>,
    /// Explicit NX,NY bin centers over the window.
    #[arg(long, value_parser = spec::parse_resolution)]
    pub bins: Option<(usize, usize)>,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[command(flatten)]
    pub sim: SimArgs,
    #[arg(long)]
    pub samples: Option<usize>,
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct ConvergeArgs {
    #[command(flatten)]
    pub io: IoArgs,
    #[command(flatten)]
    pub sim: SimArgs,
    /// Comma-separated |z| values, at least three.
    #[arg(long, value_delimiter = ',', num_args = 1..)]
    pub z_values: Option<Vec<f64>>,
}

#[derive(Debug)]
pub enum CliError {
    Usage(String),
    Check(String),
    Io(String),
    Lib(tricoupler::Error),
}

impl From<tricoupler::Error> for CliError {
    fn from(e: tricoupler::Error) -> Self {
        CliError::Lib(e)
    }
}

impl CliError {
    fn exit_code(&self) -> u8 {
        match self {
            CliError::Lib(tricoupler::Error::Accuracy(_)) => 2,
            _ => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "invalid input: {m}"),
            CliError::Check(m) => write!(f, "check failed: {m}"),
            CliError::Io(m) => write!(f, "i/o error: {m}"),
            CliError::Lib(e) => write!(f, "{e}"),
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { ExitCode::from(1) } else { ExitCode::SUCCESS };
        }
    };
    if let Some(n) = cli.threads {
        if n == 0 {
            eprintln!("tricoupler: invalid input: --threads must be at least 1");
            return ExitCode::from(1);
        }
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    let result = match cli.command {
        Command::TritterCheck(a) => commands::tritter_check(a),
        Command::Grid(a) => commands::grid(a),
        Command::Simulate(a) => commands::simulate(a),
        Command::Converge(a) => commands::converge(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("tricoupler: {e}");
            ExitCode::from(e.exit_code())
        }
    }
}
