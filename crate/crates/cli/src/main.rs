//! `tilemeasure` command-line front end.
//!
//! Exit codes: 0 ok, 1 i/o or internal failure, 2 usage, 3 domain,
//! 4 depth cap, 5 budget, 6 inconclusive, 7 verification failed.

mod commands;
mod config;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use tilemeasure::{Error, ErrorKind};

pub const EXIT_OK: u8 = 0;
pub const EXIT_INTERNAL: u8 = 1;
pub const EXIT_USAGE: u8 = 2;
pub const EXIT_DOMAIN: u8 = 3;
pub const EXIT_CAP: u8 = 4;
pub const EXIT_BUDGET: u8 = 5;
pub const EXIT_INCONCLUSIVE: u8 = 6;
pub const EXIT_VERIFY_FAILED: u8 = 7;

#[derive(Parser, Debug)]
#[command(
    name = "tilemeasure",
    version,
    about = "Invariant measures of affine finite-type hyperbolic tilings"
)]
pub struct Cli {
    /// Key=value file supplying defaults; command-line flags win.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,

    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Letters of the decoration sequence on a window.
    Gen(GenArgs),
    /// Atlas words of one level, optionally a block decomposition.
    Atlas(AtlasArgs),
    /// Transition matrices of one level under one or both schemes.
    Matrices(MatricesArgs),
    /// Number of ergodic measures and their limit vertices.
    Measures(MeasuresArgs),
    /// Hilbert-metric contraction certificate over a range of levels.
    Certify(CertifyArgs),
    /// Letter frequencies of one ergodic measure.
    Frequencies(FrequenciesArgs),
    /// Leafwise Brownian motion and its occupancy times.
    Diffuse(DiffuseArgs),
    /// SVG picture of the tiling, patch overlays and path traces.
    Render(RenderArgs),
    /// Runs every cross-check; exits 7 if any fails.
    Verify(VerifyArgs),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum ModelKind {
    Toeplitz,
    Substitution,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum SchemeArg {
    Triangle,
    #[value(alias = "paper")]
    Printed,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
    Text,
}

#[derive(Args, Debug, Clone)]
pub struct ModelArgs {
    #[arg(long, value_enum, default_value = "substitution")]
    pub model: ModelKind,
    /// Alphabet size of the Toeplitz model.
    #[arg(long)]
    pub r: Option<u32>,
    /// Construction-step cap of the Toeplitz model.
    #[arg(long, value_name = "N")]
    pub max_depth: Option<usize>,
}

#[derive(Args, Debug, Clone)]
pub struct OutArgs {
    /// Output file; standard output when absent.
    #[arg(short, long, value_name = "PATH")]
    pub output: Option<PathBuf>,
}

#[derive(Args, Debug)]
pub struct GenArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub from: i64,
    /// Exclusive end.
    #[arg(long, allow_hyphen_values = true)]
    pub to: i64,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug)]
pub struct AtlasArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, default_value_t = 1)]
    pub level: usize,
    /// Start of an aligned window to cut into blocks.
    #[arg(long, allow_hyphen_values = true, requires = "to")]
    pub from: Option<i64>,
    #[arg(long, allow_hyphen_values = true, requires = "from")]
    pub to: Option<i64>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug)]
pub struct MatricesArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Both schemes when absent.
    #[arg(long, value_enum)]
    pub scheme: Option<SchemeArg>,
    #[arg(long, default_value_t = 1)]
    pub level: usize,
    /// Also print the product `A_level .. A_(to_level - 1)`.
    #[arg(long)]
    pub to_level: Option<usize>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug)]
pub struct MeasuresArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value = "triangle")]
    pub scheme: SchemeArg,
    /// Depth at which the count is reported.
    #[arg(long, default_value_t = 5)]
    pub depth: usize,
    /// Deepest depth tried while certifying stabilization.
    #[arg(long, default_value_t = tilemeasure::measures::DEFAULT_MAX_DEPTH)]
    pub search_depth: usize,
    #[arg(long, default_value_t = tilemeasure::measures::DEFAULT_EPSILON)]
    pub epsilon: f64,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug)]
pub struct CertifyArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value = "triangle")]
    pub scheme: SchemeArg,
    /// First level; the scheme's base level when absent.
    #[arg(long)]
    pub from_level: Option<usize>,
    /// Last level, inclusive.
    #[arg(long, default_value_t = 8)]
    pub to_level: usize,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug)]
pub struct FrequenciesArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value = "triangle")]
    pub scheme: SchemeArg,
    /// 1-based index of the ergodic measure.
    #[arg(long, default_value_t = 1)]
    pub measure: usize,
    #[arg(long, default_value_t = 4)]
    pub level: usize,
    #[arg(long, default_value_t = 5)]
    pub depth: usize,
    #[arg(long, default_value_t = tilemeasure::measures::DEFAULT_EPSILON)]
    pub epsilon: f64,
    #[arg(long, value_enum, default_value = "json")]
    pub format: Format,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum DiffuseMode {
    /// Occupancy report of the simulated paths.
    Occupancy,
    /// Occupancy compared with the invariant measure.
    Compare,
    /// Law of the log-height increment, with a KS test.
    Law,
}

#[derive(Args, Debug)]
pub struct DiffuseArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    #[arg(long, value_enum, default_value = "occupancy")]
    pub mode: DiffuseMode,
    #[arg(long, default_value_t = 1e-3)]
    pub dt: f64,
    #[arg(long, default_value_t = 2000.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = 50)]
    pub paths: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 0.5, allow_hyphen_values = true)]
    pub start_x: f64,
    #[arg(long, default_value_t = 1.0)]
    pub start_y: f64,
    /// Level of the block types whose occupancy is recorded.
    #[arg(long)]
    pub block_level: Option<usize>,
    /// Record every N-th step for the trace file.
    #[arg(long, value_name = "N")]
    pub trace_every: Option<u64>,
    /// CSV file receiving decimated traces (`path,t,x,y`).
    #[arg(long, value_name = "PATH")]
    pub traces: Option<PathBuf>,
    /// Permit `dt > 0.01`.
    #[arg(long)]
    pub allow_coarse_dt: bool,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug)]
pub struct RenderArgs {
    #[command(flatten)]
    pub model: ModelArgs,
    /// Draw undecorated tiles.
    #[arg(long)]
    pub plain: bool,
    #[arg(long, default_value_t = 0, allow_hyphen_values = true)]
    pub row_min: i64,
    #[arg(long, default_value_t = 2, allow_hyphen_values = true)]
    pub row_max: i64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    pub x_min: f64,
    #[arg(long, default_value_t = 4.0, allow_hyphen_values = true)]
    pub x_max: f64,
    #[arg(long, default_value_t = 0.0)]
    pub y_min: f64,
    #[arg(long, default_value_t = f64::INFINITY)]
    pub y_max: f64,
    #[arg(long, default_value_t = 800.0)]
    pub width: f64,
    /// Patch levels to outline, comma separated.
    #[arg(long, value_delimiter = ',')]
    pub overlay: Vec<usize>,
    /// Largest screen deviation of a drawn arc from the geodesic, in pixels.
    #[arg(long, default_value_t = 1e-3)]
    pub tolerance: f64,
    /// Trace CSV written by `diffuse --traces`.
    #[arg(long, value_name = "PATH")]
    pub traces: Option<PathBuf>,
    #[command(flatten)]
    pub out: OutArgs,
}

#[derive(Args, Debug)]
pub struct VerifyArgs {
    /// Restrict to one model; toeplitz r = 2, 3 and the substitution otherwise.
    #[arg(long, value_enum)]
    pub model: Option<ModelKind>,
    #[arg(long)]
    pub r: Option<u32>,
    #[arg(long, value_name = "N")]
    pub max_depth: Option<usize>,
    /// Paths used by the log-height law check.
    #[arg(long, default_value_t = 1000)]
    pub paths: usize,
    #[arg(long, default_value_t = 10.0)]
    pub horizon: f64,
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub out: OutArgs,
}

/// Failure of a run, carrying its exit code.
#[derive(Debug)]
pub enum Failure {
    Usage(String),
    Lib(Error),
    Internal(String),
    /// A report was written but its outcome maps to a nonzero code.
    Outcome {
        code: u8,
        message: String,
    },
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

pub fn exit_code(kind: ErrorKind) -> u8 {
    match kind {
        ErrorKind::Domain | ErrorKind::Alignment | ErrorKind::Model | ErrorKind::Degenerate => EXIT_DOMAIN,
        ErrorKind::Cap => EXIT_CAP,
        ErrorKind::Budget => EXIT_BUDGET,
        ErrorKind::Inconclusive => EXIT_INCONCLUSIVE,
        ErrorKind::Numeric | ErrorKind::Io => EXIT_INTERNAL,
    }
}

fn run(argv: Vec<String>) -> Result<(), Failure> {
    let argv = config::apply(argv)?;
    let cli = match Cli::try_parse_from(&argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind as K;
            if matches!(e.kind(), K::DisplayHelp | K::DisplayVersion) {
                print!("{e}");
                return Ok(());
            }
            return Err(Failure::Usage(e.render().to_string()));
        }
    };
    commands::dispatch(cli.command)
}

fn main() -> ExitCode {
    match run(std::env::args().collect()) {
        Ok(()) => ExitCode::from(EXIT_OK),
        Err(Failure::Usage(m)) => {
            eprint!("{m}");
            if !m.ends_with('\n') {
                eprintln!();
            }
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(e.kind()))
        }
        Err(Failure::Internal(m)) => {
            eprintln!("error: {m}");
            ExitCode::from(EXIT_INTERNAL)
        }
        Err(Failure::Outcome { code, message }) => {
            eprintln!("{message}");
            ExitCode::from(code)
        }
    }
}
