//! `softguess`: exact guessing moments, entropies, optimal lossy codes and
//! their bounds from the command line.
//!
//! Exit codes: 0 success, 1 property failure, 2 usage or domain error,
//! 3 size budget exceeded.

mod commands;
mod report;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use softguess::Error;

#[derive(Parser)]
#[command(name = "softguess", version, about = "Soft guessing under log-loss allowing errors")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Rényi, smooth Rényi and conditional entropies.
    Entropy(EntropyArgs),
    /// Exact minimal guessing moment, optimal strategy and bounds.
    Moment(MomentArgs),
    /// Optimal variable-length lossy code and its cumulant sandwich.
    Code(CodeArgs),
    /// Bound-comparison tables for the six reference sources.
    Figure(FigureArgs),
    /// Exact block values against the second-order prediction.
    Asymptotics(AsymptoticsArgs),
    /// Runs the acceptance suite.
    Selftest(SelftestArgs),
}

#[derive(Args)]
#[group(required = true, multiple = false)]
pub struct Input {
    /// `file:PATH` (.json or .csv) or a generator: dyadic:M, uniform:M,
    /// random:M[:SEED], bernoulli:P.
    #[arg(long)]
    pub pmf: Option<String>,
    /// `file:PATH` or randjoint:NY:NX:SEED; rows are indexed by y.
    #[arg(long)]
    pub joint: Option<String>,
}

#[derive(Args)]
pub struct Distortion {
    /// Distortion level in bits; the list size is floor(2^D).
    #[arg(long = "D", value_name = "BITS", conflicts_with = "list")]
    pub d: Option<f64>,
    /// List size, instead of --D.
    #[arg(long = "L", value_name = "SIZE", id = "list")]
    pub l: Option<u64>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

#[derive(Args)]
pub struct Output {
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Write to a file instead of stdout.
    #[arg(long, value_name = "PATH")]
    pub out: Option<PathBuf>,
}

#[derive(Args)]
pub struct EntropyArgs {
    #[command(flatten)]
    pub input: Input,
    /// Order in (0, 1]; 1 is the Shannon limit.
    #[arg(long, default_value_t = 0.5)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.0)]
    pub eps: f64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args)]
pub struct MomentArgs {
    #[command(flatten)]
    pub input: Input,
    #[arg(long, default_value_t = 1.0)]
    pub rho: f64,
    #[command(flatten)]
    pub dist: Distortion,
    #[arg(long, default_value_t = 0.0)]
    pub eps: f64,
    /// Also evaluate the brute-force (or grid, for joints) reference.
    #[arg(long)]
    pub oracle: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args)]
pub struct CodeArgs {
    /// Source pmf (`file:PATH` or a generator).
    #[arg(long)]
    pub pmf: String,
    #[arg(long, default_value_t = 1.0)]
    pub rho: f64,
    #[command(flatten)]
    pub dist: Distortion,
    #[arg(long, default_value_t = 0.0)]
    pub eps: f64,
    /// Include the codeword of every list up to the cutoff.
    #[arg(long)]
    pub emit_strings: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args)]
pub struct FigureArgs {
    /// One of 1a, 1b, 1c, 2a, 2b, 2c.
    #[arg(long)]
    pub case: String,
    /// rho grid as lo:hi:count.
    #[arg(long, default_value = "0.1:10:100")]
    pub grid: String,
    /// Seed for the random cases.
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args)]
pub struct AsymptoticsArgs {
    #[command(flatten)]
    pub input: Input,
    /// Block lengths: `N`, `LO..HI` or `LO:HI` (inclusive).
    #[arg(long, default_value = "1..8")]
    pub n: String,
    #[arg(long, default_value_t = 1.0)]
    pub rho: f64,
    /// Per-letter distortion in bits.
    #[arg(long = "D", value_name = "BITS", default_value_t = 0.0)]
    pub d: f64,
    #[arg(long, default_value_t = 0.1)]
    pub eps: f64,
    /// Report the normalized cumulant of the optimal code instead of the moment.
    #[arg(long)]
    pub cumulant: bool,
    #[command(flatten)]
    pub output: Output,
}

#[derive(Args)]
pub struct SelftestArgs {
    /// Reduced instance counts.
    #[arg(long)]
    pub quick: bool,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Optional pmf that must parse before the suite starts.
    #[arg(long)]
    pub pmf: Option<String>,
    #[command(flatten)]
    pub output: Output,
}

/// A failure mapped onto the documented exit codes.
pub enum Failure {
    Lib(Error),
    Usage(String),
    Property(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Property(_) => 1,
            Failure::Usage(_) => 2,
            Failure::Lib(e) => match e {
                Error::SandwichViolation(_) | Error::OptimizerNotConverged(_) => 1,
                Error::TooLarge(_) | Error::TooLargeForOracle { .. } => 3,
                _ => 2,
            },
        }
    }

    fn message(&self) -> String {
        match self {
            Failure::Lib(e) => e.to_string(),
            Failure::Usage(m) | Failure::Property(m) => m.clone(),
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Entropy(a) => commands::entropy(a),
        Command::Moment(a) => commands::moment(a),
        Command::Code(a) => commands::code(a),
        Command::Figure(a) => commands::figure(a),
        Command::Asymptotics(a) => commands::asymptotics(a),
        Command::Selftest(a) => commands::selftest(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("softguess: {}", f.message());
            ExitCode::from(f.code())
        }
    }
}
