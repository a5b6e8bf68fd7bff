use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use kellner_core::analytic::BoundName;

#[derive(Debug, Parser)]
#[command(
    name = "kellner",
    version,
    about = "Prime-factor counts of the product of primes p with s_p(n) >= p"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,

    #[command(flatten)]
    pub common: Common,
}

#[derive(Debug, Clone, Args)]
pub struct Common {
    /// Worker threads (falls back to KELLNER_THREADS, then to the core count).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,

    /// Shorthand for `--format json`.
    #[arg(long, global = true, conflicts_with = "format")]
    pub json: bool,

    /// Write records here instead of stdout.
    #[arg(long, short, global = true)]
    pub output: Option<PathBuf>,

    /// Fill the elapsed_ms column. Off by default so that output is reproducible.
    #[arg(long, global = true)]
    pub timing: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
    Human,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Digit,
    Identity,
    Fast,
    All,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Both counts for a single n.
    Omega {
        #[arg(value_parser = parse_u64)]
        n: u64,
        #[arg(long, value_enum, default_value = "fast")]
        method: MethodArg,
    },
    /// Convergence table over a geometric grid.
    Table {
        /// `A:B:xR`, or a single value.
        #[arg(long, default_value = "1e4:1e8:x10")]
        grid: String,
        #[arg(long, value_enum, default_value = "fast")]
        method: MethodArg,
        /// Partial sums of the asymptotic series to emit.
        #[arg(long, default_value_t = 3)]
        terms: u32,
    },
    /// Check three-way agreement and both bounds over a set of n.
    Verify(Selection),
    /// `verify` plus an append-only results cache.
    Scan {
        #[command(flatten)]
        selection: Selection,
        #[arg(long)]
        cache: PathBuf,
    },
    /// Evaluate one of the lemma checks.
    Bounds(BoundsArgs),
    /// Split of the upper count at sqrt(n)/delta(sqrt(n)).
    Decompose {
        #[arg(value_parser = parse_u64)]
        n: u64,
    },
}

#[derive(Debug, Clone, Args)]
pub struct Selection {
    /// `A..B` or a single n; same as `--range`.
    #[arg(conflicts_with = "range")]
    pub spec: Option<String>,
    /// Inclusive range `A..B`.
    #[arg(long)]
    pub range: Option<String>,
    #[arg(long, value_parser = parse_u64)]
    pub stride: Option<u64>,
    /// Sample this many distinct n uniformly from the range.
    #[arg(long, conflicts_with = "stride")]
    pub random: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, value_enum, default_value = "all")]
    pub method: MethodArg,
}

#[derive(Debug, Clone, Args)]
pub struct BoundsArgs {
    #[arg(value_parser = parse_bound)]
    pub lemma: BoundName,
    /// Random admissible instances.
    #[arg(long)]
    pub random: Option<usize>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub x: Option<f64>,
    #[arg(long)]
    pub y: Option<f64>,
    #[arg(long)]
    pub z: Option<f64>,
    #[arg(long)]
    pub eps: Option<f64>,
    /// M (lemma4, lemma5).
    #[arg(long, value_parser = parse_u64)]
    pub m: Option<u64>,
    /// M1 (lemma5), defaults to 2M.
    #[arg(long, value_parser = parse_u64)]
    pub m1: Option<u64>,
    #[arg(long, value_parser = parse_u64)]
    pub n: Option<u64>,
    #[arg(long)]
    pub alpha: Option<f64>,
    /// H (lemma4); 0 picks the default.
    #[arg(long, default_value_t = 0, value_parser = parse_u64)]
    pub h: u64,
    #[arg(long)]
    pub use_g: bool,
    /// One or more t values, comma separated (lemma6).
    #[arg(long, value_delimiter = ',')]
    pub t: Vec<f64>,
    #[arg(long, default_value = "1e8")]
    pub cutoff: f64,
}

fn parse_bound(s: &str) -> Result<BoundName, String> {
    s.parse().map_err(|e: kellner_core::Error| e.to_string())
}

fn parse_u64(s: &str) -> Result<u64, String> {
    crate::grid::parse_int(s).map_err(|e| e.to_string())
}
