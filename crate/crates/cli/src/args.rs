//! Command-line grammar. Flag names follow the symbols of the underlying
//! formulas (`--X`, `--U`, `--eps`, `--B`, ...).

use std::path::PathBuf;
use std::str::FromStr;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::table::Format;

#[derive(Debug, Parser)]
#[command(name = "klab", version, about = "Kloosterman and divisor-discrepancy laboratory")]
pub struct Cli {
    #[command(flatten)]
    pub global: Global,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Args)]
pub struct Global {
    /// Worker threads: a positive integer or `auto` (default: $KLAB_THREADS, else auto).
    #[arg(long, global = true)]
    pub threads: Option<Threads>,
    /// Result file; `-` writes to standard output.
    #[arg(long, global = true)]
    pub output: Option<PathBuf>,
    #[arg(long, global = true, value_enum)]
    pub format: Option<Format>,
    /// Seed for randomized sweeps.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
}

pub const DEFAULT_SEED: u64 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Threads {
    Auto,
    Count(usize),
}

impl FromStr for Threads {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Threads::Auto);
        }
        match s.parse::<usize>() {
            Ok(0) | Err(_) => Err(format!("expected a positive integer or `auto`, got `{s}`")),
            Ok(n) => Ok(Threads::Count(n)),
        }
    }
}

impl Threads {
    pub fn count(self) -> usize {
        match self {
            Threads::Auto => 0,
            Threads::Count(n) => n,
        }
    }
}

#[derive(Debug, Clone, Subcommand)]
pub enum Command {
    /// Evaluate Kl₂(a; q).
    Kl2(Kl2Args),
    /// Complete sums modulo p and p²: bound chain, constant sweep, Parseval.
    CompleteSweep(CompleteSweepArgs),
    /// Poisson completion of the smoothed four-factor sum.
    PoissonCheck(PoissonArgs),
    /// Shifted correlation sums against their bound.
    QvdcSweep(QvdcArgs),
    /// Bilinear Kloosterman sums against the naive double loop and 𝓚.
    BilinearSweep(BilinearArgs),
    /// Δ(X; q, a) in exact arithmetic.
    Delta(DeltaArgs),
    /// Averaged smooth discrepancy against 𝓛 and 𝓜.
    AvgDelta(AvgDeltaArgs),
    /// Equidistribution for almost all moduli in (Q, 2Q].
    ApRun(ApRunArgs),
    /// Σ d(n₁n₂² + 1) against its main term.
    Cubic(CubicArgs),
    /// Small-scale run of every verification check.
    VerifyAll(VerifyAllArgs),
    /// Execute a JSON run manifest.
    Run(RunArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::Kl2(_) => "kl2",
            Command::CompleteSweep(_) => "complete-sweep",
            Command::PoissonCheck(_) => "poisson-check",
            Command::QvdcSweep(_) => "qvdc-sweep",
            Command::BilinearSweep(_) => "bilinear-sweep",
            Command::Delta(_) => "delta",
            Command::AvgDelta(_) => "avg-delta",
            Command::ApRun(_) => "ap-run",
            Command::Cubic(_) => "cubic",
            Command::VerifyAll(_) => "verify-all",
            Command::Run(_) => "run",
        }
    }

    /// Parameters as a flat JSON object keyed by flag name.
    pub fn params(&self) -> serde_json::Value {
        let v = match self {
            Command::Kl2(a) => serde_json::to_value(a),
            Command::CompleteSweep(a) => serde_json::to_value(a),
            Command::PoissonCheck(a) => serde_json::to_value(a),
            Command::QvdcSweep(a) => serde_json::to_value(a),
            Command::BilinearSweep(a) => serde_json::to_value(a),
            Command::Delta(a) => serde_json::to_value(a),
            Command::AvgDelta(a) => serde_json::to_value(a),
            Command::ApRun(a) => serde_json::to_value(a),
            Command::Cubic(a) => serde_json::to_value(a),
            Command::VerifyAll(a) => serde_json::to_value(a),
            Command::Run(a) => Ok(serde_json::json!({ "manifest": a.manifest })),
        };
        v.expect("plain parameter structs")
    }
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct Kl2Args {
    #[arg(long, allow_negative_numbers = true)]
    pub a: i64,
    #[arg(long)]
    pub q: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct CompleteSweepArgs {
    /// Largest prime in every family.
    #[arg(long, default_value_t = 31)]
    pub max_p: u64,
    /// Primes up to this bound get the exhaustive p² grid; larger ones are sampled.
    #[arg(long, default_value_t = 31)]
    pub exhaustive_max_p: u64,
    /// Random (a₁, a₂, b₁, b₂) draws per sampled prime.
    #[arg(long, default_value_t = 200)]
    pub draws: usize,
    /// Random hypothesis-satisfying specs modulo p.
    #[arg(long, default_value_t = 1000)]
    pub prime_draws: usize,
    /// Paired h = 0 four-factor specs modulo p.
    #[arg(long, default_value_t = 50)]
    pub paired: usize,
    /// Random Parseval specs.
    #[arg(long, default_value_t = 100)]
    pub parseval: usize,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct PoissonArgs {
    #[arg(long, default_value_t = 200)]
    pub count: usize,
    /// Bound on su₁u₂.
    #[arg(long, default_value_t = 10_000)]
    pub max_c: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct QvdcArgs {
    #[arg(long, default_value_t = 100)]
    pub count: usize,
    /// Bound on rsu₁ and rsu₂.
    #[arg(long, default_value_t = 3000)]
    pub max_modulus: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum SupportArg {
    Squarefree,
    Squares,
    Both,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LambdaArg {
    Divisor,
    One,
    RandomSign,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct BilinearArgs {
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub r: Vec<u64>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub s: Vec<u64>,
    #[arg(long, allow_negative_numbers = true, default_value_t = 1)]
    pub a: i64,
    #[arg(long = "U", value_delimiter = ',', default_value = "10")]
    #[serde(rename = "U")]
    pub u: Vec<f64>,
    #[arg(long = "N", value_delimiter = ',', default_value = "100")]
    #[serde(rename = "N")]
    pub n: Vec<u64>,
    #[arg(long, value_enum, default_value_t = SupportArg::Both)]
    pub support: SupportArg,
    #[arg(long, value_enum, default_value_t = LambdaArg::Divisor)]
    pub lambda: LambdaArg,
    /// Run the naive double loop when rsU²N is at most this.
    #[arg(long, default_value_t = 1_000_000)]
    pub naive_max: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct DeltaArgs {
    #[arg(long = "X")]
    #[serde(rename = "X")]
    pub x: f64,
    #[arg(long)]
    pub q: u64,
    #[arg(long, allow_negative_numbers = true)]
    pub a: i64,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct AvgDeltaArgs {
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub r: Vec<u64>,
    #[arg(long, value_delimiter = ',', default_value = "1")]
    pub s: Vec<u64>,
    #[arg(long = "U", value_delimiter = ',', default_value = "100")]
    #[serde(rename = "U")]
    pub u: Vec<f64>,
    #[arg(long = "X", default_value_t = 1e5)]
    #[serde(rename = "X")]
    pub x: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 1)]
    pub a: i64,
    #[arg(long, default_value_t = 0.012)]
    pub eps: f64,
    /// δ of the bump weight on [1, 2].
    #[arg(long, default_value_t = 0.5)]
    pub delta_shape: f64,
    #[arg(long, value_enum, default_value_t = SupportArg::Both)]
    pub support: SupportArg,
}

#[derive(Debug, Clone, Args, Serialize)]
pub struct ApRunArgs {
    #[arg(long = "X")]
    #[serde(rename = "X")]
    pub x: f64,
    #[arg(long = "Q")]
    #[serde(rename = "Q")]
    pub q: f64,
    #[arg(long, allow_negative_numbers = true, default_value_t = 1)]
    pub a: i64,
    #[arg(long, default_value_t = 0.012)]
    pub eps: f64,
    #[arg(long = "B", default_value_t = 2.0)]
    #[serde(rename = "B")]
    pub b: f64,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct CubicArgs {
    #[arg(long = "X", value_delimiter = ',', default_value = "100,300,1000")]
    #[serde(rename = "X")]
    pub x: Vec<u64>,
    /// A in ε = A log log X / log X.
    #[arg(long = "A", default_value_t = klab_core::experiments::DEFAULT_A)]
    #[serde(rename = "A")]
    pub a: f64,
    /// Largest X cross-checked by factorizing every value.
    #[arg(long, default_value_t = klab_core::experiments::CUBIC_ORACLE_LIMIT)]
    pub oracle_max: u64,
}

#[derive(Debug, Clone, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct VerifyAllArgs {
    #[arg(long, default_value_t = 97)]
    pub max_p: u64,
    /// Random instances per sampled check.
    #[arg(long, default_value_t = 2000)]
    pub samples: usize,
}

#[derive(Debug, Clone, Args)]
pub struct RunArgs {
    #[arg(long)]
    pub manifest: PathBuf,
}
