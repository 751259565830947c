//! One executor per subcommand. Each returns a result table, summary lines
//! for standard output, and whether its checks passed.

mod experiments;
mod sweeps;
mod verify;

use std::fmt;

use klab_core::discrepancy::delta;
use klab_core::kl2;

use crate::args::{Command, DeltaArgs, Kl2Args};
use crate::row;
use crate::table::Table;

pub use verify::{verify_all, CheckResult};

#[derive(Debug, Clone, PartialEq)]
pub struct Outcome {
    pub table: Table,
    pub summary: Vec<String>,
    pub passed: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub enum CliError {
    /// Bad flags, parameters or manifest: exit status 2.
    Usage(String),
    /// Unreadable manifest or unwritable output: exit status 2.
    Io(String),
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Usage(m) => write!(f, "{m}"),
            CliError::Io(m) => write!(f, "i/o: {m}"),
        }
    }
}

impl std::error::Error for CliError {}

pub type CliResult<T> = Result<T, CliError>;

/// Attach the offending parameters to a library error.
pub(crate) fn ctx(what: impl fmt::Display) -> impl FnOnce(klab_core::Error) -> CliError {
    move |e| CliError::Usage(format!("{what}: {e}"))
}

pub fn execute(command: &Command, seed: u64) -> CliResult<Outcome> {
    match command {
        Command::Kl2(a) => kl2_cmd(a),
        Command::CompleteSweep(a) => sweeps::complete_sweep(a, seed),
        Command::PoissonCheck(a) => sweeps::poisson_check(a, seed),
        Command::QvdcSweep(a) => sweeps::qvdc_sweep(a, seed),
        Command::BilinearSweep(a) => sweeps::bilinear_sweep(a, seed),
        Command::Delta(a) => delta_cmd(a),
        Command::AvgDelta(a) => experiments::avg_delta(a),
        Command::ApRun(a) => experiments::ap_run(a),
        Command::Cubic(a) => experiments::cubic(a),
        Command::VerifyAll(a) => verify::verify_all_cmd(a, seed),
        Command::Run(_) => Err(CliError::Usage("`run` cannot be nested".into())),
    }
}

fn kl2_cmd(args: &Kl2Args) -> CliResult<Outcome> {
    let v = kl2(args.a, args.q).map_err(ctx(format!("a={}, q={}", args.a, args.q)))?;
    let mut table = Table::new(&["a", "q", "re", "im", "weil_bound"]);
    table.push(row![args.a, args.q, v.value.re, v.value.im, v.weil_bound()]);
    Ok(Outcome {
        table,
        summary: vec![format!("Kl2({}; {}) = {:.6}", args.a, args.q, v.re())],
        passed: true,
    })
}

fn delta_cmd(args: &DeltaArgs) -> CliResult<Outcome> {
    let rec = delta(args.x, args.q, args.a)
        .map_err(ctx(format!("X={}, q={}, a={}", args.x, args.q, args.a)))?;
    let mut table = Table::new(&[
        "X",
        "q",
        "a",
        "ap_sum",
        "coprime_sum",
        "phi",
        "delta_exact",
        "delta",
        "trivial_scale",
    ]);
    table.push(row![
        rec.x,
        rec.q,
        rec.a,
        rec.ap_sum,
        rec.coprime_sum,
        rec.phi,
        rec.exact_string(),
        rec.delta,
        rec.trivial_scale
    ]);
    Ok(Outcome {
        table,
        summary: vec![format!(
            "Delta({}; {}, {}) = {} (exact {})",
            args.x,
            args.q,
            args.a,
            rec.delta,
            rec.exact_string()
        )],
        passed: true,
    })
}
