use klab_core::arith::mod_inv;
use klab_core::complete::{parseval_check, square_sweep_exhaustive, COUNT_CONSTANT};
use klab_core::discrepancy::{delta, partition_sum, DeltaTable};
use klab_core::experiments::{cubic_grid_factor, cubic_grid_sieve, good_moduli, GoodModuliParams, Windows};
use klab_core::incomplete::{bilinear_naive, bilinear_sum, poisson_complete, BilinearSpec, Support};
use klab_core::kloosterman::{kl2_all_residues, kl2_direct, kl2_p2_closed};
use klab_core::{kl2, Error};
use num_rational::Ratio;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::sweeps::{parseval_error, BILINEAR_TOL, PARSEVAL_TOL, POISSON_TOL};
use super::{ctx, CliResult, Outcome};
use crate::args::VerifyAllArgs;
use crate::row;
use crate::sampling::{coprime_pair, correlation_spec, kl_pair, odd_primes, poisson_spec};
use crate::table::Table;

/// Absolute tolerance of Kloosterman identities.
pub const KL_TOL: f64 = 1e-9;

/// Slack in the Weil bound.
pub const WEIL_SLACK: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct CheckResult {
    pub name: &'static str,
    pub instances: u64,
    /// Instances outside tolerance.
    pub exceed: u64,
    pub max_error: f64,
    pub tolerance: f64,
}

impl CheckResult {
    fn from_errors(name: &'static str, errors: &[f64], tolerance: f64) -> Self {
        Self {
            name,
            instances: errors.len() as u64,
            exceed: errors.iter().filter(|&&e| !(e <= tolerance)).count() as u64,
            max_error: errors.iter().copied().fold(0.0, f64::max),
            tolerance,
        }
    }

    pub fn passed(&self) -> bool {
        self.exceed == 0
    }
}

type R<T> = Result<T, Error>;

fn kl_checks(rng: &mut ChaCha8Rng, samples: usize) -> R<Vec<CheckResult>> {
    let pairs: Vec<(i64, u64)> = (0..samples).map(|_| kl_pair(rng, 2000)).collect();
    let vals = pairs
        .par_iter()
        .map(|&(a, q)| -> R<(f64, f64)> {
            let fast = kl2(a, q)?;
            let slow = kl2_direct(a, q)?;
            Ok(((fast.value - slow.value).norm(), fast.value.norm() - fast.weil_bound()))
        })
        .collect::<R<Vec<_>>>()?;
    let errs: Vec<f64> = vals.iter().map(|v| v.0).collect();
    let weil: Vec<f64> = vals.iter().map(|v| v.1.max(0.0)).collect();
    Ok(vec![
        CheckResult::from_errors("kl2-vs-direct", &errs, KL_TOL),
        CheckResult::from_errors("weil-bound", &weil, WEIL_SLACK),
    ])
}

fn twist_check(rng: &mut ChaCha8Rng, count: usize) -> R<CheckResult> {
    let cells: Vec<(u64, u64, i64)> = (0..count)
        .map(|_| {
            let (r, s) = coprime_pair(rng, 60);
            let (a, _) = kl_pair(rng, r * s);
            (r, s, a)
        })
        .collect();
    let errs = cells
        .par_iter()
        .map(|&(r, s, a)| -> R<f64> {
            let lhs = kl2_direct(a, r * s)?.value;
            let sb = mod_inv(s as i64, r)? as i64;
            let rb = mod_inv(r as i64, s)? as i64;
            let x = kl2(a * sb % r as i64 * sb, r)?.value;
            let y = kl2(a * rb % s as i64 * rb, s)?.value;
            Ok((lhs - x * y).norm())
        })
        .collect::<R<Vec<_>>>()?;
    Ok(CheckResult::from_errors("twist-multiplicativity", &errs, KL_TOL))
}

fn p2_check(max_p: u64) -> R<CheckResult> {
    let errs = odd_primes(3, max_p.min(99))
        .par_iter()
        .map(|&p| -> R<Vec<f64>> {
            let all = kl2_all_residues(p * p)?;
            (1..p * p)
                .filter(|a| a % p != 0)
                .map(|a| Ok((kl2_p2_closed(a as i64, p)?.value - all[a as usize]).norm()))
                .collect()
        })
        .collect::<R<Vec<_>>>()?;
    Ok(CheckResult::from_errors("p2-closed-form", &errs.concat(), KL_TOL))
}

fn chain_check(max_p: u64) -> R<Vec<CheckResult>> {
    let mut chain = Vec::new();
    let mut count = Vec::new();
    for p in odd_primes(3, max_p.min(13)) {
        for r in square_sweep_exhaustive(p)? {
            let slack = r.abs_sum - r.p as f64 * r.count as f64;
            chain.push(slack.max(0.0));
            count.push(r.count.saturating_sub(COUNT_CONSTANT * r.gcd_terms) as f64);
        }
    }
    Ok(vec![
        CheckResult::from_errors("p2-chain", &chain, klab_core::complete::CHAIN_SLACK),
        CheckResult::from_errors("p2-count", &count, 0.0),
    ])
}

fn parseval(rng: &mut ChaCha8Rng, max_p: u64, count: usize) -> R<CheckResult> {
    let specs: Vec<_> = (0..count).map(|_| correlation_spec(rng, max_p, max_p.min(23))).collect();
    let errs = specs
        .par_iter()
        .map(|s| parseval_check(s).map(|(l, r)| parseval_error(l, r)))
        .collect::<R<Vec<_>>>()?;
    Ok(CheckResult::from_errors("parseval", &errs, PARSEVAL_TOL))
}

fn poisson(rng: &mut ChaCha8Rng, count: usize) -> R<CheckResult> {
    let specs: Vec<_> = (0..count).map(|_| poisson_spec(rng, 2000)).collect();
    let errs = specs
        .par_iter()
        .map(|s| poisson_complete(s).map(|r| r.identity_error()))
        .collect::<R<Vec<_>>>()?;
    Ok(CheckResult::from_errors("poisson-completion", &errs, POISSON_TOL))
}

fn bilinear() -> R<CheckResult> {
    let mut specs = Vec::new();
    for (r, s) in [(1, 1), (2, 1), (1, 3), (4, 9)] {
        for u in [5.0, 12.0] {
            for support in [Support::SquareFree, Support::SquaresOfSquareFree] {
                specs.push(BilinearSpec::new(r, s, 1, u, 40, support));
            }
        }
    }
    let errs = specs
        .par_iter()
        .map(|s| -> R<f64> {
            let fast = bilinear_sum(s)?.lhs;
            let slow = bilinear_naive(s)?;
            Ok((fast - slow).norm() / slow.norm().max(1.0))
        })
        .collect::<R<Vec<_>>>()?;
    Ok(CheckResult::from_errors("bilinear-vs-naive", &errs, BILINEAR_TOL))
}

fn partition() -> R<CheckResult> {
    let table = DeltaTable::new(1000.0)?;
    let errs: Vec<f64> = (1..=100u64)
        .into_par_iter()
        .map(|q| {
            let s = partition_sum(&table.all_units(q));
            if s == Ratio::from_integer(0) {
                0.0
            } else {
                1.0
            }
        })
        .collect();
    Ok(CheckResult::from_errors("partition-identity", &errs, 0.0))
}

fn delta_example() -> R<CheckResult> {
    let r = delta(20.0, 3, 1)?;
    let err = if r.delta_exact == Ratio::new(-3, 2) { 0.0 } else { 1.0 };
    Ok(CheckResult::from_errors("delta-example", &[err], 0.0))
}

fn cubic_paths() -> R<CheckResult> {
    let x = 60;
    let sieve = cubic_grid_sieve(x)?;
    let factor = cubic_grid_factor(x)?;
    let errs: Vec<f64> = sieve
        .iter()
        .flatten()
        .zip(factor.iter().flatten())
        .map(|(a, b)| (*a as f64 - *b as f64).abs())
        .collect();
    Ok(CheckResult::from_errors("cubic-paths", &errs, 0.0))
}

fn refactorization() -> R<CheckResult> {
    let w = Windows {
        p1: 2.0,
        q1: 12.0,
        p2: 12.0,
        q2: 60.0,
    };
    let set = good_moduli(&GoodModuliParams::with_windows(1e6, 3000.0, 0.01, w))?;
    let errs: Vec<f64> = set
        .members
        .iter()
        .map(|&(q, wit)| w.verify(q, wit).map(|ok| if ok { 0.0 } else { 1.0 }))
        .collect::<R<_>>()?;
    Ok(CheckResult::from_errors("good-moduli-refactorization", &errs, 0.0))
}

/// Every check at verification scale, in a fixed order.
pub fn verify_all(max_p: u64, samples: usize, seed: u64) -> R<Vec<CheckResult>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = kl_checks(&mut rng, samples)?;
    out.push(twist_check(&mut rng, samples / 10 + 1)?);
    out.push(p2_check(max_p)?);
    out.extend(chain_check(max_p)?);
    out.push(parseval(&mut rng, max_p, 20)?);
    out.push(poisson(&mut rng, 20)?);
    out.push(bilinear()?);
    out.push(partition()?);
    out.push(delta_example()?);
    out.push(cubic_paths()?);
    out.push(refactorization()?);
    Ok(out)
}

pub(super) fn verify_all_cmd(args: &VerifyAllArgs, seed: u64) -> CliResult<Outcome> {
    let checks = verify_all(args.max_p, args.samples, seed).map_err(ctx("verify-all"))?;
    let mut table = Table::new(&["check", "instances", "exceed", "max_error", "tolerance", "passed"]);
    let mut summary = vec![format!("{:<28} {:>9} {:>7} {:>12}  status", "check", "instances", "exceed", "max_error")];
    for c in &checks {
        table.push(row![c.name, c.instances, c.exceed, c.max_error, c.tolerance, c.passed()]);
        summary.push(format!(
            "{:<28} {:>9} {:>7} {:>12.3e}  {}",
            c.name,
            c.instances,
            c.exceed,
            c.max_error,
            if c.passed() { "pass" } else { "FAIL" }
        ));
    }
    Ok(Outcome {
        table,
        summary,
        passed: checks.iter().all(CheckResult::passed),
    })
}
