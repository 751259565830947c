use klab_core::complete::{
    parseval_check, prime_sweep, square_sweep_exhaustive, square_sweep_random, SquareSweepRow,
    COUNT_CONSTANT,
};
use klab_core::incomplete::{
    bilinear_naive, bilinear_sum, poisson_complete, qvdc_sum, BilinearSpec, LambdaRule, Support,
};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use super::{ctx, CliResult, Outcome};
use crate::args::{
    BilinearArgs, CompleteSweepArgs, LambdaArg, PoissonArgs, QvdcArgs, SupportArg,
};
use crate::row;
use crate::sampling::{correlation_spec, odd_primes, poisson_spec, qvdc_spec};
use crate::table::Table;

/// Relative tolerance of the Parseval identity.
pub const PARSEVAL_TOL: f64 = 1e-8;

/// Tolerance of the completion identity `|direct − completed| / (1 + |direct|)`.
pub const POISSON_TOL: f64 = 1e-6;

/// Tolerance of bilinear sum against the naive double loop.
pub const BILINEAR_TOL: f64 = 1e-9;

/// Largest prime whose `p²` sums enter random Parseval specs.
const PARSEVAL_SQUARE_MAX_P: u64 = 31;

/// `(instances, chain excess, count excess, max chain ratio, max count ratio)`
/// weighted by multiplicity.
pub fn square_summary(rows: &[SquareSweepRow]) -> (u64, u64, u64, f64, f64) {
    let mut out = (0, 0, 0, 0.0f64, 0.0f64);
    for r in rows {
        out.0 += r.multiplicity;
        if !r.chain_holds() {
            out.1 += r.multiplicity;
        }
        if r.count > COUNT_CONSTANT * r.gcd_terms {
            out.2 += r.multiplicity;
        }
        out.3 = out.3.max(r.chain_ratio());
        out.4 = out.4.max(r.count_ratio());
    }
    out
}

pub fn parseval_error(lhs: f64, rhs: f64) -> f64 {
    (lhs - rhs).abs() / rhs.abs().max(f64::MIN_POSITIVE)
}

pub(super) fn complete_sweep(args: &CompleteSweepArgs, seed: u64) -> CliResult<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut table = Table::new(&["family", "p", "k", "instances", "exceed", "max_ratio"]);
    let mut summary = Vec::new();
    let mut passed = true;
    let primes = odd_primes(3, args.max_p);
    if primes.is_empty() {
        return Err(super::CliError::Usage(format!(
            "max-p: {} leaves no odd prime",
            args.max_p
        )));
    }

    for &p in &primes {
        let (family, rows) = if p <= args.exhaustive_max_p {
            ("exhaustive", square_sweep_exhaustive(p))
        } else {
            ("random", square_sweep_random(p, args.draws, &mut rng))
        };
        let rows = rows.map_err(ctx(format!("p={p}")))?;
        let (n, chain, count, chain_max, count_max) = square_summary(&rows);
        table.push(row![format!("p2-chain-{family}"), p, 4u64, n, chain, chain_max]);
        table.push(row![format!("p2-count-{family}"), p, 4u64, n, count, count_max]);
        passed &= chain == 0 && count == 0;
    }

    let sweep = prime_sweep(&primes, &[2, 4], args.prime_draws, args.paired, &mut rng)
        .map_err(ctx("prime sweep"))?;
    let c = sweep.constant();
    for &(k, ck) in &sweep.constants {
        let n = sweep.rows.iter().filter(|r| r.1 == k).count();
        table.push(row!["p-constant", args.max_p, k, n, 0u64, ck]);
    }
    let exceed = sweep.paired.iter().filter(|r| r.1 > c).count();
    let paired_max = sweep.paired.iter().map(|r| r.1).fold(0.0, f64::max);
    table.push(row!["p-paired-h0", args.max_p, 4u64, sweep.paired.len(), exceed, paired_max]);
    summary.push(format!("mod p constant C = max |S|/sqrt(p) = {c}"));
    summary.push(format!(
        "paired h=0 specs exceeding sqrt(p) C: {exceed} of {} (max ratio {paired_max})",
        sweep.paired.len()
    ));
    passed &= sweep.paired.is_empty() || exceed > 0;

    let specs: Vec<_> = (0..args.parseval)
        .map(|_| correlation_spec(&mut rng, args.max_p, args.max_p.min(PARSEVAL_SQUARE_MAX_P)))
        .collect();
    let errors: Vec<f64> = specs
        .par_iter()
        .map(|s| parseval_check(s).map(|(l, r)| parseval_error(l, r)))
        .collect::<Result<_, _>>()
        .map_err(ctx("parseval"))?;
    let bad = errors.iter().filter(|&&e| !(e <= PARSEVAL_TOL)).count();
    let worst = errors.iter().copied().fold(0.0, f64::max);
    table.push(row!["parseval", args.max_p, 0u64, errors.len(), bad, worst]);
    passed &= bad == 0;

    let chain_bad: i128 = table
        .rows
        .iter()
        .filter(|r| matches!(&r[0], crate::table::Cell::Text(f) if f.starts_with("p2-")))
        .map(|r| match r[4] {
            crate::table::Cell::Int(v) => v,
            _ => 0,
        })
        .sum();
    summary.push(format!("p^2 chain/count violations: {chain_bad}; parseval worst {worst:e}"));
    Ok(Outcome {
        table,
        summary,
        passed,
    })
}

pub(super) fn poisson_check(args: &PoissonArgs, seed: u64) -> CliResult<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let specs: Vec<_> = (0..args.count).map(|_| poisson_spec(&mut rng, args.max_c)).collect();
    let reports = specs
        .par_iter()
        .map(|s| poisson_complete(s).map_err(ctx(format!("{s:?}"))))
        .collect::<CliResult<Vec<_>>>()?;
    let mut table = Table::new(&[
        "s", "u1", "u2", "a", "b1", "b2", "N", "direct_re", "direct_im", "completed_re",
        "completed_im", "identity_error", "p_rhs", "ratio", "h_max", "t_cut", "certified",
    ]);
    let mut worst = 0.0f64;
    let mut bad = 0;
    for r in &reports {
        let s = r.spec;
        let e = r.identity_error();
        worst = worst.max(e);
        if !(e < POISSON_TOL) {
            bad += 1;
        }
        table.push(row![
            s.s, s.u1, s.u2, s.a, s.b1, s.b2, s.n, r.direct.re, r.direct.im, r.completed.re,
            r.completed.im, e, r.p_rhs, r.ratio(), r.h_max, r.t_cut, r.certified
        ]);
    }
    let ratio_max = reports.iter().map(|r| r.ratio()).fold(0.0, f64::max);
    Ok(Outcome {
        table,
        summary: vec![
            format!("{} specs, worst identity error {worst:e}, {bad} above {POISSON_TOL}", reports.len()),
            format!("max |sum| / ((su1u2)^(1/2) P) = {ratio_max}"),
        ],
        passed: bad == 0,
    })
}

pub(super) fn qvdc_sweep(args: &QvdcArgs, seed: u64) -> CliResult<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let specs: Vec<_> = (0..args.count).map(|_| qvdc_spec(&mut rng, args.max_modulus)).collect();
    let reports = specs
        .par_iter()
        .map(|s| qvdc_sum(s).map_err(ctx(format!("{s:?}"))))
        .collect::<CliResult<Vec<_>>>()?;
    let mut table = Table::new(&[
        "a", "r", "s", "u1", "u2", "c", "N", "lhs_re", "lhs_im", "rhs", "divisor_factor",
        "terms", "ratio",
    ]);
    for r in &reports {
        let s = r.spec;
        table.push(row![
            s.a, s.r, s.s, s.u1, s.u2, s.c, s.n, r.lhs.re, r.lhs.im, r.rhs, r.divisor_factor,
            r.terms, r.ratio()
        ]);
    }
    let ratios: Vec<f64> = reports.iter().map(|r| r.ratio()).collect();
    let finite = ratios.iter().all(|x| x.is_finite());
    Ok(Outcome {
        table,
        summary: vec![format!(
            "{} specs, max |lhs|/rhs = {}",
            reports.len(),
            ratios.iter().copied().fold(0.0, f64::max)
        )],
        passed: finite,
    })
}

pub fn supports(arg: SupportArg) -> Vec<Support> {
    match arg {
        SupportArg::Squarefree => vec![Support::SquareFree],
        SupportArg::Squares => vec![Support::SquaresOfSquareFree],
        SupportArg::Both => vec![Support::SquareFree, Support::SquaresOfSquareFree],
    }
}

pub fn support_name(s: Support) -> &'static str {
    match s {
        Support::SquareFree => "squarefree",
        Support::SquaresOfSquareFree => "squares",
    }
}

pub(super) fn bilinear_sweep(args: &BilinearArgs, seed: u64) -> CliResult<Outcome> {
    let lambda = match args.lambda {
        LambdaArg::Divisor => LambdaRule::DivisorCount,
        LambdaArg::One => LambdaRule::One,
        LambdaArg::RandomSign => LambdaRule::RandomSignDivisor { seed },
    };
    let mut table = Table::new(&[
        "r", "s", "a", "U", "N", "support", "support_size", "lhs_re", "lhs_im", "naive_error",
        "k_rhs", "k_rhs_diagonal", "ratio",
    ]);
    let mut bad = 0;
    let mut checked = 0;
    let mut worst_ratio = 0.0f64;
    for &r in &args.r {
        for &s in &args.s {
            for &u in &args.u {
                for &n in &args.n {
                    for support in supports(args.support) {
                        let spec = BilinearSpec {
                            lambda,
                            ..BilinearSpec::new(r, s, args.a, u, n, support)
                        };
                        let what = format!("r={r}, s={s}, a={}, U={u}, N={n}", args.a);
                        let rep = bilinear_sum(&spec).map_err(ctx(&what))?;
                        let size = (r * s) as f64 * u * u * n as f64;
                        let err = if size <= args.naive_max as f64 {
                            let naive = bilinear_naive(&spec).map_err(ctx(&what))?;
                            let e = (rep.lhs - naive).norm() / naive.norm().max(1.0);
                            checked += 1;
                            if !(e <= BILINEAR_TOL) {
                                bad += 1;
                            }
                            crate::table::Cell::Float(e)
                        } else {
                            crate::table::Cell::Text(String::new())
                        };
                        worst_ratio = worst_ratio.max(rep.ratio());
                        let mut cells = row![r, s, args.a, u, n, support_name(support), rep.support.len(), rep.lhs.re, rep.lhs.im];
                        cells.push(err);
                        cells.extend(row![rep.k_rhs, rep.k_rhs_diagonal, rep.ratio()]);
                        table.push(cells);
                    }
                }
            }
        }
    }
    Ok(Outcome {
        summary: vec![
            format!("{} cells, {checked} checked against the naive loop, {bad} mismatches", table.rows.len()),
            format!("max |B| / K_rhs = {worst_ratio}"),
        ],
        table,
        passed: bad == 0,
    })
}
