use klab_core::discrepancy::{avg_delta_squarefree, avg_delta_squares, SmoothTable};
use klab_core::experiments::{
    ap_equidistribution_run, binary_cubic_sum, cubic_main_term, exceptional_fraction,
    GoodModuliParams,
};
use klab_core::incomplete::Support;
use klab_core::weight::{make_weight, WeightSpec};

use super::sweeps::{support_name, supports};
use super::{ctx, CliResult, Outcome};
use crate::args::{ApRunArgs, AvgDeltaArgs, CubicArgs};
use crate::row;
use crate::table::{Cell, Table};

pub(super) fn avg_delta(args: &AvgDeltaArgs) -> CliResult<Outcome> {
    let weight = make_weight(WeightSpec::bump(args.delta_shape))
        .map_err(ctx(format!("delta-shape={}", args.delta_shape)))?;
    let table_w = SmoothTable::new(args.x, &weight).map_err(ctx(format!("X={}", args.x)))?;
    let mut table = Table::new(&[
        "r", "s", "U", "support", "terms", "lhs", "rhs", "ratio", "range_ok", "margin1",
        "margin2", "margin3", "margin4",
    ]);
    let mut finite = true;
    let mut worst = 0.0f64;
    for &r in &args.r {
        for &s in &args.s {
            for &u in &args.u {
                for support in supports(args.support) {
                    let what = format!("r={r}, s={s}, U={u}, a={}", args.a);
                    let rep = match support {
                        Support::SquareFree => {
                            avg_delta_squarefree(r, s, u, &table_w, args.a, args.eps)
                        }
                        Support::SquaresOfSquareFree => {
                            avg_delta_squares(r, s, u, &table_w, args.a, args.eps)
                        }
                    }
                    .map_err(ctx(what))?;
                    finite &= rep.ratio.is_finite();
                    worst = worst.max(rep.ratio);
                    let m = rep.range.margins;
                    table.push(row![
                        r,
                        s,
                        u,
                        support_name(support),
                        rep.terms.len(),
                        rep.lhs,
                        rep.rhs,
                        rep.ratio,
                        rep.range.all(),
                        m[0],
                        m[1],
                        m[2],
                        m[3]
                    ]);
                }
            }
        }
    }
    Ok(Outcome {
        summary: vec![format!("{} cells, max lhs/bound = {worst}", table.rows.len())],
        table,
        passed: finite,
    })
}

pub(super) fn ap_run(args: &ApRunArgs) -> CliResult<Outcome> {
    let what = format!("X={}, Q={}, a={}, eps={}, B={}", args.x, args.q, args.a, args.eps, args.b);
    let rep = ap_equidistribution_run(args.x, args.q, args.a, args.eps, args.b).map_err(ctx(&what))?;
    let params = GoodModuliParams::new(args.x, args.q, args.eps);
    let exc = exceptional_fraction(&params).map_err(ctx(&what))?;
    let mut table = Table::new(&["q", "delta_exact", "delta", "threshold", "violates", "good"]);
    for r in &rep.rows {
        table.push(row![r.q, r.delta_exact.clone(), r.delta, r.threshold, r.violates, r.good]);
    }
    let w = params.windows;
    table.meta("windows", format!("P1={},Q1={},P2={},Q2={}", w.p1, w.q1, w.p2, w.q2));
    table.meta("degenerate", exc.degenerate);
    table.meta("eps_in_window", params.eps_in_window());
    table.meta("bad_count", exc.bad_count);
    table.meta("sieve_rhs", exc.sieve_rhs);
    table.meta("sqrt_eps_constant", exc.sqrt_eps_constant);
    table.meta("violators", rep.violators);
    let mut summary = vec![
        format!("moduli in (Q, 2Q]: {} ({} skipped, gcd(a, q) > 1)", rep.rows.len() as u64 + rep.skipped, rep.skipped),
        format!(
            "violators: {} (good {}, bad {}) vs sqrt(eps) Q = {}",
            rep.violators, rep.violators_good, rep.violators_bad, rep.sqrt_eps_q
        ),
        format!(
            "bad moduli: {} of {}; sieve rhs {}; C = bad / (sqrt(eps) Q) = {}",
            exc.bad_count, exc.interval_count, exc.sieve_rhs, exc.sqrt_eps_constant
        ),
    ];
    if exc.degenerate {
        summary.push("warning: degenerate windows (P1 >= Q1 or P2 >= Q2), good set empty".into());
    }
    if !params.eps_in_window() {
        summary.push("warning: eps outside (log log X / log X, 1/1000)".into());
    }
    Ok(Outcome {
        table,
        summary,
        passed: true,
    })
}

pub(super) fn cubic(args: &CubicArgs) -> CliResult<Outcome> {
    let mut table = Table::new(&[
        "X", "lhs", "oracle", "main_term", "ratio", "main_direct", "main_gap", "sum_in_N",
        "sum_out_N", "eps", "degenerate",
    ]);
    let mut summary = Vec::new();
    let mut agree = true;
    for &x in &args.x {
        let exp = binary_cubic_sum(x, args.a, args.oracle_max).map_err(ctx(format!("X={x}")))?;
        let main = cubic_main_term(x);
        if let Some(o) = exp.oracle {
            agree &= o == exp.lhs;
        }
        let oracle = exp.oracle.map(Cell::from).unwrap_or_else(|| Cell::from(""));
        let mut cells = row![x, exp.lhs];
        cells.push(oracle);
        cells.extend(row![
            exp.main_term,
            exp.ratio,
            main.direct,
            main.relative_gap(),
            exp.split.0,
            exp.split.1,
            exp.eps,
            exp.degenerate
        ]);
        table.push(cells);
        summary.push(format!(
            "X={x}: sum = {}, ratio to (3/zeta(2)) X^2 log X = {}, main-term gap {}",
            exp.lhs,
            exp.ratio,
            main.relative_gap()
        ));
    }
    Ok(Outcome {
        table,
        summary,
        passed: agree,
    })
}
