use freetrans::io::{Bound, ReportRow};
use freetrans::mollifier::geometric_schedule;
use freetrans::solver::{epsilon_continuation, fixed_point_residual, smoothed_energy};

use super::{require_spec, solve_to, write_field};
use crate::{Context, Failure};

/// Split identity and plus-part slack allowed per level.
const SPLIT_TOL: f64 = 1e-12;
/// Allowed `max / median - 1` of the gradient norms across levels.
const GRAD_SPREAD_TOL: f64 = 0.05;
/// Cauchy gaps are checked for monotonicity from this index on.
const CAUCHY_FROM: usize = 2;

pub(super) fn solve(ctx: &Context) -> Result<Vec<ReportRow>, Failure> {
    let spec = require_spec(ctx)?;
    let opts = &ctx.config.options;
    let eps = ctx.config.eps;
    let mesh = spec.build_mesh()?;
    let (u, cont) = solve_to(spec, &mesh, eps, opts)?;
    let last = cont.reports.last().expect("non-empty schedule");
    let mut rows = vec![
        ReportRow::info("eps", eps),
        ReportRow::info("levels", cont.reports.len() as f64),
        ReportRow::flag("converged", last.converged),
        ReportRow::info("iterations", last.iterations as f64),
        ReportRow::info("total_iterations", cont.reports.iter().map(|r| r.iterations).sum::<usize>() as f64),
        ReportRow::check("fixed_point_residual", fixed_point_residual(spec, &u, eps, opts)?, Bound::AtMost(10.0 * opts.tol_picard)),
        ReportRow::info("grad_norm", last.grad_norm),
        ReportRow::info("smoothed_energy", smoothed_energy(spec, &u, eps)?),
        ReportRow::info("u_min", u.values().iter().copied().fold(f64::INFINITY, f64::min)),
        ReportRow::info("u_max", u.values().iter().copied().fold(f64::NEG_INFINITY, f64::max)),
    ];
    if last.experimental {
        rows.push(ReportRow::info("experimental", 1.0));
    }
    write_field(ctx, "u", &u)?;
    Ok(rows)
}

pub(super) fn sweep(ctx: &Context) -> Result<Vec<ReportRow>, Failure> {
    let spec = require_spec(ctx)?;
    let opts = &ctx.config.options;
    let sched = ctx.config.schedule;
    let schedule = geometric_schedule(sched.eps0, sched.levels)?;
    let mesh = spec.build_mesh()?;
    let cont = epsilon_continuation(spec, &mesh, &schedule, opts)?;
    let mut rows = Vec::new();
    for (j, &eps) in schedule.iter().enumerate() {
        let r = &cont.reports[j];
        rows.push(ReportRow::info(format!("eps[j={j}]"), eps));
        rows.push(ReportRow::info(format!("iterations[j={j}]"), r.iterations as f64));
        rows.push(ReportRow::check(format!("split_identity[j={j}]"), cont.split_checks[j], Bound::AtMost(SPLIT_TOL)));
        rows.push(ReportRow::check(
            format!("plus_part_gap[j={j}]"),
            cont.plus_part_gaps[j],
            Bound::AtMost(0.5 * eps + SPLIT_TOL),
        ));
        rows.push(ReportRow::info(format!("grad_norm[j={j}]"), r.grad_norm));
    }
    for (j, &g) in cont.cauchy_gaps.iter().enumerate() {
        rows.push(ReportRow::info(format!("cauchy_gap[j={j}]"), g));
    }
    let tail = cont.cauchy_gaps.get(CAUCHY_FROM..).unwrap_or(&[]);
    rows.push(ReportRow::flag("cauchy_gaps_non_increasing", tail.windows(2).all(|w| w[1] <= w[0])));
    let mut g = cont.grad_norms.clone();
    g.sort_by(f64::total_cmp);
    let median = if g.len() % 2 == 1 { g[g.len() / 2] } else { 0.5 * (g[g.len() / 2 - 1] + g[g.len() / 2]) };
    let (lo, hi) = (g[0], g[g.len() - 1]);
    let rel = |x: f64| if median > 0.0 { x / median } else { 0.0 };
    rows.push(ReportRow::info("grad_norm_median", median));
    rows.push(ReportRow::info("grad_norm_range", rel(hi - lo)));
    rows.push(ReportRow::check("grad_norm_spread", rel(hi - median), Bound::AtMost(GRAD_SPREAD_TOL)));
    rows.push(ReportRow::flag("grad_norm_bounded", cont.grad_bound_ok));
    write_field(ctx, "u", cont.fields.last().expect("non-empty schedule"))?;
    Ok(rows)
}
