use freetrans::diagnostics::{compactness_experiment, is_non_decreasing};
use freetrans::io::{Bound, ReportRow};

use super::require_spec;
use crate::{Context, Failure};

pub(super) fn compare_profile(ctx: &Context) -> Result<Vec<ReportRow>, Failure> {
    let spec = require_spec(ctx)?;
    let cfg = ctx.config.compactness.clone().unwrap_or_default();
    let opts = &ctx.config.options;
    let table = compactness_experiment(spec, &cfg.deltas, ctx.config.eps, opts)?;
    let mut rows = Vec::new();
    for r in &table {
        let name = format!("proximity[delta={}]", r.delta);
        rows.push(match r.proximity {
            Some(v) => ReportRow::info(name, v),
            None => ReportRow::check(name, f64::NAN, Bound::AtLeast(0.0)),
        });
    }
    rows.push(ReportRow::flag("proximity_non_decreasing", is_non_decreasing(&table)));
    if let Some(first) = table.first().filter(|r| r.delta == 0.0) {
        rows.push(ReportRow::check(
            "proximity_at_zero",
            first.proximity.unwrap_or(f64::NAN),
            Bound::AtMost(10.0 * opts.tol_picard),
        ));
    }
    Ok(rows)
}
