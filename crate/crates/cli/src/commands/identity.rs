use std::sync::Arc;

use freetrans::io::{Bound, ReportRow};
use freetrans::mesh::{build_mesh, dist, Ball};
use freetrans::mollifier::MollifierFamily;
use freetrans::tab::{check_holder_transfer, monotonicity_constant, monotonicity_gap, SamplingPlan, TabParams};
use freetrans::{DiscreteField, DomainDescriptor, DomainKind, Point};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Context, Failure, IdentityConfig, Suite};

const IDENTITY_TOL: f64 = 1e-12;

pub(super) fn identity_check(ctx: &Context) -> Result<Vec<ReportRow>, Failure> {
    let cfg = ctx.config.identities.clone().unwrap_or_default();
    let seed = ctx.seed()?;
    let mut rows = Vec::new();
    if cfg.suites.contains(&Suite::Mollifier) {
        mollifier_suite(&cfg, seed, &mut rows)?;
    }
    if cfg.suites.contains(&Suite::Tab) {
        tab_suite(&cfg, seed, &mut rows)?;
    }
    Ok(rows)
}

fn mollifier_suite(cfg: &IdentityConfig, seed: u64, rows: &mut Vec<ReportRow>) -> Result<(), Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut unity, mut split, mut limit) = (0.0f64, 0.0f64, f64::NEG_INFINITY);
    for k in 0..cfg.mollifier_samples {
        let eps = 10f64.powf(rng.gen_range(-6.0..0.0));
        // Half the samples land inside or near the ramp.
        let scale = if k % 2 == 0 { 2.0 } else { 2.0 * eps };
        let t = rng.gen_range(-scale..scale);
        let m = MollifierFamily::new(eps)?;
        unity = unity.max((m.psi_plus(t) + m.psi_minus(t) - 1.0).abs());
        split = split.max((m.Psi_plus(t) - m.Psi_minus(t) - t).abs());
        let excess = (m.Psi_plus(t) - t.max(0.0)).abs().max((m.Psi_minus(t) - (-t).max(0.0)).abs()) - 0.5 * eps;
        limit = limit.max(excess);
    }
    rows.push(ReportRow::info("mollifier/samples", cfg.mollifier_samples as f64));
    rows.push(ReportRow::check("mollifier/partition_of_unity", unity, Bound::AtMost(IDENTITY_TOL)));
    rows.push(ReportRow::check("mollifier/primitive_split", split, Bound::AtMost(IDENTITY_TOL)));
    rows.push(ReportRow::check("mollifier/limit_excess", limit, Bound::AtMost(IDENTITY_TOL)));
    Ok(())
}

fn ulps(a: f64, b: f64) -> u64 {
    if a == b {
        return 0;
    }
    if a.signum() != b.signum() {
        return u64::MAX;
    }
    a.abs().to_bits().abs_diff(b.abs().to_bits())
}

fn coefficient(rng: &mut ChaCha8Rng) -> f64 {
    // Uniform on (0, 5].
    5.0 * (1.0 - rng.gen::<f64>())
}

fn random_vector(rng: &mut ChaCha8Rng) -> Point {
    let r = 10f64.powf(rng.gen_range(-2.0..2.0));
    let th = rng.gen_range(0.0..std::f64::consts::TAU);
    [r * th.cos(), r * th.sin()]
}

fn tab_suite(cfg: &IdentityConfig, seed: u64, rows: &mut Vec<ReportRow>) -> Result<(), Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x5eed_7ab0);
    let mut worst_ulps = 0u64;
    for _ in 0..cfg.round_trip_samples {
        let t = TabParams::new(coefficient(&mut rng), coefficient(&mut rng))?;
        let v = if rng.gen() { 1.0 } else { -1.0 } * 10f64.powf(rng.gen_range(-10.0..10.0));
        worst_ulps = worst_ulps.max(ulps(t.invert(t.apply(v)), v));
    }
    rows.push(ReportRow::check("tab/round_trip_ulps", worst_ulps as f64, Bound::AtMost(1.0)));

    let mesh = Arc::new(build_mesh(&DomainDescriptor::new(DomainKind::UnitDisc, cfg.field_resolution))?);
    let region = Ball::centered(1.0);
    let (mut violations, mut worst) = (0usize, 0.0f64);
    for _ in 0..cfg.holder_fields {
        let vals: Vec<f64> = (0..mesh.n_nodes()).map(|_| rng.gen_range(-1.0..1.0)).collect();
        let u = DiscreteField::new(mesh.clone(), vals)?;
        let t = TabParams::new(coefficient(&mut rng), coefficient(&mut rng))?;
        let alpha = 1.0 - 0.95 * rng.gen::<f64>();
        let plan = SamplingPlan { seed: rng.gen(), n_pairs: cfg.pairs_per_field, band_factor: 3.0 };
        let h = check_holder_transfer(&t, &u, alpha, &region, &plan)?;
        if !h.holds() {
            violations += 1;
        }
        if h.rhs > 0.0 {
            worst = worst.max(h.lhs / h.rhs);
        }
    }
    rows.push(ReportRow::info("tab/holder_fields", cfg.holder_fields as f64));
    rows.push(ReportRow::check("tab/holder_transfer_violations", violations as f64, Bound::AtMost(0.0)));
    rows.push(ReportRow::info("tab/holder_transfer_worst_ratio", worst));

    for &p in &cfg.exponents {
        let (mut min_gap, mut min_ratio) = (f64::INFINITY, f64::INFINITY);
        for _ in 0..cfg.gradient_pairs {
            let (v1, v2) = (random_vector(&mut rng), random_vector(&mut rng));
            let gap = monotonicity_gap(&v1, &v2, p);
            min_gap = min_gap.min(gap);
            let d = dist(&v1, &v2);
            if d > 0.0 {
                min_ratio = min_ratio.min(gap / d.powf(p));
            }
        }
        rows.push(ReportRow::check(format!("tab/monotonicity_gap_min[p={p}]"), min_gap, Bound::AtLeast(0.0)));
        if let Some(c) = monotonicity_constant(p) {
            // The bound as literally stated, then with the sharp constant.
            rows.push(ReportRow::check(
                format!("tab/monotonicity_unit_bound[p={p}]"),
                min_ratio,
                Bound::AtLeast(1.0 - IDENTITY_TOL),
            ));
            rows.push(ReportRow::check(
                format!("tab/monotonicity_sharp_bound[p={p}]"),
                min_ratio,
                Bound::AtLeast(c * (1.0 - IDENTITY_TOL)),
            ));
        }
    }
    Ok(())
}
