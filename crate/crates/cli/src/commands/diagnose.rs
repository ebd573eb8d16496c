use std::sync::Arc;

use freetrans::diagnostics::{
    caccioppoli_check, dyadic_decay_profile, free_boundary_distance, harnack_ratio, holder_report, modulus_of_continuity,
    zero_on_segment, DyadicConfig, CACCIOPPOLI_RADII,
};
use freetrans::frozen;
use freetrans::io::{Bound, ReportRow};
use freetrans::mesh::{build_mesh, norm, Ball};
use freetrans::problem::ScalarField;
use freetrans::tab::SamplingPlan;
use freetrans::{DiscreteField, DomainDescriptor, DomainKind, Point, ProblemSpec};

use super::{require_spec, solve_to, write_field};
use crate::{Context, DiagnoseConfig, Failure, HarnackSettings, PowerFieldConfig};

/// Allowed error of the exponent fitted to a sampled power field.
const POWER_FIT_TOL: f64 = 0.02;

pub(super) fn diagnose(ctx: &Context) -> Result<Vec<ReportRow>, Failure> {
    let cfg = ctx.config.diagnostics.clone().unwrap_or_default();
    let mut rows = Vec::new();
    if let Some(pf) = &cfg.power_fields {
        power_fields(pf, &mut rows)?;
    }
    let needs_solve = cfg.dyadic.is_some() || cfg.holder.is_some() || cfg.harnack.is_some() || cfg.caccioppoli || !cfg.modulus.is_empty();
    if needs_solve {
        solved_case(ctx, &cfg, &mut rows)?;
    }
    Ok(rows)
}

fn power_fields(pf: &PowerFieldConfig, rows: &mut Vec<ReportRow>) -> Result<(), Failure> {
    for domain in &pf.domains {
        let mesh = Arc::new(build_mesh(domain)?);
        let center = domain.center();
        for &beta in &pf.exponents {
            let u = DiscreteField::from_fn(mesh.clone(), |x| norm(&[x[0] - center[0], x[1] - center[1]]).powf(beta))?;
            let cfg = DyadicConfig { r0: pf.r0, alpha: beta, k_max: pf.k_max, center };
            let prof = dyadic_decay_profile(&u, &cfg)?;
            rows.push(ReportRow::check(
                format!("power_fit[{}/{},beta={beta}]", kind_name(domain.kind), domain.resolution),
                prof.fitted_alpha.unwrap_or(f64::NAN),
                Bound::Within { target: beta, tol: POWER_FIT_TOL },
            ));
        }
    }
    Ok(())
}

fn kind_name(kind: DomainKind) -> &'static str {
    match kind {
        DomainKind::Interval => "interval",
        DomainKind::UnitDisc => "disc",
        DomainKind::UnitSquare => "square",
    }
}

fn refined(spec: &ProblemSpec) -> Result<ProblemSpec, Failure> {
    let nodal = [&spec.a_plus, &spec.a_minus, &spec.f_plus, &spec.f_minus, &spec.g].iter().any(|f| matches!(f, ScalarField::Nodal(_)));
    if nodal {
        return Err(Failure::Config("refinement needs closed-form fields, not nodal tables".into()));
    }
    let domain = DomainDescriptor::new(spec.domain.kind, 2 * spec.domain.resolution);
    Ok(ProblemSpec { domain, ..spec.clone() })
}

/// A zero of `u` on the horizontal line through the domain center.
fn zero_on_axis(u: &DiscreteField, spec: &ProblemSpec) -> Result<Point, Failure> {
    let c = spec.domain.center();
    let half = if spec.domain.kind == DomainKind::UnitSquare { 0.5 } else { 1.0 };
    let w = half * (1.0 - 1e-9);
    Ok(zero_on_segment(u, &[c[0] - w, c[1]], &[c[0] + w, c[1]])?)
}

fn solved_case(ctx: &Context, cfg: &DiagnoseConfig, rows: &mut Vec<ReportRow>) -> Result<(), Failure> {
    let spec = require_spec(ctx)?;
    let opts = &ctx.config.options;
    let eps = ctx.config.eps;
    let case = cfg.case.as_deref().unwrap_or("");
    let mesh = spec.build_mesh()?;
    let (u, cont) = solve_to(spec, &mesh, eps, opts)?;
    rows.push(ReportRow::flag("converged", cont.reports.iter().all(|r| r.converged)));
    rows.push(ReportRow::info("h_mesh", mesh.h_mesh()));
    let fine = if cfg.refine {
        let spec2 = refined(spec)?;
        let mesh2 = spec2.build_mesh()?;
        let (u2, cont2) = solve_to(&spec2, &mesh2, eps, opts)?;
        rows.push(ReportRow::flag("converged_refined", cont2.reports.iter().all(|r| r.converged)));
        Some((spec2, u2))
    } else {
        None
    };

    if let Some(d) = cfg.dyadic {
        let center = match d.center {
            Some(c) => c,
            None => zero_on_axis(&u, spec)?,
        };
        rows.push(ReportRow::info("dyadic_center_x", center[0]));
        rows.push(ReportRow::info("dyadic_center_y", center[1]));
        let prof = dyadic_decay_profile(&u, &DyadicConfig { r0: d.r0, alpha: d.alpha, k_max: d.k_max, center })?;
        for (k, m) in prof.sups.iter().enumerate() {
            rows.push(ReportRow::info(format!("dyadic_sup[k={}]", k + 1), *m));
        }
        rows.push(ReportRow::check(
            "dyadic_fitted_alpha",
            prof.fitted_alpha.unwrap_or(f64::NAN),
            Bound::AtLeast(frozen::DYADIC_ALPHA_FLOOR),
        ));
    }

    if let Some(h) = cfg.holder {
        let mut plan = SamplingPlan::with_seed(ctx.seed()?);
        if let Some(n) = h.n_pairs {
            plan.n_pairs = n;
        }
        let rep = holder_report(&u, spec, h.alpha, h.r, h.r0, &plan)?;
        for (k, s) in rep.strata.iter().enumerate() {
            rows.push(ReportRow::info(format!("holder_stratum_pairs[{k}]"), s.pairs as f64));
            rows.push(ReportRow::info(format!("holder_stratum_seminorm[{k}]"), s.seminorm));
        }
        rows.push(ReportRow::info("holder_seminorm", rep.seminorm));
        rows.push(ReportRow::info("holder_quotient", rep.quotient));
        let near = if rep.seminorm > 0.0 { rep.strata[0].seminorm / rep.seminorm } else { 0.0 };
        rows.push(ReportRow::check("holder_near_interface_ratio", near, Bound::AtMost(frozen::NEAR_INTERFACE_FACTOR)));
    }

    if let Some(hs) = cfg.harnack {
        let r1 = harnack(&u, spec, &hs)?;
        rows.push(ReportRow::info("harnack_d", r1.d));
        rows.push(ReportRow::info("harnack_sup", r1.sup));
        rows.push(ReportRow::info("harnack_inf", r1.inf));
        rows.push(ReportRow::info("harnack_source", r1.source));
        rows.push(match frozen::harnack_ceiling(case) {
            Some(c) => ReportRow::check("harnack_ratio", r1.ratio, Bound::AtMost(c)),
            None => ReportRow::info("harnack_ratio", r1.ratio),
        });
        let unforced = ProblemSpec { f_plus: ScalarField::Const(0.0), f_minus: ScalarField::Const(0.0), ..spec.clone() };
        let one = DiscreteField::from_fn(mesh.clone(), |_| 1.0)?;
        let rc = harnack_ratio(&one, &unforced, &hs.center, r1.d)?;
        rows.push(ReportRow::check("harnack_constant_ratio", rc.ratio, Bound::Within { target: 1.0, tol: 0.0 }));
        if let Some((spec2, u2)) = &fine {
            let r2 = harnack(u2, spec2, &hs)?;
            rows.push(ReportRow::info("harnack_ratio_refined", r2.ratio));
            rows.push(ReportRow::check(
                "harnack_refinement_drift",
                (r2.ratio / r1.ratio - 1.0).abs(),
                Bound::AtMost(frozen::HARNACK_REFINEMENT_TOL),
            ));
        }
    }

    if cfg.caccioppoli {
        for (s, t) in CACCIOPPOLI_RADII {
            let row = caccioppoli_check(&u, spec, s, t)?;
            let tag = format!("s={s},t={t}");
            if s == 0.5 {
                rows.push(ReportRow::check(format!("energy_ball_s[{tag}]"), row.lhs, Bound::AtMost(f64::MAX)));
            }
            rows.push(ReportRow::info(format!("caccioppoli_annulus[{tag}]"), row.annulus));
            rows.push(match frozen::caccioppoli_constant(case, s, t) {
                Some(c) => ReportRow::check(format!("caccioppoli_constant[{tag}]"), row.constant, Bound::AtMost(c)),
                None => ReportRow::info(format!("caccioppoli_constant[{tag}]"), row.constant),
            });
            if let Some((spec2, u2)) = &fine {
                let row2 = caccioppoli_check(u2, spec2, s, t)?;
                rows.push(ReportRow::info(format!("caccioppoli_constant_refined[{tag}]"), row2.constant));
                rows.push(ReportRow::check(
                    format!("caccioppoli_refinement_drift[{tag}]"),
                    (row2.constant / row.constant - 1.0).abs(),
                    Bound::AtMost(frozen::CACCIOPPOLI_REFINEMENT_TOL),
                ));
            }
        }
    }

    let region = Ball::new(spec.domain.center(), 1.0);
    for &t in &cfg.modulus {
        let w = modulus_of_continuity(&mesh, &spec.a_plus, &spec.a_minus, &region, t)?;
        rows.push(ReportRow::info(format!("modulus[t={t}]"), w));
    }
    write_field(ctx, "u", &u)?;
    Ok(())
}

fn harnack(u: &DiscreteField, spec: &ProblemSpec, hs: &HarnackSettings) -> Result<freetrans::diagnostics::HarnackRow, Failure> {
    let d = match hs.d {
        Some(d) => d,
        None => free_boundary_distance(u, &hs.center)?,
    };
    Ok(harnack_ratio(u, spec, &hs.center, d)?)
}
