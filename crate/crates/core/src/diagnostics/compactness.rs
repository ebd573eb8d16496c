use std::f64::consts::PI;
use std::sync::Arc;

use serde::Serialize;

use super::unit_ball_measure;
use crate::error::{Error, Result};
use crate::mesh::{nodes_in_ball, norm, Ball};
use crate::mollifier::{schedule_down_to, DEFAULT_EPS0};
use crate::problem::{DomainKind, ProblemSpec, ScalarField};
use crate::solver::{epsilon_continuation, SolveOptions};
use crate::tab::make_regular_profile;

/// The shipped perturbation amplitudes.
pub const BUMP_DELTAS: [f64; 5] = [0.0, 0.02, 0.05, 0.1, 0.2];

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProximityRow {
    pub delta: f64,
    /// `||u - h||_{L^inf(B_{1/4})}`; `None` when a solve failed.
    pub proximity: Option<f64>,
    pub error: Option<String>,
    /// Picard iterations of the last continuation level.
    pub iterations: usize,
}

/// `A_pm(x) = A_pm + delta (1 + cos(pi |x|)) / 2` and `f_pm = delta |B_1|^(-1/N)`,
/// so that the coefficient oscillation and the source `L^N` norm over `B_1`
/// are both exactly `delta`.
pub fn perturbed_spec(base: &ProblemSpec, delta: f64) -> Result<ProblemSpec> {
    let (Some(ap), Some(am)) = (base.a_plus.is_const(), base.a_minus.is_const()) else {
        return Err(Error::InvalidParameter("compactness base needs constant A_plus and A_minus".into()));
    };
    if !(delta >= 0.0) || !delta.is_finite() {
        return Err(Error::InvalidParameter(format!("delta must be nonnegative (got {delta})")));
    }
    if delta == 0.0 {
        return Ok(base.clone());
    }
    let dim = base.domain.dim();
    let bump = move |x: &crate::mesh::Point| 0.5 * delta * (1.0 + (PI * norm(x)).cos());
    let f = delta * unit_ball_measure(dim).powf(-1.0 / dim as f64);
    Ok(ProblemSpec {
        a_plus: ScalarField::func(move |x| ap + bump(x)),
        a_minus: ScalarField::func(move |x| am + bump(x)),
        f_plus: ScalarField::Const(f),
        f_minus: ScalarField::Const(f),
        ..base.clone()
    })
}

/// For each `delta`, solves the perturbed problem on `B_1` by continuation
/// down to `eps`, builds the regular profile on `B_{1/2}` with coefficients
/// frozen at the origin and the solution's own trace, and records
/// `||u - h||_{L^inf(B_{1/4})}`. The solves run concurrently.
pub fn compactness_experiment(base: &ProblemSpec, deltas: &[f64], eps: f64, opts: &SolveOptions) -> Result<Vec<ProximityRow>> {
    if base.domain.kind == DomainKind::UnitSquare {
        return Err(Error::InvalidParameter("compactness experiment runs on the interval or the unit disc".into()));
    }
    let specs = deltas.iter().map(|&d| perturbed_spec(base, d)).collect::<Result<Vec<_>>>()?;
    let mesh = base.build_mesh()?;
    let schedule = schedule_down_to(DEFAULT_EPS0, eps)?;
    let rows = std::thread::scope(|scope| {
        let handles: Vec<_> = specs
            .iter()
            .zip(deltas)
            .map(|(spec, &delta)| {
                let (mesh, schedule) = (&mesh, &schedule);
                scope.spawn(move || proximity_row(spec, delta, mesh, schedule, opts))
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("compactness worker panicked")).collect()
    });
    Ok(rows)
}

fn proximity_row(spec: &ProblemSpec, delta: f64, mesh: &Arc<crate::mesh::Mesh>, schedule: &[f64], opts: &SolveOptions) -> ProximityRow {
    let failed = |e: Error, iterations| ProximityRow { delta, proximity: None, error: Some(e.to_string()), iterations };
    let cont = match epsilon_continuation(spec, mesh, schedule, opts) {
        Ok(c) => c,
        Err(e) => return failed(e, 0),
    };
    let iterations = cont.reports.last().map_or(0, |r| r.iterations);
    let u = cont.fields.last().expect("non-empty schedule");
    let origin = [0.0, 0.0];
    let (ap0, am0) = (spec.a_plus.at_point(&origin).unwrap_or(1.0), spec.a_minus.at_point(&origin).unwrap_or(1.0));
    let run = || -> Result<f64> {
        let (sub, parent) = mesh.restrict_to_ball(&Ball::centered(0.5))?;
        let sub = Arc::new(sub);
        let trace: Vec<f64> = parent.iter().map(|&i| u.values()[i]).collect();
        let profile = make_regular_profile(&sub, ap0, am0, spec.p, &trace, opts)?;
        let quarter = Ball::centered(0.25);
        let prox = nodes_in_ball(&sub, &quarter)
            .map(|k| (trace[k] - profile.h.values()[k]).abs())
            .reduce(f64::max)
            .ok_or(Error::UnderResolved { center: origin, radius: 0.25 })?;
        Ok(prox)
    };
    match run() {
        Ok(p) => ProximityRow { delta, proximity: Some(p), error: None, iterations },
        Err(e) => failed(e, iterations),
    }
}

/// Whether the recorded proximities are non-decreasing in row order, every
/// row having succeeded.
pub fn is_non_decreasing(rows: &[ProximityRow]) -> bool {
    let vals: Option<Vec<f64>> = rows.iter().map(|r| r.proximity).collect();
    vals.is_some_and(|v| v.windows(2).all(|w| w[1] >= w[0]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::source_norm;
    use crate::problem::{Builtin, DiscreteField, DomainDescriptor};

    fn base(n: usize) -> ProblemSpec {
        ProblemSpec::constant(2.0, 0.5, DomainDescriptor::new(DomainKind::UnitDisc, n), 1.0, 1.0)
            .with_boundary(ScalarField::Expr(Builtin::X1))
    }

    #[test]
    fn perturbation_has_exact_size() {
        let s = perturbed_spec(&base(16), 0.1).unwrap();
        assert_eq!(s.a_plus.at_point(&[0.0, 0.0]), Some(1.1));
        assert!((s.a_minus.at_point(&[1.0, 0.0]).unwrap() - 1.0).abs() < 1e-15);
        let mesh = s.build_mesh().unwrap();
        let u = DiscreteField::from_fn(mesh.clone(), |x| x[0]).unwrap();
        // The polygonal disc falls short of pi by O(h^2).
        assert!((source_norm(&s, &u, None) - 0.1).abs() < 1e-3);
        let one_d = ProblemSpec::constant(2.0, 0.5, DomainDescriptor::new(DomainKind::Interval, 8), 1.0, 2.0);
        assert_eq!(perturbed_spec(&one_d, 0.2).unwrap().f_plus.is_const(), Some(0.1));
        assert!(perturbed_spec(&base(8).with_sources(ScalarField::Const(1.0), ScalarField::Const(1.0)), -1.0).is_err());
        let varying = ProblemSpec { a_plus: ScalarField::Expr(Builtin::Radius), ..base(8) };
        assert!(perturbed_spec(&varying, 0.1).is_err());
    }

    #[test]
    fn zero_perturbation_is_its_own_profile() {
        let opts = SolveOptions { tol_picard: 1e-10, linear_tol: 1e-13, ..Default::default() };
        let rows = compactness_experiment(&base(16), &[0.0, 0.05, 0.2, 1.0], 1e-3, &opts).unwrap();
        assert!(rows[0].proximity.unwrap() <= 10.0 * opts.tol_picard, "{rows:?}");
        assert!(is_non_decreasing(&rows), "{rows:?}");
        assert!(rows[3].proximity.unwrap().is_finite());
    }
}
