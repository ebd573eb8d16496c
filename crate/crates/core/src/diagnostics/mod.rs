//! Regularity measurements on discrete solutions: dyadic decay about a zero,
//! Holder seminorms stratified by distance to the free boundary, Harnack
//! ratios, Caccioppoli quotients, proximity to regular profiles and the
//! modulus of continuity of the coefficients.
//!
//! The theory's constants are existential, so every routine here reports a
//! measured quantity; comparisons are against frozen regression values.

mod compactness;
mod decay;
mod estimates;
mod holder;
mod modulus;

use serde::Serialize;

pub use compactness::{compactness_experiment, is_non_decreasing, perturbed_spec, ProximityRow, BUMP_DELTAS};
pub use decay::{dyadic_decay_profile, DyadicConfig, DyadicProfile, CENTER_TOL};
pub use estimates::{caccioppoli_check, harnack_ratio, CaccioppoliRow, HarnackRow, CACCIOPPOLI_RADII};
pub use holder::{holder_report, node_distances, HolderReport, HolderStratum};
pub use modulus::modulus_of_continuity;

use crate::error::{Error, Result};
use crate::mesh::{dist, Ball, Mesh, Point};
use crate::problem::{eval_broken_source, DiscreteField, ProblemSpec};
use crate::quadrature::fixed_rule;

/// Distance from `x` to the nearest node where `u` has the opposite sign to
/// `u(x)` or vanishes. With no such node the mesh diameter is returned.
pub fn free_boundary_distance(u: &DiscreteField, x: &Point) -> Result<f64> {
    let ux = u.interpolate(x)?;
    if ux == 0.0 {
        return Err(Error::OnFreeBoundary);
    }
    let mesh = u.mesh();
    let d = u
        .values()
        .iter()
        .zip(mesh.nodes())
        .filter(|(&v, _)| v * ux.signum() <= 0.0)
        .map(|(_, y)| dist(x, y))
        .fold(f64::INFINITY, f64::min);
    Ok(if d.is_finite() { d } else { mesh.diameter() })
}

/// A zero of the interpolant of `u` on the segment `[a, b]` by bisection.
/// The end values must not share a strict sign.
pub fn zero_on_segment(u: &DiscreteField, a: &Point, b: &Point) -> Result<Point> {
    let (mut lo, mut hi) = (*a, *b);
    let (mut flo, fhi) = (u.interpolate(&lo)?, u.interpolate(&hi)?);
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(Error::InvalidParameter(format!("no sign change on the segment ({flo:e} and {fhi:e} at the ends)")));
    }
    for _ in 0..200 {
        let mid = [0.5 * (lo[0] + hi[0]), 0.5 * (lo[1] + hi[1])];
        if mid == lo || mid == hi {
            break;
        }
        let fm = u.interpolate(&mid)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if fm.signum() == flo.signum() {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    let fhi = u.interpolate(&hi)?;
    Ok(if flo.abs() <= fhi.abs() { lo } else { hi })
}

/// `|B_1|` in dimension `dim`.
pub fn unit_ball_measure(dim: usize) -> f64 {
    if dim == 1 {
        2.0
    } else {
        std::f64::consts::PI
    }
}

/// `||f(x, u(x))||_{L^N}` with `N` the space dimension, over elements whose
/// barycenter lies in `region` (all elements for `None`).
pub fn source_norm(spec: &ProblemSpec, u: &DiscreteField, region: Option<&Ball>) -> f64 {
    let mesh: &Mesh = u.mesh();
    let n = mesh.dim() as f64;
    let mut s = 0.0;
    for e in 0..mesh.n_elements() {
        if region.is_some_and(|b| !b.contains(&mesh.barycenter(e))) {
            continue;
        }
        let c = mesh.element(e);
        for q in fixed_rule(mesh, e) {
            let uq: f64 = c.iter().zip(&q.bary).map(|(&i, &l)| l * u.values()[i]).sum();
            let f = eval_broken_source(spec.f_plus.at(mesh, e, &q.bary), spec.f_minus.at(mesh, e, &q.bary), uq);
            s += q.weight * f.abs().powf(n);
        }
    }
    s.powf(1.0 / n)
}

/// Everything the `diagnose` command measures on one field.
#[derive(Debug, Clone, Serialize)]
pub struct RegularityReport {
    pub dyadic: Option<DyadicProfile>,
    pub holder: Option<HolderReport>,
    pub harnack_rows: Vec<HarnackRow>,
    pub caccioppoli_rows: Vec<CaccioppoliRow>,
    pub proximity_rows: Vec<ProximityRow>,
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{DomainDescriptor, DomainKind, ScalarField};
    use crate::solver::{solve_oracle_1d, solve_regularized, SolveOptions};
    use std::sync::Arc;

    fn interval(n: usize) -> Arc<Mesh> {
        Arc::new(crate::mesh::build_mesh(&DomainDescriptor::new(DomainKind::Interval, n)).unwrap())
    }

    #[test]
    fn distance_examples() {
        let mesh = interval(8);
        let u = DiscreteField::from_fn(mesh.clone(), |x| x[0]).unwrap();
        assert!((free_boundary_distance(&u, &[0.5, 0.0]).unwrap() - 0.5).abs() < 1e-15);
        assert!(matches!(free_boundary_distance(&u, &[0.0, 0.0]), Err(Error::OnFreeBoundary)));
        let pos = DiscreteField::from_fn(mesh, |x| 2.0 + x[0]).unwrap();
        assert_eq!(free_boundary_distance(&pos, &[0.3, 0.0]).unwrap(), 2.0);
    }

    #[test]
    fn distance_tracks_oracle_interface() {
        // Two nodes right of the oracle interface, on a solved field.
        let (ap, am, p) = (4.0, 1.0, 2.0);
        let oracle = solve_oracle_1d(ap, am, p).unwrap();
        let n = 64;
        let spec = ProblemSpec::constant(p, 0.2, DomainDescriptor::new(DomainKind::Interval, n), ap, am)
            .with_boundary(ScalarField::Expr(crate::problem::Builtin::X1));
        let mesh = spec.build_mesh().unwrap();
        let (u, _) = solve_regularized(&spec, &mesh, 1e-6, &SolveOptions::default(), None).unwrap();
        let h = mesh.h_mesh();
        let first = mesh.nodes().iter().find(|x| x[0] > oracle.x0).unwrap()[0];
        let x = [first + 2.0 * h, 0.0];
        let d = free_boundary_distance(&u, &x).unwrap();
        assert!((d - (x[0] - oracle.x0)).abs() <= h, "{d} vs {}", x[0] - oracle.x0);
    }

    #[test]
    fn bisection_finds_zero() {
        let mesh = interval(16);
        let u = DiscreteField::from_fn(mesh, |x| 3.0 * x[0] - 0.9).unwrap();
        let z = zero_on_segment(&u, &[-1.0, 0.0], &[1.0, 0.0]).unwrap();
        assert!((z[0] - 0.3).abs() < 1e-14);
        assert!(zero_on_segment(&u, &[0.5, 0.0], &[1.0, 0.0]).is_err());
    }

    #[test]
    fn source_norm_of_constant() {
        let mesh = interval(8);
        let spec = ProblemSpec::constant(2.0, 0.5, DomainDescriptor::new(DomainKind::Interval, 8), 1.0, 1.0)
            .with_sources(ScalarField::Const(3.0), ScalarField::Const(-3.0));
        let u = DiscreteField::from_fn(mesh, |x| x[0]).unwrap();
        assert!((source_norm(&spec, &u, None) - 6.0).abs() < 1e-12);
        assert!((source_norm(&spec, &u, Some(&Ball::centered(0.5))) - 3.0).abs() < 1e-12);
    }
}
