use serde::Serialize;

use super::source_norm;
use crate::error::{Error, Result};
use crate::mesh::{gradient_energy, nodes_in_ball, sup_on_ball, Ball, Point};
use crate::problem::{DiscreteField, ProblemSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HarnackRow {
    pub center: Point,
    pub d: f64,
    /// `sup_{B_{d/4}} u`
    pub sup: f64,
    /// `inf_{B_{d/8}} u`
    pub inf: f64,
    /// `d ||F||_{L^N(B_{d/4})}^(1/(p-1))`
    pub source: f64,
    /// `sup / (inf + source)`
    pub ratio: f64,
}

/// Harnack quotient of a positive solution on `B_{d/4}(center)`.
pub fn harnack_ratio(u: &DiscreteField, spec: &ProblemSpec, center: &Point, d: f64) -> Result<HarnackRow> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::InvalidParameter(format!("d must be positive (got {d})")));
    }
    let mesh = u.mesh();
    let outer = Ball::new(*center, 0.25 * d);
    let inner = Ball::new(*center, 0.125 * d);
    if let Some(i) = nodes_in_ball(mesh, &outer).find(|&i| u.values()[i] <= 0.0) {
        return Err(Error::NotPositivePhase { node: i, value: u.values()[i] });
    }
    let sup = sup_on_ball(mesh, u.values(), &outer)?;
    let inf = nodes_in_ball(mesh, &inner)
        .map(|i| u.values()[i])
        .reduce(f64::min)
        .ok_or(Error::UnderResolved { center: *center, radius: inner.radius })?;
    let source = d * source_norm(spec, u, Some(&outer)).powf(1.0 / (spec.p - 1.0));
    Ok(HarnackRow { center: *center, d, sup, inf, source, ratio: sup / (inf + source) })
}

/// Radius pairs `(s, t)` checked on every shipped solved case.
pub const CACCIOPPOLI_RADII: [(f64, f64); 3] = [(0.5, 0.75), (0.5, 1.0), (0.6, 0.9)];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CaccioppoliRow {
    pub s: f64,
    pub t: f64,
    /// `int_{B_s} |grad u|^p`
    pub lhs: f64,
    /// `int_{B_t \ B_s} |grad u|^p`
    pub annulus: f64,
    /// `1 / |s - t|^p`
    pub gap: f64,
    /// `1 + ||F||_{L^N}^(p/(p-1))` over the domain.
    pub source: f64,
    /// `lhs / (annulus + gap + source)`
    pub constant: f64,
}

/// Hole-filling quantities on balls about the domain center. Energies are
/// summed over elements whose barycenter lies in the ball.
pub fn caccioppoli_check(u: &DiscreteField, spec: &ProblemSpec, s: f64, t: f64) -> Result<CaccioppoliRow> {
    if !(0.5 <= s && s < t && t <= 1.0) {
        return Err(Error::InvalidParameter(format!("need 1/2 <= s < t <= 1 (got s = {s}, t = {t})")));
    }
    let mesh = u.mesh();
    let c = spec.domain.center();
    let p = spec.p;
    let lhs = gradient_energy(mesh, u.values(), p, Some(&Ball::new(c, s)));
    let annulus = gradient_energy(mesh, u.values(), p, Some(&Ball::new(c, t))) - lhs;
    let gap = (t - s).powf(-p);
    let source = 1.0 + source_norm(spec, u, None).powf(p / (p - 1.0));
    Ok(CaccioppoliRow { s, t, lhs, annulus: annulus.max(0.0), gap, source, constant: lhs / (annulus.max(0.0) + gap + source) })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{Builtin, DomainDescriptor, DomainKind, ScalarField};
    use crate::solver::{solve_oracle_1d, solve_regularized, SolveOptions};
    use std::f64::consts::PI;

    fn disc(n: usize) -> ProblemSpec {
        ProblemSpec::constant(2.0, 0.5, DomainDescriptor::new(DomainKind::UnitDisc, n), 1.0, 1.0)
    }

    #[test]
    fn constants_have_ratio_one() {
        let spec = disc(16);
        let u = DiscreteField::from_fn(spec.build_mesh().unwrap(), |_| 1.7).unwrap();
        let row = harnack_ratio(&u, &spec, &[0.1, 0.2], 0.8).unwrap();
        assert_eq!(row.ratio, 1.0);
        assert_eq!(row.source, 0.0);
    }

    #[test]
    fn sign_change_rejected() {
        let spec = disc(16);
        let u = DiscreteField::from_fn(spec.build_mesh().unwrap(), |x| x[0]).unwrap();
        assert!(matches!(harnack_ratio(&u, &spec, &[0.0, 0.0], 0.8), Err(Error::NotPositivePhase { .. })));
        assert!(matches!(harnack_ratio(&u, &spec, &[0.51, 0.013], 1e-3), Err(Error::UnderResolved { .. })));
    }

    #[test]
    fn oracle_branch_ratio_is_stable() {
        // Positive branch is linear: sup/inf = (d + d/4)/(d - d/8) in the limit.
        let oracle = solve_oracle_1d(4.0, 1.0, 2.0).unwrap();
        let c = [0.2, 0.0];
        let d = c[0] - oracle.x0;
        let ratio = |n: usize| {
            let spec = ProblemSpec::constant(2.0, 0.2, DomainDescriptor::new(DomainKind::Interval, n), 4.0, 1.0)
                .with_boundary(ScalarField::Expr(Builtin::X1));
            let mesh = spec.build_mesh().unwrap();
            let (u, _) = solve_regularized(&spec, &mesh, 1e-6, &SolveOptions::default(), None).unwrap();
            harnack_ratio(&u, &spec, &c, d).unwrap().ratio
        };
        let (r1, r2) = (ratio(128), ratio(256));
        assert!((r2 / r1 - 1.0).abs() < 0.1);
        assert!((r2 - 1.25 / 0.875).abs() < 0.05, "{r2}");
    }

    #[test]
    fn linear_energies_are_areas() {
        let spec = disc(32);
        let u = DiscreteField::from_fn(spec.build_mesh().unwrap(), |x| x[0]).unwrap();
        let row = caccioppoli_check(&u, &spec, 0.5, 1.0).unwrap();
        assert!((row.lhs - PI / 4.0).abs() < 1e-12, "{}", row.lhs);
        // B_1 is the inscribed polygon, short of the disc by O(h^2).
        assert!((row.annulus - 0.75 * PI).abs() < 0.01 * 0.75 * PI, "{}", row.annulus);
        assert_eq!(row.gap, 4.0);
        assert_eq!(row.source, 1.0);
        let flat = DiscreteField::from_fn(u.mesh().clone(), |_| 3.0).unwrap();
        // Gradients of a constant vanish up to rounding in the basis sums.
        assert!(caccioppoli_check(&flat, &spec, 0.5, 0.75).unwrap().lhs < 1e-24);
    }

    #[test]
    fn radii_contract() {
        let spec = disc(8);
        let u = DiscreteField::zeros(spec.build_mesh().unwrap());
        for (s, t) in [(0.4, 0.8), (0.7, 0.6), (0.5, 1.2)] {
            assert!(caccioppoli_check(&u, &spec, s, t).is_err());
        }
    }
}
