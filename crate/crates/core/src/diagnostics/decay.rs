use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{nodes_in_ball, Ball, Point};
use crate::problem::DiscreteField;

/// Admissible `|u(center)|`, relative to `max(1, ||u||_inf)`.
pub const CENTER_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DyadicConfig {
    /// Base radius in (0, 1).
    #[serde(rename = "R0")]
    pub r0: f64,
    /// Target exponent in (0, 1].
    pub alpha: f64,
    pub k_max: usize,
    pub center: Point,
}

impl DyadicConfig {
    fn validate(&self, u: &DiscreteField) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidParameter(m));
        if !(self.r0 > 0.0 && self.r0 < 1.0) {
            return bad(format!("R0 must lie in (0, 1) (got {})", self.r0));
        }
        if !(self.alpha > 0.0 && self.alpha <= 1.0) {
            return bad(format!("alpha must lie in (0, 1] (got {})", self.alpha));
        }
        if self.k_max == 0 {
            return bad("k_max must be positive".into());
        }
        let h = u.mesh().h_mesh();
        let smallest = self.r0.powi(self.k_max as i32);
        if smallest < h {
            return bad(format!("R0^k_max = {smallest:e} is below the mesh size {h:e}"));
        }
        let uc = u.interpolate(&self.center)?;
        if uc.abs() > CENTER_TOL * u.max_abs().max(1.0) {
            return bad(format!("center is not a zero of u (u = {uc:e})"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DyadicProfile {
    /// `R0^k` for `k = 1..=k_max`.
    pub radii: Vec<f64>,
    /// `M_k = sup_{B_{R0^k}(center)} |u - u(center)|`.
    pub sups: Vec<f64>,
    /// Least-squares slope of `log M_k` against `log R0^k` over the resolvable
    /// levels; `None` when fewer than two remain.
    pub fitted_alpha: Option<f64>,
    pub levels_used: usize,
    /// `fitted_alpha >= alpha`.
    pub target_met: bool,
}

pub fn dyadic_decay_profile(u: &DiscreteField, cfg: &DyadicConfig) -> Result<DyadicProfile> {
    cfg.validate(u)?;
    let mesh = u.mesh();
    let uc = u.interpolate(&cfg.center)?;
    let mut radii = Vec::with_capacity(cfg.k_max);
    let mut sups = Vec::with_capacity(cfg.k_max);
    for k in 1..=cfg.k_max {
        let r = cfg.r0.powi(k as i32);
        let ball = Ball::new(cfg.center, r);
        let m = nodes_in_ball(mesh, &ball)
            .map(|i| (u.values()[i] - uc).abs())
            .fold(None, |acc: Option<f64>, v| Some(acc.map_or(v, |a| a.max(v))))
            .ok_or(Error::UnderResolved { center: cfg.center, radius: r })?;
        radii.push(r);
        sups.push(m);
    }
    let floor = 10.0 * f64::EPSILON * u.max_abs();
    let pts: Vec<(f64, f64)> = radii.iter().zip(&sups).filter(|(_, &m)| m >= floor && m > 0.0).map(|(r, m)| (r.ln(), m.ln())).collect();
    let fitted_alpha = least_squares_slope(&pts);
    Ok(DyadicProfile {
        radii,
        sups,
        fitted_alpha,
        levels_used: pts.len(),
        target_met: fitted_alpha.is_some_and(|a| a >= cfg.alpha),
    })
}

fn least_squares_slope(pts: &[(f64, f64)]) -> Option<f64> {
    if pts.len() < 2 {
        return None;
    }
    let n = pts.len() as f64;
    let xm = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let ym = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - xm).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - xm) * (p.1 - ym)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_mesh, norm};
    use crate::problem::{DomainDescriptor, DomainKind};
    use proptest::prelude::*;
    use std::sync::Arc;

    fn field(kind: DomainKind, n: usize, f: impl Fn(&Point) -> f64) -> DiscreteField {
        let mesh = Arc::new(build_mesh(&DomainDescriptor::new(kind, n)).unwrap());
        DiscreteField::from_fn(mesh, f).unwrap()
    }

    fn cfg(k_max: usize) -> DyadicConfig {
        DyadicConfig { r0: 0.5, alpha: 0.5, k_max, center: [0.0, 0.0] }
    }

    #[test]
    fn power_fields_recover_exponent() {
        for beta in [0.3, 0.5, 0.9] {
            let u = field(DomainKind::Interval, 512, |x| norm(x).powf(beta));
            let prof = dyadic_decay_profile(&u, &cfg(5)).unwrap();
            assert!((prof.fitted_alpha.unwrap() - beta).abs() < 0.02);
            let u = field(DomainKind::UnitDisc, 32, |x| norm(x).powf(beta));
            let prof = dyadic_decay_profile(&u, &cfg(4)).unwrap();
            assert!((prof.fitted_alpha.unwrap() - beta).abs() < 0.02);
        }
    }

    #[test]
    fn linear_is_lipschitz() {
        let u = field(DomainKind::UnitDisc, 16, |x| 2.0 * x[0] - x[1]);
        let prof = dyadic_decay_profile(&u, &cfg(3)).unwrap();
        assert!((prof.fitted_alpha.unwrap() - 1.0).abs() < 0.02);
        assert!(prof.target_met);
    }

    #[test]
    fn zero_field_has_no_exponent() {
        let u = field(DomainKind::Interval, 64, |_| 0.0);
        let prof = dyadic_decay_profile(&u, &cfg(4)).unwrap();
        assert!(prof.sups.iter().all(|&m| m == 0.0));
        assert_eq!(prof.fitted_alpha, None);
        assert!(!prof.target_met);
    }

    #[test]
    fn contract_errors() {
        let u = field(DomainKind::Interval, 16, |x| x[0]);
        // R0^k_max below h.
        assert!(dyadic_decay_profile(&u, &cfg(6)).is_err());
        let off = DyadicConfig { center: [0.5, 0.0], ..cfg(2) };
        assert!(dyadic_decay_profile(&u, &off).is_err());
        assert!(dyadic_decay_profile(&u, &DyadicConfig { r0: 1.0, ..cfg(2) }).is_err());
    }

    proptest! {
        #[test]
        fn sups_non_increasing(a in -3.0f64..3.0, b in -3.0f64..3.0, c in 0.1f64..2.0) {
            let u = field(DomainKind::UnitDisc, 16, move |x| a * x[0] + b * x[1] * x[1] + c * (x[0] * x[1]).sin());
            let prof = dyadic_decay_profile(&u, &cfg(2)).unwrap();
            prop_assert!(prof.sups.windows(2).all(|w| w[1] <= w[0]));
        }
    }
}
