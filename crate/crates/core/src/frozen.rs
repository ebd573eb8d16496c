//! Regression values measured on the shipped cases. The theory only asserts
//! existence of its constants, so these are the reference the diagnostics
//! are held to.

/// Floor for the dyadic exponent fitted about a zero of a solved case.
pub const DYADIC_ALPHA_FLOOR: f64 = 0.85;

/// Relative drift allowed when the mesh is refined once.
pub const CACCIOPPOLI_REFINEMENT_TOL: f64 = 0.05;
pub const HARNACK_REFINEMENT_TOL: f64 = 0.10;

/// Near-interface Holder stratum against the global seminorm.
pub const NEAR_INTERFACE_FACTOR: f64 = 1.1;

/// Empirical Caccioppoli constants `(case, s, t, constant)`. Each value is
/// the constant measured at the shipped resolution, raised by the allowed
/// refinement drift.
pub const CACCIOPPOLI: &[(&str, f64, f64, f64)] = &[
    ("disc_two_phase", 0.5, 0.75, 0.01808),
    ("disc_two_phase", 0.5, 1.0, 0.03177),
    ("disc_two_phase", 0.6, 0.9, 0.05325),
    ("disc_p3", 0.5, 0.75, 0.01233),
    ("disc_p3", 0.5, 1.0, 0.05766),
    ("disc_p3", 0.6, 0.9, 0.03255),
    ("interval_oracle", 0.5, 0.75, 0.0227),
    ("interval_oracle", 0.5, 1.0, 0.05307),
    ("interval_oracle", 0.6, 0.9, 0.03521),
];

/// Harnack ratio ceilings `(case, ratio)`, measured and raised by the
/// allowed refinement drift.
pub const HARNACK: &[(&str, f64)] = &[("interval_oracle", 1.566)];

pub fn caccioppoli_constant(case: &str, s: f64, t: f64) -> Option<f64> {
    CACCIOPPOLI.iter().find(|r| r.0 == case && r.1 == s && r.2 == t).map(|r| r.3)
}

pub fn harnack_ceiling(case: &str) -> Option<f64> {
    HARNACK.iter().find(|r| r.0 == case).map(|r| r.1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::diagnostics::CACCIOPPOLI_RADII;

    #[test]
    fn every_case_covers_every_radius_pair() {
        for case in ["disc_two_phase", "disc_p3", "interval_oracle"] {
            for (s, t) in CACCIOPPOLI_RADII {
                assert!(caccioppoli_constant(case, s, t).is_some_and(|c| c > 0.0), "{case} {s} {t}");
            }
        }
        assert!(caccioppoli_constant("unknown", 0.5, 0.75).is_none());
        assert!(harnack_ceiling("interval_oracle").is_some_and(|c| c >= 1.0));
    }
}
