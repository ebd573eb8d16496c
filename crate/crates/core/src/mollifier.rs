//! Piecewise-linear sign smoothing of width `eps` and its primitives.
//!
//! `psi_plus` ramps from 0 at `t = 0` to 1 at `t = eps`; `Psi_plus` is its
//! primitive vanishing on `t <= 0`, and `Psi_minus = Psi_plus - t`, so that
//! `Psi_plus(u) - Psi_minus(u) = u` splits a field into two phases.

use crate::error::{Error, Result};

fn check_eps(eps: f64) -> Result<()> {
    if eps > 0.0 && eps.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("eps must be positive (got {eps})")))
    }
}

fn check_p(p: f64) -> Result<()> {
    if p > 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("p must exceed 1 (got {p})")))
    }
}

pub fn psi_plus(eps: f64, t: f64) -> Result<f64> {
    check_eps(eps)?;
    Ok(ramp(eps, t))
}

pub fn psi_minus(eps: f64, t: f64) -> Result<f64> {
    check_eps(eps)?;
    Ok(1.0 - ramp(eps, t))
}

#[allow(non_snake_case)]
pub fn Psi_plus(eps: f64, t: f64) -> Result<f64> {
    check_eps(eps)?;
    Ok(primitive(eps, t))
}

#[allow(non_snake_case)]
pub fn Psi_minus(eps: f64, t: f64) -> Result<f64> {
    check_eps(eps)?;
    Ok(primitive(eps, t) - t)
}

/// `A_plus psi_plus^(p-1) + A_minus psi_minus^(p-1)`.
pub fn a_eps(eps: f64, a_plus: f64, a_minus: f64, p: f64, s: f64) -> Result<f64> {
    check_eps(eps)?;
    check_p(p)?;
    Ok(blend_coefficient(eps, a_plus, a_minus, p, s))
}

/// `f_plus psi_plus + f_minus psi_minus`.
pub fn f_eps(eps: f64, f_plus: f64, f_minus: f64, s: f64) -> Result<f64> {
    check_eps(eps)?;
    Ok(blend_source(eps, f_plus, f_minus, s))
}

// Unchecked kernels; callers have validated eps and p.

pub(crate) fn ramp(eps: f64, t: f64) -> f64 {
    (t / eps).clamp(0.0, 1.0)
}

pub(crate) fn primitive(eps: f64, t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else if t < eps {
        t * t / (2.0 * eps)
    } else {
        t - 0.5 * eps
    }
}

pub(crate) fn blend_coefficient(eps: f64, a_plus: f64, a_minus: f64, p: f64, s: f64) -> f64 {
    let w = ramp(eps, s);
    let (wp, wm) = if p == 2.0 { (w, 1.0 - w) } else { (w.powf(p - 1.0), (1.0 - w).powf(p - 1.0)) };
    a_plus * wp + a_minus * wm
}

pub(crate) fn blend_source(eps: f64, f_plus: f64, f_minus: f64, s: f64) -> f64 {
    let w = ramp(eps, s);
    f_plus * w + f_minus * (1.0 - w)
}

/// Smoothing family of fixed width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MollifierFamily {
    eps: f64,
}

impl MollifierFamily {
    pub fn new(eps: f64) -> Result<Self> {
        check_eps(eps)?;
        Ok(MollifierFamily { eps })
    }

    pub fn eps(&self) -> f64 {
        self.eps
    }

    pub fn psi_plus(&self, t: f64) -> f64 {
        ramp(self.eps, t)
    }

    pub fn psi_minus(&self, t: f64) -> f64 {
        1.0 - ramp(self.eps, t)
    }

    #[allow(non_snake_case)]
    pub fn Psi_plus(&self, t: f64) -> f64 {
        primitive(self.eps, t)
    }

    #[allow(non_snake_case)]
    pub fn Psi_minus(&self, t: f64) -> f64 {
        primitive(self.eps, t) - t
    }

    pub fn a_eps(&self, a_plus: f64, a_minus: f64, p: f64, s: f64) -> f64 {
        blend_coefficient(self.eps, a_plus, a_minus, p, s)
    }

    pub fn f_eps(&self, f_plus: f64, f_minus: f64, s: f64) -> f64 {
        blend_source(self.eps, f_plus, f_minus, s)
    }
}

pub const DEFAULT_EPS0: f64 = 0.5;
pub const DEFAULT_LEVELS: usize = 8;

/// `eps0 * 2^-j` for `j = 0..levels`.
pub fn geometric_schedule(eps0: f64, levels: usize) -> Result<Vec<f64>> {
    check_eps(eps0)?;
    Ok((0..levels).map(|j| eps0 * 0.5f64.powi(j as i32)).collect())
}

/// Halvings of `eps0` strictly above `eps`, then `eps` itself.
pub fn schedule_down_to(eps0: f64, eps: f64) -> Result<Vec<f64>> {
    check_eps(eps0)?;
    check_eps(eps)?;
    let mut out = Vec::new();
    let mut e = eps0;
    while e > eps {
        out.push(e);
        e *= 0.5;
    }
    out.push(eps);
    Ok(out)
}
