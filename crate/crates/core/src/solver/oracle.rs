use crate::error::{Error, Result};
use crate::problem::DiscreteField;

/// Exact solution of the two-phase problem with constant coefficients on
/// (-1, 1), `f = 0`, `u(-1) = -1`, `u(1) = 1`: linear on each side of the
/// interface `x0` with continuous flux `A |u'|^(p-2) u'`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Oracle1d {
    pub x0: f64,
    pub slope_plus: f64,
    pub slope_minus: f64,
}

impl Oracle1d {
    pub fn eval(&self, x: f64) -> f64 {
        if x > self.x0 {
            self.slope_plus * (x - self.x0)
        } else {
            self.slope_minus * (x - self.x0)
        }
    }

    /// `|A_plus slope_plus^(p-1) - A_minus slope_minus^(p-1)|`.
    pub fn flux_jump(&self, a_plus: f64, a_minus: f64, p: f64) -> f64 {
        (a_plus * self.slope_plus.powf(p - 1.0) - a_minus * self.slope_minus.powf(p - 1.0)).abs()
    }
}

pub fn solve_oracle_1d(a_plus: f64, a_minus: f64, p: f64) -> Result<Oracle1d> {
    if !(a_plus > 0.0 && a_minus > 0.0 && p > 1.0) || !(a_plus * a_minus * p).is_finite() {
        return Err(Error::InvalidParameter(format!(
            "oracle needs positive coefficients and p > 1 (got {a_plus}, {a_minus}, {p})"
        )));
    }
    let rho = (a_minus / a_plus).powf(1.0 / (p - 1.0));
    let x0 = (rho - 1.0) / (rho + 1.0);
    Ok(Oracle1d { x0, slope_plus: 1.0 / (1.0 - x0), slope_minus: 1.0 / (1.0 + x0) })
}

/// First crossing from `u <= 0` to `u > 0` along a 1D mesh, by linear
/// interpolation inside the sign-change element.
pub fn interface_crossing(u: &DiscreteField) -> Option<f64> {
    let mesh = u.mesh();
    if mesh.dim() != 1 {
        return None;
    }
    let v = u.values();
    (0..mesh.n_elements()).find_map(|e| {
        let c = mesh.element(e);
        let (mut i, mut j) = (c[0], c[1]);
        if mesh.node(i)[0] > mesh.node(j)[0] {
            std::mem::swap(&mut i, &mut j);
        }
        (v[i] <= 0.0 && v[j] > 0.0).then(|| {
            let (a, b) = (mesh.node(i)[0], mesh.node(j)[0]);
            a + (b - a) * (-v[i]) / (v[j] - v[i])
        })
    })
}
