use serde::Serialize;

use super::source_norm;
use crate::error::{Error, Result};
use crate::mesh::{dist, Ball};
use crate::problem::{DiscreteField, ProblemSpec};
use crate::tab::{holder_quotient, sample_pairs, SamplingPlan};

/// Holder quotient over the sampled pairs whose nearer endpoint lies at
/// free-boundary distance in `[lower, upper)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HolderStratum {
    pub lower: f64,
    pub upper: f64,
    pub pairs: usize,
    pub seminorm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HolderReport {
    pub alpha: f64,
    pub radius: f64,
    /// Bands `[0, R0/8)`, `[R0/8, R0)`, `[R0, inf)`.
    pub strata: Vec<HolderStratum>,
    /// Quotient over all sampled pairs in `B_r`.
    pub seminorm: f64,
    pub sup_norm: f64,
    /// `||f(x, u)||_{L^N}` over the domain.
    pub source_norm: f64,
    /// `[u]_alpha (1 - r)^alpha / (||u||_inf + ||F||^(1/(p-1)))`.
    pub quotient: f64,
}

/// Free-boundary distance of every node: zero where `u` vanishes, else the
/// distance to the nearest node of opposite or zero sign, or the mesh
/// diameter when there is none.
pub fn node_distances(u: &DiscreteField) -> Vec<f64> {
    let mesh = u.mesh();
    let v = u.values();
    let (mut pos, mut nonpos, mut nonneg) = (Vec::new(), Vec::new(), Vec::new());
    for (i, &x) in v.iter().enumerate() {
        if x > 0.0 {
            pos.push(i);
        }
        if x <= 0.0 {
            nonpos.push(i);
        }
        if x >= 0.0 {
            nonneg.push(i);
        }
    }
    let nearest = |i: usize, set: &[usize]| {
        let d = set.iter().map(|&j| dist(&mesh.node(i), &mesh.node(j))).fold(f64::INFINITY, f64::min);
        if d.is_finite() {
            d
        } else {
            mesh.diameter()
        }
    };
    v.iter()
        .enumerate()
        .map(|(i, &x)| if x == 0.0 { 0.0 } else if x > 0.0 { nearest(i, &nonpos) } else { nearest(i, &nonneg) })
        .collect()
}

pub fn holder_report(
    u: &DiscreteField,
    spec: &ProblemSpec,
    alpha: f64,
    r: f64,
    r0: f64,
    plan: &SamplingPlan,
) -> Result<HolderReport> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::InvalidParameter(format!("r must lie in (0, 1) (got {r})")));
    }
    if !(r0 > 0.0) {
        return Err(Error::InvalidParameter(format!("R0 must be positive (got {r0})")));
    }
    if !(alpha > 0.0 && alpha <= 1.0) {
        return Err(Error::InvalidParameter(format!("alpha must lie in (0, 1] (got {alpha})")));
    }
    let mesh = u.mesh();
    let region = Ball::new(spec.domain.center(), r);
    let pairs = sample_pairs(u, &region, plan)?;
    let d = node_distances(u);
    let bands = [(0.0, r0 / 8.0), (r0 / 8.0, r0), (r0, f64::INFINITY)];
    let strata = bands
        .iter()
        .map(|&(lower, upper)| {
            let sel: Vec<(usize, usize)> =
                pairs.iter().copied().filter(|&(i, j)| (lower..upper).contains(&d[i].min(d[j]))).collect();
            HolderStratum { lower, upper, pairs: sel.len(), seminorm: holder_quotient(mesh, u.values(), alpha, &sel) }
        })
        .collect();
    let seminorm = holder_quotient(mesh, u.values(), alpha, &pairs);
    let sup_norm = u.max_abs();
    let f = source_norm(spec, u, None);
    let denom = sup_norm + f.powf(1.0 / (spec.p - 1.0));
    let numer = seminorm * (1.0 - r).powf(alpha);
    let quotient = if numer == 0.0 { 0.0 } else { numer / denom };
    Ok(HolderReport { alpha, radius: r, strata, seminorm, sup_norm, source_norm: f, quotient })
}
