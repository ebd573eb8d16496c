//! The phase-rescaling map `T_{a,b}(v) = a v^+ - b v^-`, its identities,
//! sampled Holder seminorms, the monotonicity gap of the `p`-flux and the
//! regular profile of the frozen-coefficient limit problem.

use std::sync::Arc;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::{dist, norm, zero_level_points, Ball, Mesh, Point};
use crate::problem::{p_flux, DiscreteField, DomainDescriptor, DomainKind, ProblemSpec, ScalarField};
use crate::solver::{solve_single_phase, SolveOptions, SolveReport};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TabParams {
    a: f64,
    b: f64,
}

impl TabParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if a > 0.0 && b > 0.0 && a.is_finite() && b.is_finite() {
            Ok(TabParams { a, b })
        } else {
            Err(Error::InvalidParameter(format!("T_(a,b) needs a, b > 0 (got {a}, {b})")))
        }
    }

    /// `a = A_plus^(1/(p-1))`, `b = A_minus^(1/(p-1))`.
    pub fn from_coefficients(a_plus: f64, a_minus: f64, p: f64) -> Result<Self> {
        if !(p > 1.0) {
            return Err(Error::InvalidParameter(format!("p must exceed 1 (got {p})")));
        }
        Self::new(a_plus.powf(1.0 / (p - 1.0)), a_minus.powf(1.0 / (p - 1.0)))
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn b(&self) -> f64 {
        self.b
    }

    pub fn apply(&self, v: f64) -> f64 {
        if v > 0.0 {
            self.a * v
        } else {
            self.b * v
        }
    }

    /// Inverse map, `T_{1/a,1/b}`. Division rather than multiplication by
    /// the reciprocal keeps the round trip within one ulp.
    pub fn invert(&self, v: f64) -> f64 {
        if v > 0.0 {
            v / self.a
        } else {
            v / self.b
        }
    }
}

fn map_field(u: &DiscreteField, f: impl Fn(f64) -> f64) -> DiscreteField {
    DiscreteField::from_raw(u.mesh().clone(), u.values().iter().map(|&v| f(v)).collect())
}

pub fn apply_tab(params: &TabParams, u: &DiscreteField) -> DiscreteField {
    map_field(u, |v| params.apply(v))
}

pub fn invert_tab(params: &TabParams, v: &DiscreteField) -> DiscreteField {
    map_field(v, |x| params.invert(x))
}

#[derive(Debug, Clone, PartialEq)]
pub struct GradientIdentityGap {
    /// Largest gap over sign-pure elements.
    pub max_gap: f64,
    /// Elements with nodal values of both strict signs.
    pub straddling: Vec<usize>,
}

/// `max_e | |grad T u|^q - (|grad (a u^+)|^q + |grad (b u^-)|^q) |` over
/// elements whose nodal values do not take both strict signs.
pub fn tab_gradient_identity_gap(params: &TabParams, u: &DiscreteField, q: f64) -> Result<GradientIdentityGap> {
    if !(q > 0.0) || !q.is_finite() {
        return Err(Error::InvalidParameter(format!("q must be positive (got {q})")));
    }
    let mesh = u.mesh();
    let v = u.values();
    let tu: Vec<f64> = v.iter().map(|&x| params.apply(x)).collect();
    let plus: Vec<f64> = v.iter().map(|&x| params.a * x.max(0.0)).collect();
    let minus: Vec<f64> = v.iter().map(|&x| params.b * (-x).max(0.0)).collect();
    let mut straddling = Vec::new();
    let mut max_gap: Option<f64> = None;
    for e in 0..mesh.n_elements() {
        let c = mesh.element(e);
        let lo = c.iter().map(|&i| v[i]).fold(f64::INFINITY, f64::min);
        let hi = c.iter().map(|&i| v[i]).fold(f64::NEG_INFINITY, f64::max);
        if lo < 0.0 && hi > 0.0 {
            straddling.push(e);
            continue;
        }
        let pw = |vals: &[f64]| {
            let n = norm(&mesh.gradient(e, vals));
            if n == 0.0 {
                0.0
            } else {
                n.powf(q)
            }
        };
        let gap = (pw(&tu) - (pw(&plus) + pw(&minus))).abs();
        max_gap = Some(max_gap.map_or(gap, |m: f64| m.max(gap)));
    }
    let max_gap = max_gap.ok_or(Error::NoSignPureElement)?;
    Ok(GradientIdentityGap { max_gap, straddling })
}

/// Node pairs for Holder quotients: `n_pairs` seeded uniform random pairs
/// from the region, then every pair of region nodes lying within
/// `band_factor * h_mesh` of the zero level set.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SamplingPlan {
    pub seed: u64,
    pub n_pairs: usize,
    pub band_factor: f64,
}

impl Default for SamplingPlan {
    fn default() -> Self {
        SamplingPlan { seed: 0, n_pairs: 20_000, band_factor: 3.0 }
    }
}

impl SamplingPlan {
    pub fn with_seed(seed: u64) -> Self {
        SamplingPlan { seed, ..Default::default() }
    }
}

/// Nodes within `band` of the zero level set of `values`.
pub fn band_nodes(mesh: &Mesh, values: &[f64], band: f64, candidates: &[usize]) -> Vec<usize> {
    let zeros = zero_level_points(mesh, values);
    if zeros.is_empty() {
        return Vec::new();
    }
    candidates.iter().copied().filter(|&i| zeros.iter().any(|z| dist(z, &mesh.node(i)) <= band)).collect()
}

pub fn sample_pairs(u: &DiscreteField, region: &Ball, plan: &SamplingPlan) -> Result<Vec<(usize, usize)>> {
    let mesh = u.mesh();
    let nodes: Vec<usize> = crate::mesh::nodes_in_ball(mesh, region).collect();
    if nodes.is_empty() {
        return Err(Error::EmptyRegion);
    }
    let mut pairs = Vec::with_capacity(plan.n_pairs);
    if nodes.len() >= 2 {
        let mut rng = ChaCha8Rng::seed_from_u64(plan.seed);
        for _ in 0..plan.n_pairs {
            let i = rng.gen_range(0..nodes.len());
            let mut j = rng.gen_range(0..nodes.len() - 1);
            if j >= i {
                j += 1;
            }
            pairs.push((nodes[i], nodes[j]));
        }
    }
    let band = band_nodes(mesh, u.values(), plan.band_factor * mesh.h_mesh(), &nodes);
    for (k, &i) in band.iter().enumerate() {
        for &j in &band[k + 1..] {
            pairs.push((i, j));
        }
    }
    Ok(pairs)
}

/// `max |u(x) - u(y)| / |x - y|^alpha` over `pairs`.
pub fn holder_quotient(mesh: &Mesh, values: &[f64], alpha: f64, pairs: &[(usize, usize)]) -> f64 {
    pairs
        .iter()
        .filter_map(|&(i, j)| {
            let d = dist(&mesh.node(i), &mesh.node(j));
            (d > 0.0).then(|| (values[i] - values[j]).abs() / d.powf(alpha))
        })
        .fold(0.0, f64::max)
}

fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha <= 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParameter(format!("alpha must lie in (0, 1] (got {alpha})")))
    }
}

pub fn holder_seminorm(u: &DiscreteField, alpha: f64, region: &Ball, plan: &SamplingPlan) -> Result<f64> {
    check_alpha(alpha)?;
    let pairs = sample_pairs(u, region, plan)?;
    Ok(holder_quotient(u.mesh(), u.values(), alpha, &pairs))
}

/// `[u]_alpha` against `[T u]_alpha / min(a, b)` on one pair sample.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct HolderTransfer {
    pub lhs: f64,
    pub rhs: f64,
}

impl HolderTransfer {
    pub fn holds(&self) -> bool {
        self.lhs <= self.rhs + 1e-12 * self.rhs.max(1.0)
    }
}

pub fn check_holder_transfer(
    params: &TabParams,
    u: &DiscreteField,
    alpha: f64,
    region: &Ball,
    plan: &SamplingPlan,
) -> Result<HolderTransfer> {
    check_alpha(alpha)?;
    let pairs = sample_pairs(u, region, plan)?;
    let tu = apply_tab(params, u);
    let lhs = holder_quotient(u.mesh(), u.values(), alpha, &pairs);
    let rhs = holder_quotient(u.mesh(), tu.values(), alpha, &pairs) / params.a.min(params.b);
    Ok(HolderTransfer { lhs, rhs })
}

/// `(|v1|^(p-2) v1 - |v2|^(p-2) v2) . (v1 - v2)`.
pub fn monotonicity_gap(v1: &Point, v2: &Point, p: f64) -> f64 {
    let (f1, f2) = (p_flux(v1, p), p_flux(v2, p));
    (f1[0] - f2[0]) * (v1[0] - v2[0]) + (f1[1] - f2[1]) * (v1[1] - v2[1])
}

/// Largest `c` with `monotonicity_gap(v1, v2, p) >= c |v1 - v2|^p` for all
/// pairs: `2^(2-p)` for `p >= 2`, attained at `v2 = -v1`. No such constant
/// exists for `p < 2`.
pub fn monotonicity_constant(p: f64) -> Option<f64> {
    (p >= 2.0).then(|| 2f64.powf(2.0 - p))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ConvergenceWitness {
    /// The gap of the last element of the sequence is below `gap_tol`.
    pub gap_small: bool,
    /// `|v_k - v|` of the last element is below `diff_tol * max(1, |v|)`.
    pub diff_small: bool,
}

impl ConvergenceWitness {
    /// A small gap forces a small difference.
    pub fn implication_holds(&self) -> bool {
        !self.gap_small || self.diff_small
    }
}

pub fn gradient_convergence_witness(vk: &[Point], v: &Point, p: f64, gap_tol: f64, diff_tol: f64) -> ConvergenceWitness {
    let Some(last) = vk.last() else {
        return ConvergenceWitness { gap_small: true, diff_small: true };
    };
    let gap = monotonicity_gap(last, v, p);
    let d = dist(last, v);
    ConvergenceWitness { gap_small: gap < gap_tol, diff_small: d < diff_tol * norm(v).max(1.0) }
}

#[derive(Debug, Clone)]
pub struct RegularProfile {
    pub h: DiscreteField,
    pub params: TabParams,
    pub report: SolveReport,
}

/// Regular profile of the problem with coefficients frozen at `A_plus(x0)`,
/// `A_minus(x0)`: solves the single-phase `p`-Laplace problem for
/// `H = T_{a,b}(h)` with boundary values `T_{a,b}(boundary)` and returns
/// `h = T_{a,b}^{-1}(H)`. Only the boundary entries of `boundary` are read.
///
/// The inner solve runs at `tol_picard <= 1e-12`, `linear_tol <= 1e-13`.
pub fn make_regular_profile(
    mesh: &Arc<Mesh>,
    a_plus0: f64,
    a_minus0: f64,
    p: f64,
    boundary: &[f64],
    opts: &SolveOptions,
) -> Result<RegularProfile> {
    if boundary.len() != mesh.n_nodes() {
        return Err(Error::FieldLength { expected: mesh.n_nodes(), got: boundary.len() });
    }
    let params = TabParams::from_coefficients(a_plus0, a_minus0, p)?;
    let g: Vec<f64> = boundary.iter().map(|&v| params.apply(v)).collect();
    let kind = if mesh.dim() == 1 { DomainKind::Interval } else { DomainKind::UnitDisc };
    let spec = ProblemSpec::constant(p, 0.5, DomainDescriptor::new(kind, 0), 1.0, 1.0).with_boundary(ScalarField::nodal(g));
    let inner = SolveOptions { tol_picard: opts.tol_picard.min(1e-12), linear_tol: opts.linear_tol.min(1e-13), ..*opts };
    let (big_h, report) = solve_single_phase(&spec, mesh, &inner, None)?;
    Ok(RegularProfile { h: invert_tab(&params, &big_h), params, report })
}
