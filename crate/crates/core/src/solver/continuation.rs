use std::sync::Arc;

use serde::Serialize;

use super::{solve_regularized, SolveOptions, SolveReport};
use crate::error::{Error, Result};
use crate::mesh::Mesh;
use crate::mollifier::MollifierFamily;
use crate::problem::{DiscreteField, ProblemSpec};
use crate::quadrature::fixed_rule;

#[derive(Debug, Clone, Serialize)]
pub struct ContinuationReport {
    pub eps_values: Vec<f64>,
    #[serde(skip)]
    pub fields: Vec<DiscreteField>,
    pub reports: Vec<SolveReport>,
    /// `||u_j - u_{j+1}||_{L^p}`, one entry per consecutive pair of levels.
    pub cauchy_gaps: Vec<f64>,
    /// `max |u - (U_plus - U_minus)|` per level.
    pub split_checks: Vec<f64>,
    /// `max |U_plus - u^+|` per level.
    pub plus_part_gaps: Vec<f64>,
    pub grad_norms: Vec<f64>,
    /// `2 (1 + 1e-6)` times the largest gradient norm of the first two levels.
    pub grad_bound: f64,
    pub grad_bound_ok: bool,
}

/// `U_plus = Psi_plus(u)`, `U_minus = Psi_minus(u)` nodewise.
pub fn split_fields(eps: f64, u: &DiscreteField) -> Result<(DiscreteField, DiscreteField)> {
    let m = MollifierFamily::new(eps)?;
    let plus: Vec<f64> = u.values().iter().map(|&v| m.Psi_plus(v)).collect();
    let minus: Vec<f64> = u.values().iter().zip(&plus).map(|(&v, &up)| up - v).collect();
    Ok((u.with_values(plus)?, u.with_values(minus)?))
}

/// `||u - v||_{L^p}` of the P1 difference with the fixed element rule.
pub fn lp_distance(mesh: &Mesh, u: &[f64], v: &[f64], p: f64) -> Result<f64> {
    if u.len() != mesh.n_nodes() || v.len() != mesh.n_nodes() {
        return Err(Error::FieldLength { expected: mesh.n_nodes(), got: u.len().min(v.len()) });
    }
    let mut s = 0.0;
    for e in 0..mesh.n_elements() {
        let c = mesh.element(e);
        for q in fixed_rule(mesh, e) {
            let d: f64 = c.iter().zip(&q.bary).map(|(&i, &l)| l * (u[i] - v[i])).sum();
            s += q.weight * d.abs().powf(p);
        }
    }
    Ok(s.powf(1.0 / p))
}

/// Solves along a strictly decreasing schedule, each level warm-started from
/// the previous one.
pub fn epsilon_continuation(
    spec: &ProblemSpec,
    mesh: &Arc<Mesh>,
    schedule: &[f64],
    opts: &SolveOptions,
) -> Result<ContinuationReport> {
    if schedule.is_empty() {
        return Err(Error::InvalidParameter("empty eps schedule".into()));
    }
    if schedule.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::InvalidParameter("eps schedule must be strictly decreasing".into()));
    }
    let mut fields: Vec<DiscreteField> = Vec::with_capacity(schedule.len());
    let mut reports = Vec::with_capacity(schedule.len());
    let mut split_checks = Vec::new();
    let mut plus_part_gaps = Vec::new();
    for (level, &eps) in schedule.iter().enumerate() {
        let (u, rep) = solve_regularized(spec, mesh, eps, opts, fields.last())
            .map_err(|e| Error::ContinuationLevel { level, eps, source: Box::new(e) })?;
        let (up, um) = split_fields(eps, &u)?;
        let mut split: f64 = 0.0;
        let mut plus: f64 = 0.0;
        for ((&v, &a), &b) in u.values().iter().zip(up.values()).zip(um.values()) {
            split = split.max((v - (a - b)).abs());
            plus = plus.max((a - v.max(0.0)).abs());
        }
        split_checks.push(split);
        plus_part_gaps.push(plus);
        fields.push(u);
        reports.push(rep);
    }
    let cauchy_gaps = fields
        .windows(2)
        .map(|w| lp_distance(mesh, w[0].values(), w[1].values(), spec.p))
        .collect::<Result<Vec<_>>>()?;
    let grad_norms: Vec<f64> = reports.iter().map(|r| r.grad_norm).collect();
    let grad_bound = 2.0 * (1.0 + 1e-6) * grad_norms.iter().take(2).fold(0.0f64, |m, &g| m.max(g));
    let grad_bound_ok = grad_norms.iter().all(|&g| g <= grad_bound);
    Ok(ContinuationReport {
        eps_values: schedule.to_vec(),
        fields,
        reports,
        cauchy_gaps,
        split_checks,
        plus_part_gaps,
        grad_norms,
        grad_bound,
        grad_bound_ok,
    })
}
