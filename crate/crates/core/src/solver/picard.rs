use std::sync::Arc;

use super::{SolveOptions, SolveReport, ENERGY_INCREASE_PATIENCE, MIN_DAMPING, OSCILLATION_PATIENCE, REVERSAL_SHRINK, STALL_PATIENCE};
use crate::error::{Error, Result};
use crate::mesh::{lp_gradient_norm, norm, solve_spd, CsrMatrix, Mesh, SparseSPDSystem, StiffnessPattern, W_FLOOR};
use crate::mollifier::{blend_coefficient, blend_source};
use crate::problem::{validate_spec, DiscreteField, ProblemSpec};
use crate::quadrature::{phase_rule, QuadPoint};

/// Element integrals of the smoothed coefficient and load, split along the
/// level sets `u = 0` and `u = eps` of the current iterate.
pub(crate) struct PhaseIntegrator<'a> {
    mesh: &'a Mesh,
    spec: &'a ProblemSpec,
    eps: f64,
    a_const: Option<(f64, f64)>,
    f_const: Option<(f64, f64)>,
    single_phase: bool,
    pts: Vec<QuadPoint>,
}

impl<'a> PhaseIntegrator<'a> {
    pub(crate) fn new(mesh: &'a Mesh, spec: &'a ProblemSpec, eps: f64) -> Self {
        let pair = |a: &crate::problem::ScalarField, b: &crate::problem::ScalarField| Some((a.is_const()?, b.is_const()?));
        PhaseIntegrator {
            mesh,
            spec,
            eps,
            a_const: pair(&spec.a_plus, &spec.a_minus),
            f_const: pair(&spec.f_plus, &spec.f_minus),
            single_phase: false,
            pts: Vec::with_capacity(32),
        }
    }

    /// Integrates `A_plus` and `f_plus` with no phase dependence.
    pub(crate) fn single_phase(mut self) -> Self {
        self.single_phase = true;
        self
    }

    /// `(int_e a_eps(x, u), [int_e f_eps(x, u) phi_a])` for the local nodes `a`.
    pub(crate) fn element(&mut self, e: usize, u: &[f64]) -> (f64, [f64; 3]) {
        let (mesh, spec, eps) = (self.mesh, self.spec, self.eps);
        let c = mesh.element(e);
        let k = c.len();
        let mut loc = [0.0; 3];
        for a in 0..k {
            loc[a] = u[c[a]];
        }
        let mut pts = std::mem::take(&mut self.pts);
        let single = self.single_phase;
        // Values above eps select the plain element rule.
        let rule_vals = if single { [2.0 * eps; 3] } else { loc };
        phase_rule(mesh.dim(), mesh.measure(e), &rule_vals[..k], eps, &mut pts);
        let mut a_int = 0.0;
        let mut load = [0.0; 3];
        for q in &pts {
            let uq: f64 = (0..k).map(|a| q.bary[a] * loc[a]).sum();
            let (ap, am) = self
                .a_const
                .unwrap_or_else(|| (spec.a_plus.at(mesh, e, &q.bary), spec.a_minus.at(mesh, e, &q.bary)));
            a_int += q.weight * if single { ap } else { blend_coefficient(eps, ap, am, spec.p, uq) };
            let (fp, fm) = self
                .f_const
                .unwrap_or_else(|| (spec.f_plus.at(mesh, e, &q.bary), spec.f_minus.at(mesh, e, &q.bary)));
            let f = if single { fp } else { blend_source(eps, fp, fm, uq) };
            if f != 0.0 {
                for a in 0..k {
                    load[a] += q.weight * f * q.bary[a];
                }
            }
        }
        self.pts = pts;
        (a_int, load)
    }
}

struct State {
    matrix: CsrMatrix,
    rhs: Vec<f64>,
    energy: f64,
}

fn gradient_factor(grad_sq: f64, p: f64, delta: f64) -> f64 {
    if p == 2.0 {
        return 1.0;
    }
    let f = (grad_sq + delta * delta).powf(0.5 * (p - 2.0));
    if f.is_finite() {
        f
    } else {
        1.0 / W_FLOOR
    }
}

/// Stiffness and load linearized at `u`. With `linear` set the gradient
/// factor is dropped, giving the `p = 2` operator with the same coefficient.
fn assemble_state(
    integ: &mut PhaseIntegrator,
    pattern: &StiffnessPattern,
    u: &[f64],
    delta: f64,
    linear: bool,
) -> Result<State> {
    let mesh = integ.mesh;
    let p = integ.spec.p;
    let mut weights = Vec::with_capacity(mesh.n_elements());
    let mut rhs = vec![0.0; mesh.n_nodes()];
    let mut energy = 0.0;
    for e in 0..mesh.n_elements() {
        let (a_int, load) = integ.element(e, u);
        let g = mesh.gradient(e, u);
        let gsq = g[0] * g[0] + g[1] * g[1];
        let factor = if linear { 1.0 } else { gradient_factor(gsq, p, delta) };
        weights.push((a_int / mesh.measure(e) * factor).max(W_FLOOR));
        energy += a_int * gsq.sqrt().powf(p);
        for (a, &i) in mesh.element(e).iter().enumerate() {
            rhs[i] += load[a];
        }
    }
    Ok(State { matrix: pattern.assemble(mesh, &weights)?, rhs, energy })
}

/// `max_free |K(u) u - b(u)| / (||K(u)|| ||u|| + ||b(u)||)`.
fn scaled_residual(state: &State, u: &[f64], fixed: &[bool]) -> f64 {
    let mut ku = vec![0.0; u.len()];
    state.matrix.mul_vec(u, &mut ku);
    let (mut r, mut b) = (0.0f64, 0.0f64);
    for i in 0..u.len() {
        if !fixed[i] {
            r = r.max((ku[i] - state.rhs[i]).abs());
            b = b.max(state.rhs[i].abs());
        }
    }
    let scale = state.matrix.norm_inf() * max_abs(u) + b;
    if scale == 0.0 {
        0.0
    } else {
        r / scale
    }
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn check_inputs(spec: &ProblemSpec, mesh: &Mesh, eps: f64) -> Result<()> {
    let violations = validate_spec(spec, mesh);
    if !violations.is_empty() {
        return Err(Error::Validation(violations));
    }
    if !(eps > 0.0) || !eps.is_finite() {
        return Err(Error::InvalidParameter(format!("eps must be positive (got {eps})")));
    }
    Ok(())
}

/// Solves the smoothed problem with coefficient `a_eps(x, u)` and load
/// `f_eps(x, u)` by damped Picard iteration, `u = g` on the boundary.
///
/// Without a warm start the iteration begins from `g` on the boundary and 0
/// inside, and its first step is the undamped linear (`p = 2`) solve.
pub fn solve_regularized(
    spec: &ProblemSpec,
    mesh: &Arc<Mesh>,
    eps: f64,
    opts: &SolveOptions,
    warm_start: Option<&DiscreteField>,
) -> Result<(DiscreteField, SolveReport)> {
    check_inputs(spec, mesh, eps)?;
    picard(spec, mesh, PhaseIntegrator::new(mesh, spec, eps), opts, warm_start)
}

/// Solves `-div(A_plus(x) |grad u|^(p-2) grad u) = f_plus(x)`, `u = g` on the
/// boundary, by the same iteration. The minus-phase data are ignored. The
/// report carries `eps = 0`.
pub fn solve_single_phase(
    spec: &ProblemSpec,
    mesh: &Arc<Mesh>,
    opts: &SolveOptions,
    warm_start: Option<&DiscreteField>,
) -> Result<(DiscreteField, SolveReport)> {
    check_inputs(spec, mesh, 1.0)?;
    let mut report = picard(spec, mesh, PhaseIntegrator::new(mesh, spec, 1.0).single_phase(), opts, warm_start)?;
    report.1.eps = 0.0;
    Ok(report)
}

fn picard(
    spec: &ProblemSpec,
    mesh: &Arc<Mesh>,
    mut integ: PhaseIntegrator,
    opts: &SolveOptions,
    warm_start: Option<&DiscreteField>,
) -> Result<(DiscreteField, SolveReport)> {
    let eps = integ.eps;
    opts.validate()?;
    let n = mesh.n_nodes();
    let mut u = match warm_start {
        Some(w) if w.values().len() != n => return Err(Error::FieldLength { expected: n, got: w.values().len() }),
        Some(w) => w.values().to_vec(),
        None => vec![0.0; n],
    };
    let mut fixed = vec![false; n];
    let constrained: Vec<(usize, f64)> = mesh.boundary_nodes().iter().map(|&i| (i, spec.g.at_node(mesh, i))).collect();
    for &(i, v) in &constrained {
        fixed[i] = true;
        u[i] = v;
    }

    let pattern = StiffnessPattern::new(mesh);
    let delta = opts.grad_reg_delta;
    let linear_start = warm_start.is_none();
    let mut state = assemble_state(&mut integ, &pattern, &u, delta, linear_start)?;

    let mut report = SolveReport {
        eps,
        iterations: 0,
        residual_history: Vec::new(),
        energy_history: Vec::new(),
        grad_norm: f64::NAN,
        converged: false,
        warm_started: warm_start.is_some(),
        experimental: spec.is_experimental(),
        final_damping: opts.damping,
    };
    let mut theta = opts.damping;
    let mut increases = 0usize;
    let (mut best_residual, mut since_best) = (f64::INFINITY, 0usize);
    let (mut prev_update, mut reversals): (Vec<f64>, usize) = (Vec::new(), 0);
    for k in 0..opts.max_picard {
        let system = SparseSPDSystem { matrix: state.matrix, rhs: state.rhs, constrained: constrained.clone() };
        let target = solve_spd(&system, opts.linear_tol, Some(&u))?;
        let step = if k == 0 && linear_start { 1.0 } else { theta };
        let next: Vec<f64> = u.iter().zip(&target).map(|(a, b)| (1.0 - step) * a + step * b).collect();
        let change = u.iter().zip(&next).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        let size = max_abs(&next);
        let rel = if change == 0.0 { 0.0 } else { change / size.max(f64::MIN_POSITIVE) };
        let update: Vec<f64> = next.iter().zip(&u).map(|(a, b)| a - b).collect();
        let turn: f64 = update.iter().zip(&prev_update).map(|(a, b)| a * b).sum();
        let sq = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>();
        let persistent = sq(&update) >= REVERSAL_SHRINK * REVERSAL_SHRINK * sq(&prev_update);
        reversals = if turn < 0.0 && persistent { reversals + 1 } else { 0 };
        prev_update = update;
        u = next;

        state = assemble_state(&mut integ, &pattern, &u, delta, false)?;
        let residual = scaled_residual(&state, &u, &fixed);
        if let Some(&prev) = report.energy_history.last() {
            if state.energy > prev + 1e-14 * prev.abs() {
                increases += 1;
            } else {
                increases = 0;
            }
        }
        if residual < best_residual {
            best_residual = residual;
            since_best = 0;
        } else {
            since_best += 1;
        }
        if increases >= ENERGY_INCREASE_PATIENCE || reversals >= OSCILLATION_PATIENCE || since_best >= STALL_PATIENCE {
            theta = (0.5 * theta).max(MIN_DAMPING);
            increases = 0;
            reversals = 0;
            since_best = 0;
        }
        report.residual_history.push(residual);
        report.energy_history.push(state.energy);
        report.iterations = k + 1;
        report.final_damping = theta;
        if !u.iter().all(|v| v.is_finite()) {
            break;
        }
        if rel < opts.tol_picard && residual <= 10.0 * opts.tol_picard {
            report.converged = true;
            break;
        }
    }
    report.grad_norm = lp_gradient_norm(mesh, &u, spec.p, None);
    if !report.converged {
        return Err(Error::NotConverged { report: Box::new(report) });
    }
    Ok((DiscreteField::new(mesh.clone(), u)?, report))
}

/// `int A_eps(x, u) |grad u|^p` with the phase-resolved rule.
pub fn smoothed_energy(spec: &ProblemSpec, u: &DiscreteField, eps: f64) -> Result<f64> {
    let mesh = u.mesh();
    let mut integ = PhaseIntegrator::new(mesh, spec, eps);
    let mut energy = 0.0;
    for e in 0..mesh.n_elements() {
        let (a_int, _) = integ.element(e, u.values());
        energy += a_int * norm(&mesh.gradient(e, u.values())).powf(spec.p);
    }
    Ok(energy)
}

/// Scaled residual of `u` in the discrete smoothed weak form, the quantity
/// the Picard loop drives below `10 * tol_picard`.
pub fn fixed_point_residual(spec: &ProblemSpec, u: &DiscreteField, eps: f64, opts: &SolveOptions) -> Result<f64> {
    let mesh = u.mesh();
    check_inputs(spec, mesh, eps)?;
    let pattern = StiffnessPattern::new(mesh);
    let mut integ = PhaseIntegrator::new(mesh, spec, eps);
    let state = assemble_state(&mut integ, &pattern, u.values(), opts.grad_reg_delta, false)?;
    let fixed: Vec<bool> = (0..mesh.n_nodes()).map(|i| mesh.is_boundary(i)).collect();
    Ok(scaled_residual(&state, u.values(), &fixed))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problem::{weak_residual, hat, DomainDescriptor, DomainKind, ScalarField};
    use crate::solver::solve_oracle_1d;

    fn spec(kind: DomainKind, n: usize, p: f64, ap: f64, am: f64) -> ProblemSpec {
        ProblemSpec::constant(p, 0.2, DomainDescriptor::new(kind, n), ap, am)
    }

    #[test]
    fn linear_data_reproduced_single_phase() {
        for kind in [DomainKind::UnitDisc, DomainKind::UnitSquare] {
            let s = spec(kind, 8, 2.0, 1.0, 1.0).with_boundary(ScalarField::func(|x| 0.5 * x[0] - 2.0 * x[1] + 0.25));
            let mesh = s.build_mesh().unwrap();
            for eps in [0.5, 1e-3] {
                let (u, rep) = solve_regularized(&s, &mesh, eps, &SolveOptions::default(), None).unwrap();
                assert!(rep.converged);
                assert!(rep.iterations <= 2, "{kind:?} {rep:?}");
                for (i, x) in mesh.nodes().iter().enumerate() {
                    assert!((u.values()[i] - (0.5 * x[0] - 2.0 * x[1] + 0.25)).abs() < 1e-8);
                }
            }
        }
    }

    #[test]
    fn p3_single_phase_1d_is_linear_and_smoothed_is_not() {
        let s = spec(DomainKind::Interval, 32, 3.0, 1.0, 1.0).with_boundary(ScalarField::Expr(crate::problem::Builtin::X1));
        let mesh = s.build_mesh().unwrap();
        let (u, rep) = solve_single_phase(&s, &mesh, &SolveOptions::default(), None).unwrap();
        assert!(rep.converged);
        for (i, x) in mesh.nodes().iter().enumerate() {
            assert!((u.values()[i] - x[0]).abs() < 1e-7);
        }
        // The smoothed coefficient psi_plus^2 + psi_minus^2 dips to 1/2 inside
        // the band, so the smoothed solution bends there.
        let (v, _) = solve_regularized(&s, &mesh, 0.1, &SolveOptions::default(), None).unwrap();
        let dev = mesh.nodes().iter().enumerate().map(|(i, x)| (v.values()[i] - x[0]).abs()).fold(0.0, f64::max);
        assert!(dev > 1e-4 && dev < 0.1, "{dev}");
    }

    #[test]
    fn two_phase_1d_matches_oracle() {
        let n = 64;
        let s = spec(DomainKind::Interval, n, 2.0, 4.0, 1.0).with_boundary(ScalarField::Expr(crate::problem::Builtin::X1));
        let mesh = s.build_mesh().unwrap();
        let (u, rep) = solve_regularized(&s, &mesh, 1e-6, &SolveOptions::default(), None).unwrap();
        assert!(rep.converged, "{rep:?}");
        let o = solve_oracle_1d(4.0, 1.0, 2.0).unwrap();
        let h = 2.0 / n as f64;
        for (i, x) in mesh.nodes().iter().enumerate() {
            assert!((u.values()[i] - o.eval(x[0])).abs() <= 2.0 * h);
        }
    }

    #[test]
    fn residual_contract_holds() {
        let s = spec(DomainKind::UnitDisc, 12, 2.0, 2.0, 0.5)
            .with_sources(ScalarField::Const(1.0), ScalarField::Const(-1.0))
            .with_boundary(ScalarField::Expr(crate::problem::Builtin::X1));
        let mesh = s.build_mesh().unwrap();
        let opts = SolveOptions::default();
        let (u, rep) = solve_regularized(&s, &mesh, 0.05, &opts, None).unwrap();
        assert!(rep.final_residual() <= 10.0 * opts.tol_picard);
        let r = fixed_point_residual(&s, &u, 0.05, &opts).unwrap();
        assert!(r <= 10.0 * opts.tol_picard);
        assert!(rep.grad_norm.is_finite());
        assert_eq!(rep.residual_history.len(), rep.iterations);
        assert_eq!(rep.energy_history.len(), rep.iterations);
    }

    #[test]
    fn p3_two_phase_disc_converges() {
        let s = spec(DomainKind::UnitDisc, 10, 3.0, 2.0, 0.5).with_boundary(ScalarField::Expr(crate::problem::Builtin::X1));
        let mesh = s.build_mesh().unwrap();
        let (u, rep) = solve_regularized(&s, &mesh, 0.05, &SolveOptions::default(), None).unwrap();
        assert!(rep.converged);
        // Smoothed solution is close to a weak solution of the sharp problem
        // away from the band; the fixed-rule residual stays small.
        let worst = mesh
            .interior_nodes()
            .map(|i| weak_residual(&s, &u, &hat(&mesh, i)).unwrap().abs())
            .fold(0.0, f64::max);
        assert!(worst.is_finite());
    }

    #[test]
    fn invalid_inputs() {
        let bad = ProblemSpec::constant(2.0, 1.5, DomainDescriptor::new(DomainKind::Interval, 8), 1.0, 1.0);
        let mesh = bad.build_mesh().unwrap();
        assert!(matches!(solve_regularized(&bad, &mesh, 0.1, &SolveOptions::default(), None), Err(Error::Validation(_))));
        let ok = spec(DomainKind::Interval, 8, 2.0, 1.0, 1.0);
        assert!(solve_regularized(&ok, &mesh, 0.0, &SolveOptions::default(), None).is_err());
        let opts = SolveOptions { damping: 0.0, ..Default::default() };
        assert!(solve_regularized(&ok, &mesh, 0.1, &opts, None).is_err());
    }

    #[test]
    fn iteration_cap_reports_progress() {
        let s = spec(DomainKind::UnitDisc, 8, 3.0, 2.0, 0.5).with_boundary(ScalarField::Expr(crate::problem::Builtin::X1));
        let mesh = s.build_mesh().unwrap();
        let opts = SolveOptions { max_picard: 2, ..Default::default() };
        match solve_regularized(&s, &mesh, 0.1, &opts, None) {
            Err(Error::NotConverged { report }) => {
                assert_eq!(report.iterations, 2);
                assert!(!report.converged);
            }
            other => panic!("expected NotConverged, got {other:?}"),
        }
    }
}
