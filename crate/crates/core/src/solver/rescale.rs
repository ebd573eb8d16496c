use std::sync::Arc;

use crate::error::{Error, Result};
use crate::mesh::{build_mesh, norm, Mesh, Point};
use crate::problem::{DiscreteField, DomainDescriptor, DomainKind, ProblemSpec, ScalarField};

/// A solution carried to the unit ball by `w(y) = Phi u(Theta y + x0) + Psi`,
/// together with the data of the problem `w` solves there: coefficients
/// `A(Theta y + x0)`, sources `Phi^(p-1) Theta^p f(Theta y + x0)` and phases
/// read from the sign of `w - Psi`.
#[derive(Debug, Clone)]
pub struct Rescaled {
    pub field: DiscreteField,
    pub spec: ProblemSpec,
    pub shift: f64,
}

impl Rescaled {
    /// `w - Psi`, whose sign selects the phase.
    pub fn phase_field(&self) -> Result<DiscreteField> {
        self.field.map(|v| v - self.shift)
    }
}

fn ball_inside(kind: DomainKind, x0: &Point, theta: f64) -> bool {
    let slack = 1e-12;
    match kind {
        DomainKind::Interval => x0[1] == 0.0 && x0[0].abs() + theta <= 1.0 + slack,
        DomainKind::UnitDisc => norm(x0) + theta <= 1.0 + slack,
        DomainKind::UnitSquare => x0.iter().all(|&c| c - theta >= -slack && c + theta <= 1.0 + slack),
    }
}

/// Value of `field` at `x`, interpolating nodal tables on `mesh`.
fn eval_field(field: &ScalarField, mesh: &Mesh, x: &Point) -> f64 {
    if let Some(v) = field.at_point(x) {
        return v;
    }
    match mesh.locator().locate_nearest(mesh, x, mesh.h_mesh()) {
        Some((e, bary)) => field.at(mesh, e, &bary),
        None => f64::NAN,
    }
}

fn pull_back(field: &ScalarField, mesh: &Arc<Mesh>, theta: f64, x0: Point, scale: f64) -> ScalarField {
    if let Some(v) = field.is_const() {
        return ScalarField::Const(scale * v);
    }
    let (field, mesh) = (field.clone(), mesh.clone());
    ScalarField::func(move |y| {
        let x = [theta * y[0] + x0[0], theta * y[1] + x0[1]];
        scale * eval_field(&field, &mesh, &x)
    })
}

/// Resamples `u` from `B_theta(x0)` onto a fresh unit-ball mesh of the given
/// resolution (the interval (-1, 1) in 1D, the unit disc in 2D) by linear
/// interpolation. `phi` must be positive so that phases are preserved.
pub fn rescale_solution(
    u: &DiscreteField,
    spec: &ProblemSpec,
    theta: f64,
    phi: f64,
    psi: f64,
    x0: Point,
    resolution: usize,
) -> Result<Rescaled> {
    if !(theta > 0.0 && phi > 0.0) || !(theta * phi).is_finite() || !psi.is_finite() {
        return Err(Error::InvalidParameter(format!("rescaling needs theta > 0, phi > 0, finite psi (got {theta}, {phi}, {psi})")));
    }
    if !ball_inside(spec.domain.kind, &x0, theta) {
        return Err(Error::OutsideDomain(x0));
    }
    let source = u.mesh();
    let kind = if source.dim() == 1 { DomainKind::Interval } else { DomainKind::UnitDisc };
    let domain = DomainDescriptor::new(kind, resolution);
    let target = Arc::new(build_mesh(&domain)?);
    let locator = source.locator();
    let mut values = Vec::with_capacity(target.n_nodes());
    for y in target.nodes() {
        let x = [theta * y[0] + x0[0], theta * y[1] + x0[1]];
        let (e, bary) = locator.locate_nearest(source, &x, source.h_mesh()).ok_or(Error::OutsideDomain(x))?;
        let v: f64 = source.element(e).iter().zip(&bary).map(|(&i, &l)| l * u.values()[i]).sum();
        values.push(phi * v + psi);
    }
    let field = DiscreteField::new(target, values)?;
    let f_scale = phi.powf(spec.p - 1.0) * theta.powf(spec.p);
    let spec = ProblemSpec {
        p: spec.p,
        mu: spec.mu,
        domain,
        a_plus: pull_back(&spec.a_plus, source, theta, x0, 1.0),
        a_minus: pull_back(&spec.a_minus, source, theta, x0, 1.0),
        f_plus: pull_back(&spec.f_plus, source, theta, x0, f_scale),
        f_minus: pull_back(&spec.f_minus, source, theta, x0, f_scale),
        g: ScalarField::nodal(field.values().to_vec()),
    };
    Ok(Rescaled { field, spec, shift: psi })
}
