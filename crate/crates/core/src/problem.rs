//! Problem data: exponent, ellipticity, the two coefficient and source
//! phases, boundary data and the domain, plus the weak-form residual used
//! as the global correctness check.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};
use crate::mesh::{build_mesh, dot, norm, Mesh, Point};
use crate::quadrature::fixed_rule;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DomainKind {
    /// (-1, 1)
    Interval,
    /// The open unit disc about the origin.
    UnitDisc,
    /// (0, 1)^2
    UnitSquare,
}

/// Domain shape and division count: elements for the interval, cells per
/// side for the square, rings for the disc.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct DomainDescriptor {
    pub kind: DomainKind,
    pub resolution: usize,
}

impl DomainDescriptor {
    pub fn new(kind: DomainKind, resolution: usize) -> Self {
        DomainDescriptor { kind, resolution }
    }

    pub fn dim(&self) -> usize {
        match self.kind {
            DomainKind::Interval => 1,
            _ => 2,
        }
    }

    /// Center of the domain; diagnostic balls `B_r` are taken about it.
    pub fn center(&self) -> Point {
        match self.kind {
            DomainKind::UnitSquare => [0.5, 0.5],
            _ => [0.0, 0.0],
        }
    }
}

/// Closed-form fields addressable by name from JSON.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Builtin {
    Zero,
    One,
    /// First coordinate.
    X1,
    /// Second coordinate.
    X2,
    /// `|x|`
    Radius,
    /// `(1 + cos(pi |x|)) / 2`, equal to 1 at the origin and 0 on the unit sphere.
    Bump,
}

impl Builtin {
    pub const ALL: [(&'static str, Builtin); 6] = [
        ("zero", Builtin::Zero),
        ("one", Builtin::One),
        ("x1", Builtin::X1),
        ("x2", Builtin::X2),
        ("radius", Builtin::Radius),
        ("bump", Builtin::Bump),
    ];

    pub fn parse(name: &str) -> Result<Self> {
        Self::ALL.iter().find(|(n, _)| *n == name).map(|&(_, b)| b).ok_or_else(|| Error::UnknownExpr(name.into()))
    }

    pub fn name(self) -> &'static str {
        Self::ALL.iter().find(|(_, b)| *b == self).map(|(n, _)| *n).unwrap()
    }

    pub fn eval(self, x: &Point) -> f64 {
        match self {
            Builtin::Zero => 0.0,
            Builtin::One => 1.0,
            Builtin::X1 => x[0],
            Builtin::X2 => x[1],
            Builtin::Radius => norm(x),
            Builtin::Bump => 0.5 * (1.0 + (PI * norm(x)).cos()),
        }
    }
}

pub type FieldFn = Arc<dyn Fn(&Point) -> f64 + Send + Sync>;

/// A scalar field on the domain: a constant, a built-in expression, a
/// nodal table interpolated piecewise linearly, or an arbitrary closure.
#[derive(Clone)]
pub enum ScalarField {
    Const(f64),
    Expr(Builtin),
    Nodal(Arc<Vec<f64>>),
    Func(FieldFn),
}

impl fmt::Debug for ScalarField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ScalarField::Const(v) => write!(f, "Const({v})"),
            ScalarField::Expr(b) => write!(f, "Expr({})", b.name()),
            ScalarField::Nodal(v) => write!(f, "Nodal(len {})", v.len()),
            ScalarField::Func(_) => write!(f, "Func(..)"),
        }
    }
}

impl ScalarField {
    pub fn constant(v: f64) -> Self {
        ScalarField::Const(v)
    }

    pub fn func(f: impl Fn(&Point) -> f64 + Send + Sync + 'static) -> Self {
        ScalarField::Func(Arc::new(f))
    }

    pub fn nodal(values: Vec<f64>) -> Self {
        ScalarField::Nodal(Arc::new(values))
    }

    pub fn at_node(&self, mesh: &Mesh, i: usize) -> f64 {
        match self {
            ScalarField::Const(v) => *v,
            ScalarField::Expr(b) => b.eval(&mesh.node(i)),
            ScalarField::Nodal(vals) => vals[i],
            ScalarField::Func(f) => f(&mesh.node(i)),
        }
    }

    /// Value at barycentric point `bary` of element `e`.
    pub fn at(&self, mesh: &Mesh, e: usize, bary: &[f64; 3]) -> f64 {
        match self {
            ScalarField::Const(v) => *v,
            ScalarField::Nodal(vals) => mesh.element(e).iter().zip(bary).map(|(&i, &l)| l * vals[i]).sum(),
            ScalarField::Expr(b) => b.eval(&mesh.map_point(e, bary)),
            ScalarField::Func(f) => f(&mesh.map_point(e, bary)),
        }
    }

    /// Value at an arbitrary point, for fields that do not need a mesh.
    /// Nodal tables return `None`.
    pub fn at_point(&self, x: &Point) -> Option<f64> {
        match self {
            ScalarField::Const(v) => Some(*v),
            ScalarField::Expr(b) => Some(b.eval(x)),
            ScalarField::Func(f) => Some(f(x)),
            ScalarField::Nodal(_) => None,
        }
    }

    pub fn nodal_values(&self, mesh: &Mesh) -> Vec<f64> {
        (0..mesh.n_nodes()).map(|i| self.at_node(mesh, i)).collect()
    }

    pub fn is_const(&self) -> Option<f64> {
        match self {
            ScalarField::Const(v) => Some(*v),
            _ => None,
        }
    }
}

#[derive(Serialize, Deserialize)]
#[serde(rename_all = "lowercase", deny_unknown_fields)]
enum FieldJson {
    Const(f64),
    Expr(String),
    Nodal(Vec<f64>),
}

impl Serialize for ScalarField {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let j = match self {
            ScalarField::Const(v) => FieldJson::Const(*v),
            ScalarField::Expr(b) => FieldJson::Expr(b.name().into()),
            ScalarField::Nodal(v) => FieldJson::Nodal(v.to_vec()),
            ScalarField::Func(_) => return Err(serde::ser::Error::custom("closure fields cannot be serialized")),
        };
        j.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ScalarField {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        Ok(match FieldJson::deserialize(d)? {
            FieldJson::Const(v) => ScalarField::Const(v),
            FieldJson::Expr(name) => ScalarField::Expr(Builtin::parse(&name).map_err(serde::de::Error::custom)?),
            FieldJson::Nodal(v) => ScalarField::nodal(v),
        })
    }
}

fn zero_field() -> ScalarField {
    ScalarField::Const(0.0)
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub p: f64,
    pub mu: f64,
    pub domain: DomainDescriptor,
    #[serde(rename = "A_plus")]
    pub a_plus: ScalarField,
    #[serde(rename = "A_minus")]
    pub a_minus: ScalarField,
    #[serde(default = "zero_field")]
    pub f_plus: ScalarField,
    #[serde(default = "zero_field")]
    pub f_minus: ScalarField,
    #[serde(default = "zero_field")]
    pub g: ScalarField,
}

impl ProblemSpec {
    /// Constant coefficients, zero source, zero boundary data.
    pub fn constant(p: f64, mu: f64, domain: DomainDescriptor, a_plus: f64, a_minus: f64) -> Self {
        ProblemSpec {
            p,
            mu,
            domain,
            a_plus: ScalarField::Const(a_plus),
            a_minus: ScalarField::Const(a_minus),
            f_plus: zero_field(),
            f_minus: zero_field(),
            g: zero_field(),
        }
    }

    pub fn with_sources(mut self, f_plus: ScalarField, f_minus: ScalarField) -> Self {
        self.f_plus = f_plus;
        self.f_minus = f_minus;
        self
    }

    pub fn with_boundary(mut self, g: ScalarField) -> Self {
        self.g = g;
        self
    }

    pub fn build_mesh(&self) -> Result<Arc<Mesh>> {
        Ok(Arc::new(build_mesh(&self.domain)?))
    }

    /// Existence of weak solutions of the regularized problems is only
    /// established for `p >= 2`; smaller exponents run but are flagged.
    pub fn is_experimental(&self) -> bool {
        self.p < 2.0
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }
}

/// `A_plus` on `s > 0`, `A_minus` on `s <= 0`.
pub fn eval_broken_coefficient(a_plus: f64, a_minus: f64, s: f64) -> f64 {
    if s > 0.0 {
        a_plus
    } else {
        a_minus
    }
}

/// `f_plus` on `s > 0`, `f_minus` on `s <= 0`.
pub fn eval_broken_source(f_plus: f64, f_minus: f64, s: f64) -> f64 {
    if s > 0.0 {
        f_plus
    } else {
        f_minus
    }
}

/// Nodal field on a mesh.
#[derive(Debug, Clone)]
pub struct DiscreteField {
    mesh: Arc<Mesh>,
    values: Vec<f64>,
}

impl DiscreteField {
    pub fn new(mesh: Arc<Mesh>, values: Vec<f64>) -> Result<Self> {
        if values.len() != mesh.n_nodes() {
            return Err(Error::FieldLength { expected: mesh.n_nodes(), got: values.len() });
        }
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::NonFinite(i));
        }
        Ok(DiscreteField { mesh, values })
    }

    /// Unchecked constructor for values derived from an already valid field.
    pub(crate) fn from_raw(mesh: Arc<Mesh>, values: Vec<f64>) -> Self {
        debug_assert_eq!(values.len(), mesh.n_nodes());
        DiscreteField { mesh, values }
    }

    pub fn from_fn(mesh: Arc<Mesh>, f: impl Fn(&Point) -> f64) -> Result<Self> {
        let values = mesh.nodes().iter().map(f).collect();
        Self::new(mesh, values)
    }

    pub fn zeros(mesh: Arc<Mesh>) -> Self {
        let n = mesh.n_nodes();
        DiscreteField { mesh, values: vec![0.0; n] }
    }

    pub fn mesh(&self) -> &Arc<Mesh> {
        &self.mesh
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    /// Same mesh, new values.
    pub fn with_values(&self, values: Vec<f64>) -> Result<Self> {
        Self::new(self.mesh.clone(), values)
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Result<Self> {
        self.with_values(self.values.iter().map(|&v| f(v)).collect())
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    pub fn interpolate(&self, x: &Point) -> Result<f64> {
        self.mesh.interpolate(&self.values, x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub node: Option<usize>,
    pub message: String,
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.node {
            Some(i) => write!(f, "node {i}: {}", self.message),
            None => f.write_str(&self.message),
        }
    }
}

/// Checks the structural hypotheses on `mesh`: `p > 1`, `0 < mu < 1`,
/// `mu <= A_pm <= 1/mu` at every node, finite sources and boundary data.
/// Violations are returned, never raised.
pub fn validate_spec(spec: &ProblemSpec, mesh: &Mesh) -> Vec<Violation> {
    let mut out = Vec::new();
    let global = |msg: String| Violation { node: None, message: msg };
    if !(spec.p > 1.0) || !spec.p.is_finite() {
        out.push(global(format!("p must exceed 1 (got {})", spec.p)));
    }
    let mu_ok = spec.mu > 0.0 && spec.mu < 1.0;
    if !mu_ok {
        out.push(global(format!("mu must lie in (0, 1) (got {})", spec.mu)));
    }
    if spec.domain.dim() != mesh.dim() {
        out.push(global("domain dimension does not match mesh".into()));
    }
    let fields = [
        ("A_plus", &spec.a_plus),
        ("A_minus", &spec.a_minus),
        ("f_plus", &spec.f_plus),
        ("f_minus", &spec.f_minus),
        ("g", &spec.g),
    ];
    let mut sized = true;
    for (name, field) in fields {
        if let ScalarField::Nodal(v) = field {
            if v.len() != mesh.n_nodes() {
                out.push(global(format!("{name} has {} nodal values, mesh has {} nodes", v.len(), mesh.n_nodes())));
                sized = false;
            }
        }
    }
    if !sized {
        return out;
    }
    for (name, field) in [("A_plus", &spec.a_plus), ("A_minus", &spec.a_minus)] {
        for i in 0..mesh.n_nodes() {
            let a = field.at_node(mesh, i);
            if !a.is_finite() {
                out.push(Violation { node: Some(i), message: format!("{name} is not finite") });
            } else if mu_ok && (a < spec.mu || a > 1.0 / spec.mu) {
                out.push(Violation {
                    node: Some(i),
                    message: format!("{name} = {a} outside [{}, {}]", spec.mu, 1.0 / spec.mu),
                });
            }
        }
    }
    for (name, field) in [("f_plus", &spec.f_plus), ("f_minus", &spec.f_minus)] {
        for i in 0..mesh.n_nodes() {
            if !field.at_node(mesh, i).is_finite() {
                out.push(Violation { node: Some(i), message: format!("{name} is not finite") });
            }
        }
    }
    for &i in mesh.boundary_nodes() {
        if !spec.g.at_node(mesh, i).is_finite() {
            out.push(Violation { node: Some(i), message: "boundary data g is not finite".into() });
        }
    }
    out
}

/// `|v|^(p-2) v`, with the value 0 at `v = 0` for every `p > 1`.
pub fn p_flux(v: &Point, p: f64) -> Point {
    let n = norm(v);
    if n == 0.0 {
        return [0.0, 0.0];
    }
    let s = n.powf(p - 2.0);
    [s * v[0], s * v[1]]
}

/// `int A(x,u) |grad u|^(p-2) grad u . grad phi - int f(x,u) phi` with the
/// fixed element rule; the phase at each quadrature point is the sign of
/// the interpolated `u` there, zero counting as the minus phase.
pub fn weak_residual(spec: &ProblemSpec, u: &DiscreteField, phi: &DiscreteField) -> Result<f64> {
    let mesh = u.mesh();
    if phi.values().len() != mesh.n_nodes() {
        return Err(Error::FieldLength { expected: mesh.n_nodes(), got: phi.values().len() });
    }
    if let Some(&b) = mesh.boundary_nodes().iter().find(|&&b| phi.values()[b] != 0.0) {
        return Err(Error::NotInW0(b));
    }
    let (uv, pv) = (u.values(), phi.values());
    let mut total = 0.0;
    for e in 0..mesh.n_elements() {
        let c = mesh.element(e);
        let flux = p_flux(&mesh.gradient(e, uv), spec.p);
        let gphi = mesh.gradient(e, pv);
        let flux_dot = dot(&flux, &gphi);
        for q in fixed_rule(mesh, e) {
            let interp = |vals: &[f64]| -> f64 { c.iter().zip(&q.bary).map(|(&i, &l)| l * vals[i]).sum() };
            let uq = interp(uv);
            let a = eval_broken_coefficient(spec.a_plus.at(mesh, e, &q.bary), spec.a_minus.at(mesh, e, &q.bary), uq);
            let f = eval_broken_source(spec.f_plus.at(mesh, e, &q.bary), spec.f_minus.at(mesh, e, &q.bary), uq);
            total += q.weight * (a * flux_dot - f * interp(pv));
        }
    }
    Ok(total)
}

/// Hat function of interior node `i`.
pub fn hat(mesh: &Arc<Mesh>, i: usize) -> DiscreteField {
    let mut v = vec![0.0; mesh.n_nodes()];
    v[i] = 1.0;
    DiscreteField { mesh: mesh.clone(), values: v }
}
