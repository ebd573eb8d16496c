use thiserror::Error;

use crate::problem::Violation;
use crate::solver::SolveReport;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("spec validation failed: {} violation(s)", .0.len())]
    Validation(Vec<Violation>),

    #[error("field length {got} does not match node count {expected}")]
    FieldLength { expected: usize, got: usize },

    #[error("non-finite value in field at node {0}")]
    NonFinite(usize),

    #[error("resolution too coarse: {0}")]
    TooCoarse(String),

    #[error("degenerate element {0}")]
    DegenerateElement(usize),

    #[error("test function not in W_0: nonzero at boundary node {0}")]
    NotInW0(usize),

    #[error("linear solver hit {iterations} iterations, relative residual {residual:e}")]
    LinearSolver { iterations: usize, residual: f64 },

    #[error("Picard iteration did not converge in {} iterations", .report.iterations)]
    NotConverged { report: Box<SolveReport> },

    #[error("continuation failed at level {level} (eps = {eps:e}): {source}")]
    ContinuationLevel {
        level: usize,
        eps: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("ball under-resolved: no node within radius {radius:e} of ({}, {})", .center[0], .center[1])]
    UnderResolved { center: [f64; 2], radius: f64 },

    #[error("empty region")]
    EmptyRegion,

    #[error("no sign-pure element")]
    NoSignPureElement,

    #[error("point is on the free boundary")]
    OnFreeBoundary,

    #[error("not in positive phase: u = {value:e} at node {node}")]
    NotPositivePhase { node: usize, value: f64 },

    #[error("point ({}, {}) lies outside the mesh", .0[0], .0[1])]
    OutsideDomain([f64; 2]),

    #[error("unknown built-in field `{0}`")]
    UnknownExpr(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}
