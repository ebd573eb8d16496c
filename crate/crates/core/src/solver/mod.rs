//! Damped Picard (Kacanov) iteration for the smoothed problem, continuation
//! in the smoothing width, the 1D two-phase closed form and the rescaling
//! of a local solution to the unit ball.

mod continuation;
mod oracle;
mod picard;
mod rescale;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::mesh::DEFAULT_LINEAR_TOL;

pub use continuation::{epsilon_continuation, lp_distance, split_fields, ContinuationReport};
pub use oracle::{interface_crossing, solve_oracle_1d, Oracle1d};
pub use picard::{fixed_point_residual, smoothed_energy, solve_regularized, solve_single_phase};
pub use rescale::{rescale_solution, Rescaled};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolveOptions {
    /// Stop when `max|u_{k+1} - u_k| < tol_picard * max|u_{k+1}|`.
    pub tol_picard: f64,
    pub max_picard: usize,
    /// Initial relaxation factor in (0, 1].
    pub damping: f64,
    /// Regularization of the gradient weight `(|grad u|^2 + d^2)^((p-2)/2)`.
    pub grad_reg_delta: f64,
    pub linear_tol: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions { tol_picard: 1e-8, max_picard: 200, damping: 0.7, grad_reg_delta: 1e-8, linear_tol: DEFAULT_LINEAR_TOL }
    }
}

/// Floor for the damping factor under automatic halving.
pub const MIN_DAMPING: f64 = 0.1;
/// Consecutive energy increases that trigger a halving.
pub const ENERGY_INCREASE_PATIENCE: usize = 5;
/// Consecutive reversals that trigger a halving. A reversal is an update
/// pointing against its predecessor without shrinking below
/// `REVERSAL_SHRINK` of its length: the step overshoots a fixed point it
/// cannot contract onto, while the energy alternates and never rises five
/// times in a row.
pub const OSCILLATION_PATIENCE: usize = 5;
pub const REVERSAL_SHRINK: f64 = 0.8;
/// Iterations without a new smallest residual that trigger a halving.
pub const STALL_PATIENCE: usize = 10;

impl SolveOptions {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidParameter(m.into()));
        if !(self.tol_picard > 0.0) {
            return bad("tol_picard must be positive");
        }
        if self.max_picard == 0 {
            return bad("max_picard must be positive");
        }
        if !(self.damping > 0.0 && self.damping <= 1.0) {
            return bad("damping must lie in (0, 1]");
        }
        if !(self.grad_reg_delta >= 0.0) || !self.grad_reg_delta.is_finite() {
            return bad("grad_reg_delta must be nonnegative");
        }
        if !(self.linear_tol > 0.0) {
            return bad("linear_tol must be positive");
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveReport {
    pub eps: f64,
    pub iterations: usize,
    /// Scaled fixed-point residual after each iteration.
    pub residual_history: Vec<f64>,
    /// `int A_eps(x, u) |grad u|^p` after each iteration.
    pub energy_history: Vec<f64>,
    /// `||grad u||_{L^p}` of the returned field.
    pub grad_norm: f64,
    pub converged: bool,
    pub warm_started: bool,
    /// Set for `p < 2`, where existence for the smoothed problem is not known.
    pub experimental: bool,
    pub final_damping: f64,
}

impl SolveReport {
    pub fn final_residual(&self) -> f64 {
        self.residual_history.last().copied().unwrap_or(f64::NAN)
    }
}
