//! Numerical solver and regularity diagnostics for the quasilinear free
//! transmission problem
//!
//! ```text
//! -div(A(x,u) |grad u|^(p-2) grad u) = f(x,u),
//! A(x,s) = A+(x) [s > 0] + A-(x) [s <= 0],   f(x,s) = f+(x) [s > 0] + f-(x) [s <= 0]
//! ```
//!
//! on the interval (-1,1), the unit square, or the unit disc. The broken
//! coefficient is smoothed by a width-`eps` ramp ([`mollifier`]), the
//! regularized problem is solved by damped Picard (Kacanov) iteration on P1
//! elements ([`solver`]), and the solution is examined by the measurements in
//! [`diagnostics`]: dyadic decay, Holder seminorms stratified by distance to
//! the free boundary, Harnack ratios, Caccioppoli quotients and proximity to
//! the regular profiles built from the phase-rescaling map in [`tab`].

pub mod diagnostics;
pub mod error;
pub mod frozen;
pub mod io;
pub mod mesh;
pub mod mollifier;
pub mod problem;
pub mod quadrature;
pub mod solver;
pub mod tab;

pub use error::{Error, Result};
pub use mesh::{build_mesh, Ball, Mesh, Point};
pub use problem::{DiscreteField, DomainDescriptor, DomainKind, ProblemSpec, ScalarField};
pub use solver::{SolveOptions, SolveReport};
