mod diagnose;
mod identity;
mod oracle;
mod profile;
mod solve;

use std::sync::Arc;

use freetrans::io::{emit_vtk, ReportRow};
use freetrans::mollifier::{schedule_down_to, DEFAULT_EPS0};
use freetrans::solver::{epsilon_continuation, ContinuationReport};
use freetrans::{DiscreteField, Mesh, ProblemSpec, SolveOptions};

use crate::{Command, Context, Failure};

pub(crate) fn dispatch(ctx: &Context) -> Result<Vec<ReportRow>, Failure> {
    ctx.config.options.validate()?;
    match ctx.config.command {
        Command::Solve => solve::solve(ctx),
        Command::SweepEpsilon => solve::sweep(ctx),
        Command::Diagnose => diagnose::diagnose(ctx),
        Command::CompareProfile => profile::compare_profile(ctx),
        Command::OracleCheck => oracle::oracle_check(ctx),
        Command::IdentityCheck => identity::identity_check(ctx),
    }
}

pub(crate) fn require_spec<'a>(ctx: &'a Context) -> Result<&'a ProblemSpec, Failure> {
    let spec = ctx.config.spec.as_ref().ok_or_else(|| Failure::Config("config has no spec".into()))?;
    // Surface spec errors as configuration errors before any solve.
    let mesh = spec.build_mesh()?;
    let violations = freetrans::problem::validate_spec(spec, &mesh);
    if !violations.is_empty() {
        return Err(freetrans::Error::Validation(violations).into());
    }
    Ok(spec)
}

/// Solves `spec` on `mesh` by continuation from `DEFAULT_EPS0` down to `eps`.
pub(crate) fn solve_to(
    spec: &ProblemSpec,
    mesh: &Arc<Mesh>,
    eps: f64,
    opts: &SolveOptions,
) -> Result<(DiscreteField, ContinuationReport), Failure> {
    let schedule = schedule_down_to(DEFAULT_EPS0, eps)?;
    let report = epsilon_continuation(spec, mesh, &schedule, opts)?;
    let u = report.fields.last().cloned().expect("non-empty schedule");
    Ok((u, report))
}

pub(crate) fn write_field(ctx: &Context, name: &str, u: &DiscreteField) -> Result<(), Failure> {
    if ctx.config.vtk {
        emit_vtk(u.mesh(), &[(name, u.values())], &ctx.out_dir.join(format!("field_{name}.vtk")))?;
    }
    Ok(())
}
