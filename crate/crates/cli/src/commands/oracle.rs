use freetrans::io::{Bound, ReportRow};
use freetrans::problem::Builtin;
use freetrans::solver::{interface_crossing, solve_oracle_1d};
use freetrans::{DomainDescriptor, DomainKind, ProblemSpec, ScalarField};

use super::{solve_to, write_field};
use crate::{Context, Failure, OracleConfig};

pub(super) fn oracle_check(ctx: &Context) -> Result<Vec<ReportRow>, Failure> {
    let cfg = ctx.config.oracle.clone().unwrap_or_default();
    let tol = 2.0 / cfg.n as f64;
    let mut rows = Vec::new();
    for &p in &cfg.exponents {
        let oracle = solve_oracle_1d(cfg.a_plus, cfg.a_minus, p)?;
        let spec = oracle_spec(&cfg, p);
        let mesh = spec.build_mesh()?;
        let (u, cont) = solve_to(&spec, &mesh, cfg.eps, &ctx.config.options)?;
        let err = u
            .values()
            .iter()
            .zip(mesh.nodes())
            .map(|(&v, x)| (v - oracle.eval(x[0])).abs())
            .fold(0.0, f64::max);
        let crossing = interface_crossing(&u).unwrap_or(f64::NAN);
        rows.push(ReportRow::info(format!("x0[p={p}]"), oracle.x0));
        rows.push(ReportRow::check(format!("nodal_error[p={p}]"), err, Bound::AtMost(tol)));
        rows.push(ReportRow::check(format!("interface_error[p={p}]"), (crossing - oracle.x0).abs(), Bound::AtMost(tol)));
        rows.push(ReportRow::info(
            format!("iterations[p={p}]"),
            cont.reports.iter().map(|r| r.iterations).sum::<usize>() as f64,
        ));
        write_field(ctx, &format!("u_p{p}"), &u)?;
    }
    Ok(rows)
}

fn oracle_spec(cfg: &OracleConfig, p: f64) -> ProblemSpec {
    let mu = (1.0 / cfg.a_plus.max(cfg.a_minus)).min(cfg.a_plus.min(cfg.a_minus)).min(0.5);
    ProblemSpec::constant(p, mu, DomainDescriptor::new(DomainKind::Interval, cfg.n), cfg.a_plus, cfg.a_minus)
        .with_boundary(ScalarField::Expr(Builtin::X1))
}
