//! Picard energy `int A_eps(x, u_k) |grad u_k|^p` along the iteration on the
//! shipped cases.

use freetrans::mollifier::schedule_down_to;
use freetrans::problem::Builtin;
use freetrans::solver::{epsilon_continuation, ContinuationReport};
use freetrans::{DomainDescriptor, DomainKind, ProblemSpec, ScalarField, SolveOptions};

/// Iterations exempt from the descent check.
const WARMUP: usize = 3;

fn disc(p: f64, mu: f64, a_plus: f64, a_minus: f64) -> ProblemSpec {
    let base = ProblemSpec::constant(p, mu, DomainDescriptor::new(DomainKind::UnitDisc, 32), a_plus, a_minus);
    ProblemSpec { f_plus: ScalarField::Const(1.0), f_minus: ScalarField::Const(-1.0), ..base }
        .with_boundary(ScalarField::Expr(Builtin::X1))
}

fn interval(p: f64) -> ProblemSpec {
    ProblemSpec::constant(p, 0.25, DomainDescriptor::new(DomainKind::Interval, 256), 4.0, 1.0).with_boundary(ScalarField::Expr(Builtin::X1))
}

fn shipped() -> Vec<(&'static str, ProblemSpec, f64)> {
    vec![
        ("disc_two_phase", disc(2.0, 0.5, 2.0, 0.5), 1e-3),
        ("disc_p3", disc(3.0, 0.25, 4.0, 1.0), 1e-3),
        ("interval_oracle p=2", interval(2.0), 1e-6),
        ("interval_oracle p=3", interval(3.0), 1e-6),
    ]
}

fn run(spec: &ProblemSpec, eps: f64) -> ContinuationReport {
    let mesh = spec.build_mesh().unwrap();
    epsilon_continuation(spec, &mesh, &schedule_down_to(0.5, eps).unwrap(), &SolveOptions::default()).unwrap()
}

/// Largest relative energy increase after the warm-up, over all levels.
fn worst_increase(cont: &ContinuationReport) -> f64 {
    cont.reports
        .iter()
        .flat_map(|r| {
            let h = &r.energy_history;
            (WARMUP.max(1)..h.len()).map(move |k| (h[k] - h[k - 1]) / h[k - 1].abs())
        })
        .fold(0.0, f64::max)
}

#[test]
fn energy_settles_to_the_fixed_point() {
    // What does hold: the final energy agrees with the smoothed energy of
    // the returned field and increases are small.
    for (name, spec, eps) in shipped() {
        let cont = run(&spec, eps);
        let last = cont.reports.last().unwrap();
        let u = cont.fields.last().unwrap();
        let e = freetrans::solver::smoothed_energy(&spec, u, last.eps).unwrap();
        let recorded = *last.energy_history.last().unwrap();
        assert!((e - recorded).abs() <= 1e-12 * e, "{name}: {e} vs {recorded}");
        // The largest rise, about 1.6e-2, is on the first level of the 1D
        // oracle, started from the undamped linear step.
        assert!(worst_increase(&cont) < 5e-2, "{name}");
    }
}

/// The iteration is not a descent method for this functional: `A_eps`
/// depends on `u`, so the update solves a frozen-coefficient problem rather
/// than minimizing the recorded energy, and iterates approach the fixed
/// point from below as often as from above.
#[test]
#[ignore = "Picard energy is not monotone after the warm-up on the shipped cases"]
fn energy_non_increasing_after_warmup() {
    let offenders: Vec<(&str, f64)> =
        shipped().into_iter().map(|(n, s, e)| (n, worst_increase(&run(&s, e)))).filter(|&(_, w)| w > 0.0).collect();
    assert!(offenders.is_empty(), "{offenders:?}");
}
