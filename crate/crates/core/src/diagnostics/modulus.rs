use crate::error::{Error, Result};
use crate::mesh::{dist, nodes_in_ball, Ball, Mesh};
use crate::problem::ScalarField;

/// `max |A(x) - A(y)|` over all node pairs of `region` with `|x - y| < t`,
/// the maximum taken over both phases. Every pair is visited, so the value
/// is nondecreasing in `t` and equals the oscillation once `t` exceeds the
/// mesh diameter.
pub fn modulus_of_continuity(mesh: &Mesh, a_plus: &ScalarField, a_minus: &ScalarField, region: &Ball, t: f64) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidParameter(format!("t must be positive (got {t})")));
    }
    let nodes: Vec<usize> = nodes_in_ball(mesh, region).collect();
    let ap: Vec<f64> = nodes.iter().map(|&i| a_plus.at_node(mesh, i)).collect();
    let am: Vec<f64> = nodes.iter().map(|&i| a_minus.at_node(mesh, i)).collect();
    let all = t > mesh.diameter();
    let mut w: f64 = 0.0;
    for a in 0..nodes.len() {
        let x = mesh.node(nodes[a]);
        for b in a + 1..nodes.len() {
            if all || dist(&x, &mesh.node(nodes[b])) < t {
                w = w.max((ap[a] - ap[b]).abs()).max((am[a] - am[b]).abs());
            }
        }
    }
    Ok(w)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::build_mesh;
    use crate::problem::{Builtin, DomainDescriptor, DomainKind};
    use proptest::prelude::*;

    fn disc(n: usize) -> Mesh {
        build_mesh(&DomainDescriptor::new(DomainKind::UnitDisc, n)).unwrap()
    }

    #[test]
    fn constants_vanish() {
        let m = disc(8);
        for t in [0.01, 0.5, 3.0] {
            let w = modulus_of_continuity(&m, &ScalarField::Const(2.0), &ScalarField::Const(0.5), &Ball::centered(1.0), t);
            assert_eq!(w.unwrap(), 0.0);
        }
    }

    #[test]
    fn first_coordinate_is_lipschitz_one() {
        let m = disc(16);
        let x1 = ScalarField::Expr(Builtin::X1);
        let h = m.h_mesh();
        for t in [0.1, 0.5, 1.3, 2.5] {
            let w = modulus_of_continuity(&m, &x1, &ScalarField::Const(1.0), &Ball::centered(1.0), t).unwrap();
            let exact = t.min(2.0);
            assert!(w <= exact + 1e-12 && w >= exact - h, "t = {t}: {w}");
        }
    }

    proptest! {
        #[test]
        fn nondecreasing_in_t(t1 in 0.01f64..2.5, t2 in 0.01f64..2.5) {
            let m = disc(5);
            let f = ScalarField::func(|x| (3.0 * x[0]).sin() + x[1] * x[1]);
            let (lo, hi) = if t1 <= t2 { (t1, t2) } else { (t2, t1) };
            let w = |t| modulus_of_continuity(&m, &f, &ScalarField::Expr(Builtin::Radius), &Ball::centered(1.0), t).unwrap();
            prop_assert!(w(lo) <= w(hi));
        }
    }
}
