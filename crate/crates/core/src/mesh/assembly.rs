use std::collections::BTreeSet;

use super::{dot, CsrMatrix, Mesh, SparseSPDSystem};
use crate::error::{Error, Result};

/// Smallest admissible element weight.
pub const W_FLOOR: f64 = 1e-12;

/// CSR sparsity of the P1 stiffness matrix together with the scatter map
/// from element-local entries to CSR slots, so that re-assembly with new
/// weights is a single pass over the elements.
#[derive(Debug, Clone)]
pub struct StiffnessPattern {
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    scatter: Vec<usize>,
    local: usize,
}

impl StiffnessPattern {
    pub fn new(mesh: &Mesh) -> Self {
        let n = mesh.n_nodes();
        let mut adj: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
        for c in mesh.elements() {
            for &i in c {
                for &j in c {
                    adj[i].insert(j);
                }
            }
        }
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for row in &adj {
            col_idx.extend(row.iter().copied());
            row_ptr.push(col_idx.len());
        }
        let local = mesh.dim() + 1;
        let mut scatter = Vec::with_capacity(mesh.n_elements() * local * local);
        for c in mesh.elements() {
            for &i in c {
                for &j in c {
                    let r = row_ptr[i]..row_ptr[i + 1];
                    let k = col_idx[r.clone()].binary_search(&j).expect("pattern covers element");
                    scatter.push(r.start + k);
                }
            }
        }
        StiffnessPattern { row_ptr, col_idx, scatter, local }
    }

    /// `K_ij = sum_e w_e |e| grad(phi_i) . grad(phi_j)`.
    pub fn assemble(&self, mesh: &Mesh, weights: &[f64]) -> Result<CsrMatrix> {
        if weights.len() != mesh.n_elements() {
            return Err(Error::FieldLength { expected: mesh.n_elements(), got: weights.len() });
        }
        let mut values = vec![0.0; self.col_idx.len()];
        let l = self.local;
        for (e, &w) in weights.iter().enumerate() {
            if !(w > 0.0) || !w.is_finite() {
                return Err(Error::InvalidParameter(format!("element {e} has weight {w}, expected > 0")));
            }
            let g = mesh.basis_gradients(e);
            let s = w * mesh.measure(e);
            let slots = &self.scatter[e * l * l..(e + 1) * l * l];
            for a in 0..l {
                for b in 0..l {
                    values[slots[a * l + b]] += s * dot(&g[a], &g[b]);
                }
            }
        }
        Ok(CsrMatrix::from_parts(mesh.n_nodes(), self.row_ptr.clone(), self.col_idx.clone(), values))
    }
}

/// P1 stiffness matrix of `-div(w grad u)` with one weight per element.
pub fn assemble_weighted_laplacian(mesh: &Mesh, weights: &[f64]) -> Result<SparseSPDSystem> {
    Ok(SparseSPDSystem::new(StiffnessPattern::new(mesh).assemble(mesh, weights)?))
}

/// Exact load `b_i = int f_h phi_i` of the P1 interpolant `f_h` of nodal
/// values (consistent mass matrix times `f`).
pub fn assemble_load(mesh: &Mesh, f_nodal: &[f64]) -> Result<Vec<f64>> {
    if f_nodal.len() != mesh.n_nodes() {
        return Err(Error::FieldLength { expected: mesh.n_nodes(), got: f_nodal.len() });
    }
    let mut b = vec![0.0; mesh.n_nodes()];
    let k = mesh.dim() + 1;
    // Local mass: |e| (1 + [a == b]) / ((k)(k+1)).
    let denom = (k * (k + 1)) as f64;
    for e in 0..mesh.n_elements() {
        let c = mesh.element(e);
        let m = mesh.measure(e);
        for a in 0..k {
            let mut s = 0.0;
            for bb in 0..k {
                let factor = if a == bb { 2.0 } else { 1.0 };
                s += factor * f_nodal[c[bb]];
            }
            b[c[a]] += m * s / denom;
        }
    }
    Ok(b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{build_mesh, solve_spd, DEFAULT_LINEAR_TOL};
    use crate::problem::{DomainDescriptor, DomainKind};

    fn mesh(kind: DomainKind, n: usize) -> Mesh {
        build_mesh(&DomainDescriptor::new(kind, n)).unwrap()
    }

    #[test]
    fn unit_weights_on_interval_give_second_differences() {
        let m = mesh(DomainKind::Interval, 8);
        let h = 0.25;
        let k = assemble_weighted_laplacian(&m, &[1.0; 8]).unwrap().matrix;
        for i in 1..8 {
            assert!((k.get(i, i) - 2.0 / h).abs() < 1e-12);
            assert!((k.get(i, i - 1) + 1.0 / h).abs() < 1e-12);
            assert!((k.get(i, i + 1) + 1.0 / h).abs() < 1e-12);
        }
        assert_eq!(k.get(0, 2), 0.0);
    }

    #[test]
    fn doubling_weights_doubles_matrix() {
        let m = mesh(DomainKind::UnitDisc, 6);
        let w: Vec<f64> = (0..m.n_elements()).map(|e| 1.0 + (e % 3) as f64).collect();
        let w2: Vec<f64> = w.iter().map(|v| 2.0 * v).collect();
        let pat = StiffnessPattern::new(&m);
        let a = pat.assemble(&m, &w).unwrap();
        let b = pat.assemble(&m, &w2).unwrap();
        for i in 0..m.n_nodes() {
            for (j, v) in a.row(i) {
                assert!((b.get(i, j) - 2.0 * v).abs() <= 1e-14 * v.abs().max(1.0));
            }
        }
    }

    #[test]
    fn checkerboard_rows_sum_to_zero_and_matrix_is_symmetric() {
        let m = mesh(DomainKind::UnitSquare, 6);
        let w: Vec<f64> = (0..m.n_elements()).map(|e| if e % 2 == 0 { 1.0 } else { 2.0 }).collect();
        let k = assemble_weighted_laplacian(&m, &w).unwrap().matrix;
        for i in 0..m.n_nodes() {
            let s: f64 = k.row(i).map(|(_, v)| v).sum();
            assert!(s.abs() < 1e-12, "row {i} sums to {s}");
        }
        assert!(k.asymmetry() < 1e-14);
    }

    #[test]
    fn nonpositive_weight_rejected() {
        let m = mesh(DomainKind::Interval, 4);
        assert!(assemble_weighted_laplacian(&m, &[1.0, 0.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn load_vectors() {
        let m = mesh(DomainKind::Interval, 8);
        assert!(assemble_load(&m, &[0.0; 9]).unwrap().iter().all(|&v| v == 0.0));
        let b = assemble_load(&m, &[1.0; 9]).unwrap();
        for &v in &b[1..8] {
            assert!((v - 0.25).abs() < 1e-15);
        }
        // Linear f = x: int x phi_i = x_i h on a uniform interior patch.
        let f: Vec<f64> = m.nodes().iter().map(|p| p[0]).collect();
        let b = assemble_load(&m, &f).unwrap();
        for i in 1..8 {
            assert!((b[i] - f[i] * 0.25).abs() < 1e-15);
        }
    }

    #[test]
    fn matrix_matches_variational_form() {
        let m = mesh(DomainKind::UnitDisc, 5);
        let w: Vec<f64> = (0..m.n_elements()).map(|e| 0.5 + (e as f64 * 0.37).sin().abs()).collect();
        let k = assemble_weighted_laplacian(&m, &w).unwrap().matrix;
        let u: Vec<f64> = (0..m.n_nodes()).map(|i| (i as f64 * 1.3).cos()).collect();
        let phi: Vec<f64> = (0..m.n_nodes()).map(|i| (i as f64 * 0.7).sin()).collect();
        let mut ku = vec![0.0; m.n_nodes()];
        k.mul_vec(&u, &mut ku);
        let lhs: f64 = ku.iter().zip(&phi).map(|(a, b)| a * b).sum();
        let rhs: f64 = (0..m.n_elements())
            .map(|e| w[e] * m.measure(e) * dot(&m.gradient(e, &u), &m.gradient(e, &phi)))
            .sum();
        assert!((lhs - rhs).abs() < 1e-12 * rhs.abs().max(1.0));
    }

    #[test]
    fn spd_solver_recovers_known_vector_and_zero() {
        let m = mesh(DomainKind::UnitDisc, 8);
        let sys = assemble_weighted_laplacian(&m, &vec![1.0; m.n_elements()]).unwrap();
        let known: Vec<f64> = m.nodes().iter().map(|p| p[0] * p[0] - p[1]).collect();
        let mut rhs = vec![0.0; m.n_nodes()];
        sys.matrix.mul_vec(&known, &mut rhs);
        let bc: Vec<(usize, f64)> = m.boundary_nodes().iter().map(|&i| (i, known[i])).collect();
        let x = solve_spd(&sys.clone().with_rhs(rhs).with_dirichlet(bc), 1e-12, None).unwrap();
        for (a, b) in x.iter().zip(&known) {
            assert!((a - b).abs() < 1e-9);
        }
        let bc0: Vec<(usize, f64)> = m.boundary_nodes().iter().map(|&i| (i, 0.0)).collect();
        let z = solve_spd(&sys.with_dirichlet(bc0), DEFAULT_LINEAR_TOL, None).unwrap();
        assert!(z.iter().all(|&v| v == 0.0));
    }

    // -u'' = 1 on (-1,1), u(+-1) = 0 has u = (1 - x^2)/2; P1 with exact
    // load is nodally exact in 1D.
    #[test]
    fn poisson_1d_nodally_exact() {
        for n in [8, 16, 32] {
            let m = mesh(DomainKind::Interval, n);
            let sys = assemble_weighted_laplacian(&m, &vec![1.0; n]).unwrap();
            let rhs = assemble_load(&m, &vec![1.0; n + 1]).unwrap();
            let bc = vec![(0, 0.0), (n, 0.0)];
            let x = solve_spd(&sys.with_rhs(rhs).with_dirichlet(bc), 1e-13, None).unwrap();
            for (i, p) in m.nodes().iter().enumerate() {
                assert!((x[i] - 0.5 * (1.0 - p[0] * p[0])).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn poisson_1d_energy_error_is_second_order_in_h() {
        // Energy-norm-squared error of the nodally exact P1 solution equals
        // int (u' - u_h')^2 = sum_e h^3 / 12 = h^2 / 6 on (-1,1).
        let err = |n: usize| {
            let m = mesh(DomainKind::Interval, n);
            let sys = assemble_weighted_laplacian(&m, &vec![1.0; n]).unwrap();
            let rhs = assemble_load(&m, &vec![1.0; n + 1]).unwrap();
            let x = solve_spd(&sys.with_rhs(rhs).with_dirichlet(vec![(0, 0.0), (n, 0.0)]), 1e-13, None).unwrap();
            // int_e (u' - s)^2 with u' = -x, by 3-point Gauss (exact for quadratics).
            let mut e2 = 0.0;
            for e in 0..n {
                let c = m.element(e);
                let (a, b) = (m.node(c[0])[0], m.node(c[1])[0]);
                let s = (x[c[1]] - x[c[0]]) / (b - a);
                let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
                for (t, w) in [(0.0, 8.0 / 9.0), (-(0.6f64).sqrt(), 5.0 / 9.0), ((0.6f64).sqrt(), 5.0 / 9.0)] {
                    let xq = mid + half * t;
                    e2 += w * half * (-xq - s).powi(2);
                }
            }
            e2
        };
        let (coarse, fine) = (err(16), err(32));
        assert!((coarse / fine - 4.0).abs() < 1e-6);
        assert!((fine - (2.0f64 / 32.0).powi(2) / 6.0).abs() < 1e-12);
    }
}
