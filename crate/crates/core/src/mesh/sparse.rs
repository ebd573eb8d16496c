use crate::error::{Error, Result};

pub const DEFAULT_LINEAR_TOL: f64 = 1e-10;

/// Compressed sparse row matrix with sorted column indices.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix {
    n: usize,
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
}

impl CsrMatrix {
    pub fn from_parts(n: usize, row_ptr: Vec<usize>, col_idx: Vec<usize>, values: Vec<f64>) -> Self {
        debug_assert_eq!(row_ptr.len(), n + 1);
        debug_assert_eq!(col_idx.len(), values.len());
        CsrMatrix { n, row_ptr, col_idx, values }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        self.col_idx[r.clone()].iter().copied().zip(self.values[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let r = self.row_ptr[i]..self.row_ptr[i + 1];
        match self.col_idx[r.clone()].binary_search(&j) {
            Ok(k) => self.values[r.start + k],
            Err(_) => 0.0,
        }
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    pub fn mul_vec(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate().take(self.n) {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[k] * x[self.col_idx[k]];
            }
            *yi = s;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i)).collect()
    }

    /// Largest absolute row sum.
    pub fn norm_inf(&self) -> f64 {
        (0..self.n).map(|i| self.row(i).map(|(_, v)| v.abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    /// Largest entrywise asymmetry relative to the largest entry.
    pub fn asymmetry(&self) -> f64 {
        let scale = self.values.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(f64::MIN_POSITIVE);
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i)).abs() / scale);
            }
        }
        worst
    }
}

/// Linear system with Dirichlet constraints `x[i] = value`.
#[derive(Debug, Clone)]
pub struct SparseSPDSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    pub constrained: Vec<(usize, f64)>,
}

impl SparseSPDSystem {
    pub fn new(matrix: CsrMatrix) -> Self {
        let n = matrix.dim();
        SparseSPDSystem { matrix, rhs: vec![0.0; n], constrained: Vec::new() }
    }

    pub fn with_rhs(mut self, rhs: Vec<f64>) -> Self {
        self.rhs = rhs;
        self
    }

    pub fn with_dirichlet(mut self, constrained: Vec<(usize, f64)>) -> Self {
        self.constrained = constrained;
        self
    }
}

/// Jacobi-preconditioned conjugate gradients on the unconstrained unknowns.
///
/// Iterates until `||r|| <= tol * ||b - A x_D||`, where `x_D` carries only the
/// constrained values. `initial` seeds the free unknowns. Fully sequential,
/// so the result is bitwise reproducible.
pub fn solve_spd(system: &SparseSPDSystem, tol: f64, initial: Option<&[f64]>) -> Result<Vec<f64>> {
    let a = &system.matrix;
    let n = a.dim();
    if system.rhs.len() != n {
        return Err(Error::FieldLength { expected: n, got: system.rhs.len() });
    }
    let mut fixed = vec![false; n];
    let mut x = match initial {
        Some(x0) if x0.len() == n => x0.to_vec(),
        _ => vec![0.0; n],
    };
    for &(i, v) in &system.constrained {
        fixed[i] = true;
        x[i] = v;
    }
    let mut lift = vec![0.0; n];
    {
        let mut xd = vec![0.0; n];
        for &(i, v) in &system.constrained {
            xd[i] = v;
        }
        a.mul_vec(&xd, &mut lift);
    }
    let b: Vec<f64> = (0..n).map(|i| if fixed[i] { 0.0 } else { system.rhs[i] - lift[i] }).collect();
    let b_norm = norm2(&b);
    if b_norm == 0.0 {
        for i in 0..n {
            if !fixed[i] {
                x[i] = 0.0;
            }
        }
        return Ok(x);
    }

    let apply = |v: &[f64], out: &mut [f64]| {
        a.mul_vec(v, out);
        for i in 0..n {
            if fixed[i] {
                out[i] = 0.0;
            }
        }
    };
    let inv_diag: Vec<f64> =
        a.diagonal().iter().enumerate().map(|(i, &d)| if fixed[i] || d == 0.0 { 0.0 } else { 1.0 / d }).collect();

    // Residual of the free block: r = b - A_ff x_f.
    let mut xf: Vec<f64> = (0..n).map(|i| if fixed[i] { 0.0 } else { x[i] }).collect();
    let mut ap = vec![0.0; n];
    apply(&xf, &mut ap);
    let mut r: Vec<f64> = (0..n).map(|i| b[i] - ap[i]).collect();
    let mut z: Vec<f64> = r.iter().zip(&inv_diag).map(|(r, d)| r * d).collect();
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let max_iter = 10 * n + 100;
    let mut res = norm2(&r) / b_norm;
    let mut it = 0;
    while res > tol {
        if it == max_iter {
            return Err(Error::LinearSolver { iterations: it, residual: res });
        }
        apply(&p, &mut ap);
        let pap = dot(&p, &ap);
        if !(pap > 0.0) {
            return Err(Error::LinearSolver { iterations: it, residual: res });
        }
        let alpha = rz / pap;
        for i in 0..n {
            xf[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        for i in 0..n {
            z[i] = r[i] * inv_diag[i];
        }
        let rz_next = dot(&r, &z);
        let beta = rz_next / rz;
        rz = rz_next;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
        res = norm2(&r) / b_norm;
        it += 1;
    }
    for i in 0..n {
        if !fixed[i] {
            x[i] = xf[i];
        }
    }
    Ok(x)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}
