//! CSR matrices and the linear solvers behind `solve_linear`.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::PdeError;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Csr {
    pub rows: usize,
    pub cols: usize,
    pub indptr: Vec<usize>,
    pub indices: Vec<usize>,
    pub data: Vec<f64>,
}

/// Row-by-row builder; duplicate columns within a row are summed.
pub struct CsrBuilder {
    cols: usize,
    indptr: Vec<usize>,
    indices: Vec<usize>,
    data: Vec<f64>,
}

impl CsrBuilder {
    pub fn new(cols: usize) -> Self {
        CsrBuilder { cols, indptr: vec![0], indices: Vec::new(), data: Vec::new() }
    }

    pub fn push_row(&mut self, mut entries: Vec<(usize, f64)>) {
        entries.sort_by_key(|e| e.0);
        let mut last: Option<usize> = None;
        for (c, v) in entries {
            debug_assert!(c < self.cols);
            if last == Some(c) {
                *self.data.last_mut().unwrap() += v;
            } else {
                self.indices.push(c);
                self.data.push(v);
                last = Some(c);
            }
        }
        self.indptr.push(self.indices.len());
    }

    pub fn finish(self) -> Csr {
        Csr { rows: self.indptr.len() - 1, cols: self.cols, indptr: self.indptr, indices: self.indices, data: self.data }
    }
}

impl Csr {
    pub fn identity(n: usize) -> Csr {
        Csr { rows: n, cols: n, indptr: (0..=n).collect(), indices: (0..n).collect(), data: vec![1.0; n] }
    }

    pub fn from_rows(cols: usize, rows: Vec<Vec<(usize, f64)>>) -> Csr {
        let mut b = CsrBuilder::new(cols);
        for r in rows {
            b.push_row(r);
        }
        b.finish()
    }

    pub fn nnz(&self) -> usize {
        self.data.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, f64)> + '_ {
        let r = self.indptr[i]..self.indptr[i + 1];
        self.indices[r.clone()].iter().copied().zip(self.data[r].iter().copied())
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.row(i).find(|&(c, _)| c == j).map_or(0.0, |(_, v)| v)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.rows).map(|i| self.get(i, i)).collect()
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.cols);
        (0..self.rows).map(|i| self.row(i).map(|(j, v)| v * x[j]).sum()).collect()
    }

    /// A + diag(d) (square only).
    pub fn add_diagonal(&self, d: &[f64]) -> Csr {
        assert_eq!(self.rows, self.cols);
        let rows = (0..self.rows)
            .map(|i| {
                let mut r: Vec<(usize, f64)> = self.row(i).collect();
                r.push((i, d[i]));
                r
            })
            .collect();
        Csr::from_rows(self.cols, rows)
    }

    pub fn to_dense(&self) -> DMatrix<f64> {
        let mut m = DMatrix::zeros(self.rows, self.cols);
        for i in 0..self.rows {
            for (j, v) in self.row(i) {
                m[(i, j)] += v;
            }
        }
        m
    }

    /// True when every off-diagonal entry is ≥ 0 and every diagonal entry < 0.
    pub fn has_monotone_sign_pattern(&self) -> bool {
        (0..self.rows).all(|i| self.row(i).all(|(j, v)| if i == j { v < 0.0 } else { v >= -1e-12 * v.abs().max(1.0) }))
    }
}

pub fn inf_norm(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

fn residual(a: &Csr, x: &[f64], b: &[f64]) -> Vec<f64> {
    a.matvec(x).iter().zip(b).map(|(ax, bi)| bi - ax).collect()
}

/// Systems at or below this size are factored densely.
pub const DENSE_LIMIT: usize = 500;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearSolveInfo {
    pub method: String,
    pub iterations: usize,
    pub residual: f64,
}

/// Solves A x = b to ‖b − A x‖_∞ ≤ tol.
pub fn solve_sparse(a: &Csr, b: &[f64], x0: Option<&[f64]>, tol: f64, max_iter: usize) -> Result<(Vec<f64>, LinearSolveInfo), PdeError> {
    assert_eq!(a.rows, a.cols);
    assert_eq!(b.len(), a.rows);
    if a.rows == 0 {
        return Ok((Vec::new(), LinearSolveInfo { method: "empty".into(), iterations: 0, residual: 0.0 }));
    }
    if a.rows <= DENSE_LIMIT {
        return dense_solve(a, b, tol);
    }
    bicgstab(a, b, x0, tol, max_iter)
}

fn dense_solve(a: &Csr, b: &[f64], tol: f64) -> Result<(Vec<f64>, LinearSolveInfo), PdeError> {
    let lu = a.to_dense().lu();
    let mut x = lu
        .solve(&DVector::from_column_slice(b))
        .ok_or_else(|| PdeError::Singular)?
        .as_slice()
        .to_vec();
    let mut r = residual(a, &x, b);
    let mut history = vec![inf_norm(&r)];
    // A couple of refinement steps recover digits lost to conditioning.
    for _ in 0..3 {
        if *history.last().unwrap() <= tol {
            break;
        }
        let d = lu.solve(&DVector::from_column_slice(&r)).ok_or(PdeError::Singular)?;
        for (xi, di) in x.iter_mut().zip(d.iter()) {
            *xi += di;
        }
        r = residual(a, &x, b);
        history.push(inf_norm(&r));
    }
    let res = *history.last().unwrap();
    if res > tol || !res.is_finite() {
        return Err(PdeError::NoConvergence { history });
    }
    Ok((x, LinearSolveInfo { method: "dense-lu".into(), iterations: history.len() - 1, residual: res }))
}

/// Incomplete LU with the sparsity pattern of A.
pub struct Ilu0 {
    a: Csr,
    diag_pos: Vec<usize>,
}

impl Ilu0 {
    pub fn new(a: &Csr) -> Result<Self, PdeError> {
        let mut m = a.clone();
        let n = m.rows;
        let mut diag_pos = vec![usize::MAX; n];
        for i in 0..n {
            for p in m.indptr[i]..m.indptr[i + 1] {
                if m.indices[p] == i {
                    diag_pos[i] = p;
                }
            }
            if diag_pos[i] == usize::MAX {
                return Err(PdeError::Singular);
            }
        }
        let mut pos = vec![usize::MAX; n];
        for i in 0..n {
            let (s, e) = (m.indptr[i], m.indptr[i + 1]);
            for p in s..e {
                pos[m.indices[p]] = p;
            }
            for p in s..e {
                let k = m.indices[p];
                if k >= i {
                    break;
                }
                let pivot = m.data[diag_pos[k]];
                if pivot == 0.0 {
                    return Err(PdeError::Singular);
                }
                let lik = m.data[p] / pivot;
                m.data[p] = lik;
                for q in diag_pos[k] + 1..m.indptr[k + 1] {
                    let j = m.indices[q];
                    let t = pos[j];
                    if t != usize::MAX && t >= s && t < e {
                        m.data[t] -= lik * m.data[q];
                    }
                }
            }
            for p in s..e {
                pos[m.indices[p]] = usize::MAX;
            }
            if m.data[diag_pos[i]] == 0.0 {
                return Err(PdeError::Singular);
            }
        }
        Ok(Ilu0 { a: m, diag_pos })
    }

    pub fn apply(&self, r: &[f64]) -> Vec<f64> {
        let m = &self.a;
        let n = m.rows;
        let mut y = r.to_vec();
        for i in 0..n {
            let mut s = y[i];
            for p in m.indptr[i]..self.diag_pos[i] {
                s -= m.data[p] * y[m.indices[p]];
            }
            y[i] = s;
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for p in self.diag_pos[i] + 1..m.indptr[i + 1] {
                s -= m.data[p] * y[m.indices[p]];
            }
            y[i] = s / m.data[self.diag_pos[i]];
        }
        y
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Right-preconditioned BiCGSTAB with ILU(0), restarted on breakdown.
pub fn bicgstab(a: &Csr, b: &[f64], x0: Option<&[f64]>, tol: f64, max_iter: usize) -> Result<(Vec<f64>, LinearSolveInfo), PdeError> {
    let n = a.rows;
    let ilu = Ilu0::new(a)?;
    let mut x = x0.map(<[f64]>::to_vec).unwrap_or_else(|| ilu.apply(b));
    let mut history = Vec::new();
    let mut iters = 0;
    let mut best = f64::INFINITY;
    let mut stall = 0;
    'outer: while iters < max_iter {
        let mut r = residual(a, &x, b);
        let rn = inf_norm(&r);
        history.push(rn);
        if rn <= tol {
            return Ok((x, LinearSolveInfo { method: "ilu0-bicgstab".into(), iterations: iters, residual: rn }));
        }
        if !rn.is_finite() {
            break;
        }
        if rn < 0.5 * best {
            best = rn;
            stall = 0;
        } else {
            stall += 1;
            if stall > 8 {
                break;
            }
        }
        let r0 = r.clone();
        let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
        let mut v = vec![0.0; n];
        let mut p = vec![0.0; n];
        while iters < max_iter {
            iters += 1;
            let rho_new = dot(&r0, &r);
            if rho_new.abs() < 1e-300 || omega == 0.0 {
                continue 'outer;
            }
            let beta = (rho_new / rho) * (alpha / omega);
            rho = rho_new;
            for i in 0..n {
                p[i] = r[i] + beta * (p[i] - omega * v[i]);
            }
            let ph = ilu.apply(&p);
            v = a.matvec(&ph);
            let d = dot(&r0, &v);
            if d == 0.0 {
                continue 'outer;
            }
            alpha = rho / d;
            let s: Vec<f64> = r.iter().zip(&v).map(|(ri, vi)| ri - alpha * vi).collect();
            for i in 0..n {
                x[i] += alpha * ph[i];
            }
            if inf_norm(&s) <= 0.5 * tol {
                continue 'outer;
            }
            let sh = ilu.apply(&s);
            let t = a.matvec(&sh);
            let tt = dot(&t, &t);
            if tt == 0.0 {
                continue 'outer;
            }
            omega = dot(&t, &s) / tt;
            for i in 0..n {
                x[i] += omega * sh[i];
                r[i] = s[i] - omega * t[i];
            }
            // Recompute the true residual periodically to avoid drift.
            if iters % 25 == 0 || inf_norm(&r) <= 0.5 * tol {
                continue 'outer;
            }
        }
    }
    let r = residual(a, &x, b);
    history.push(inf_norm(&r));
    if inf_norm(&r) <= tol {
        return Ok((x, LinearSolveInfo { method: "ilu0-bicgstab".into(), iterations: iters, residual: inf_norm(&r) }));
    }
    Err(PdeError::NoConvergence { history })
}
