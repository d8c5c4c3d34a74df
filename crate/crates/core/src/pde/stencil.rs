//! Difference stencils for X_i u and X_iX_j u on box grids.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::Grid;
use super::sparse::{Csr, CsrBuilder};
use super::PdeError;
use crate::liealg::{CompiledPoly, PolyVectorField};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Scheme {
    Centered,
    /// Backward differences where the coefficient is positive, forward where negative.
    Upwind,
}

pub(crate) type Row = Vec<(usize, f64)>;

/// Second-order ∂_k weights at node `i`: centered inside, one-sided on the faces.
pub(crate) fn d1(grid: &Grid, i: usize, k: usize) -> Row {
    let h = grid.h()[k];
    let s = grid.stride(k);
    let a = grid.axis_index(i, k);
    let m = grid.nodes()[k];
    if a == 0 {
        vec![(i, -1.5 / h), (i + s, 2.0 / h), (i + 2 * s, -0.5 / h)]
    } else if a + 1 == m {
        vec![(i, 1.5 / h), (i - s, -2.0 / h), (i - 2 * s, 0.5 / h)]
    } else {
        vec![(i - s, -0.5 / h), (i + s, 0.5 / h)]
    }
}

/// First-order one-sided ∂_k weights; falls back to the other side at a face.
pub(crate) fn d1_onesided(grid: &Grid, i: usize, k: usize, forward: bool) -> Row {
    let h = grid.h()[k];
    let s = grid.stride(k);
    let a = grid.axis_index(i, k);
    let m = grid.nodes()[k];
    let forward = if a == 0 { true } else if a + 1 == m { false } else { forward };
    if forward {
        vec![(i, -1.0 / h), (i + s, 1.0 / h)]
    } else {
        vec![(i - s, -1.0 / h), (i, 1.0 / h)]
    }
}

/// ∂_kk weights: three-point inside, four-point one-sided on the faces.
pub(crate) fn d2(grid: &Grid, i: usize, k: usize) -> Row {
    let h2 = grid.h()[k].powi(2);
    let s = grid.stride(k);
    let a = grid.axis_index(i, k);
    let m = grid.nodes()[k];
    let pts: Vec<(isize, f64)> = if a == 0 {
        if m >= 4 {
            vec![(0, 2.0), (1, -5.0), (2, 4.0), (3, -1.0)]
        } else {
            vec![(0, 1.0), (1, -2.0), (2, 1.0)]
        }
    } else if a + 1 == m {
        if m >= 4 {
            vec![(0, 2.0), (-1, -5.0), (-2, 4.0), (-3, -1.0)]
        } else {
            vec![(0, 1.0), (-1, -2.0), (-2, 1.0)]
        }
    } else {
        vec![(-1, 1.0), (0, -2.0), (1, 1.0)]
    };
    pts.into_iter().map(|(o, w)| ((i as isize + o * s as isize) as usize, w / h2)).collect()
}

/// ∂_k∂_l (k ≠ l) as a product of first-derivative stencils.
pub(crate) fn d_mixed(grid: &Grid, i: usize, k: usize, l: usize) -> Row {
    let dk = d1(grid, i, k);
    let mut out = Vec::new();
    for (j, wk) in dk {
        for (m, wl) in d1(grid, j, l) {
            out.push((m, wk * wl));
        }
    }
    out
}

pub(crate) fn compile_field(f: &PolyVectorField) -> Vec<CompiledPoly> {
    f.components().iter().map(|p| p.compile()).collect()
}

fn check_dim(f: &PolyVectorField, grid: &Grid) -> Result<(), PdeError> {
    if f.n() != grid.dim() {
        return Err(PdeError::Dimension { expected: grid.dim(), found: f.n() });
    }
    Ok(())
}

fn build(grid: &Grid, row: impl Fn(usize) -> Row + Sync + Send) -> Csr {
    let rows: Vec<Row> = (0..grid.len()).into_par_iter().map(row).collect();
    let mut b = CsrBuilder::new(grid.len());
    for r in rows {
        b.push_row(r.into_iter().filter(|e| e.1 != 0.0).collect());
    }
    b.finish()
}

/// Rows approximate Σ_k c_k(x) ∂_k u at every node.
pub fn discretize_first(field: &PolyVectorField, grid: &Grid, scheme: Scheme) -> Result<Csr, PdeError> {
    check_dim(field, grid)?;
    let c = compile_field(field);
    Ok(build(grid, |i| {
        let x = grid.point(i);
        let mut row = Vec::new();
        for (k, ck) in c.iter().enumerate() {
            if ck.is_zero() {
                continue;
            }
            let v = ck.eval(&x);
            if v == 0.0 {
                continue;
            }
            let w = match scheme {
                Scheme::Centered => d1(grid, i, k),
                Scheme::Upwind => d1_onesided(grid, i, k, v < 0.0),
            };
            row.extend(w.into_iter().map(|(j, a)| (j, a * v)));
        }
        row
    }))
}

/// Rows approximate X_i X_j u = Σ c^i_k c^j_l ∂_k∂_l u + Σ (X_i c^j_l) ∂_l u.
pub fn discretize_second(fi: &PolyVectorField, fj: &PolyVectorField, grid: &Grid) -> Result<Csr, PdeError> {
    check_dim(fi, grid)?;
    check_dim(fj, grid)?;
    let ci = compile_field(fi);
    let cj = compile_field(fj);
    let dcj: Vec<CompiledPoly> = fj.components().iter().map(|p| fi.apply(p).compile()).collect();
    let n = grid.dim();
    Ok(build(grid, |i| {
        let x = grid.point(i);
        let a: Vec<f64> = ci.iter().map(|p| p.eval(&x)).collect();
        let b: Vec<f64> = cj.iter().map(|p| p.eval(&x)).collect();
        let mut row = Vec::new();
        for k in 0..n {
            for l in 0..n {
                let w = a[k] * b[l];
                if w == 0.0 {
                    continue;
                }
                let st = if k == l { d2(grid, i, k) } else { d_mixed(grid, i, k, l) };
                row.extend(st.into_iter().map(|(j, s)| (j, s * w)));
            }
        }
        for (l, p) in dcj.iter().enumerate() {
            let w = p.eval(&x);
            if w != 0.0 {
                row.extend(d1(grid, i, l).into_iter().map(|(j, s)| (j, s * w)));
            }
        }
        row
    }))
}
