//! Discrete L^p, Hölder and S^p diagnostics.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::grid::Grid;
use super::stencil::{discretize_first, discretize_second, Scheme};
use super::PdeError;
use crate::group::{qdist_sum, HomogeneousGroup};
use crate::liealg::PolyVectorField;

/// Trapezoid weights: cell volume times 1/2 per axis on which the node lies on a face.
pub fn quadrature_weights(grid: &Grid) -> Vec<f64> {
    let vol = grid.cell_volume();
    (0..grid.len())
        .map(|i| {
            let mut w = vol;
            for k in 0..grid.dim() {
                let a = grid.axis_index(i, k);
                if a == 0 || a + 1 == grid.nodes()[k] {
                    w *= 0.5;
                }
            }
            w
        })
        .collect()
}

pub fn lp_norm(values: &[f64], weights: &[f64], p: f64) -> f64 {
    if p.is_infinite() {
        return values.iter().fold(0.0, |m, v| m.max(v.abs()));
    }
    values.iter().zip(weights).map(|(v, w)| w * v.abs().powf(p)).sum::<f64>().powf(1.0 / p)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LpNorms {
    pub p: f64,
    pub u: f64,
    pub x0: f64,
    /// ‖X_i u‖ for i = 1..q
    pub xi: Vec<f64>,
    /// ‖X_iX_j u‖ for i, j = 1..q
    pub xixj: Vec<Vec<f64>>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HolderReport {
    pub alpha: f64,
    pub seminorm: f64,
    pub pairs: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SobolevEntry {
    pub p: f64,
    pub value: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct NormReport {
    pub sup: f64,
    pub lp: Vec<LpNorms>,
    pub holder: HolderReport,
    pub sobolev: Vec<SobolevEntry>,
}

/// Field derivatives of u on the whole grid: X_0 u, X_i u and X_iX_j u.
pub struct Derivatives {
    pub x0: Vec<f64>,
    pub xi: Vec<Vec<f64>>,
    pub xixj: Vec<Vec<Vec<f64>>>,
}

/// `fields[0]` is X_0, the rest X_1..X_q.
pub fn field_derivatives(u: &[f64], fields: &[PolyVectorField], grid: &Grid) -> Result<Derivatives, PdeError> {
    let x0 = discretize_first(&fields[0], grid, Scheme::Centered)?.matvec(u);
    let gens = &fields[1..];
    let xi = gens
        .iter()
        .map(|f| Ok(discretize_first(f, grid, Scheme::Centered)?.matvec(u)))
        .collect::<Result<Vec<_>, PdeError>>()?;
    let xixj = gens
        .iter()
        .map(|fi| gens.iter().map(|fj| Ok(discretize_second(fi, fj, grid)?.matvec(u))).collect())
        .collect::<Result<Vec<Vec<_>>, PdeError>>()?;
    Ok(Derivatives { x0, xi, xixj })
}

/// Node pairs for Hölder quotients: every node with its axis neighbours at
/// distances 1, 2, 4, ... plus random partners, capped at `max_pairs`.
pub fn holder_pairs(grid: &Grid, max_pairs: usize, seed: u64) -> Vec<(usize, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pairs = Vec::new();
    for i in 0..grid.len() {
        for k in 0..grid.dim() {
            let mut d = 1isize;
            while d < grid.nodes()[k] as isize {
                if let Some(j) = grid.neighbor(i, k, d) {
                    pairs.push((i, j));
                }
                d *= 2;
            }
        }
        for _ in 0..2 {
            let j = rng.gen_range(0..grid.len());
            if j != i {
                pairs.push((i, j));
            }
        }
    }
    if pairs.len() > max_pairs {
        // deterministic thinning by stride keeps the shell mix
        let stride = pairs.len().div_ceil(max_pairs);
        pairs = pairs.into_iter().step_by(stride).collect();
    }
    pairs
}

/// sup |u(x) − u(y)| / d(x,y)^α over the sampled pairs, d = sum-norm quasidistance.
pub fn holder_seminorm(values: &[f64], grid: &Grid, alpha: f64, group: &HomogeneousGroup, pairs: &[(usize, usize)]) -> f64 {
    pairs
        .par_iter()
        .map(|&(i, j)| {
            let d = qdist_sum(&grid.point(i), &grid.point(j), group);
            if d > 0.0 {
                (values[i] - values[j]).abs() / d.powf(alpha)
            } else {
                0.0
            }
        })
        .reduce(|| 0.0, f64::max)
}

/// Discrete C^{1,α}_X norm: Σ over u and X_1u..X_qu of (sup + Hölder seminorm).
pub fn c1_alpha_norm(
    u: &[f64],
    fields: &[PolyVectorField],
    grid: &Grid,
    alpha: f64,
    group: &HomogeneousGroup,
    nodes: &[usize],
    seed: u64,
) -> Result<f64, PdeError> {
    let d = field_derivatives(u, fields, grid)?;
    let pairs: Vec<(usize, usize)> = {
        let keep: std::collections::HashSet<usize> = nodes.iter().copied().collect();
        holder_pairs(grid, 1_000_000, seed).into_iter().filter(|(i, j)| keep.contains(i) && keep.contains(j)).collect()
    };
    let part = |v: &[f64]| -> f64 {
        let sup = nodes.iter().fold(0.0_f64, |m, &i| m.max(v[i].abs()));
        sup + holder_seminorm(v, grid, alpha, group, &pairs)
    };
    Ok(part(u) + d.xi.iter().map(|v| part(v)).sum::<f64>())
}

/// Discrete S^p_X norm restricted to `nodes` (trapezoid weights).
pub fn sobolev_norm(u: &[f64], fields: &[PolyVectorField], grid: &Grid, p: f64, nodes: &[usize]) -> Result<f64, PdeError> {
    let d = field_derivatives(u, fields, grid)?;
    let w_all = quadrature_weights(grid);
    let w: Vec<f64> = nodes.iter().map(|&i| w_all[i]).collect();
    let sub = |v: &[f64]| -> Vec<f64> { nodes.iter().map(|&i| v[i]).collect() };
    let mut s = lp_norm(&sub(u), &w, p) + lp_norm(&sub(&d.x0), &w, p);
    s += d.xi.iter().map(|v| lp_norm(&sub(v), &w, p)).sum::<f64>();
    s += d.xixj.iter().flatten().map(|v| lp_norm(&sub(v), &w, p)).sum::<f64>();
    Ok(s)
}

/// Full report for a grid function u. `fields[0]` is the drift.
pub fn norms(
    u: &[f64],
    fields: &[PolyVectorField],
    grid: &Grid,
    ps: &[f64],
    alpha: f64,
    group: &HomogeneousGroup,
    seed: u64,
) -> Result<NormReport, PdeError> {
    assert!(ps.iter().all(|&p| p >= 1.0), "p must be at least 1");
    assert!(alpha > 0.0 && alpha <= 1.0, "alpha must lie in (0, 1]");
    let d = field_derivatives(u, fields, grid)?;
    let w = quadrature_weights(grid);
    let lp: Vec<LpNorms> = ps
        .iter()
        .map(|&p| LpNorms {
            p,
            u: lp_norm(u, &w, p),
            x0: lp_norm(&d.x0, &w, p),
            xi: d.xi.iter().map(|v| lp_norm(v, &w, p)).collect(),
            xixj: d.xixj.iter().map(|r| r.iter().map(|v| lp_norm(v, &w, p)).collect()).collect(),
        })
        .collect();
    let sobolev = lp
        .iter()
        .map(|e| SobolevEntry {
            p: e.p,
            value: e.u + e.x0 + e.xi.iter().sum::<f64>() + e.xixj.iter().flatten().sum::<f64>(),
        })
        .collect();
    let pairs = holder_pairs(grid, 1_000_000, seed);
    let holder = HolderReport { alpha, seminorm: holder_seminorm(u, grid, alpha, group, &pairs), pairs: pairs.len() };
    Ok(NormReport { sup: lp_norm(u, &w, f64::INFINITY), lp, holder, sobolev })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::group::abelian_group;

    fn line(m: usize) -> (Grid, Vec<PolyVectorField>, HomogeneousGroup) {
        let g = Grid::new(vec![0.0], vec![1.0], vec![m]).unwrap();
        let fields = vec![PolyVectorField::zero(1, 2), PolyVectorField::coordinate(1, 0)];
        (g, fields, abelian_group("line", vec![1]))
    }

    #[test]
    fn constant_function() {
        let (g, f, grp) = line(17);
        let u = vec![2.0; g.len()];
        let r = norms(&u, &f, &g, &[2.0], 0.5, &grp, 0).unwrap();
        assert!((r.lp[0].u - 2.0).abs() < 1e-12);
        assert!(r.lp[0].xi[0].abs() < 1e-12);
        assert_eq!(r.holder.seminorm, 0.0);
    }

    #[test]
    fn identity_function() {
        let (g, f, grp) = line(129);
        let u = g.sample(|x| x[0]);
        let r = norms(&u, &f, &g, &[2.0], 1.0, &grp, 0).unwrap();
        assert!((r.lp[0].u - (1.0f64 / 3.0).sqrt()).abs() < 1e-4);
        assert!((r.holder.seminorm - 1.0).abs() < 1e-12);
        assert!(r.sobolev[0].value >= r.lp[0].u);
    }
}
