//! Block structure of the drift matrix of a Kolmogorov operator.

use nalgebra::{DMatrix, DVector};
use num_traits::ToPrimitive;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::liealg::{rat, Polynomial, PolyVectorField};

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BlockCheck {
    /// the block form exists in some basis of R^n
    pub holds: bool,
    /// q_1, ..., q_k of the adapted basis, up to where the ranks stop growing
    pub blocks: Vec<usize>,
    /// the block form holds in the given coordinates
    pub literal: bool,
}

fn rank(m: &DMatrix<f64>) -> usize {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0;
    }
    let scale = m.iter().fold(0.0_f64, |a, v| a.max(v.abs())).max(1.0);
    m.clone().svd(false, false).singular_values.iter().filter(|&&s| s > 1e-10 * scale).count()
}

/// Superdiagonal blocks of rank q_j with zeros to their right, read off in the given coordinates.
fn literal_blocks(c: &DMatrix<f64>, q: usize) -> bool {
    let n = c.nrows();
    let (mut start, mut width) = (0, q);
    loop {
        let next = start + width;
        if next == n {
            return true;
        }
        let last = (next..n).rev().find(|&j| (start..next).any(|i| c[(i, j)] != 0.0));
        let Some(last) = last else {
            return false;
        };
        let qj = last + 1 - next;
        if qj > width || rank(&c.view((start, next), (width, qj)).into_owned()) != qj {
            return false;
        }
        start = next;
        width = qj;
    }
}

/// Whether C admits the block structure: with V_0 spanned by e_1..e_q and
/// V_{j+1} = V_j + V_j C (row vectors), the chain must reach R^n. The increments
/// dim V_j − dim V_{j−1} are the block sizes q_j of the adapted basis.
pub fn kolmogorov_block_check(c: &DMatrix<f64>, q: usize) -> BlockCheck {
    let n = c.nrows();
    assert_eq!(c.ncols(), n, "C must be square");
    assert!(q >= 1 && q <= n, "need 1 <= q <= n");
    let mut rows: Vec<DVector<f64>> = (0..q).map(|i| DVector::from_fn(n, |j, _| if i == j { 1.0 } else { 0.0 })).collect();
    let mut frontier = rows.clone();
    let mut dim = q;
    let mut blocks = Vec::new();
    while dim < n {
        let next: Vec<DVector<f64>> = frontier.iter().map(|r| c.tr_mul(r)).collect();
        rows.extend(next.iter().cloned());
        let r = rank(&DMatrix::from_columns(&rows));
        if r == dim {
            break;
        }
        blocks.push(r - dim);
        dim = r;
        frontier = next;
    }
    BlockCheck { holds: dim == n, blocks, literal: literal_blocks(c, q) }
}

/// X_0 = Σ c_ij x_i ∂_j + ∂_t and X_i = ∂_i for i < q on R^{n+1}, t last.
/// `c` entries must be exactly representable (integers or dyadic rationals).
pub fn kolmogorov_fields(c: &DMatrix<f64>, q: usize) -> Vec<PolyVectorField> {
    let n = c.nrows();
    let dim = n + 1;
    let to_rat = |v: f64| {
        let r = num_rational::BigRational::from_float(v).expect("finite entry");
        debug_assert_eq!(r.to_f64(), Some(v));
        r
    };
    let mut comps = vec![Polynomial::zero(dim); dim];
    for j in 0..n {
        for i in 0..n {
            if c[(i, j)] != 0.0 {
                comps[j] = &comps[j] + &Polynomial::var(dim, i).scale(&to_rat(c[(i, j)]));
            }
        }
    }
    comps[n] = Polynomial::constant(dim, rat(1, 1));
    let mut out = vec![PolyVectorField::with_weight(comps, 2).expect("weight 2")];
    for i in 0..q {
        out.push(PolyVectorField::coordinate(dim, i));
    }
    out
}

/// Nonincreasing block sizes q ≥ q_1 ≥ ... ≥ q_k ≥ 1 summing to n.
fn block_sizes(n: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let mut sizes = vec![rng.gen_range(1..=n)];
    let mut left = n - sizes[0];
    while left > 0 {
        let top = (*sizes.last().unwrap()).min(left);
        let s = rng.gen_range(1..=top);
        sizes.push(s);
        left -= s;
    }
    sizes
}

/// Small drift matrices with n ≤ `max_n`. Most are in staircase form (integer entries left of
/// and below the superdiagonal blocks, zeros to their right, some blocks made rank deficient);
/// about a quarter are sparse matrices with no imposed structure. Returns (C, q) pairs.
pub fn kolmogorov_corpus(count: usize, max_n: usize, seed: u64) -> Vec<(DMatrix<f64>, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let n = rng.gen_range(1..=max_n);
            if rng.gen_bool(0.25) {
                let c = DMatrix::from_fn(n, n, |_, _| if rng.gen_bool(0.4) { rng.gen_range(-1i32..=1) as f64 } else { 0.0 });
                return (c, rng.gen_range(1..=n));
            }
            let sizes = block_sizes(n, &mut rng);
            let mut c = DMatrix::zeros(n, n);
            let mut start = 0;
            for w in sizes.windows(2) {
                let (rows, cols) = (start..start + w[0], start + w[0]..start + w[0] + w[1]);
                for i in rows.clone() {
                    for j in 0..cols.end {
                        c[(i, j)] = rng.gen_range(-2i32..=2) as f64;
                    }
                }
                // the block itself: full rank from an identity part plus noise
                for (a, j) in cols.clone().enumerate() {
                    for i in rows.clone() {
                        c[(i, j)] = if i - start == a { 1.0 + rng.gen_range(1i32..=2) as f64 } else { rng.gen_range(-1i32..=1) as f64 * 0.5 };
                    }
                }
                if rng.gen_bool(0.35) {
                    // copy one block column onto another, or zero it
                    let j = cols.start + rng.gen_range(0..w[1]);
                    for i in rows.clone() {
                        c[(i, j)] = if w[1] > 1 && j > cols.start { c[(i, cols.start)] } else { 0.0 };
                    }
                }
                start += w[0];
            }
            for i in start..n {
                for j in 0..n {
                    c[(i, j)] = rng.gen_range(-2i32..=2) as f64;
                }
            }
            (c, sizes[0])
        })
        .collect()
}
