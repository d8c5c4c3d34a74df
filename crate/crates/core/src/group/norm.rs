//! Homogeneous norms, quasidistance and ball volumes.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{Dilation, HomogeneousGroup};

fn scaled_sq(x: &[f64], sigma: &[u32], rho: f64) -> f64 {
    x.iter().zip(sigma).map(|(xi, &s)| (xi / rho.powi(s as i32)).powi(2)).sum()
}

/// ρ with |D_{1/ρ} x| = 1, by bisection on log ρ.
pub fn hnorm(x: &[f64], d: &Dilation) -> f64 {
    let sigma = d.sigma();
    if x.iter().all(|&v| v == 0.0) {
        return 0.0;
    }
    let (mut lo, mut hi) = (1.0_f64, 1.0_f64);
    while scaled_sq(x, sigma, hi) > 1.0 {
        hi *= 2.0;
    }
    while scaled_sq(x, sigma, lo) < 1.0 {
        lo *= 0.5;
    }
    while hi / lo - 1.0 > 1e-14 {
        let mid = (lo * hi).sqrt();
        if mid <= lo || mid >= hi {
            break;
        }
        if scaled_sq(x, sigma, mid) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    (lo * hi).sqrt()
}

/// Σ |x_j|^{1/σ_j}.
pub fn hnorm_sum(x: &[f64], d: &Dilation) -> f64 {
    x.iter().zip(d.sigma()).map(|(xi, &s)| xi.abs().powf(1.0 / s as f64)).sum()
}

/// d(x, y) = ||y^{-1} ∘ x||.
pub fn qdist(x: &[f64], y: &[f64], g: &HomogeneousGroup) -> f64 {
    let law = g.law();
    hnorm(&law.compose(&law.inverse(y), x), g.dilation())
}

/// Quasidistance built on the sum norm; cheaper, used in Hölder sampling.
pub fn qdist_sum(x: &[f64], y: &[f64], g: &HomogeneousGroup) -> f64 {
    let law = g.law();
    hnorm_sum(&law.compose(&law.inverse(y), x), g.dilation())
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QuasiConstants {
    /// max d(x,y) / (d(x,z) + d(z,y))
    pub triangle: f64,
    /// max d(x,y) / d(y,x)
    pub symmetry: f64,
    /// max of hnorm/hnorm_sum and its reciprocal
    pub norm_equivalence: f64,
    pub samples: usize,
}

/// Empirical constants of the quasi-triangle, quasi-symmetry and norm-equivalence laws.
pub fn quasi_constants(g: &HomogeneousGroup, samples: usize, seed: u64) -> QuasiConstants {
    let n = g.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let pt = |rng: &mut ChaCha8Rng| -> Vec<f64> { (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect() };
    let (mut tri, mut sym, mut eq) = (1.0_f64, 1.0_f64, 1.0_f64);
    for _ in 0..samples {
        let (x, y, z) = (pt(&mut rng), pt(&mut rng), pt(&mut rng));
        let dxy = qdist(&x, &y, g);
        let dyx = qdist(&y, &x, g);
        let s = qdist(&x, &z, g) + qdist(&z, &y, g);
        if s > 0.0 {
            tri = tri.max(dxy / s);
        }
        if dyx > 0.0 {
            sym = sym.max(dxy / dyx);
        }
        let a = hnorm(&x, g.dilation());
        let b = hnorm_sum(&x, g.dilation());
        if a > 0.0 && b > 0.0 {
            eq = eq.max(a / b).max(b / a);
        }
    }
    QuasiConstants { triangle: tri, symmetry: sym, norm_equivalence: eq, samples }
}

/// Lebesgue measure of the Euclidean unit ball in R^n, which is also B(0,1).
pub fn unit_ball_volume(n: usize) -> f64 {
    let mut v = [1.0, 2.0];
    for k in 2..=n {
        let next = 2.0 * std::f64::consts::PI / k as f64 * v[k % 2];
        v[k % 2] = next;
    }
    v[n % 2]
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallVolume {
    pub r: f64,
    pub volume: f64,
    pub predicted: f64,
    pub std_error: f64,
    pub rel_deviation: f64,
}

/// Monte Carlo volume of {||x|| < r} inside the box |x_i| ≤ r^{σ_i}.
pub fn ball_volume_check(g: &HomogeneousGroup, radii: &[f64], mc_samples: usize, seed: u64) -> Vec<BallVolume> {
    let d = g.dilation();
    let n = g.n();
    let unit = unit_ball_volume(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    radii
        .iter()
        .map(|&r| {
            assert!(r > 0.0, "radii must be positive");
            let half: Vec<f64> = d.sigma().iter().map(|&s| r.powi(s as i32)).collect();
            let box_vol: f64 = half.iter().map(|h| 2.0 * h).product();
            let mut hits = 0usize;
            let mut x = vec![0.0; n];
            for _ in 0..mc_samples {
                for (xi, h) in x.iter_mut().zip(&half) {
                    *xi = rng.gen_range(-h..*h);
                }
                if scaled_sq(&x, d.sigma(), r) < 1.0 {
                    hits += 1;
                }
            }
            let p = hits as f64 / mc_samples as f64;
            let volume = p * box_vol;
            let std_error = box_vol * (p * (1.0 - p) / mc_samples as f64).sqrt();
            let predicted = unit * r.powi(g.q() as i32);
            BallVolume { r, volume, predicted, std_error, rel_deviation: (volume - predicted).abs() / predicted }
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hnorm_by_hand() {
        let d = Dilation::new(vec![1, 2]).unwrap();
        assert!((hnorm(&[0.0, 4.0], &d) - 2.0).abs() < 1e-12);
        assert_eq!(hnorm(&[0.0, 0.0], &d), 0.0);
        assert!((hnorm(&[0.6, 0.8], &d) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn sum_norm_by_hand() {
        let d = Dilation::new(vec![1, 2]).unwrap();
        assert_eq!(hnorm_sum(&[3.0, 4.0], &d), 5.0);
        assert_eq!(hnorm_sum(&[0.0, 0.0], &d), 0.0);
    }

    #[test]
    fn ball_volumes_of_low_dimensions() {
        assert!((unit_ball_volume(1) - 2.0).abs() < 1e-15);
        assert!((unit_ball_volume(2) - std::f64::consts::PI).abs() < 1e-15);
        assert!((unit_ball_volume(3) - 4.0 / 3.0 * std::f64::consts::PI).abs() < 1e-14);
    }
}
