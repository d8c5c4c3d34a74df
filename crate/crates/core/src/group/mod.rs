//! Homogeneous groups: polynomial group laws, dilations and homogeneous norms.

mod norm;
mod registry;

use num_traits::{Signed, ToPrimitive, Zero};
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand::SeedableRng;
use serde::{Deserialize, Serialize};

use crate::liealg::{parse_polynomial, rat, PolyVectorField, Polynomial, Rational};

pub use norm::{
    ball_volume_check, hnorm, hnorm_sum, qdist, qdist_sum, quasi_constants, unit_ball_volume, BallVolume,
    QuasiConstants,
};
pub use registry::{abelian_group, group_by_name, group_names};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum GroupError {
    #[error("dilation exponents must be nondecreasing and at least 1: {0:?}")]
    BadDilation(Vec<u32>),
    #[error("law has {found} components, expected {expected}")]
    Dimension { expected: usize, found: usize },
    #[error("0 is not a two-sided identity for the law")]
    Identity,
    #[error("dilations are not automorphisms of the law")]
    NotAutomorphism,
    #[error("malformed group text: {0}")]
    Format(String),
}

/// D_λ(x) = (λ^{σ_1} x_1, ..., λ^{σ_n} x_n).
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Dilation {
    sigma: Vec<u32>,
}

impl Dilation {
    pub fn new(sigma: Vec<u32>) -> Result<Self, GroupError> {
        if sigma.is_empty() || sigma[0] == 0 || sigma.windows(2).any(|w| w[0] > w[1]) {
            return Err(GroupError::BadDilation(sigma));
        }
        Ok(Dilation { sigma })
    }

    pub fn sigma(&self) -> &[u32] {
        &self.sigma
    }

    pub fn n(&self) -> usize {
        self.sigma.len()
    }

    pub fn apply(&self, lambda: f64, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.sigma).map(|(xi, &s)| xi * lambda.powi(s as i32)).collect()
    }

    pub fn apply_exact(&self, lambda: &Rational, x: &[Rational]) -> Vec<Rational> {
        x.iter().zip(&self.sigma).map(|(xi, &s)| xi * num_traits::pow(lambda.clone(), s as usize)).collect()
    }
}

/// Q = Σ σ_i.
pub fn homogeneous_dimension(d: &Dilation) -> u32 {
    d.sigma.iter().sum()
}

/// Polynomial group law on R^n. `compose[k]` lives in 2n variables with the
/// first operand in x1..xn and the second in x(n+1)..x(2n).
#[derive(Clone, Debug, PartialEq)]
pub struct GroupLaw {
    n: usize,
    compose: Vec<Polynomial>,
    inverse: Vec<Polynomial>,
    compose_f: Vec<crate::liealg::CompiledPoly>,
    inverse_f: Vec<crate::liealg::CompiledPoly>,
}

impl GroupLaw {
    pub fn new(compose: Vec<Polynomial>, inverse: Vec<Polynomial>) -> Result<Self, GroupError> {
        let n = inverse.len();
        if compose.len() != n {
            return Err(GroupError::Dimension { expected: n, found: compose.len() });
        }
        if compose.iter().any(|p| p.n() != 2 * n) || inverse.iter().any(|p| p.n() != n) {
            return Err(GroupError::Dimension { expected: n, found: compose.len() });
        }
        let law = GroupLaw {
            n,
            compose_f: compose.iter().map(Polynomial::compile).collect(),
            inverse_f: inverse.iter().map(Polynomial::compile).collect(),
            compose,
            inverse,
        };
        Ok(law)
    }

    /// Parses components written in x1..x(2n) (compose) and x1..xn (inverse).
    pub fn parse(compose: &[&str], inverse: &[&str]) -> Result<Self, GroupError> {
        let n = inverse.len();
        let c = compose
            .iter()
            .map(|s| parse_polynomial(s, 2 * n))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| GroupError::Format(e.to_string()))?;
        let i = inverse
            .iter()
            .map(|s| parse_polynomial(s, n))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| GroupError::Format(e.to_string()))?;
        Self::new(c, i)
    }

    /// The Abelian law x + y.
    pub fn abelian(n: usize) -> Self {
        let compose = (0..n).map(|k| &Polynomial::var(2 * n, k) + &Polynomial::var(2 * n, n + k)).collect();
        let inverse = (0..n).map(|k| -Polynomial::var(n, k)).collect();
        Self::new(compose, inverse).expect("abelian law")
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn compose_polys(&self) -> &[Polynomial] {
        &self.compose
    }

    pub fn inverse_polys(&self) -> &[Polynomial] {
        &self.inverse
    }

    /// 0 is a two-sided identity as a polynomial identity.
    pub fn identity_exact(&self) -> bool {
        let n = self.n;
        (0..n).all(|k| {
            let mut right = vec![Polynomial::zero(n); 2 * n];
            let mut left = vec![Polynomial::zero(n); 2 * n];
            for i in 0..n {
                right[i] = Polynomial::var(n, i);
                left[n + i] = Polynomial::var(n, i);
            }
            let x = Polynomial::var(n, k);
            self.compose[k].substitute(&right) == x && self.compose[k].substitute(&left) == x
        })
    }

    pub fn compose(&self, x: &[f64], y: &[f64]) -> Vec<f64> {
        let mut xy = Vec::with_capacity(2 * self.n);
        xy.extend_from_slice(x);
        xy.extend_from_slice(y);
        self.compose_f.iter().map(|p| p.eval(&xy)).collect()
    }

    pub fn inverse(&self, x: &[f64]) -> Vec<f64> {
        self.inverse_f.iter().map(|p| p.eval(x)).collect()
    }

    pub fn compose_exact(&self, x: &[Rational], y: &[Rational]) -> Vec<Rational> {
        let xy: Vec<Rational> = x.iter().chain(y).cloned().collect();
        self.compose.iter().map(|p| p.eval(&xy)).collect()
    }

    pub fn inverse_exact(&self, x: &[Rational]) -> Vec<Rational> {
        self.inverse.iter().map(|p| p.eval(x)).collect()
    }

    /// Left translation by a fixed ξ as polynomials in the moving point.
    pub fn left_translation(&self, xi: &[Rational]) -> Vec<Polynomial> {
        let n = self.n;
        let mut subs: Vec<Polynomial> = xi.iter().map(|c| Polynomial::constant(n, c.clone())).collect();
        subs.extend((0..n).map(|k| Polynomial::var(n, k)));
        self.compose.iter().map(|p| p.substitute(&subs)).collect()
    }

    /// (x∘y)∘z − x∘(y∘z) as polynomials in 3n variables.
    pub fn associator(&self) -> Vec<Polynomial> {
        let n = self.n;
        let m = 3 * n;
        let xy: Vec<Polynomial> = self.compose.iter().map(|p| p.embed(m, 0)).collect();
        let yz: Vec<Polynomial> = self.compose.iter().map(|p| p.embed(m, n)).collect();
        let z: Vec<Polynomial> = (0..n).map(|k| Polynomial::var(m, 2 * n + k)).collect();
        let x: Vec<Polynomial> = (0..n).map(|k| Polynomial::var(m, k)).collect();
        let left_subs: Vec<Polynomial> = xy.iter().cloned().chain(z).collect();
        let right_subs: Vec<Polynomial> = x.into_iter().chain(yz).collect();
        self.compose.iter().map(|p| &p.substitute(&left_subs) - &p.substitute(&right_subs)).collect()
    }

    /// True when every component has the dilation degree of its coordinate.
    pub fn is_homogeneous(&self, d: &Dilation) -> bool {
        let s2: Vec<u32> = d.sigma.iter().chain(&d.sigma).copied().collect();
        self.compose.iter().zip(&d.sigma).all(|(p, &s)| p.weighted_degrees(&s2).iter().all(|&w| w == s))
            && self.inverse.iter().zip(&d.sigma).all(|(p, &s)| p.weighted_degrees(&d.sigma).iter().all(|&w| w == s))
    }

    pub fn to_text(&self, name: &str, d: &Dilation) -> String {
        let doc = GroupText {
            name: name.to_string(),
            n: self.n,
            sigma: d.sigma.clone(),
            compose: self.compose.iter().map(|p| p.to_string()).collect(),
            inverse: self.inverse.iter().map(|p| p.to_string()).collect(),
        };
        serde_json::to_string_pretty(&doc).expect("serializable")
    }
}

#[derive(Serialize, Deserialize)]
struct GroupText {
    name: String,
    n: usize,
    sigma: Vec<u32>,
    compose: Vec<String>,
    inverse: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct HomogeneousGroup {
    pub name: String,
    law: GroupLaw,
    dilation: Dilation,
    q: u32,
}

impl HomogeneousGroup {
    pub fn new(name: &str, law: GroupLaw, dilation: Dilation) -> Result<Self, GroupError> {
        if law.n() != dilation.n() {
            return Err(GroupError::Dimension { expected: law.n(), found: dilation.n() });
        }
        if !law.identity_exact() {
            return Err(GroupError::Identity);
        }
        if !law.is_homogeneous(&dilation) {
            return Err(GroupError::NotAutomorphism);
        }
        let q = homogeneous_dimension(&dilation);
        Ok(HomogeneousGroup { name: name.to_string(), law, dilation, q })
    }

    pub fn n(&self) -> usize {
        self.law.n
    }

    pub fn law(&self) -> &GroupLaw {
        &self.law
    }

    pub fn dilation(&self) -> &Dilation {
        &self.dilation
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    pub fn to_text(&self) -> String {
        self.law.to_text(&self.name, &self.dilation)
    }

    pub fn from_text(s: &str) -> Result<Self, GroupError> {
        let doc: GroupText = serde_json::from_str(s).map_err(|e| GroupError::Format(e.to_string()))?;
        let c: Vec<&str> = doc.compose.iter().map(String::as_str).collect();
        let i: Vec<&str> = doc.inverse.iter().map(String::as_str).collect();
        if i.len() != doc.n {
            return Err(GroupError::Format(format!("expected {} inverse components", doc.n)));
        }
        Self::new(&doc.name, GroupLaw::parse(&c, &i)?, Dilation::new(doc.sigma)?)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GroupCheckReport {
    pub associativity_residual: f64,
    pub identity_ok: bool,
    pub inverse_ok: bool,
    pub automorphism_ok: bool,
    pub samples: usize,
    /// Associativity as a polynomial identity.
    pub associative_exact: bool,
    /// Largest sampled defect of x∘x^{-1} and x^{-1}∘x.
    pub inverse_residual: f64,
}

impl GroupCheckReport {
    pub fn passed(&self) -> bool {
        self.associativity_residual == 0.0
            && self.associative_exact
            && self.identity_ok
            && self.inverse_ok
            && self.automorphism_ok
    }
}

/// Rational point with entries k/1024 in [-1, 1].
pub(crate) fn random_rational_point(rng: &mut ChaCha8Rng, n: usize) -> Vec<Rational> {
    (0..n).map(|_| rat(rng.gen_range(-1024..=1024), 1024)).collect()
}

/// `count` seeded rational points with entries k/1024 in [-1, 1].
pub fn rational_samples(n: usize, count: usize, seed: u64) -> Vec<Vec<Rational>> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| random_rational_point(&mut rng, n)).collect()
}

fn max_abs(v: &[Rational]) -> Rational {
    v.iter().map(|x| x.abs()).fold(Rational::zero(), |a, b| if b > a { b } else { a })
}

/// Checks the group axioms exactly on rational samples and as polynomial identities.
pub fn verify_group(law: &GroupLaw, dilation: &Dilation, samples: usize, seed: u64) -> GroupCheckReport {
    assert!(samples >= 1, "samples must be positive");
    let n = law.n();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let zero = vec![Rational::zero(); n];
    let associative_exact = law.associator().iter().all(Polynomial::is_zero);
    let mut assoc = Rational::zero();
    let mut inv = Rational::zero();
    let mut identity_ok = law.identity_exact();
    let mut automorphism_ok = n == dilation.n() && law.is_homogeneous(dilation);
    for _ in 0..samples {
        let x = random_rational_point(&mut rng, n);
        let y = random_rational_point(&mut rng, n);
        let z = random_rational_point(&mut rng, n);
        let l = law.compose_exact(&law.compose_exact(&x, &y), &z);
        let r = law.compose_exact(&x, &law.compose_exact(&y, &z));
        let d: Vec<Rational> = l.iter().zip(&r).map(|(a, b)| a - b).collect();
        let m = max_abs(&d);
        if m > assoc {
            assoc = m;
        }
        let xi = law.inverse_exact(&x);
        for e in [law.compose_exact(&x, &xi), law.compose_exact(&xi, &x)] {
            let m = max_abs(&e);
            if m > inv {
                inv = m;
            }
        }
        identity_ok &= law.compose_exact(&x, &zero) == x && law.compose_exact(&zero, &x) == x;
        if automorphism_ok && n == dilation.n() {
            let lam = rat(rng.gen_range(1..=128), 64);
            let lhs = dilation.apply_exact(&lam, &law.compose_exact(&x, &y));
            let rhs = law.compose_exact(&dilation.apply_exact(&lam, &x), &dilation.apply_exact(&lam, &y));
            automorphism_ok = lhs == rhs;
        }
    }
    GroupCheckReport {
        associativity_residual: assoc.to_f64().unwrap_or(f64::INFINITY),
        identity_ok,
        inverse_ok: inv.is_zero(),
        automorphism_ok,
        samples,
        associative_exact,
        inverse_residual: inv.to_f64().unwrap_or(f64::INFINITY),
    }
}

/// Random polynomial with small integer coefficients and total degree ≤ `deg`.
pub(crate) fn random_test_polynomial(rng: &mut ChaCha8Rng, n: usize, deg: u32, terms: usize) -> Polynomial {
    let mut p = Polynomial::zero(n);
    for _ in 0..terms {
        let mut e = vec![0u32; n];
        let mut budget = rng.gen_range(0..=deg);
        while budget > 0 {
            e[rng.gen_range(0..n)] += 1;
            budget -= 1;
        }
        p.add_term(e, rat(rng.gen_range(-5..=5), 1));
    }
    p
}

/// Max |X(f∘τ_ξ) − (Xf)∘τ_ξ| over random test polynomials, translations and points.
/// Exact arithmetic throughout; zero for left-invariant fields.
pub fn left_invariance_check(field: &PolyVectorField, group: &HomogeneousGroup, samples: usize, seed: u64) -> f64 {
    let n = group.n();
    assert_eq!(field.n(), n, "field dimension must match the group");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = Rational::zero();
    for _ in 0..samples {
        let f = random_test_polynomial(&mut rng, n, 3, 6);
        let xi = random_rational_point(&mut rng, n);
        let tau = group.law().left_translation(&xi);
        let lhs = field.apply(&f.substitute(&tau));
        let rhs = field.apply(&f).substitute(&tau);
        let diff = &lhs - &rhs;
        for _ in 0..3 {
            let p = random_rational_point(&mut rng, n);
            let v = diff.eval(&p).abs();
            if v > worst {
                worst = v;
            }
        }
    }
    worst.to_f64().unwrap_or(f64::INFINITY)
}
