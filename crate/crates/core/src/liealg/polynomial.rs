//! Sparse multivariate polynomials with exact rational coefficients.

use std::collections::btree_map::Entry;
use std::collections::BTreeMap;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

/// Builds a rational from a pair of integers.
pub fn rat(num: i64, den: i64) -> Rational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(v: i64) -> Rational {
    BigRational::from_integer(BigInt::from(v))
}

/// Polynomial in `n` variables. Terms with zero coefficient are never stored.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Polynomial {
    n: usize,
    terms: BTreeMap<Vec<u32>, Rational>,
}

impl Polynomial {
    pub fn zero(n: usize) -> Self {
        Polynomial { n, terms: BTreeMap::new() }
    }

    pub fn constant(n: usize, c: Rational) -> Self {
        let mut p = Self::zero(n);
        p.add_term(vec![0; n], c);
        p
    }

    pub fn one(n: usize) -> Self {
        Self::constant(n, Rational::one())
    }

    pub fn from_int(n: usize, c: i64) -> Self {
        Self::constant(n, rat_int(c))
    }

    /// The coordinate function x_k (0-based).
    pub fn var(n: usize, k: usize) -> Self {
        assert!(k < n, "variable index {k} out of range for n = {n}");
        let mut e = vec![0; n];
        e[k] = 1;
        let mut p = Self::zero(n);
        p.add_term(e, Rational::one());
        p
    }

    pub fn monomial(exponent: Vec<u32>, c: Rational) -> Self {
        let mut p = Self::zero(exponent.len());
        p.add_term(exponent, c);
        p
    }

    pub fn from_terms<I: IntoIterator<Item = (Vec<u32>, Rational)>>(n: usize, it: I) -> Self {
        let mut p = Self::zero(n);
        for (e, c) in it {
            p.add_term(e, c);
        }
        p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn terms(&self) -> impl Iterator<Item = (&Vec<u32>, &Rational)> {
        self.terms.iter()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Returns the value if the polynomial is constant (zero counts).
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (e, c) = self.terms.iter().next().unwrap();
                e.iter().all(|&k| k == 0).then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn coefficient(&self, exponent: &[u32]) -> Rational {
        self.terms.get(exponent).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn add_term(&mut self, exponent: Vec<u32>, c: Rational) {
        assert_eq!(exponent.len(), self.n, "exponent length mismatch");
        if c.is_zero() {
            return;
        }
        match self.terms.entry(exponent) {
            Entry::Vacant(v) => {
                v.insert(c);
            }
            Entry::Occupied(mut o) => {
                *o.get_mut() += c;
                if o.get().is_zero() {
                    o.remove();
                }
            }
        }
    }

    pub fn total_degree(&self) -> u32 {
        self.terms.keys().map(|e| e.iter().sum()).max().unwrap_or(0)
    }

    /// Weighted degree of a single exponent vector.
    pub fn weighted_degree_of(exponent: &[u32], sigma: &[u32]) -> u32 {
        exponent.iter().zip(sigma).map(|(a, s)| a * s).sum()
    }

    /// Set of weighted degrees occurring in the polynomial.
    pub fn weighted_degrees(&self, sigma: &[u32]) -> Vec<u32> {
        let mut d: Vec<u32> = self.terms.keys().map(|e| Self::weighted_degree_of(e, sigma)).collect();
        d.sort_unstable();
        d.dedup();
        d
    }

    pub fn scale(&self, c: &Rational) -> Self {
        if c.is_zero() {
            return Self::zero(self.n);
        }
        Polynomial {
            n: self.n,
            terms: self.terms.iter().map(|(e, v)| (e.clone(), v * c)).collect(),
        }
    }

    pub fn derivative(&self, k: usize) -> Self {
        let mut out = Self::zero(self.n);
        for (e, c) in &self.terms {
            if e[k] == 0 {
                continue;
            }
            let mut e2 = e.clone();
            e2[k] -= 1;
            out.add_term(e2, c * rat_int(e[k] as i64));
        }
        out
    }

    pub fn pow(&self, k: u32) -> Self {
        let mut acc = Self::one(self.n);
        for _ in 0..k {
            acc = &acc * self;
        }
        acc
    }

    pub fn eval(&self, x: &[Rational]) -> Rational {
        assert_eq!(x.len(), self.n);
        let mut s = Rational::zero();
        for (e, c) in &self.terms {
            let mut t = c.clone();
            for (xi, &k) in x.iter().zip(e) {
                for _ in 0..k {
                    t *= xi;
                }
            }
            s += t;
        }
        s
    }

    pub fn eval_f64(&self, x: &[f64]) -> f64 {
        assert_eq!(x.len(), self.n);
        self.terms
            .iter()
            .map(|(e, c)| {
                let mut t = c.to_f64().unwrap_or(f64::NAN);
                for (xi, &k) in x.iter().zip(e) {
                    t *= xi.powi(k as i32);
                }
                t
            })
            .sum()
    }

    /// Replaces variable k with `subs[k]`; all substitutes share a dimension m.
    pub fn substitute(&self, subs: &[Polynomial]) -> Self {
        assert_eq!(subs.len(), self.n);
        let m = subs.first().map(|p| p.n).unwrap_or(0);
        let mut out = Self::zero(m);
        let mut cache: Vec<Vec<Polynomial>> = subs.iter().map(|p| vec![Self::one(m), p.clone()]).collect();
        for (e, c) in &self.terms {
            let mut t = Self::constant(m, c.clone());
            for (k, &a) in e.iter().enumerate() {
                if a == 0 {
                    continue;
                }
                while cache[k].len() <= a as usize {
                    let next = cache[k].last().unwrap() * &subs[k];
                    cache[k].push(next);
                }
                t = &t * &cache[k][a as usize];
            }
            out = out + t;
        }
        out
    }

    /// Re-embeds into `new_n` variables, sending x_k to x_{k+offset}.
    pub fn embed(&self, new_n: usize, offset: usize) -> Self {
        assert!(offset + self.n <= new_n);
        let mut out = Self::zero(new_n);
        for (e, c) in &self.terms {
            let mut e2 = vec![0; new_n];
            e2[offset..offset + self.n].copy_from_slice(e);
            out.add_term(e2, c.clone());
        }
        out
    }

    pub fn compile(&self) -> CompiledPoly {
        CompiledPoly {
            n: self.n,
            terms: self
                .terms
                .iter()
                .map(|(e, c)| {
                    let f: Vec<(usize, i32)> =
                        e.iter().enumerate().filter(|(_, &k)| k > 0).map(|(i, &k)| (i, k as i32)).collect();
                    (f, c.to_f64().unwrap_or(f64::NAN))
                })
                .collect(),
        }
    }
}

/// Floating-point evaluator for repeated grid evaluation.
#[derive(Clone, Debug, PartialEq)]
pub struct CompiledPoly {
    n: usize,
    terms: Vec<(Vec<(usize, i32)>, f64)>,
}

impl CompiledPoly {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        let mut s = 0.0;
        for (f, c) in &self.terms {
            let mut t = *c;
            for &(i, k) in f {
                t *= if k == 1 { x[i] } else { x[i].powi(k) };
            }
            s += t;
        }
        s
    }
}

impl Add for &Polynomial {
    type Output = Polynomial;
    fn add(self, o: &Polynomial) -> Polynomial {
        assert_eq!(self.n, o.n, "dimension mismatch");
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(e.clone(), c.clone());
        }
        out
    }
}

impl Add for Polynomial {
    type Output = Polynomial;
    fn add(self, o: Polynomial) -> Polynomial {
        &self + &o
    }
}

impl Sub for &Polynomial {
    type Output = Polynomial;
    fn sub(self, o: &Polynomial) -> Polynomial {
        assert_eq!(self.n, o.n, "dimension mismatch");
        let mut out = self.clone();
        for (e, c) in &o.terms {
            out.add_term(e.clone(), -c.clone());
        }
        out
    }
}

impl Sub for Polynomial {
    type Output = Polynomial;
    fn sub(self, o: Polynomial) -> Polynomial {
        &self - &o
    }
}

impl Neg for &Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        Polynomial { n: self.n, terms: self.terms.iter().map(|(e, c)| (e.clone(), -c.clone())).collect() }
    }
}

impl Neg for Polynomial {
    type Output = Polynomial;
    fn neg(self) -> Polynomial {
        -&self
    }
}

impl Mul for &Polynomial {
    type Output = Polynomial;
    fn mul(self, o: &Polynomial) -> Polynomial {
        assert_eq!(self.n, o.n, "dimension mismatch");
        let mut acc: BTreeMap<Vec<u32>, Rational> = BTreeMap::new();
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                let e: Vec<u32> = e1.iter().zip(e2).map(|(a, b)| a + b).collect();
                *acc.entry(e).or_insert_with(Rational::zero) += c1 * c2;
            }
        }
        acc.retain(|_, c| !c.is_zero());
        Polynomial { n: self.n, terms: acc }
    }
}

impl Mul for Polynomial {
    type Output = Polynomial;
    fn mul(self, o: Polynomial) -> Polynomial {
        &self * &o
    }
}

fn fmt_rational(c: &Rational) -> String {
    if c.is_integer() {
        c.numer().to_string()
    } else {
        format!("{}/{}", c.numer(), c.denom())
    }
}

impl fmt::Display for Polynomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        // Highest degree first reads more naturally.
        for (e, c) in self.terms.iter().rev() {
            let neg = c.is_negative();
            let a = c.abs();
            if first {
                if neg {
                    write!(f, "-")?;
                }
            } else {
                write!(f, " {} ", if neg { "-" } else { "+" })?;
            }
            first = false;
            let vars: Vec<String> = e
                .iter()
                .enumerate()
                .filter(|(_, &k)| k > 0)
                .map(|(i, &k)| if k == 1 { format!("x{}", i + 1) } else { format!("x{}^{}", i + 1, k) })
                .collect();
            if vars.is_empty() {
                write!(f, "{}", fmt_rational(&a))?;
            } else if a.is_one() {
                write!(f, "{}", vars.join("*"))?;
            } else {
                write!(f, "{}*{}", fmt_rational(&a), vars.join("*"))?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cancellation_removes_terms() {
        let x = Polynomial::var(2, 0);
        let p = &x - &x;
        assert!(p.is_zero());
        assert_eq!(p.num_terms(), 0);
    }

    #[test]
    fn product_and_derivative() {
        let x = Polynomial::var(2, 0);
        let y = Polynomial::var(2, 1);
        let p = &(&x * &x) * &y;
        assert_eq!(p.derivative(0), (&x * &y).scale(&rat_int(2)));
        assert_eq!(p.derivative(1), &x * &x);
        assert_eq!(p.eval(&[rat_int(3), rat(1, 2)]), rat(9, 2));
    }

    #[test]
    fn substitute_composes() {
        let x = Polynomial::var(1, 0);
        let p = &x * &x;
        let q = &x + &Polynomial::one(1);
        assert_eq!(p.substitute(std::slice::from_ref(&q)), &q * &q);
    }

    #[test]
    fn display_is_readable() {
        let x = Polynomial::var(2, 0);
        let y = Polynomial::var(2, 1);
        let p = &(&x * &y).scale(&rat(-3, 2)) + &Polynomial::one(2);
        assert_eq!(p.to_string(), "-3/2*x1*x2 + 1");
    }

    #[test]
    fn compiled_matches_exact() {
        let x = Polynomial::var(3, 0);
        let z = Polynomial::var(3, 2);
        let p = &(&x * &z).pow(2) - &z.scale(&rat(1, 3));
        let pt = [0.5, -1.0, 2.0];
        assert!((p.compile().eval(&pt) - p.eval_f64(&pt)).abs() < 1e-14);
    }
}
