//! Polynomial vector fields, brackets and weighted commutators.

use std::fmt;

use num_traits::{One, Signed, Zero};
use serde::{Deserialize, Serialize};

use super::polynomial::{Polynomial, Rational};
use super::LieError;

/// First-order operator Σ_k c_k ∂_k with polynomial coefficients.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PolyVectorField {
    components: Vec<Polynomial>,
    weight: u32,
}

impl PolyVectorField {
    /// A generator of weight 1 (`X_1..X_q`) or 2 (drift `X_0`).
    pub fn new(components: Vec<Polynomial>, weight: u32) -> Result<Self, LieError> {
        if !(1..=2).contains(&weight) {
            return Err(LieError::InvalidWeight(weight));
        }
        Self::with_weight(components, weight)
    }

    /// Same as [`new`](Self::new) without the generator weight restriction;
    /// brackets carry summed weights.
    pub fn with_weight(components: Vec<Polynomial>, weight: u32) -> Result<Self, LieError> {
        let n = components.len();
        if let Some(p) = components.iter().find(|p| p.n() != n) {
            return Err(LieError::DimensionMismatch { expected: n, found: p.n() });
        }
        Ok(PolyVectorField { components, weight })
    }

    pub fn zero(n: usize, weight: u32) -> Self {
        PolyVectorField { components: vec![Polynomial::zero(n); n], weight }
    }

    /// The coordinate field ∂_k.
    pub fn coordinate(n: usize, k: usize) -> Self {
        let mut c = vec![Polynomial::zero(n); n];
        c[k] = Polynomial::one(n);
        PolyVectorField { components: c, weight: 1 }
    }

    pub fn n(&self) -> usize {
        self.components.len()
    }

    pub fn weight(&self) -> u32 {
        self.weight
    }

    pub fn set_weight(mut self, weight: u32) -> Self {
        self.weight = weight;
        self
    }

    pub fn components(&self) -> &[Polynomial] {
        &self.components
    }

    pub fn component(&self, k: usize) -> &Polynomial {
        &self.components[k]
    }

    pub fn is_zero(&self) -> bool {
        self.components.iter().all(Polynomial::is_zero)
    }

    /// Applies the field to a polynomial: Σ c_k ∂_k f.
    pub fn apply(&self, f: &Polynomial) -> Polynomial {
        let mut out = Polynomial::zero(f.n());
        for (k, c) in self.components.iter().enumerate() {
            if c.is_zero() {
                continue;
            }
            let d = f.derivative(k);
            if !d.is_zero() {
                out = out + c * &d;
            }
        }
        out
    }

    pub fn eval(&self, x: &[Rational]) -> Vec<Rational> {
        self.components.iter().map(|c| c.eval(x)).collect()
    }

    pub fn eval_f64(&self, x: &[f64]) -> Vec<f64> {
        self.components.iter().map(|c| c.eval_f64(x)).collect()
    }

    pub fn scale(&self, c: &Rational) -> Self {
        PolyVectorField { components: self.components.iter().map(|p| p.scale(c)).collect(), weight: self.weight }
    }

    pub fn add(&self, o: &Self) -> Result<Self, LieError> {
        check_dims(self, o)?;
        Ok(PolyVectorField {
            components: self.components.iter().zip(&o.components).map(|(a, b)| a + b).collect(),
            weight: self.weight,
        })
    }

    /// Sign-normalized copy: the first nonzero coefficient (in component
    /// and term order) is positive. Used to prune duplicates up to sign.
    pub fn canonical(&self) -> Self {
        let lead = self.components.iter().find_map(|p| p.terms().next().map(|(_, c)| c.clone()));
        match lead {
            Some(c) if c.is_negative() => self.scale(&-Rational::one()),
            _ => self.clone(),
        }
    }

    fn key(&self) -> Vec<Polynomial> {
        self.canonical().components
    }
}

fn check_dims(a: &PolyVectorField, b: &PolyVectorField) -> Result<(), LieError> {
    if a.n() != b.n() {
        return Err(LieError::DimensionMismatch { expected: a.n(), found: b.n() });
    }
    Ok(())
}

/// The Lie bracket [X, Y] = XY − YX, exact over the rationals.
pub fn bracket(x: &PolyVectorField, y: &PolyVectorField) -> Result<PolyVectorField, LieError> {
    check_dims(x, y)?;
    let comps = (0..x.n()).map(|k| &x.apply(y.component(k)) - &y.apply(x.component(k))).collect();
    Ok(PolyVectorField { components: comps, weight: x.weight + y.weight })
}

impl fmt::Display for PolyVectorField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        // (negative, text) per nonzero component
        let parts: Vec<(bool, String)> = self
            .components
            .iter()
            .enumerate()
            .filter(|(_, c)| !c.is_zero())
            .map(|(k, c)| {
                if c.num_terms() > 1 {
                    return (false, format!("({})*d/dx{}", c, k + 1));
                }
                let (e, v) = c.terms().next().expect("one term");
                let neg = v.is_negative();
                let a = Polynomial::monomial(e.clone(), v.abs());
                if a.as_constant().is_some_and(|v| v.is_one()) {
                    (neg, format!("d/dx{}", k + 1))
                } else {
                    (neg, format!("{}*d/dx{}", a, k + 1))
                }
            })
            .collect();
        if parts.is_empty() {
            return write!(f, "0");
        }
        for (i, (neg, t)) in parts.iter().enumerate() {
            match (i, neg) {
                (0, true) => write!(f, "-{t}")?,
                (0, false) => write!(f, "{t}")?,
                (_, true) => write!(f, " - {t}")?,
                (_, false) => write!(f, " + {t}")?,
            }
        }
        Ok(())
    }
}

/// Nonempty word over {0, ..., q}; index 0 denotes the drift.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Multiindex(Vec<usize>);

impl Multiindex {
    pub fn new(entries: Vec<usize>) -> Result<Self, LieError> {
        if entries.is_empty() {
            return Err(LieError::EmptyMultiindex);
        }
        Ok(Multiindex(entries))
    }

    pub fn entries(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn concat(&self, o: &Multiindex) -> Multiindex {
        let mut v = self.0.clone();
        v.extend_from_slice(&o.0);
        Multiindex(v)
    }

    pub fn push(&self, i: usize) -> Multiindex {
        let mut v = self.0.clone();
        v.push(i);
        Multiindex(v)
    }
}

impl fmt::Display for Multiindex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s: Vec<String> = self.0.iter().map(|i| i.to_string()).collect();
        write!(f, "({})", s.join(","))
    }
}

/// |α| with w_0 = 2 and w_i = 1 otherwise.
pub fn weighted_length(alpha: &Multiindex) -> u32 {
    alpha.0.iter().map(|&i| if i == 0 { 2 } else { 1 }).sum()
}

/// [X]_α = [X_{α_ℓ}, [X_{α_{ℓ−1}}, ... [X_{α_2}, X_{α_1}]]].
///
/// `fields[i]` is X_i, so a list without a drift still starts at index 0.
pub fn commutator_alpha(fields: &[PolyVectorField], alpha: &Multiindex) -> Result<PolyVectorField, LieError> {
    let get = |i: usize| fields.get(i).ok_or(LieError::IndexOutOfRange { index: i, len: fields.len() });
    let mut acc = get(alpha.0[0])?.clone();
    for &i in &alpha.0[1..] {
        acc = bracket(get(i)?, &acc)?;
    }
    Ok(acc)
}

/// Exact rank of a list of rational vectors.
pub fn rational_rank(rows: &[Vec<Rational>]) -> usize {
    let mut m: Vec<Vec<Rational>> = rows.to_vec();
    let ncols = m.first().map_or(0, Vec::len);
    let mut rank = 0;
    for col in 0..ncols {
        let Some(p) = (rank..m.len()).find(|&r| !m[r][col].is_zero()) else { continue };
        m.swap(rank, p);
        let pivot = m[rank][col].clone();
        for r in rank + 1..m.len() {
            if m[r][col].is_zero() {
                continue;
            }
            let factor = &m[r][col] / &pivot;
            for c in col..ncols {
                let t = &factor * &m[rank][c];
                m[r][c] -= t;
            }
        }
        rank += 1;
        if rank == m.len() {
            break;
        }
    }
    rank
}

#[derive(Clone, Debug)]
pub struct RankReport {
    pub spans: bool,
    pub step: Option<u32>,
    pub tested_points: Vec<Vec<Rational>>,
    pub bracket_basis: Vec<(Multiindex, PolyVectorField)>,
    /// Rank at each tested point using all commutators up to the last weight tried.
    pub ranks: Vec<usize>,
}

/// All distinct right-nested commutators of weighted length ≤ `max_weight`,
/// ordered by weight. `fields[i]` has weight `fields[i].weight()`.
pub fn enumerate_commutators(
    fields: &[PolyVectorField],
    max_weight: u32,
) -> Result<Vec<(Multiindex, PolyVectorField)>, LieError> {
    let n = fields.first().map_or(0, PolyVectorField::n);
    for f in fields {
        if f.n() != n {
            return Err(LieError::DimensionMismatch { expected: n, found: f.n() });
        }
    }
    let mut seen: std::collections::HashSet<Vec<Polynomial>> = std::collections::HashSet::new();
    let mut by_weight: Vec<Vec<(Multiindex, PolyVectorField)>> = vec![Vec::new(); max_weight as usize + 1];
    for w in 1..=max_weight {
        let mut level = Vec::new();
        for (i, f) in fields.iter().enumerate() {
            if f.weight() == w {
                level.push((Multiindex(vec![i]), f.clone()));
            }
        }
        for (j, xj) in fields.iter().enumerate() {
            let wj = xj.weight();
            if wj >= w {
                continue;
            }
            for (alpha, inner) in &by_weight[(w - wj) as usize] {
                level.push((alpha.push(j), bracket(xj, inner)?));
            }
        }
        for (alpha, f) in level {
            if f.is_zero() || !seen.insert(f.key()) {
                continue;
            }
            by_weight[w as usize].push((alpha, f));
        }
    }
    Ok(by_weight.into_iter().flatten().collect())
}

/// Hörmander rank certification at the supplied points.
///
/// The generator weights are taken from the fields themselves; the returned
/// step is the smallest weighted length at which the commutators span at
/// every point.
pub fn hoermander_rank(
    fields: &[PolyVectorField],
    points: &[Vec<Rational>],
    max_weight: u32,
) -> Result<RankReport, LieError> {
    if max_weight == 0 {
        return Err(LieError::InvalidMaxWeight);
    }
    let n = fields.first().map_or(0, PolyVectorField::n);
    if let Some(p) = points.iter().find(|p| p.len() != n) {
        return Err(LieError::DimensionMismatch { expected: n, found: p.len() });
    }
    let all = enumerate_commutators(fields, max_weight)?;
    let mut step = None;
    let mut ranks = vec![0; points.len()];
    for w in 1..=max_weight {
        let upto: Vec<&PolyVectorField> = all.iter().filter(|(_, f)| f.weight() <= w).map(|(_, f)| f).collect();
        ranks = points
            .iter()
            .map(|p| rational_rank(&upto.iter().map(|f| f.eval(p)).collect::<Vec<_>>()))
            .collect();
        if ranks.iter().all(|&r| r == n) {
            step = Some(w);
            break;
        }
    }
    let bracket_basis = match step {
        Some(s) => all.into_iter().filter(|(_, f)| f.weight() <= s).collect(),
        None => Vec::new(),
    };
    Ok(RankReport { spans: step.is_some(), step, tested_points: points.to_vec(), bracket_basis, ranks })
}

/// Degree δ such that every ∂_k coefficient is D_λ-homogeneous of degree σ_k − δ.
pub fn homogeneity_degree(field: &PolyVectorField, sigma: &[u32]) -> Option<i64> {
    if sigma.len() != field.n() || sigma.contains(&0) {
        return None;
    }
    let mut delta: Option<i64> = None;
    for (k, c) in field.components().iter().enumerate() {
        for d in c.weighted_degrees(sigma) {
            let cand = sigma[k] as i64 - d as i64;
            match delta {
                None => delta = Some(cand),
                Some(v) if v != cand => return None,
                _ => {}
            }
        }
    }
    delta
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liealg::parse_field;
    use crate::liealg::polynomial::rat_int;

    fn f(s: &str, n: usize, w: u32) -> PolyVectorField {
        parse_field(s, n).unwrap().set_weight(w)
    }

    #[test]
    fn bracket_of_field_with_itself_vanishes() {
        let x = f("d/dx1 - x1*x2*d/dx5", 5, 1);
        assert!(bracket(&x, &x).unwrap().is_zero());
    }

    #[test]
    fn bracket_weight_adds() {
        let x = f("d/dx1", 2, 1);
        let z = f("x1*d/dx2", 2, 2);
        let b = bracket(&x, &z).unwrap();
        assert_eq!(b.weight(), 3);
        assert_eq!(b, f("d/dx2", 2, 3));
    }

    #[test]
    fn dimension_mismatch_is_error() {
        assert!(bracket(&f("d/dx1", 2, 1), &f("d/dx1", 3, 1)).is_err());
    }

    #[test]
    fn weighted_lengths() {
        let m = |v: Vec<usize>| Multiindex::new(v).unwrap();
        assert_eq!(weighted_length(&m(vec![0, 1])), 3);
        assert_eq!(weighted_length(&m(vec![1, 2, 1])), 3);
        assert_eq!(weighted_length(&m(vec![0, 0])), 4);
        assert!(Multiindex::new(vec![]).is_err());
    }

    #[test]
    fn commutator_single_and_repeated() {
        let fields = vec![f("d/dx1", 2, 2), f("x1*d/dx2", 2, 1)];
        assert_eq!(commutator_alpha(&fields, &Multiindex(vec![1])).unwrap(), fields[1]);
        assert!(commutator_alpha(&fields, &Multiindex(vec![1, 1])).unwrap().is_zero());
        assert!(commutator_alpha(&fields, &Multiindex(vec![3])).is_err());
    }

    #[test]
    fn rank_of_grushin_pair() {
        let fields = vec![PolyVectorField::zero(2, 2), f("d/dx1", 2, 1), f("x1*d/dx2", 2, 1)];
        let r = hoermander_rank(&fields, &[vec![rat_int(0), rat_int(0)]], 2).unwrap();
        assert!(r.spans);
        assert_eq!(r.step, Some(2));
        let r1 = hoermander_rank(&fields, &[vec![rat_int(0), rat_int(0)]], 1).unwrap();
        assert!(!r1.spans);
        assert_eq!(r1.step, None);
    }

    #[test]
    fn homogeneity() {
        assert_eq!(homogeneity_degree(&f("d/dx1 - x1*x2*d/dx5", 5, 1), &[1, 1, 2, 2, 3]), Some(1));
        assert_eq!(homogeneity_degree(&f("d/dx1 + d/dx2", 2, 1), &[1, 2]), None);
    }

    #[test]
    fn exact_rank() {
        let r = |v: &[i64]| v.iter().map(|&x| rat_int(x)).collect::<Vec<_>>();
        assert_eq!(rational_rank(&[r(&[1, 2]), r(&[2, 4])]), 1);
        assert_eq!(rational_rank(&[r(&[0, 1]), r(&[1, 0]), r(&[1, 1])]), 2);
    }

    #[test]
    fn display_parses_back() {
        for src in ["d/dx1 - x1*x2*d/dx5", "-d/dx2 + 1/2*x1^2*d/dx3", "(x1 + x2)*d/dx1 - 3*d/dx2", "0"] {
            let x = parse_field(src, 5).unwrap();
            let shown = x.to_string();
            assert_eq!(parse_field(&shown, 5).unwrap(), x, "{shown}");
        }
        assert_eq!(parse_field("d/dx1 - x1*x2*d/dx5", 5).unwrap().to_string(), "d/dx1 - x1*x2*d/dx5");
    }
}
