use std::fmt;
use std::sync::Arc;

use crate::liealg::{parse_polynomial, CompiledPoly, LieError, Polynomial};

type Func = Arc<dyn Fn(&[f64]) -> f64 + Send + Sync>;

/// A real coefficient on R^n.
#[derive(Clone)]
pub enum CoefficientKind {
    Constant(f64),
    Polynomial(Polynomial, CompiledPoly),
    Function(Func),
}

#[derive(Clone)]
pub struct CoefficientField {
    kind: CoefficientKind,
    pub holder_alpha: Option<f64>,
}

impl fmt::Debug for CoefficientField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.kind {
            CoefficientKind::Constant(c) => write!(f, "constant:{c}"),
            CoefficientKind::Polynomial(p, _) => write!(f, "{p}"),
            CoefficientKind::Function(_) => write!(f, "<function>"),
        }
    }
}

impl CoefficientField {
    pub fn constant(c: f64) -> Self {
        CoefficientField { kind: CoefficientKind::Constant(c), holder_alpha: Some(1.0) }
    }

    pub fn polynomial(p: Polynomial) -> Self {
        let c = p.compile();
        CoefficientField { kind: CoefficientKind::Polynomial(p, c), holder_alpha: Some(1.0) }
    }

    pub fn function<F: Fn(&[f64]) -> f64 + Send + Sync + 'static>(f: F) -> Self {
        CoefficientField { kind: CoefficientKind::Function(Arc::new(f)), holder_alpha: None }
    }

    /// `constant:<v>` or an expression in x1..xn.
    pub fn parse(s: &str, n: usize) -> Result<Self, LieError> {
        let s = s.trim();
        if let Some(v) = s.strip_prefix("constant:") {
            let c: f64 = v.trim().parse().map_err(|_| LieError::Parse(format!("bad constant '{v}'")))?;
            return Ok(Self::constant(c));
        }
        let p = parse_polynomial(s, n)?;
        Ok(match p.as_constant() {
            Some(c) => Self::constant(num_traits::ToPrimitive::to_f64(&c).unwrap_or(f64::NAN)),
            None => Self::polynomial(p),
        })
    }

    pub fn kind(&self) -> &CoefficientKind {
        &self.kind
    }

    pub fn as_constant(&self) -> Option<f64> {
        match &self.kind {
            CoefficientKind::Constant(c) => Some(*c),
            _ => None,
        }
    }

    pub fn eval(&self, x: &[f64]) -> f64 {
        match &self.kind {
            CoefficientKind::Constant(c) => *c,
            CoefficientKind::Polynomial(_, c) => c.eval(x),
            CoefficientKind::Function(f) => f(x),
        }
    }

    pub fn scaled(&self, t: f64) -> Self {
        match &self.kind {
            CoefficientKind::Constant(c) => Self::constant(c * t),
            _ => {
                let me = self.clone();
                Self::function(move |x| t * me.eval(x))
            }
        }
    }

    /// self / other, pointwise.
    pub fn divided_by(&self, other: &CoefficientField) -> Self {
        match (&self.kind, other.as_constant()) {
            (_, Some(1.0)) => self.clone(),
            (CoefficientKind::Constant(a), Some(c)) => Self::constant(a / c),
            _ => {
                let (a, b) = (self.clone(), other.clone());
                Self::function(move |x| a.eval(x) / b.eval(x))
            }
        }
    }

    pub fn plus_constant(&self, t: f64) -> Self {
        match &self.kind {
            CoefficientKind::Constant(c) => Self::constant(c + t),
            _ => {
                let me = self.clone();
                Self::function(move |x| me.eval(x) + t)
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(CoefficientField::parse("constant:2.5", 2).unwrap().eval(&[0.0, 0.0]), 2.5);
        assert_eq!(CoefficientField::parse("x1*x2 + 1", 2).unwrap().eval(&[2.0, 3.0]), 7.0);
        assert_eq!(CoefficientField::parse("3/4", 1).unwrap().as_constant(), Some(0.75));
        assert!(CoefficientField::parse("constant:abc", 1).is_err());
    }

    #[test]
    fn arithmetic() {
        let a = CoefficientField::parse("x1", 1).unwrap();
        assert_eq!(a.scaled(2.0).eval(&[3.0]), 6.0);
        assert_eq!(a.divided_by(&CoefficientField::constant(2.0)).eval(&[3.0]), 1.5);
        assert_eq!(a.plus_constant(1.0).eval(&[3.0]), 4.0);
    }
}
