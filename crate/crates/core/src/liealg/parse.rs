//! Text grammar for polynomials and first-order fields.
//!
//! ```text
//! expr   := ['+'|'-'] term (('+'|'-') term)*
//! term   := factor (('*'|'/') factor)*
//! factor := atom ['^' integer]
//! atom   := number | 'x'k | 'd/dx'k | '(' expr ')'
//! ```
//! Numbers are integers or decimals and are read exactly.

use num_bigint::BigInt;
use num_traits::{One, Zero};

use super::field::PolyVectorField;
use super::polynomial::{Polynomial, Rational};
use super::LieError;

#[derive(Clone, Debug, PartialEq)]
enum Tok {
    Num(Rational),
    Var(usize),
    D(usize),
    Plus,
    Minus,
    Star,
    Slash,
    Caret,
    LParen,
    RParen,
}

fn err(msg: impl Into<String>) -> LieError {
    LieError::Parse(msg.into())
}

fn parse_decimal(s: &str) -> Result<Rational, LieError> {
    let (int, frac) = match s.split_once('.') {
        Some((a, b)) => (a, b),
        None => (s, ""),
    };
    let digits = format!("{int}{frac}");
    let num: BigInt = digits.parse().map_err(|_| err(format!("bad number '{s}'")))?;
    let den = num_traits::pow(BigInt::from(10), frac.len());
    Ok(Rational::new(num, den))
}

fn lex(s: &str) -> Result<Vec<Tok>, LieError> {
    let b = s.as_bytes();
    let mut i = 0;
    let mut out = Vec::new();
    let index = |i: &mut usize| -> Result<usize, LieError> {
        let start = *i;
        while *i < b.len() && b[*i].is_ascii_digit() {
            *i += 1;
        }
        let k: usize = s[start..*i].parse().map_err(|_| err(format!("missing index at {start}")))?;
        if k == 0 {
            return Err(err("indices start at 1"));
        }
        Ok(k - 1)
    };
    while i < b.len() {
        let c = b[i];
        match c {
            b' ' | b'\t' | b'\n' => i += 1,
            b'+' => {
                out.push(Tok::Plus);
                i += 1
            }
            b'-' => {
                out.push(Tok::Minus);
                i += 1
            }
            b'*' => {
                out.push(Tok::Star);
                i += 1
            }
            b'^' => {
                out.push(Tok::Caret);
                i += 1
            }
            b'(' => {
                out.push(Tok::LParen);
                i += 1
            }
            b')' => {
                out.push(Tok::RParen);
                i += 1
            }
            b'/' => {
                out.push(Tok::Slash);
                i += 1
            }
            b'd' if s[i..].starts_with("d/dx") => {
                i += 4;
                out.push(Tok::D(index(&mut i)?));
            }
            b'x' => {
                i += 1;
                out.push(Tok::Var(index(&mut i)?));
            }
            b'0'..=b'9' | b'.' => {
                let start = i;
                while i < b.len() && (b[i].is_ascii_digit() || b[i] == b'.') {
                    i += 1;
                }
                out.push(Tok::Num(parse_decimal(&s[start..i])?));
            }
            _ => return Err(err(format!("unexpected character '{}' at {i}", c as char))),
        }
    }
    Ok(out)
}

/// Scalar part plus the coefficients of each ∂_k.
#[derive(Clone, Debug)]
struct Value {
    scalar: Polynomial,
    deriv: Vec<Polynomial>,
}

impl Value {
    fn scalar(p: Polynomial) -> Self {
        let n = p.n();
        Value { scalar: p, deriv: vec![Polynomial::zero(n); n] }
    }

    fn has_deriv(&self) -> bool {
        self.deriv.iter().any(|p| !p.is_zero())
    }

    fn add(self, o: Value, sign: bool) -> Value {
        let op = |a: &Polynomial, b: &Polynomial| if sign { a + b } else { a - b };
        Value {
            scalar: op(&self.scalar, &o.scalar),
            deriv: self.deriv.iter().zip(&o.deriv).map(|(a, b)| op(a, b)).collect(),
        }
    }

    fn mul(self, o: Value) -> Result<Value, LieError> {
        let (s, v) = match (self.has_deriv(), o.has_deriv()) {
            (true, true) => return Err(err("product of two derivatives is not first order")),
            (false, _) => (self.scalar, o),
            (true, false) => (o.scalar, self),
        };
        Ok(Value { scalar: &s * &v.scalar, deriv: v.deriv.iter().map(|d| &s * d).collect() })
    }
}

struct Parser {
    toks: Vec<Tok>,
    pos: usize,
    n: usize,
}

impl Parser {
    fn peek(&self) -> Option<&Tok> {
        self.toks.get(self.pos)
    }

    fn next(&mut self) -> Option<Tok> {
        let t = self.toks.get(self.pos).cloned();
        self.pos += 1;
        t
    }

    fn expr(&mut self) -> Result<Value, LieError> {
        let mut sign = true;
        match self.peek() {
            Some(Tok::Plus) => {
                self.pos += 1;
            }
            Some(Tok::Minus) => {
                self.pos += 1;
                sign = false;
            }
            _ => {}
        }
        let zero = Value::scalar(Polynomial::zero(self.n));
        let mut acc = zero.add(self.term()?, sign);
        loop {
            match self.peek() {
                Some(Tok::Plus) => {
                    self.pos += 1;
                    acc = acc.add(self.term()?, true);
                }
                Some(Tok::Minus) => {
                    self.pos += 1;
                    acc = acc.add(self.term()?, false);
                }
                _ => return Ok(acc),
            }
        }
    }

    fn term(&mut self) -> Result<Value, LieError> {
        let mut acc = self.factor()?;
        loop {
            match self.peek() {
                Some(Tok::Star) => {
                    self.pos += 1;
                    acc = acc.mul(self.factor()?)?;
                }
                Some(Tok::Slash) => {
                    self.pos += 1;
                    let d = self.factor()?;
                    let c = match (d.has_deriv(), d.scalar.as_constant()) {
                        (false, Some(c)) if !c.is_zero() => c,
                        _ => return Err(err("division only by a nonzero constant")),
                    };
                    let inv = Value::scalar(Polynomial::constant(self.n, Rational::one() / c));
                    acc = acc.mul(inv)?;
                }
                _ => return Ok(acc),
            }
        }
    }

    fn factor(&mut self) -> Result<Value, LieError> {
        let base = self.atom()?;
        if self.peek() == Some(&Tok::Caret) {
            self.pos += 1;
            let e = match self.next() {
                Some(Tok::Num(r)) if r.is_integer() && r >= Rational::zero() => r.to_integer(),
                _ => return Err(err("exponent must be a nonnegative integer")),
            };
            if base.has_deriv() {
                return Err(err("cannot raise a derivative to a power"));
            }
            let k: u32 = e.try_into().map_err(|_| err("exponent too large"))?;
            return Ok(Value::scalar(base.scalar.pow(k)));
        }
        Ok(base)
    }

    fn atom(&mut self) -> Result<Value, LieError> {
        let n = self.n;
        match self.next() {
            Some(Tok::Num(r)) => Ok(Value::scalar(Polynomial::constant(n, r))),
            Some(Tok::Var(k)) => {
                if k >= n {
                    return Err(err(format!("variable x{} exceeds dimension {n}", k + 1)));
                }
                Ok(Value::scalar(Polynomial::var(n, k)))
            }
            Some(Tok::D(k)) => {
                if k >= n {
                    return Err(err(format!("d/dx{} exceeds dimension {n}", k + 1)));
                }
                let mut v = Value::scalar(Polynomial::zero(n));
                v.deriv[k] = Polynomial::one(n);
                Ok(v)
            }
            Some(Tok::LParen) => {
                let v = self.expr()?;
                match self.next() {
                    Some(Tok::RParen) => Ok(v),
                    _ => Err(err("missing ')'")),
                }
            }
            other => Err(err(format!("unexpected token {other:?}"))),
        }
    }
}

fn parse_value(s: &str, n: usize) -> Result<Value, LieError> {
    let toks = lex(s)?;
    if toks.is_empty() {
        return Err(err("empty expression"));
    }
    let mut p = Parser { toks, pos: 0, n };
    let v = p.expr()?;
    if p.pos != p.toks.len() {
        return Err(err(format!("trailing input at token {}", p.pos)));
    }
    Ok(v)
}

/// Parses a polynomial in x1..xn.
pub fn parse_polynomial(s: &str, n: usize) -> Result<Polynomial, LieError> {
    let v = parse_value(s, n)?;
    if v.has_deriv() {
        return Err(err("expected a polynomial, found a derivative"));
    }
    Ok(v.scalar)
}

/// Parses a first-order field such as `d/dx1 - x1*x2*d/dx5` (weight 1).
pub fn parse_field(s: &str, n: usize) -> Result<PolyVectorField, LieError> {
    let v = parse_value(s, n)?;
    if !v.scalar.is_zero() {
        return Err(err("field has a zeroth-order part"));
    }
    PolyVectorField::new(v.deriv, 1)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::liealg::polynomial::{rat, rat_int};

    #[test]
    fn parses_example_field() {
        let f = parse_field("d/dx1 - x1*x2*d/dx5", 5).unwrap();
        assert_eq!(f.component(0), &Polynomial::one(5));
        let x1x2 = &Polynomial::var(5, 0) * &Polynomial::var(5, 1);
        assert_eq!(f.component(4), &(-&x1x2));
    }

    #[test]
    fn rationals_and_decimals_are_exact() {
        let p = parse_polynomial("3/2*x1 + 0.25", 1).unwrap();
        assert_eq!(p.eval(&[rat_int(2)]), rat(13, 4));
    }

    #[test]
    fn powers_and_parentheses() {
        let p = parse_polynomial("(x1 + x2)^2 - x1^2 - x2^2", 2).unwrap();
        assert_eq!(p, (&Polynomial::var(2, 0) * &Polynomial::var(2, 1)).scale(&rat_int(2)));
    }

    #[test]
    fn factored_field() {
        let f = parse_field("(1 + x1)*d/dx2", 2).unwrap();
        assert_eq!(f.component(1), &(&Polynomial::one(2) + &Polynomial::var(2, 0)));
    }

    #[test]
    fn rejects_bad_input() {
        assert!(parse_field("d/dx1*d/dx2", 2).is_err());
        assert!(parse_field("x1", 2).is_err());
        assert!(parse_polynomial("x3", 2).is_err());
        assert!(parse_polynomial("x1/x2", 2).is_err());
        assert!(parse_polynomial("x1 +", 2).is_err());
        assert!(parse_polynomial("x0", 2).is_err());
    }
}
