//! Recursive-descent parser for polynomial expressions.
//!
//! Grammar (whitespace insignificant):
//!
//! ```text
//! expr   := term (('+' | '-') term)*
//! term   := unary (('*' | '/') unary)*
//! unary  := ('-' | '+') unary | power
//! power  := atom ('^' integer)?
//! atom   := integer | identifier | '(' expr ')'
//! ```
//!
//! Rationals are written as `a/b`. Intermediate values are kept as
//! fractions so that the same parser serves both polynomial and
//! localized inputs; the entry points decide which denominators are
//! acceptable. Errors carry the byte offset of the offending token.

use std::sync::Arc;

use num_bigint::BigInt;

use crate::error::{Error, Result};
use crate::frac::{LocalFrac, MultSetSpec};
use crate::poly::MultiPoly;
use crate::rational::Rational;
use crate::series::LambdaSeries;

/// Reserved name of the deformation parameter in series text.
pub const LAMBDA: &str = "L";

#[derive(Clone, Debug)]
struct Value {
    num: MultiPoly,
    den: MultiPoly,
}

impl Value {
    fn poly(p: MultiPoly) -> Self {
        let den = MultiPoly::one(p.nvars());
        Value { num: p, den }
    }

    fn simplify(mut self) -> Self {
        if let Some(c) = self.den.as_constant() {
            self.num = self.num.scale(&c.recip());
            self.den = MultiPoly::one(self.num.nvars());
        }
        self
    }
}

struct Parser<'a> {
    src: &'a str,
    bytes: &'a [u8],
    pos: usize,
    names: &'a [String],
    first_nonconstant_div: Option<usize>,
}

fn err<T>(offset: usize, message: impl Into<String>) -> Result<T> {
    Err(Error::Parse {
        offset,
        message: message.into(),
    })
}

impl<'a> Parser<'a> {
    fn new(src: &'a str, names: &'a [String]) -> Self {
        Parser {
            src,
            bytes: src.as_bytes(),
            pos: 0,
            names,
            first_nonconstant_div: None,
        }
    }

    fn nvars(&self) -> usize {
        self.names.len()
    }

    fn skip_ws(&mut self) {
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.bytes.get(self.pos).copied()
    }

    fn parse_all(mut self) -> Result<(Value, Option<usize>)> {
        if self.peek().is_none() {
            return err(self.pos, "empty expression");
        }
        let v = self.expr()?;
        if let Some(c) = self.peek() {
            return err(self.pos, format!("unexpected '{}'", c as char));
        }
        Ok((v, self.first_nonconstant_div))
    }

    fn expr(&mut self) -> Result<Value> {
        let mut acc = self.term()?;
        while let Some(op @ (b'+' | b'-')) = self.peek() {
            self.pos += 1;
            let rhs = self.term()?;
            let cross = &rhs.num * &acc.den;
            let num = &acc.num * &rhs.den;
            acc = Value {
                num: if op == b'+' { &num + &cross } else { &num - &cross },
                den: &acc.den * &rhs.den,
            }
            .simplify();
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<Value> {
        let mut acc = self.unary()?;
        while let Some(op @ (b'*' | b'/')) = self.peek() {
            let at = self.pos;
            self.pos += 1;
            let rhs = self.unary()?;
            acc = if op == b'*' {
                Value {
                    num: &acc.num * &rhs.num,
                    den: &acc.den * &rhs.den,
                }
            } else {
                if rhs.num.is_zero() {
                    return err(at, "division by zero");
                }
                if rhs.num.as_constant().is_none() && self.first_nonconstant_div.is_none() {
                    self.first_nonconstant_div = Some(at);
                }
                Value {
                    num: &acc.num * &rhs.den,
                    den: &acc.den * &rhs.num,
                }
            }
            .simplify();
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<Value> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                let v = self.unary()?;
                Ok(Value {
                    num: -&v.num,
                    den: v.den,
                })
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<Value> {
        let base = self.atom()?;
        if self.peek() != Some(b'^') {
            return Ok(base);
        }
        self.pos += 1;
        self.skip_ws();
        let at = self.pos;
        let digits = self.digits();
        if digits.is_empty() {
            return err(at, "expected a nonnegative integer exponent");
        }
        let e: u32 = match digits.parse() {
            Ok(e) => e,
            Err(_) => return err(at, "exponent too large"),
        };
        Ok(Value {
            num: base.num.pow(e),
            den: base.den.pow(e),
        })
    }

    fn digits(&mut self) -> &'a str {
        let start = self.pos;
        while self.pos < self.bytes.len() && self.bytes[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        &self.src[start..self.pos]
    }

    fn atom(&mut self) -> Result<Value> {
        let at = match self.peek() {
            Some(_) => self.pos,
            None => return err(self.pos, "unexpected end of input"),
        };
        let c = self.bytes[at];
        if c.is_ascii_digit() {
            let digits = self.digits();
            let n: BigInt = digits.parse().expect("digits parse as an integer");
            return Ok(Value::poly(MultiPoly::constant(
                self.nvars(),
                Rational::from_integer(n),
            )));
        }
        if c.is_ascii_alphabetic() || c == b'_' {
            let start = self.pos;
            while self.pos < self.bytes.len()
                && (self.bytes[self.pos].is_ascii_alphanumeric() || self.bytes[self.pos] == b'_')
            {
                self.pos += 1;
            }
            let ident = &self.src[start..self.pos];
            return match self.names.iter().position(|n| n == ident) {
                Some(i) => Ok(Value::poly(MultiPoly::var(self.nvars(), i))),
                None => err(start, format!("unknown variable '{ident}'")),
            };
        }
        if c == b'(' {
            self.pos += 1;
            let v = self.expr()?;
            if self.peek() != Some(b')') {
                return err(self.pos, "expected ')'");
            }
            self.pos += 1;
            return Ok(v);
        }
        let ch = self.src[at..].chars().next().unwrap_or('?');
        err(at, format!("unexpected '{ch}'"))
    }
}

fn check_names(names: &[String]) -> Result<()> {
    for (i, n) in names.iter().enumerate() {
        if names[..i].contains(n) {
            return Err(Error::InvalidOperator(format!("duplicate variable name '{n}'")));
        }
    }
    Ok(())
}

/// Parses a polynomial over ℚ. Division is allowed only when it is exact.
pub fn parse_poly(text: &str, names: &[String]) -> Result<MultiPoly> {
    check_names(names)?;
    let (v, div_at) = Parser::new(text, names).parse_all()?;
    if v.den.is_one() {
        return Ok(v.num);
    }
    match v.num.div_exact(&v.den) {
        Ok(q) => Ok(q),
        Err(_) => err(
            div_at.unwrap_or(0),
            "division by a non-constant polynomial is not exact",
        ),
    }
}

/// Parses an element of `A_{S₀}`; the denominator must lie in the set.
pub fn parse_frac(text: &str, names: &[String], set: &Arc<MultSetSpec>) -> Result<LocalFrac> {
    check_names(names)?;
    let (v, _) = Parser::new(text, names).parse_all()?;
    LocalFrac::new(v.num, v.den, set)
}

fn with_lambda(names: &[String]) -> Result<Vec<String>> {
    if names.iter().any(|n| n == LAMBDA) {
        return Err(Error::InvalidOperator(format!(
            "'{LAMBDA}' is reserved for the deformation parameter"
        )));
    }
    let mut all = names.to_vec();
    all.push(LAMBDA.to_string());
    Ok(all)
}

/// Splits a polynomial in `names + [L]` by powers of `L`, keeping powers up
/// to `trunc`.
fn split_lambda(p: &MultiPoly, nvars: usize, trunc: usize) -> Vec<MultiPoly> {
    let mut coeffs = vec![MultiPoly::zero(nvars); trunc + 1];
    for (m, c) in p.terms() {
        let e = m.exponents();
        let k = e[nvars] as usize;
        if k > trunc {
            continue;
        }
        let mono = crate::poly::Monomial::from_exponents(&e[..nvars]);
        coeffs[k] = &coeffs[k] + &MultiPoly::monomial(nvars, mono, c.clone());
    }
    coeffs
}

/// Parses `c0 + c1*L + …`; powers of `L` beyond `trunc` are dropped.
pub fn parse_series(text: &str, names: &[String], trunc: usize) -> Result<LambdaSeries<MultiPoly>> {
    let all = with_lambda(names)?;
    let p = parse_poly(text, &all)?;
    Ok(LambdaSeries::new(split_lambda(&p, names.len(), trunc)))
}

/// Series with coefficients in `A_{S₀}`. The common denominator must be
/// free of `L` and lie in the set.
pub fn parse_frac_series(
    text: &str,
    names: &[String],
    trunc: usize,
    set: &Arc<MultSetSpec>,
) -> Result<LambdaSeries<LocalFrac>> {
    let all = with_lambda(names)?;
    check_names(&all)?;
    let (v, div_at) = Parser::new(text, &all).parse_all()?;
    let nvars = names.len();
    let den_parts = split_lambda(&v.den, nvars, v.den.total_degree().unwrap_or(0) as usize);
    if den_parts[1..].iter().any(|d| !d.is_zero()) {
        return err(div_at.unwrap_or(0), "denominator may not contain L");
    }
    let den = den_parts.into_iter().next().unwrap();
    let coeffs = split_lambda(&v.num, nvars, trunc)
        .into_iter()
        .map(|n| LocalFrac::new(n, den.clone(), set))
        .collect::<Result<Vec<_>>>()?;
    Ok(LambdaSeries::new(coeffs))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};

    fn names() -> Vec<String> {
        vec!["x".into(), "p".into()]
    }
    fn x() -> MultiPoly {
        MultiPoly::var(2, 0)
    }
    fn p() -> MultiPoly {
        MultiPoly::var(2, 1)
    }

    #[test]
    fn rational_coefficients() {
        let got = parse_poly("3/2*x^2*p - 7", &names()).unwrap();
        let want = &(&x().pow(2) * &p()).scale(&ratio(3, 2)) - &MultiPoly::constant(2, int(7));
        assert_eq!(got, want);
    }

    #[test]
    fn whitespace_and_parentheses() {
        let a = parse_poly("  ( x + p ) * (x-p)", &names()).unwrap();
        assert_eq!(a, &x().pow(2) - &p().pow(2));
        assert_eq!(parse_poly("-(-x)", &names()).unwrap(), x());
        assert_eq!(
            parse_poly("(x^2-1)/(x-1)", &names()).unwrap(),
            parse_poly("x+1", &names()).unwrap()
        );
    }

    #[test]
    fn error_offsets() {
        let e = parse_poly("x + q", &names()).unwrap_err();
        assert!(matches!(e, Error::Parse { offset: 4, .. }), "{e}");
        let e = parse_poly("x +", &names()).unwrap_err();
        assert!(matches!(e, Error::Parse { offset: 3, .. }), "{e}");
        let e = parse_poly("x / 0", &names()).unwrap_err();
        assert!(matches!(e, Error::Parse { offset: 2, .. }), "{e}");
        let e = parse_poly("1/x", &names()).unwrap_err();
        assert!(matches!(e, Error::Parse { offset: 1, .. }), "{e}");
        let e = parse_poly("x^", &names()).unwrap_err();
        assert!(matches!(e, Error::Parse { offset: 2, .. }), "{e}");
        let e = parse_poly("(x", &names()).unwrap_err();
        assert!(matches!(e, Error::Parse { offset: 2, .. }), "{e}");
        let e = parse_poly("x $", &names()).unwrap_err();
        assert!(matches!(e, Error::Parse { offset: 2, .. }), "{e}");
        assert!(parse_poly("   ", &names()).is_err());
    }

    #[test]
    fn series_text_round_trips() {
        let u = parse_series("p*x^2 + 2*L*x", &names(), 3).unwrap();
        assert_eq!(u.coeff(0), &(&p() * &x().pow(2)));
        assert_eq!(u.coeff(1), &x().scale(&int(2)));
        assert_eq!(u.display_with(&names()), "p*x^2 + 2*L*x");
        let dropped = parse_series("1 + L^5", &names(), 2).unwrap();
        assert!(dropped.is_one());
    }

    #[test]
    fn lambda_name_is_reserved() {
        let with_l = vec!["x".to_string(), "L".to_string()];
        assert!(parse_series("x", &with_l, 2).is_err());
    }

    #[test]
    fn fractions() {
        let set = Arc::new(MultSetSpec::generated("Sx", vec![x()]).unwrap());
        let f = parse_frac("p/x", &names(), &set).unwrap();
        assert_eq!(f.num(), &p());
        assert_eq!(f.den(), &x());
        assert!(matches!(parse_frac("1/(x+1)", &names(), &set), Err(Error::NotInSet(_))));
        let s = parse_frac_series("1/x - L*p/x^2", &names(), 2, &set).unwrap();
        assert_eq!(s.display_with(&names()), "1/x - L*p/x^2");
    }
}
