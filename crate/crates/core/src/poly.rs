//! Sparse multivariate polynomials over ℚ.
//!
//! Terms are stored in a `BTreeMap` keyed by [`Monomial`], whose `Ord` is the
//! graded lexicographic order (total degree first, then the first variable
//! is most significant). Zero coefficients are never stored, so structural
//! equality is mathematical equality.

use std::cmp::Ordering;
use std::collections::BTreeMap;
use std::fmt;

use num_traits::{One, Signed, Zero};
use smallvec::SmallVec;

use crate::error::{Error, Result};
use crate::rational::{self, Rational};

/// Exponent vector of a monomial.
#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct Monomial(SmallVec<[u32; 4]>);

impl Monomial {
    pub fn one(nvars: usize) -> Self {
        Monomial(SmallVec::from_elem(0, nvars))
    }

    pub fn from_exponents(exps: &[u32]) -> Self {
        Monomial(SmallVec::from_slice(exps))
    }

    pub fn var(nvars: usize, index: usize) -> Self {
        let mut m = Self::one(nvars);
        m.0[index] = 1;
        m
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_one(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        Monomial(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.0.iter().zip(&other.0).all(|(a, b)| a <= b)
    }

    /// `other / self`, assuming `self.divides(other)`.
    pub fn quotient_of(&self, other: &Monomial) -> Monomial {
        Monomial(other.0.iter().zip(&self.0).map(|(b, a)| b - a).collect())
    }

    /// Places this monomial into a larger variable set starting at `offset`.
    pub fn embed(&self, nvars: usize, offset: usize) -> Monomial {
        let mut m = Self::one(nvars);
        m.0[offset..offset + self.0.len()].copy_from_slice(&self.0);
        m
    }
}

/// All monomials in `nvars` variables of total degree at most `max_deg`,
/// in ascending graded-lex order.
pub fn monomials_up_to(nvars: usize, max_deg: u32) -> Vec<Monomial> {
    fn rec(left: u32, slots: usize, acc: &mut Vec<u32>, out: &mut Vec<Monomial>) {
        if slots == 0 {
            if left == 0 {
                out.push(Monomial::from_exponents(acc));
            }
            return;
        }
        for e in 0..=left {
            acc.push(e);
            rec(left - e, slots - 1, acc, out);
            acc.pop();
        }
    }
    let mut out = Vec::new();
    for d in 0..=max_deg {
        rec(d, nvars, &mut Vec::new(), &mut out);
    }
    out.sort();
    out
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| self.0.cmp(&other.0))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

#[derive(Clone, PartialEq, Eq, Hash, Debug)]
pub struct MultiPoly {
    nvars: usize,
    terms: BTreeMap<Monomial, Rational>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ArithOp {
    Add,
    Sub,
    Mul,
}

/// Checked ring operation; the only failure is a variable-count mismatch.
pub fn poly_arith(a: &MultiPoly, b: &MultiPoly, op: ArithOp) -> Result<MultiPoly> {
    if a.nvars != b.nvars {
        return Err(Error::VarCountMismatch {
            left: a.nvars,
            right: b.nvars,
        });
    }
    Ok(match op {
        ArithOp::Add => a + b,
        ArithOp::Sub => a - b,
        ArithOp::Mul => a * b,
    })
}

impl MultiPoly {
    pub fn zero(nvars: usize) -> Self {
        MultiPoly {
            nvars,
            terms: BTreeMap::new(),
        }
    }

    pub fn one(nvars: usize) -> Self {
        Self::constant(nvars, Rational::one())
    }

    pub fn constant(nvars: usize, c: Rational) -> Self {
        Self::monomial(nvars, Monomial::one(nvars), c)
    }

    pub fn var(nvars: usize, index: usize) -> Self {
        Self::monomial(nvars, Monomial::var(nvars, index), Rational::one())
    }

    pub fn monomial(nvars: usize, mono: Monomial, c: Rational) -> Self {
        assert_eq!(mono.nvars(), nvars, "monomial length must equal nvars");
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(mono, c);
        }
        MultiPoly { nvars, terms }
    }

    /// Builds a polynomial from `(exponents, coefficient)` pairs, merging
    /// repeated exponents.
    pub fn from_terms<I>(nvars: usize, terms: I) -> Self
    where
        I: IntoIterator<Item = (Monomial, Rational)>,
    {
        let mut p = Self::zero(nvars);
        for (m, c) in terms {
            assert_eq!(m.nvars(), nvars, "monomial length must equal nvars");
            p.add_term(m, c);
        }
        p
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.as_constant().is_some_and(|c| c.is_one())
    }

    /// The value if this is a constant polynomial (including zero).
    pub fn as_constant(&self) -> Option<Rational> {
        match self.terms.len() {
            0 => Some(Rational::zero()),
            1 => {
                let (m, c) = self.terms.iter().next().unwrap();
                m.is_one().then(|| c.clone())
            }
            _ => None,
        }
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    /// Terms in ascending graded-lex order.
    pub fn terms(&self) -> impl DoubleEndedIterator<Item = (&Monomial, &Rational)> {
        self.terms.iter()
    }

    pub fn coeff(&self, m: &Monomial) -> Rational {
        self.terms.get(m).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn leading_term(&self) -> Option<(&Monomial, &Rational)> {
        self.terms.iter().next_back()
    }

    pub fn total_degree(&self) -> Option<u32> {
        self.terms.keys().map(Monomial::degree).max()
    }

    fn add_term(&mut self, m: Monomial, c: Rational) {
        if c.is_zero() {
            return;
        }
        match self.terms.entry(m) {
            std::collections::btree_map::Entry::Vacant(e) => {
                e.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut e) => {
                *e.get_mut() += c;
                if e.get().is_zero() {
                    e.remove();
                }
            }
        }
    }

    pub fn scale(&self, c: &Rational) -> MultiPoly {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        MultiPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, a)| (m.clone(), a * c)).collect(),
        }
    }

    pub fn mul_monomial(&self, mono: &Monomial, c: &Rational) -> MultiPoly {
        if c.is_zero() {
            return Self::zero(self.nvars);
        }
        MultiPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, a)| (m.mul(mono), a * c)).collect(),
        }
    }

    pub fn pow(&self, n: u32) -> MultiPoly {
        let mut acc = Self::one(self.nvars);
        let mut base = self.clone();
        let mut n = n;
        while n > 0 {
            if n & 1 == 1 {
                acc = &acc * &base;
            }
            n >>= 1;
            if n > 0 {
                base = &base * &base;
            }
        }
        acc
    }

    /// Iterated partial derivative `∂^times / ∂ x_var^times`.
    pub fn partial(&self, var: usize, times: u32) -> MultiPoly {
        assert!(var < self.nvars, "variable index out of range");
        if times == 0 {
            return self.clone();
        }
        let mut out = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.0[var];
            if e < times {
                continue;
            }
            // falling factorial e (e-1) ... (e-times+1)
            let factor: u64 = (0..times).map(|i| u64::from(e - i)).product();
            let mut nm = m.clone();
            nm.0[var] = e - times;
            out.add_term(nm, c * Rational::from_integer(factor.into()));
        }
        out
    }

    /// Checked variant of [`MultiPoly::partial`].
    pub fn try_partial(&self, var: usize, times: u32) -> Result<MultiPoly> {
        if var >= self.nvars {
            return Err(Error::VarOutOfRange {
                index: var,
                nvars: self.nvars,
            });
        }
        Ok(self.partial(var, times))
    }

    /// Mixed derivative `∂^alpha`.
    pub fn derive(&self, alpha: &Monomial) -> MultiPoly {
        let mut out = self.clone();
        for (v, &t) in alpha.exponents().iter().enumerate() {
            if t > 0 {
                out = out.partial(v, t);
                if out.is_zero() {
                    break;
                }
            }
        }
        out
    }

    pub fn eval(&self, point: &[Rational]) -> Rational {
        assert_eq!(point.len(), self.nvars, "point dimension must equal nvars");
        let mut acc = Rational::zero();
        for (m, c) in &self.terms {
            let mut t = c.clone();
            for (x, &e) in point.iter().zip(m.exponents()) {
                if e > 0 {
                    t *= num_traits::pow(x.clone(), e as usize);
                }
            }
            acc += t;
        }
        acc
    }

    /// Division by a single polynomial in graded-lex order. For one divisor
    /// the remainder is zero exactly when the divisor divides `self`.
    pub fn div_rem(&self, d: &MultiPoly) -> Result<(MultiPoly, MultiPoly)> {
        if d.nvars != self.nvars {
            return Err(Error::VarCountMismatch {
                left: self.nvars,
                right: d.nvars,
            });
        }
        let (lm, lc) = d.leading_term().ok_or(Error::DivisionByZero)?;
        let (lm, lc_inv) = (lm.clone(), lc.recip());
        let mut q = Self::zero(self.nvars);
        let mut r = Self::zero(self.nvars);
        let mut p = self.clone();
        while let Some((m, c)) = p.terms.iter().next_back() {
            let (m, c) = (m.clone(), c.clone());
            if lm.divides(&m) {
                let qm = lm.quotient_of(&m);
                let qc = &c * &lc_inv;
                p = &p - &d.mul_monomial(&qm, &qc);
                q.add_term(qm, qc);
            } else {
                p.terms.remove(&m);
                r.add_term(m, c);
            }
        }
        Ok((q, r))
    }

    /// Exact quotient, or [`Error::NotDivisible`].
    pub fn div_exact(&self, d: &MultiPoly) -> Result<MultiPoly> {
        let (q, r) = self.div_rem(d)?;
        if r.is_zero() {
            Ok(q)
        } else {
            Err(Error::NotDivisible(self.to_string(), d.to_string()))
        }
    }

    pub fn divides(&self, other: &MultiPoly) -> bool {
        !self.is_zero() && other.div_rem(self).is_ok_and(|(_, r)| r.is_zero())
    }

    /// Re-expresses this polynomial in a larger variable set, mapping
    /// variable `i` to `offset + i`.
    pub fn embed(&self, nvars: usize, offset: usize) -> MultiPoly {
        assert!(offset + self.nvars <= nvars, "embedding out of range");
        MultiPoly {
            nvars,
            terms: self
                .terms
                .iter()
                .map(|(m, c)| (m.embed(nvars, offset), c.clone()))
                .collect(),
        }
    }

    /// Substitutes a value for one variable; the variable count is kept.
    pub fn substitute(&self, var: usize, value: &Rational) -> MultiPoly {
        let mut out = Self::zero(self.nvars);
        for (m, c) in &self.terms {
            let e = m.0[var];
            let mut nm = m.clone();
            nm.0[var] = 0;
            out.add_term(nm, c * num_traits::pow(value.clone(), e as usize));
        }
        out
    }

    /// Formats with the given variable names. Factors inside a monomial
    /// are printed in alphabetical order of their names; terms run from
    /// the graded-lex leading term down.
    pub fn display_with(&self, names: &[String]) -> String {
        join_terms(self.signed_terms(names, None))
    }

    /// Each term as `(negative, body)`, optionally with an extra factor
    /// (such as a power of the deformation parameter) placed right after
    /// the numeric coefficient.
    pub fn signed_terms(&self, names: &[String], extra: Option<&str>) -> Vec<(bool, String)> {
        self.terms
            .iter()
            .rev()
            .map(|(m, c)| {
                let mut factors: Vec<String> = Vec::new();
                if let Some(e) = extra {
                    factors.push(e.to_string());
                }
                factors.extend(monomial_factors(m, names));
                let abs = c.abs();
                let body = if factors.is_empty() {
                    rational::format(&abs)
                } else if abs.is_one() {
                    factors.join("*")
                } else {
                    format!("{}*{}", rational::format(&abs), factors.join("*"))
                };
                (c.is_negative(), body)
            })
            .collect()
    }
}

fn monomial_factors(m: &Monomial, names: &[String]) -> Vec<String> {
    let mut factors: Vec<(&str, u32)> = m
        .exponents()
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(i, &e)| (names[i].as_str(), e))
        .collect();
    factors.sort();
    factors
        .into_iter()
        .map(|(n, e)| if e == 1 { n.to_string() } else { format!("{n}^{e}") })
        .collect()
}

/// Joins signed terms as `a + b - c`; an empty list prints as `0`.
pub fn join_terms(terms: Vec<(bool, String)>) -> String {
    if terms.is_empty() {
        return "0".to_string();
    }
    let mut out = String::new();
    for (i, (neg, body)) in terms.into_iter().enumerate() {
        match (i, neg) {
            (0, false) => {}
            (0, true) => out.push('-'),
            (_, false) => out.push_str(" + "),
            (_, true) => out.push_str(" - "),
        }
        out.push_str(&body);
    }
    out
}

pub fn default_names(nvars: usize) -> Vec<String> {
    (0..nvars).map(|i| format!("x{i}")).collect()
}

impl fmt::Display for MultiPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with(&default_names(self.nvars)))
    }
}

impl std::ops::Add for &MultiPoly {
    type Output = MultiPoly;
    fn add(self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.nvars, rhs.nvars, "variable count mismatch");
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), c.clone());
        }
        out
    }
}

impl std::ops::Sub for &MultiPoly {
    type Output = MultiPoly;
    fn sub(self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.nvars, rhs.nvars, "variable count mismatch");
        let mut out = self.clone();
        for (m, c) in &rhs.terms {
            out.add_term(m.clone(), -c.clone());
        }
        out
    }
}

impl std::ops::Mul for &MultiPoly {
    type Output = MultiPoly;
    fn mul(self, rhs: &MultiPoly) -> MultiPoly {
        assert_eq!(self.nvars, rhs.nvars, "variable count mismatch");
        let mut out = MultiPoly::zero(self.nvars);
        for (ma, ca) in &self.terms {
            for (mb, cb) in &rhs.terms {
                out.add_term(ma.mul(mb), ca * cb);
            }
        }
        out
    }
}

impl std::ops::Neg for &MultiPoly {
    type Output = MultiPoly;
    fn neg(self) -> MultiPoly {
        MultiPoly {
            nvars: self.nvars,
            terms: self.terms.iter().map(|(m, c)| (m.clone(), -c)).collect(),
        }
    }
}

macro_rules! forward_owned {
    ($tr:ident, $method:ident) => {
        impl std::ops::$tr for MultiPoly {
            type Output = MultiPoly;
            fn $method(self, rhs: MultiPoly) -> MultiPoly {
                (&self).$method(&rhs)
            }
        }
    };
}
forward_owned!(Add, add);
forward_owned!(Sub, sub);
forward_owned!(Mul, mul);

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::{int, ratio};
    use proptest::prelude::*;

    fn x() -> MultiPoly {
        MultiPoly::var(2, 0)
    }
    fn p() -> MultiPoly {
        MultiPoly::var(2, 1)
    }
    fn c(n: i64) -> MultiPoly {
        MultiPoly::constant(2, int(n))
    }
    fn names() -> Vec<String> {
        vec!["x".into(), "p".into()]
    }

    #[test]
    fn difference_of_squares() {
        let got = poly_arith(&(&x() + &p()), &(&x() - &p()), ArithOp::Mul).unwrap();
        assert_eq!(got, &x().pow(2) - &p().pow(2));
    }

    #[test]
    fn additive_identity() {
        assert_eq!(poly_arith(&x(), &MultiPoly::zero(2), ArithOp::Add).unwrap(), x());
    }

    #[test]
    fn square_expansion_cancels() {
        let lhs = (&x() + &c(1)).pow(2);
        let rhs = &(&x().pow(2) + &x().scale(&int(2))) + &c(1);
        assert!(poly_arith(&lhs, &rhs, ArithOp::Sub).unwrap().is_zero());
    }

    #[test]
    fn var_count_mismatch() {
        let err = poly_arith(&x(), &MultiPoly::var(3, 0), ArithOp::Add).unwrap_err();
        assert_eq!(err, Error::VarCountMismatch { left: 2, right: 3 });
    }

    #[test]
    fn power_rule() {
        let f = &x().pow(3) * &p();
        assert_eq!(f.partial(0, 2), &x() * &p().scale(&int(6)));
        assert!(p().partial(0, 1).is_zero());
        let g = &x().pow(2) * &p().pow(2);
        assert_eq!(g.partial(1, 2), x().pow(2).scale(&int(2)));
        assert!(x().try_partial(2, 1).is_err());
    }

    #[test]
    fn exact_division() {
        let d = &x() - &c(1);
        let n = &x().pow(2) - &c(1);
        assert_eq!(n.div_exact(&d).unwrap(), &x() + &c(1));
        assert!(x().div_exact(&p()).is_err());
        assert!(x().div_exact(&MultiPoly::zero(2)).is_err());
    }

    #[test]
    fn printing_is_grlex_with_sorted_factors() {
        let f = &(&x().pow(2) * &p()).scale(&ratio(3, 2)) - &c(7);
        assert_eq!(f.display_with(&names()), "3/2*p*x^2 - 7");
        assert_eq!((&x() - &p()).display_with(&names()), "x - p");
        assert_eq!((-&x()).display_with(&names()), "-x");
        assert_eq!(MultiPoly::zero(2).display_with(&names()), "0");
    }

    #[test]
    fn evaluation_and_substitution() {
        let f = &(&x() * &p()) + &c(3);
        assert_eq!(f.eval(&[int(2), int(5)]), int(13));
        assert_eq!(f.substitute(0, &int(0)), c(3));
    }

    pub(crate) fn arb_poly(nvars: usize, max_deg: u32) -> impl Strategy<Value = MultiPoly> {
        prop::collection::vec((prop::collection::vec(0..=max_deg, nvars), -5i64..=5, 1i64..=3), 0..5).prop_map(
            move |ts| {
                MultiPoly::from_terms(
                    nvars,
                    ts.into_iter()
                        .map(|(e, n, d)| (Monomial::from_exponents(&e), ratio(n, d))),
                )
            },
        )
    }

    proptest! {
        #[test]
        fn ring_axioms(a in arb_poly(2, 2), b in arb_poly(2, 2), c in arb_poly(2, 2)) {
            prop_assert_eq!(&(&a * &b) * &c, &a * &(&b * &c));
            prop_assert_eq!(&(&a + &b) + &c, &a + &(&b + &c));
            prop_assert_eq!(&a * &(&b + &c), &(&a * &b) + &(&a * &c));
            prop_assert_eq!(&a * &b, &b * &a);
        }

        #[test]
        fn division_recovers_product(a in arb_poly(2, 2), b in arb_poly(2, 2)) {
            prop_assume!(!b.is_zero());
            prop_assert_eq!((&a * &b).div_exact(&b).unwrap(), a);
        }
    }
}
