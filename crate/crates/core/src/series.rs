//! Formal power series in the deformation parameter λ, truncated at a fixed
//! order `K` (inclusive).
//!
//! Mixed-truncation arithmetic is refused rather than silently truncated.

use std::fmt;

use crate::error::{Error, Result};
use crate::frac::LocalFrac;
use crate::poly::{self, MultiPoly};
use crate::rational::Rational;
use crate::ring::Coeff;

#[derive(Clone, Debug, PartialEq)]
pub struct LambdaSeries<R> {
    coeffs: Vec<R>,
}

/// λ-adic order of vanishing.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord)]
pub enum LambdaOrder {
    Finite(usize),
    Infinite,
}

impl<R: Coeff> LambdaSeries<R> {
    /// `coeffs[i]` is the λ^i coefficient; the truncation order is
    /// `coeffs.len() - 1`.
    pub fn new(coeffs: Vec<R>) -> Self {
        assert!(!coeffs.is_empty(), "a series needs at least one coefficient");
        LambdaSeries { coeffs }
    }

    /// `c + 0·λ + … + 0·λ^trunc`.
    pub fn constant(c: R, trunc: usize) -> Self {
        let zero = c.zero_like();
        let mut coeffs = vec![zero; trunc + 1];
        coeffs[0] = c;
        LambdaSeries { coeffs }
    }

    /// Builds a series from leading coefficients, padding with zeros.
    pub fn from_prefix(prefix: Vec<R>, trunc: usize) -> Self {
        assert!(!prefix.is_empty(), "a series needs at least one coefficient");
        let zero = prefix[0].zero_like();
        let mut coeffs = prefix;
        coeffs.truncate(trunc + 1);
        coeffs.resize(trunc + 1, zero);
        LambdaSeries { coeffs }
    }

    pub fn trunc(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn coeffs(&self) -> &[R] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> &R {
        &self.coeffs[i]
    }

    pub fn zero_like(&self) -> Self {
        Self::constant(self.coeffs[0].zero_like(), self.trunc())
    }

    pub fn one_like(&self) -> Self {
        Self::constant(self.coeffs[0].one_like(), self.trunc())
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(Coeff::is_zero)
    }

    pub fn is_one(&self) -> bool {
        self.coeffs[0].is_one() && self.coeffs[1..].iter().all(Coeff::is_zero)
    }

    fn check_trunc(&self, other: &Self) -> Result<()> {
        if self.trunc() != other.trunc() {
            return Err(Error::TruncMismatch {
                left: self.trunc(),
                right: other.trunc(),
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_trunc(other)?;
        Ok(self.zip_with(other, R::add))
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_trunc(other)?;
        Ok(self.zip_with(other, R::sub))
    }

    fn zip_with(&self, other: &Self, f: impl Fn(&R, &R) -> R) -> Self {
        LambdaSeries {
            coeffs: self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn neg(&self) -> Self {
        self.map(R::neg)
    }

    pub fn scale(&self, c: &Rational) -> Self {
        self.map(|a| a.scale(c))
    }

    pub fn map<S: Coeff>(&self, f: impl Fn(&R) -> S) -> LambdaSeries<S> {
        LambdaSeries {
            coeffs: self.coeffs.iter().map(f).collect(),
        }
    }

    /// Multiplication by λ^k, dropping what falls past the truncation.
    pub fn shift(&self, k: usize) -> Self {
        let zero = self.coeffs[0].zero_like();
        let n = self.coeffs.len();
        let mut coeffs = vec![zero; n.min(k)];
        coeffs.extend(self.coeffs.iter().take(n.saturating_sub(k)).cloned());
        LambdaSeries { coeffs }
    }

    /// Same series viewed at a (lower or higher) truncation order.
    pub fn retruncate(&self, trunc: usize) -> Self {
        Self::from_prefix(self.coeffs.clone(), trunc)
    }

    /// Cauchy product over a supplied coefficient product: the λ^n
    /// coefficient is `Σ_{i+j=n} prod(u_i, v_j)`.
    pub fn mul_via(&self, other: &Self, prod: impl Fn(&R, &R) -> R) -> Result<Self> {
        self.check_trunc(other)?;
        let k = self.trunc();
        let mut coeffs = Vec::with_capacity(k + 1);
        for n in 0..=k {
            let mut acc = self.coeffs[0].zero_like();
            for i in 0..=n {
                let (a, b) = (&self.coeffs[i], &other.coeffs[n - i]);
                if a.is_zero() || b.is_zero() {
                    continue;
                }
                acc = acc.add(&prod(a, b));
            }
            coeffs.push(acc);
        }
        Ok(LambdaSeries { coeffs })
    }

    /// Pointwise (undeformed) product.
    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.mul_via(other, R::mul)
    }

    pub fn lambda_order(&self) -> LambdaOrder {
        self.coeffs
            .iter()
            .position(|c| !c.is_zero())
            .map_or(LambdaOrder::Infinite, LambdaOrder::Finite)
    }

    /// The involution `Σ λ^r f_r ↦ Σ (−λ)^r f_r`.
    pub fn lambda_flip(&self) -> Self {
        LambdaSeries {
            coeffs: self
                .coeffs
                .iter()
                .enumerate()
                .map(|(i, c)| if i % 2 == 1 { c.neg() } else { c.clone() })
                .collect(),
        }
    }
}

/// Free-function form of [`LambdaSeries::add`].
pub fn series_add<R: Coeff>(u: &LambdaSeries<R>, v: &LambdaSeries<R>) -> Result<LambdaSeries<R>> {
    u.add(v)
}

/// Free-function form of [`LambdaSeries::mul_via`].
pub fn series_mul_via<R: Coeff>(
    u: &LambdaSeries<R>,
    v: &LambdaSeries<R>,
    prod: impl Fn(&R, &R) -> R,
) -> Result<LambdaSeries<R>> {
    u.mul_via(v, prod)
}

fn lambda_factor(i: usize) -> Option<String> {
    match i {
        0 => None,
        1 => Some("L".to_string()),
        _ => Some(format!("L^{i}")),
    }
}

impl LambdaSeries<MultiPoly> {
    /// Text form `c0 + c1*L + c2*L^2 + …` with each coefficient expanded
    /// into monomials and `L` placed right after the numeric factor.
    pub fn display_with(&self, names: &[String]) -> String {
        let mut terms = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            terms.extend(c.signed_terms(names, lambda_factor(i).as_deref()));
        }
        poly::join_terms(terms)
    }
}

impl LambdaSeries<LocalFrac> {
    pub fn display_with(&self, names: &[String]) -> String {
        let mut terms = Vec::new();
        for (i, c) in self.coeffs.iter().enumerate() {
            terms.extend(c.signed_terms(names, lambda_factor(i).as_deref()));
        }
        poly::join_terms(terms)
    }
}

impl fmt::Display for LambdaSeries<MultiPoly> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let nvars = self.coeffs[0].nvars();
        f.write_str(&self.display_with(&poly::default_names(nvars)))
    }
}

impl fmt::Display for LambdaSeries<LocalFrac> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let nvars = self.coeffs[0].nvars();
        f.write_str(&self.display_with(&poly::default_names(nvars)))
    }
}

/// JSON form `{"trunc": K, "coeffs": ["<poly>", …]}`.
#[derive(Clone, Debug, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct SeriesJson {
    pub trunc: usize,
    pub coeffs: Vec<String>,
}

impl SeriesJson {
    pub fn from_series(u: &LambdaSeries<MultiPoly>, names: &[String]) -> Self {
        SeriesJson {
            trunc: u.trunc(),
            coeffs: u.coeffs.iter().map(|c| c.display_with(names)).collect(),
        }
    }

    pub fn to_series(&self, names: &[String]) -> Result<LambdaSeries<MultiPoly>> {
        if self.coeffs.len() != self.trunc + 1 {
            return Err(Error::Json(format!(
                "series with trunc {} needs {} coefficients, got {}",
                self.trunc,
                self.trunc + 1,
                self.coeffs.len()
            )));
        }
        let coeffs = self
            .coeffs
            .iter()
            .map(|c| crate::parse::parse_poly(c, names))
            .collect::<Result<Vec<_>>>()?;
        Ok(LambdaSeries::new(coeffs))
    }
}
