//! The coefficient-ring abstraction shared by series, operators and star
//! products.
//!
//! Elements carry their own ring context (variable count, multiplicative
//! set), so neutral elements are produced from an existing element rather
//! than out of thin air.

use std::fmt::Debug;

use crate::poly::MultiPoly;
use crate::rational::Rational;

/// A commutative ℚ-algebra of functions in `nvars` variables that is closed
/// under partial derivatives and contains the polynomials.
pub trait Coeff: Clone + PartialEq + Debug {
    fn zero_like(&self) -> Self;
    fn one_like(&self) -> Self;
    fn is_zero(&self) -> bool;
    fn nvars(&self) -> usize;

    fn add(&self, other: &Self) -> Self;
    fn sub(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn neg(&self) -> Self;
    fn scale(&self, c: &Rational) -> Self;

    fn partial(&self, var: usize, times: u32) -> Self;

    /// Image of a polynomial in this element's ring.
    fn lift(&self, p: &MultiPoly) -> Self;

    /// Multiplicative inverse when this element is a unit.
    fn unit_inverse(&self) -> Option<Self>;

    fn is_one(&self) -> bool {
        *self == self.one_like()
    }

    fn derive(&self, alpha: &crate::poly::Monomial) -> Self {
        let mut out = self.clone();
        for (v, &t) in alpha.exponents().iter().enumerate() {
            if t > 0 {
                out = out.partial(v, t);
            }
        }
        out
    }
}

impl Coeff for MultiPoly {
    fn zero_like(&self) -> Self {
        MultiPoly::zero(self.nvars())
    }
    fn one_like(&self) -> Self {
        MultiPoly::one(self.nvars())
    }
    fn is_zero(&self) -> bool {
        MultiPoly::is_zero(self)
    }
    fn nvars(&self) -> usize {
        MultiPoly::nvars(self)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn sub(&self, other: &Self) -> Self {
        self - other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn neg(&self) -> Self {
        -self
    }
    fn scale(&self, c: &Rational) -> Self {
        MultiPoly::scale(self, c)
    }
    fn partial(&self, var: usize, times: u32) -> Self {
        MultiPoly::partial(self, var, times)
    }
    fn lift(&self, p: &MultiPoly) -> Self {
        p.clone()
    }
    fn unit_inverse(&self) -> Option<Self> {
        use num_traits::Zero;
        self.as_constant()
            .filter(|c| !c.is_zero())
            .map(|c| MultiPoly::constant(self.nvars(), c.recip()))
    }
    fn derive(&self, alpha: &crate::poly::Monomial) -> Self {
        MultiPoly::derive(self, alpha)
    }
}
