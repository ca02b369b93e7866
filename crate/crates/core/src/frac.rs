//! Commutative localization `A_{S₀}` of the polynomial ring at a decidable
//! multiplicative set.
//!
//! Two membership modes are supported: powers of a list of generators, and
//! nonvanishing at a basepoint. The polynomial ring is an integral domain, so
//! fraction equality is plain cross-multiplication.
//!
//! Generator mode divides greedily. That is sound when the generators are
//! irreducible and pairwise coprime, which is the convention for every set
//! this crate constructs.

use std::fmt;
use std::sync::Arc;

use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::poly::{self, MultiPoly};
use crate::rational::{self, Rational};
use crate::ring::Coeff;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SetMode {
    /// `c · g₁^{e₁} ⋯ g_r^{e_r}` with `c ≠ 0`.
    Generators(Vec<MultiPoly>),
    /// Polynomials not vanishing at the basepoint.
    PointLocal(Vec<Rational>),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultSetSpec {
    name: String,
    nvars: usize,
    mode: SetMode,
}

impl MultSetSpec {
    pub fn generated(name: impl Into<String>, generators: Vec<MultiPoly>) -> Result<Self> {
        let name = name.into();
        let nvars = match generators.first() {
            Some(g) => g.nvars(),
            None => return Err(Error::InvalidSet(format!("'{name}' has no generators"))),
        };
        for g in &generators {
            if g.is_zero() {
                return Err(Error::InvalidSet(format!("'{name}' has a zero generator")));
            }
            if g.nvars() != nvars {
                return Err(Error::VarCountMismatch {
                    left: nvars,
                    right: g.nvars(),
                });
            }
        }
        Ok(MultSetSpec {
            name,
            nvars,
            mode: SetMode::Generators(generators),
        })
    }

    pub fn point_local(name: impl Into<String>, basepoint: Vec<Rational>) -> Result<Self> {
        let name = name.into();
        if basepoint.is_empty() {
            return Err(Error::InvalidSet(format!("'{name}' has an empty basepoint")));
        }
        Ok(MultSetSpec {
            name,
            nvars: basepoint.len(),
            mode: SetMode::PointLocal(basepoint),
        })
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn mode(&self) -> &SetMode {
        &self.mode
    }

    pub fn contains(&self, q: &MultiPoly) -> bool {
        membership(q, self)
    }
}

/// Decides `q ∈ S₀`. Zero is never a member.
pub fn membership(q: &MultiPoly, s: &MultSetSpec) -> bool {
    if q.is_zero() || q.nvars() != s.nvars {
        return false;
    }
    match &s.mode {
        SetMode::PointLocal(point) => !q.eval(point).is_zero(),
        SetMode::Generators(gens) => {
            let mut rest = q.clone();
            loop {
                let mut progressed = false;
                for g in gens.iter().filter(|g| g.as_constant().is_none()) {
                    while let Ok((quot, rem)) = rest.div_rem(g) {
                        if !rem.is_zero() {
                            break;
                        }
                        rest = quot;
                        progressed = true;
                    }
                }
                if !progressed {
                    break;
                }
            }
            rest.as_constant().is_some_and(|c| !c.is_zero())
        }
    }
}

/// An element `num/den` of `A_{S₀}` with `den ∈ S₀`.
#[derive(Clone, Debug)]
pub struct LocalFrac {
    num: MultiPoly,
    den: MultiPoly,
    set: Arc<MultSetSpec>,
}

impl LocalFrac {
    pub fn new(num: MultiPoly, den: MultiPoly, set: &Arc<MultSetSpec>) -> Result<Self> {
        if num.nvars() != set.nvars {
            return Err(Error::VarCountMismatch {
                left: set.nvars,
                right: num.nvars(),
            });
        }
        if !membership(&den, set) {
            return Err(Error::NotInSet(den.to_string()));
        }
        Ok(Self::raw(num, den, Arc::clone(set)))
    }

    /// Keeps the given representative as is (no cancellation). Arithmetic
    /// on the result normalizes again.
    pub fn new_unreduced(num: MultiPoly, den: MultiPoly, set: &Arc<MultSetSpec>) -> Result<Self> {
        Self::new(num.clone(), den.clone(), set)?;
        Ok(LocalFrac {
            num,
            den,
            set: Arc::clone(set),
        })
    }

    /// The numerator morphism `r ↦ r/1`.
    pub fn from_poly(num: MultiPoly, set: &Arc<MultSetSpec>) -> Self {
        assert_eq!(num.nvars(), set.nvars, "variable count mismatch");
        let den = MultiPoly::one(num.nvars());
        LocalFrac {
            num,
            den,
            set: Arc::clone(set),
        }
    }

    fn raw(num: MultiPoly, den: MultiPoly, set: Arc<MultSetSpec>) -> Self {
        let mut f = LocalFrac { num, den, set };
        f.normalize();
        f
    }

    pub fn num(&self) -> &MultiPoly {
        &self.num
    }

    pub fn den(&self) -> &MultiPoly {
        &self.den
    }

    pub fn set(&self) -> &Arc<MultSetSpec> {
        &self.set
    }

    /// Divides by a member of the set.
    pub fn div_member(&self, s: &MultiPoly) -> Result<Self> {
        if !membership(s, &self.set) {
            return Err(Error::NotInSet(s.to_string()));
        }
        Ok(Self::raw(self.num.clone(), &self.den * s, Arc::clone(&self.set)))
    }

    /// The polynomial this fraction equals, if its denominator cancels.
    pub fn as_poly(&self) -> Option<&MultiPoly> {
        self.den.is_one().then_some(&self.num)
    }

    fn same_set(&self, other: &Self) -> bool {
        Arc::ptr_eq(&self.set, &other.set) || *self.set == *other.set
    }

    fn check_set(&self, other: &Self) {
        assert!(
            self.same_set(other),
            "multiplicative set mismatch: '{}' vs '{}'",
            self.set.name,
            other.set.name
        );
    }

    fn normalize(&mut self) {
        if self.num.is_zero() {
            self.den = MultiPoly::one(self.num.nvars());
            return;
        }
        if let Some(c) = self.den.as_constant() {
            self.num = self.num.scale(&c.recip());
            self.den = MultiPoly::one(self.num.nvars());
            return;
        }
        if let Ok((q, r)) = self.num.div_rem(&self.den) {
            if r.is_zero() {
                self.num = q;
                self.den = MultiPoly::one(self.num.nvars());
                return;
            }
        }
        if let SetMode::Generators(gens) = &self.set.mode {
            for g in gens.iter().filter(|g| g.as_constant().is_none()) {
                loop {
                    let (Ok((dq, dr)), Ok((nq, nr))) = (self.den.div_rem(g), self.num.div_rem(g)) else {
                        break;
                    };
                    if !dr.is_zero() || !nr.is_zero() {
                        break;
                    }
                    self.den = dq;
                    self.num = nq;
                }
            }
        }
        let lc = self
            .den
            .leading_term()
            .map(|(_, c)| c.clone())
            .unwrap_or_else(Rational::one);
        if !lc.is_one() {
            let inv = lc.recip();
            self.num = self.num.scale(&inv);
            self.den = self.den.scale(&inv);
        }
    }

    /// Derivative by the quotient rule, independent of any operator
    /// localization formula.
    pub fn quotient_rule_partial(&self, var: usize) -> Self {
        let dn = self.num.partial(var, 1);
        let dd = self.den.partial(var, 1);
        let num = &(&dn * &self.den) - &(&self.num * &dd);
        Self::raw(num, &self.den * &self.den, Arc::clone(&self.set))
    }

    pub fn display_with(&self, names: &[String]) -> String {
        poly::join_terms(self.signed_terms(names, None))
    }

    pub fn signed_terms(&self, names: &[String], extra: Option<&str>) -> Vec<(bool, String)> {
        if self.den.is_one() || self.num.is_zero() {
            return self.num.signed_terms(names, extra);
        }
        let den = self.den.display_with(names);
        let den = if self.den.num_terms() > 1 || den.contains('*') {
            format!("({den})")
        } else {
            den
        };
        if self.num.num_terms() == 1 {
            let (neg, body) = self.num.signed_terms(names, extra).remove(0);
            vec![(neg, format!("{body}/{den}"))]
        } else {
            let num = format!("({})", self.num.display_with(names));
            let body = match extra {
                Some(e) => format!("{e}*{num}/{den}"),
                None => format!("{num}/{den}"),
            };
            vec![(false, body)]
        }
    }
}

/// Equality test for two fractions over the same set.
pub fn frac_simplify_eq(u: &LocalFrac, v: &LocalFrac) -> Result<bool> {
    if !u.same_set(v) {
        return Err(Error::SetMismatch {
            left: u.set.name.clone(),
            right: v.set.name.clone(),
        });
    }
    Ok(&u.num * &v.den == &v.num * &u.den)
}

impl PartialEq for LocalFrac {
    fn eq(&self, other: &Self) -> bool {
        frac_simplify_eq(self, other).unwrap_or(false)
    }
}

impl fmt::Display for LocalFrac {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.display_with(&poly::default_names(self.set.nvars)))
    }
}

impl Coeff for LocalFrac {
    fn zero_like(&self) -> Self {
        LocalFrac::from_poly(MultiPoly::zero(self.set.nvars), &self.set)
    }
    fn one_like(&self) -> Self {
        LocalFrac::from_poly(MultiPoly::one(self.set.nvars), &self.set)
    }
    fn is_zero(&self) -> bool {
        self.num.is_zero()
    }
    fn is_one(&self) -> bool {
        self.num == self.den
    }
    fn nvars(&self) -> usize {
        self.set.nvars
    }
    fn add(&self, other: &Self) -> Self {
        self.check_set(other);
        if self.den == other.den {
            return Self::raw(&self.num + &other.num, self.den.clone(), Arc::clone(&self.set));
        }
        let num = &(&self.num * &other.den) + &(&other.num * &self.den);
        Self::raw(num, &self.den * &other.den, Arc::clone(&self.set))
    }
    fn sub(&self, other: &Self) -> Self {
        self.add(&other.neg())
    }
    fn mul(&self, other: &Self) -> Self {
        self.check_set(other);
        Self::raw(&self.num * &other.num, &self.den * &other.den, Arc::clone(&self.set))
    }
    fn neg(&self) -> Self {
        LocalFrac {
            num: -&self.num,
            den: self.den.clone(),
            set: Arc::clone(&self.set),
        }
    }
    fn scale(&self, c: &Rational) -> Self {
        Self::raw(self.num.scale(c), self.den.clone(), Arc::clone(&self.set))
    }
    fn partial(&self, var: usize, times: u32) -> Self {
        (0..times).fold(self.clone(), |f, _| f.quotient_rule_partial(var))
    }
    fn lift(&self, p: &MultiPoly) -> Self {
        LocalFrac::from_poly(p.clone(), &self.set)
    }
    fn unit_inverse(&self) -> Option<Self> {
        membership(&self.num, &self.set).then(|| Self::raw(self.den.clone(), self.num.clone(), Arc::clone(&self.set)))
    }
}

/// Human-readable membership rule.
pub fn describe(set: &MultSetSpec, names: &[String]) -> String {
    match &set.mode {
        SetMode::Generators(g) => format!(
            "generated by {{{}}}",
            g.iter().map(|p| p.display_with(names)).collect::<Vec<_>>().join(", ")
        ),
        SetMode::PointLocal(pt) => format!(
            "nonvanishing at ({})",
            pt.iter().map(rational::format).collect::<Vec<_>>().join(", ")
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use proptest::prelude::*;

    fn x() -> MultiPoly {
        MultiPoly::var(2, 0)
    }
    fn p() -> MultiPoly {
        MultiPoly::var(2, 1)
    }
    fn one() -> MultiPoly {
        MultiPoly::one(2)
    }
    fn sx() -> Arc<MultSetSpec> {
        Arc::new(MultSetSpec::generated("Sx", vec![x()]).unwrap())
    }
    fn frac(n: MultiPoly, d: MultiPoly, s: &Arc<MultSetSpec>) -> LocalFrac {
        LocalFrac::new(n, d, s).unwrap()
    }

    #[test]
    fn cancellation() {
        let s = sx();
        assert!(frac_simplify_eq(&frac(x().pow(2), x(), &s), &frac(x(), one(), &s)).unwrap());
        assert!(!frac_simplify_eq(&frac(one(), x(), &s), &frac(one(), x().pow(2), &s)).unwrap());
    }

    #[test]
    fn factor_cancellation_with_shifted_generator() {
        let xm1 = &x() - &one();
        let s = Arc::new(MultSetSpec::generated("Sx1", vec![xm1.clone()]).unwrap());
        let u = frac(&x().pow(2) - &one(), xm1, &s);
        let v = frac(&x() + &one(), one(), &s);
        assert!(frac_simplify_eq(&u, &v).unwrap());
        assert_eq!(u.as_poly(), Some(&(&x() + &one())));
    }

    #[test]
    fn set_mismatch_is_an_error() {
        let a = sx();
        let b = Arc::new(MultSetSpec::generated("Sp", vec![p()]).unwrap());
        let err = frac_simplify_eq(&frac(one(), x(), &a), &frac(one(), p(), &b)).unwrap_err();
        assert!(matches!(err, Error::SetMismatch { .. }));
    }

    #[test]
    fn membership_examples() {
        let s = sx();
        assert!(membership(&x().pow(2).scale(&int(3)), &s));
        assert!(!membership(&(&x() + &one()), &s));
        assert!(!membership(&MultiPoly::zero(2), &s));
        let local = MultSetSpec::point_local("P0", vec![int(0), int(0)]).unwrap();
        assert!(membership(&(&x().pow(2) + &one()), &local));
        assert!(!membership(&x(), &local));
    }

    #[test]
    fn denominators_outside_the_set_are_rejected() {
        let err = LocalFrac::new(one(), &x() + &one(), &sx()).unwrap_err();
        assert!(matches!(err, Error::NotInSet(_)));
    }

    #[test]
    fn invalid_sets() {
        assert!(MultSetSpec::generated("E", vec![]).is_err());
        assert!(MultSetSpec::generated("Z", vec![MultiPoly::zero(2)]).is_err());
        assert!(MultSetSpec::point_local("B", vec![]).is_err());
    }

    #[test]
    fn printing() {
        let s = sx();
        let names = vec!["x".to_string(), "p".to_string()];
        assert_eq!(frac(one(), x(), &s).display_with(&names), "1/x");
        assert_eq!(frac(-&p(), x().pow(2), &s).display_with(&names), "-p/x^2");
        assert_eq!(frac(&p() + &one(), x(), &s).display_with(&names), "(p + 1)/x");
        assert_eq!(frac(x().pow(3), x(), &s).display_with(&names), "x^2");
    }

    #[test]
    fn quotient_rule() {
        let s = sx();
        let d = frac(one(), x(), &s).quotient_rule_partial(0);
        assert_eq!(d, frac(-&one(), x().pow(2), &s));
        assert_eq!(
            frac(one(), x(), &s).partial(0, 2),
            frac(one().scale(&int(2)), x().pow(3), &s)
        );
    }

    #[test]
    fn units() {
        let s = sx();
        let inv = frac(x().scale(&int(3)), one(), &s).unit_inverse().unwrap();
        assert_eq!(inv, frac(one(), x().scale(&int(3)), &s));
        assert!(frac(p(), one(), &s).unit_inverse().is_none());
    }

    fn arb_member() -> impl Strategy<Value = MultiPoly> {
        (0u32..4, 1i64..5).prop_map(|(e, c)| x().pow(e).scale(&int(c)))
    }

    fn arb_num() -> impl Strategy<Value = MultiPoly> {
        prop::collection::vec((0u32..3, 0u32..3, -3i64..=3), 0..4).prop_map(|ts| {
            MultiPoly::from_terms(
                2,
                ts.into_iter()
                    .map(|(a, b, c)| (crate::poly::Monomial::from_exponents(&[a, b]), int(c))),
            )
        })
    }

    proptest! {
        #[test]
        fn equality_is_an_equivalence(n in arb_num(), d in arb_member(), t1 in arb_member(), t2 in arb_member()) {
            let s = sx();
            let u = frac(n.clone(), d.clone(), &s);
            let v = frac(&n * &t1, &d * &t1, &s);
            let w = frac(&n * &t2, &d * &t2, &s);
            prop_assert!(frac_simplify_eq(&u, &u).unwrap());
            prop_assert_eq!(frac_simplify_eq(&u, &v).unwrap(), frac_simplify_eq(&v, &u).unwrap());
            prop_assert!(frac_simplify_eq(&u, &v).unwrap() && frac_simplify_eq(&v, &w).unwrap());
            prop_assert!(frac_simplify_eq(&u, &w).unwrap());
        }

        #[test]
        fn membership_is_multiplicative(a in arb_member(), b in arb_member()) {
            let s = sx();
            prop_assert!(membership(&(&a * &b), &s));
        }

        #[test]
        fn greedy_order_does_not_change_verdict(q in arb_num(), e in 0u32..4) {
            let single = MultSetSpec::generated("A", vec![x()]).unwrap();
            let doubled = MultSetSpec::generated("B", vec![x(), x().pow(2)]).unwrap();
            let member = x().pow(e).scale(&int(2));
            prop_assert_eq!(membership(&member, &single), membership(&member, &doubled));
            prop_assert_eq!(membership(&q, &single), membership(&q, &doubled));
        }
    }
}
