//! Multidifferential operators in coordinate normal form.
//!
//! A rank-`p` operator is a finite sum of terms
//! `c · ∂^{α₁}(f₁) ⋯ ∂^{α_p}(f_p)`. Terms are keyed by their multi-index
//! tuple, merged on insertion, and zero coefficients are dropped, so two
//! operators are equal exactly when their normal forms are. Composition is
//! computed symbolically by the Leibniz rule.
//!
//! Slots are numbered from 1, matching the `∘ᵢ` notation.
//!
//! The algebraic characterisation of order (iterated commutators with
//! multiplication operators vanish) is kept alongside as [`ad_test`], which
//! works entirely on normal forms and therefore proves vanishing for all
//! inputs rather than sampling.

use std::collections::{BTreeMap, HashMap};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::poly::{Monomial, MultiPoly};
use crate::rational::{self, Rational};
use crate::ring::Coeff;

#[derive(Clone, Debug, PartialEq)]
pub struct MultiDiffOp<C> {
    rank: usize,
    nvars: usize,
    terms: BTreeMap<Vec<Monomial>, C>,
}

fn insert_term<C: Coeff>(terms: &mut BTreeMap<Vec<Monomial>, C>, key: Vec<Monomial>, c: C) {
    if c.is_zero() {
        return;
    }
    match terms.entry(key) {
        std::collections::btree_map::Entry::Vacant(e) => {
            e.insert(c);
        }
        std::collections::btree_map::Entry::Occupied(mut e) => {
            let sum = e.get().add(&c);
            if sum.is_zero() {
                e.remove();
            } else {
                *e.get_mut() = sum;
            }
        }
    }
}

impl<C: Coeff> MultiDiffOp<C> {
    pub fn zero(rank: usize, nvars: usize) -> Self {
        assert!(rank >= 1, "operators have rank at least 1");
        MultiDiffOp {
            rank,
            nvars,
            terms: BTreeMap::new(),
        }
    }

    /// Builds an operator from `(coefficient, multi-indices)` pairs, merging
    /// equal index tuples.
    pub fn from_terms<I>(rank: usize, nvars: usize, terms: I) -> Result<Self>
    where
        I: IntoIterator<Item = (C, Vec<Monomial>)>,
    {
        if rank == 0 {
            return Err(Error::InvalidOperator("rank must be at least 1".into()));
        }
        let mut op = Self::zero(rank, nvars);
        for (c, alphas) in terms {
            if alphas.len() != rank {
                return Err(Error::InvalidOperator(format!(
                    "term has {} multi-indices, rank is {rank}",
                    alphas.len()
                )));
            }
            if let Some(a) = alphas.iter().find(|a| a.nvars() != nvars) {
                return Err(Error::InvalidOperator(format!(
                    "multi-index of length {} in a {nvars}-variable operator",
                    a.nvars()
                )));
            }
            if c.nvars() != nvars {
                return Err(Error::VarCountMismatch {
                    left: nvars,
                    right: c.nvars(),
                });
            }
            insert_term(&mut op.terms, alphas, c);
        }
        Ok(op)
    }

    /// Rank-1 multiplication operator `f ↦ c·f`.
    pub fn multiplication(c: C) -> Self {
        let n = c.nvars();
        let mut op = Self::zero(1, n);
        insert_term(&mut op.terms, vec![Monomial::one(n)], c);
        op
    }

    /// Rank-1 operator `c · ∂^alpha`.
    pub fn derivative(c: C, alpha: Monomial) -> Self {
        let n = c.nvars();
        assert_eq!(alpha.nvars(), n, "multi-index length must equal nvars");
        let mut op = Self::zero(1, n);
        insert_term(&mut op.terms, vec![alpha], c);
        op
    }

    /// The undeformed product `(f, g) ↦ fg`, given the unit of the ring.
    pub fn pointwise_product(one: C) -> Self {
        let n = one.nvars();
        let mut op = Self::zero(2, n);
        insert_term(&mut op.terms, vec![Monomial::one(n), Monomial::one(n)], one);
        op
    }

    pub fn rank(&self) -> usize {
        self.rank
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn num_terms(&self) -> usize {
        self.terms.len()
    }

    pub fn terms(&self) -> impl Iterator<Item = (&C, &[Monomial])> {
        self.terms.iter().map(|(k, c)| (c, k.as_slice()))
    }

    fn check_same_shape(&self, other: &Self) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(Error::VarCountMismatch {
                left: self.nvars,
                right: other.nvars,
            });
        }
        if self.rank != other.rank {
            return Err(Error::RankMismatch {
                expected: self.rank,
                got: other.rank,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same_shape(other)?;
        let mut out = self.clone();
        for (k, c) in &other.terms {
            insert_term(&mut out.terms, k.clone(), c.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> Self {
        self.map_coeffs(C::neg)
    }

    pub fn scale(&self, q: &Rational) -> Self {
        self.map_coeffs(|c| c.scale(q))
    }

    /// `L_a`: multiplies every coefficient by `a`.
    pub fn left_mul(&self, a: &C) -> Self {
        self.map_coeffs(|c| a.mul(c))
    }

    pub fn map_coeffs<D: Coeff>(&self, f: impl Fn(&C) -> D) -> MultiDiffOp<D> {
        let mut terms = BTreeMap::new();
        for (k, c) in &self.terms {
            insert_term(&mut terms, k.clone(), f(c));
        }
        MultiDiffOp {
            rank: self.rank,
            nvars: self.nvars,
            terms,
        }
    }

    /// `Σ c · Π ∂^{αᵢ}(argᵢ)`.
    pub fn apply(&self, args: &[C]) -> Result<C> {
        if args.len() != self.rank {
            return Err(Error::RankMismatch {
                expected: self.rank,
                got: args.len(),
            });
        }
        if let Some(a) = args.iter().find(|a| a.nvars() != self.nvars) {
            return Err(Error::VarCountMismatch {
                left: self.nvars,
                right: a.nvars(),
            });
        }
        let mut cache: HashMap<(usize, Monomial), C> = HashMap::new();
        let mut acc = args[0].zero_like();
        for (alphas, c) in &self.terms {
            let mut t = c.clone();
            for (i, alpha) in alphas.iter().enumerate() {
                let d = cache.entry((i, alpha.clone())).or_insert_with(|| args[i].derive(alpha));
                if d.is_zero() {
                    t = d.clone();
                    break;
                }
                t = t.mul(d);
            }
            if !t.is_zero() {
                acc = acc.add(&t);
            }
        }
        Ok(acc)
    }

    /// `∂^alpha ∘ inner` as a rank-`q` operator, by repeated one-variable
    /// Leibniz expansion.
    fn derive_after(inner: &Self, alpha: &Monomial) -> BTreeMap<Vec<Monomial>, C> {
        let mut cur = inner.terms.clone();
        for (v, &times) in alpha.exponents().iter().enumerate() {
            for _ in 0..times {
                let mut next = BTreeMap::new();
                for (betas, c) in &cur {
                    insert_term(&mut next, betas.clone(), c.partial(v, 1));
                    for l in 0..betas.len() {
                        let mut nb = betas.clone();
                        nb[l] = nb[l].mul(&Monomial::var(inner.nvars, v));
                        insert_term(&mut next, nb, c.clone());
                    }
                }
                cur = next;
            }
        }
        cur
    }

    /// `self ∘_slot inner`: feeds `inner` into argument `slot` (1-based),
    /// yielding an operator of rank `p + q − 1`.
    pub fn compose_at(&self, inner: &Self, slot: usize) -> Result<Self> {
        if slot == 0 || slot > self.rank {
            return Err(Error::SlotOutOfRange { slot, rank: self.rank });
        }
        if self.nvars != inner.nvars {
            return Err(Error::VarCountMismatch {
                left: self.nvars,
                right: inner.nvars,
            });
        }
        let i = slot - 1;
        let mut expanded: HashMap<Monomial, BTreeMap<Vec<Monomial>, C>> = HashMap::new();
        let mut out = Self::zero(self.rank + inner.rank - 1, self.nvars);
        for (alphas, c) in &self.terms {
            let inner_terms = expanded
                .entry(alphas[i].clone())
                .or_insert_with(|| Self::derive_after(inner, &alphas[i]));
            for (betas, c2) in inner_terms.iter() {
                let mut key = Vec::with_capacity(out.rank);
                key.extend_from_slice(&alphas[..i]);
                key.extend(betas.iter().cloned());
                key.extend_from_slice(&alphas[i + 1..]);
                insert_term(&mut out.terms, key, c.mul(c2));
            }
        }
        Ok(out)
    }

    /// Syntactic order in a slot (1-based): the largest `|α_slot|`.
    pub fn order(&self, slot: usize) -> Result<u32> {
        if slot == 0 || slot > self.rank {
            return Err(Error::SlotOutOfRange { slot, rank: self.rank });
        }
        Ok(self.terms.keys().map(|k| k[slot - 1].degree()).max().unwrap_or(0))
    }

    /// Order as a differential operator on the tensor power, `max Σ|αᵢ|`.
    pub fn total_order(&self) -> u32 {
        self.terms
            .keys()
            .map(|k| k.iter().map(Monomial::degree).sum())
            .max()
            .unwrap_or(0)
    }

    /// `R_a(D) = D ∘ (multiplication by a)` for rank 1.
    pub fn right_mul(&self, a: &C) -> Result<Self> {
        self.compose_at(&Self::multiplication(a.clone()), 1)
    }

    /// `ad_a(D) = L_a(D) − R_a(D)` for rank 1.
    pub fn ad(&self, a: &C) -> Result<Self> {
        if self.rank != 1 {
            return Err(Error::RankMismatch {
                expected: 1,
                got: self.rank,
            });
        }
        self.left_mul(a).sub(&self.right_mul(a)?)
    }

    /// Exact equality of normal forms, with a shape check.
    pub fn same_as(&self, other: &Self) -> bool {
        self.rank == other.rank && self.nvars == other.nvars && self.terms == other.terms
    }
}

/// Free-function form of [`MultiDiffOp::compose_at`].
pub fn compose_at<C: Coeff>(outer: &MultiDiffOp<C>, inner: &MultiDiffOp<C>, slot: usize) -> Result<MultiDiffOp<C>> {
    outer.compose_at(inner, slot)
}

/// Free-function form of [`MultiDiffOp::order`].
pub fn operator_order<C: Coeff>(d: &MultiDiffOp<C>, slot: usize) -> Result<u32> {
    d.order(slot)
}

/// Evidence that a rank-1 operator has order at most `claimed_order`.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderCertificate<C> {
    pub operator: MultiDiffOp<C>,
    pub claimed_order: u32,
    /// Every `(k+1)`-tuple of probes whose iterated commutator was expanded
    /// and found to be the zero operator.
    pub witnesses: Vec<Vec<C>>,
    /// When the claim equals the syntactic order, a `k`-tuple of coordinate
    /// functions whose iterated commutator is nonzero, showing the bound is
    /// attained.
    pub sharpness: Option<Vec<C>>,
}

/// A probe tuple whose iterated commutator does not vanish.
#[derive(Clone, Debug, PartialEq)]
pub struct OrderRefutation<C> {
    pub claimed_order: u32,
    pub witness: Vec<C>,
    pub residual: MultiDiffOp<C>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum AdOutcome<C> {
    Certified(OrderCertificate<C>),
    Refuted(OrderRefutation<C>),
}

impl<C> AdOutcome<C> {
    pub fn is_certified(&self) -> bool {
        matches!(self, AdOutcome::Certified(_))
    }
}

/// Visits every multiset of `size` probe indices, applying `ad` along the
/// way so shared prefixes are expanded once. Stops at the first tuple for
/// which `stop` returns true and returns it with its operator.
fn ad_multisets<C: Coeff>(
    d: &MultiDiffOp<C>,
    probes: &[C],
    size: usize,
    visited: &mut Vec<Vec<C>>,
    stop: &dyn Fn(&MultiDiffOp<C>) -> bool,
) -> Result<Option<(Vec<C>, MultiDiffOp<C>)>> {
    fn rec<C: Coeff>(
        op: &MultiDiffOp<C>,
        probes: &[C],
        start: usize,
        left: usize,
        prefix: &mut Vec<C>,
        visited: &mut Vec<Vec<C>>,
        stop: &dyn Fn(&MultiDiffOp<C>) -> bool,
    ) -> Result<Option<(Vec<C>, MultiDiffOp<C>)>> {
        if left == 0 {
            visited.push(prefix.clone());
            return Ok(stop(op).then(|| (prefix.clone(), op.clone())));
        }
        for (j, a) in probes.iter().enumerate().skip(start) {
            let next = op.ad(a)?;
            prefix.push(a.clone());
            let found = rec(&next, probes, j, left - 1, prefix, visited, stop)?;
            prefix.pop();
            if found.is_some() {
                return Ok(found);
            }
        }
        Ok(None)
    }
    rec(d, probes, 0, size, &mut Vec::new(), visited, stop)
}

/// Coordinate functions `x₁, …, x_n` in the ring of `sample`.
pub fn coordinate_probes<C: Coeff>(sample: &C) -> Vec<C> {
    let n = sample.nvars();
    (0..n).map(|i| sample.lift(&MultiPoly::var(n, i))).collect()
}

/// Checks `(ad_{a₁} ∘ ⋯ ∘ ad_{a_{k+1}})(D) = 0` for every `(k+1)`-multiset
/// of probes, comparing normal forms. The `ad` maps commute, so multisets
/// cover all ordered tuples.
pub fn ad_test<C: Coeff>(d: &MultiDiffOp<C>, k: u32, probes: &[C]) -> Result<AdOutcome<C>> {
    if d.rank() != 1 {
        return Err(Error::RankMismatch {
            expected: 1,
            got: d.rank(),
        });
    }
    if probes.is_empty() {
        return Err(Error::InvalidOperator("ad test needs at least one probe".into()));
    }
    let mut witnesses = Vec::new();
    let nonzero = |op: &MultiDiffOp<C>| !op.is_zero();
    if let Some((witness, residual)) = ad_multisets(d, probes, k as usize + 1, &mut witnesses, &nonzero)? {
        return Ok(AdOutcome::Refuted(OrderRefutation {
            claimed_order: k,
            witness,
            residual,
        }));
    }
    let mut sharpness = None;
    if !d.is_zero() && d.order(1)? == k {
        let coords = coordinate_probes(&probes[0]);
        let mut scratch = Vec::new();
        sharpness = ad_multisets(d, &coords, k as usize, &mut scratch, &nonzero)?.map(|(w, _)| w);
    }
    Ok(AdOutcome::Certified(OrderCertificate {
        operator: d.clone(),
        claimed_order: k,
        witnesses,
        sharpness,
    }))
}

/// Result of the pull-out identity `D(aⁿm) = a^{n−k} D̃(m)`.
#[derive(Clone, Debug, PartialEq)]
pub struct Pullout {
    /// `D(aⁿ m) / a^{n−k}` by exact division.
    pub quotient: MultiPoly,
    /// `Σ_{j=0}^{k} C(n,j) (−1)^j a^{k−j} (ad_a^j D)(m)`.
    pub binomial_quotient: MultiPoly,
    /// Whether the division left no remainder.
    pub exact: bool,
}

impl Pullout {
    pub fn check(&self) -> bool {
        self.exact && self.quotient == self.binomial_quotient
    }
}

pub fn pullout(d: &MultiDiffOp<MultiPoly>, a: &MultiPoly, n: u32, m: &MultiPoly) -> Result<Pullout> {
    if d.rank() != 1 {
        return Err(Error::RankMismatch {
            expected: 1,
            got: d.rank(),
        });
    }
    if a.is_zero() {
        return Err(Error::DivisionByZero);
    }
    let k = d.order(1)?;
    if n < k {
        return Err(Error::InvalidOperator(format!(
            "pull-out needs n >= k, got n={n}, k={k}"
        )));
    }
    let lhs = d.apply(&[&a.pow(n) * m])?;
    let (quotient, rem) = lhs.div_rem(&a.pow(n - k))?;

    let mut binomial_quotient = MultiPoly::zero(d.nvars());
    let mut ad_j = d.clone();
    for j in 0..=k {
        let coeff = Rational::from_integer(rational::binomial(n, j));
        let coeff = if j % 2 == 1 { -coeff } else { coeff };
        let term = &a.pow(k - j) * &ad_j.apply(std::slice::from_ref(m))?;
        binomial_quotient = &binomial_quotient + &term.scale(&coeff);
        ad_j = ad_j.ad(a)?;
    }
    Ok(Pullout {
        quotient,
        binomial_quotient,
        exact: rem.is_zero(),
    })
}

/// `D ⊗ D′` acting on polynomials in the concatenated variable list.
pub fn tensor(d: &MultiDiffOp<MultiPoly>, e: &MultiDiffOp<MultiPoly>) -> Result<MultiDiffOp<MultiPoly>> {
    if d.rank() != 1 || e.rank() != 1 {
        return Err(Error::RankMismatch {
            expected: 1,
            got: d.rank().max(e.rank()),
        });
    }
    let n = d.nvars() + e.nvars();
    let mut terms = Vec::new();
    for (c, a) in d.terms() {
        for (c2, b) in e.terms() {
            let coeff = &c.embed(n, 0) * &c2.embed(n, d.nvars());
            let alpha = a[0].embed(n, 0).mul(&b[0].embed(n, d.nvars()));
            terms.push((coeff, vec![alpha]));
        }
    }
    MultiDiffOp::from_terms(1, n, terms)
}

/// Forms `D ⊗ D′` and checks that its order is `k + k′`, both
/// syntactically and by the commutator test on coordinate probes.
pub fn tensor_order_check(d: &MultiDiffOp<MultiPoly>, e: &MultiDiffOp<MultiPoly>) -> Result<bool> {
    let k = d.order(1)? + e.order(1)?;
    let t = tensor(d, e)?;
    if t.order(1)? != k {
        return Ok(false);
    }
    let probes = coordinate_probes(&MultiPoly::one(t.nvars()));
    Ok(match ad_test(&t, k, &probes)? {
        AdOutcome::Certified(cert) => t.is_zero() || cert.sharpness.is_some(),
        AdOutcome::Refuted(_) => false,
    })
}

/// JSON operator format.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpJson {
    pub rank: usize,
    pub vars: Vec<String>,
    pub terms: Vec<OpTermJson>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct OpTermJson {
    pub coeff: String,
    pub alphas: Vec<Vec<u32>>,
}

impl OpJson {
    pub fn from_op(op: &MultiDiffOp<MultiPoly>, vars: &[String]) -> Self {
        OpJson {
            rank: op.rank(),
            vars: vars.to_vec(),
            terms: op
                .terms()
                .map(|(c, alphas)| OpTermJson {
                    coeff: c.display_with(vars),
                    alphas: alphas.iter().map(|a| a.exponents().to_vec()).collect(),
                })
                .collect(),
        }
    }

    pub fn to_op(&self) -> Result<MultiDiffOp<MultiPoly>> {
        let n = self.vars.len();
        let terms = self
            .terms
            .iter()
            .map(|t| {
                let coeff = crate::parse::parse_poly(&t.coeff, &self.vars)?;
                let alphas = t.alphas.iter().map(|a| Monomial::from_exponents(a)).collect();
                Ok((coeff, alphas))
            })
            .collect::<Result<Vec<_>>>()?;
        MultiDiffOp::from_terms(self.rank, n, terms)
    }
}

/// Human-readable form, e.g. `2*x*D[1,0] + D[0,1]` for rank 1 and
/// `D[0,1] (x) D[1,0]` slots for higher ranks.
pub fn describe(op: &MultiDiffOp<MultiPoly>, vars: &[String]) -> String {
    if op.is_zero() {
        return "0".into();
    }
    op.terms()
        .map(|(c, alphas)| {
            let slots: Vec<String> = alphas
                .iter()
                .map(|a| {
                    let idx: Vec<String> = a.exponents().iter().map(u32::to_string).collect();
                    format!("D[{}]", idx.join(","))
                })
                .collect();
            let coeff = c.display_with(vars);
            let coeff = if c.num_terms() > 1 { format!("({coeff})") } else { coeff };
            format!("{coeff}*{}", slots.join("(x)"))
        })
        .collect::<Vec<_>>()
        .join(" + ")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rational::int;
    use proptest::prelude::*;

    const X: usize = 0;
    const P: usize = 1;

    fn x() -> MultiPoly {
        MultiPoly::var(2, X)
    }
    fn p() -> MultiPoly {
        MultiPoly::var(2, P)
    }
    fn one() -> MultiPoly {
        MultiPoly::one(2)
    }
    fn mono(a: u32, b: u32) -> Monomial {
        Monomial::from_exponents(&[a, b])
    }
    fn dx() -> MultiDiffOp<MultiPoly> {
        MultiDiffOp::derivative(one(), mono(1, 0))
    }
    fn mult(c: MultiPoly) -> MultiDiffOp<MultiPoly> {
        MultiDiffOp::multiplication(c)
    }

    /// Brute-force oracle: two rank-1 operators agree iff they agree on all
    /// monomials up to a degree exceeding both orders.
    fn agree_on_monomials(a: &MultiDiffOp<MultiPoly>, b: &MultiDiffOp<MultiPoly>, deg: u32) -> bool {
        (0..=deg).all(|i| {
            (0..=deg - i).all(|j| {
                let f = &x().pow(i) * &p().pow(j);
                a.apply(std::slice::from_ref(&f)).unwrap() == b.apply(&[f]).unwrap()
            })
        })
    }

    #[test]
    fn apply_examples() {
        let d = MultiDiffOp::from_terms(2, 2, vec![(one(), vec![mono(0, 1), mono(1, 0)])]).unwrap();
        let got = d.apply(&[p().pow(2), x().pow(3)]).unwrap();
        assert_eq!(got, &p() * &x().pow(2).scale(&int(6)));
        assert!(d.apply(&[p(), MultiPoly::zero(2)]).unwrap().is_zero());
        let laplace = MultiDiffOp::derivative(one(), mono(1, 1));
        assert_eq!(laplace.apply(&[&x() * &p()]).unwrap(), one());
    }

    #[test]
    fn apply_errors() {
        assert!(matches!(
            dx().apply(&[x(), p()]),
            Err(Error::RankMismatch { expected: 1, got: 2 })
        ));
        assert!(matches!(
            dx().apply(&[MultiPoly::var(3, 0)]),
            Err(Error::VarCountMismatch { .. })
        ));
    }

    #[test]
    fn compose_examples() {
        let dxx = dx().compose_at(&dx(), 1).unwrap();
        assert!(dxx.same_as(&MultiDiffOp::derivative(one(), mono(2, 0))));
        assert!(dx().compose_at(&mult(one()), 1).unwrap().same_as(&dx()));
        // ∂x ∘ x = x ∂x + id
        let lhs = dx().compose_at(&mult(x()), 1).unwrap();
        let rhs = MultiDiffOp::derivative(x(), mono(1, 0)).add(&mult(one())).unwrap();
        assert!(lhs.same_as(&rhs));
        assert!(agree_on_monomials(&lhs, &rhs, 4));
        assert_eq!(lhs.apply(&[x().pow(2)]).unwrap(), x().pow(2).scale(&int(3)));
    }

    #[test]
    fn compose_slot_out_of_range() {
        assert!(matches!(
            dx().compose_at(&dx(), 2),
            Err(Error::SlotOutOfRange { slot: 2, rank: 1 })
        ));
        assert!(matches!(dx().compose_at(&dx(), 0), Err(Error::SlotOutOfRange { .. })));
    }

    #[test]
    fn orders() {
        assert_eq!(MultiDiffOp::derivative(one(), mono(2, 0)).order(1).unwrap(), 2);
        assert_eq!(mult(x()).order(1).unwrap(), 0);
        let d = MultiDiffOp::derivative(x(), mono(0, 1))
            .add(&MultiDiffOp::derivative(p(), mono(0, 1)))
            .unwrap();
        assert_eq!(d.order(1).unwrap(), 1);
        let cancel = dx().sub(&dx()).unwrap();
        assert_eq!(cancel.order(1).unwrap(), 0);
        assert!(cancel.is_zero());
    }

    #[test]
    fn ad_test_examples() {
        let coords = vec![x(), p()];
        assert!(ad_test(&dx(), 1, &coords).unwrap().is_certified());
        let dxx = MultiDiffOp::derivative(one(), mono(2, 0));
        match ad_test(&dxx, 1, &[x()]).unwrap() {
            AdOutcome::Refuted(r) => {
                assert!(r.residual.same_as(&mult(MultiPoly::constant(2, int(2)))));
            }
            AdOutcome::Certified(_) => panic!("order 1 must be refuted"),
        }
        match ad_test(&mult(p()), 0, &coords).unwrap() {
            AdOutcome::Certified(c) => assert_eq!(c.sharpness, Some(vec![])),
            AdOutcome::Refuted(_) => panic!("multiplication has order 0"),
        }
        match ad_test(&dxx, 2, &coords).unwrap() {
            AdOutcome::Certified(c) => {
                assert_eq!(c.sharpness, Some(vec![x(), x()]));
                assert_eq!(c.witnesses.len(), 4);
            }
            AdOutcome::Refuted(_) => panic!("order 2 holds"),
        }
    }

    #[test]
    fn pullout_examples() {
        let r = pullout(&dx(), &x(), 3, &one()).unwrap();
        assert!(r.check());
        assert_eq!(r.quotient, MultiPoly::constant(2, int(3)));

        let r = pullout(&mult(&x() + &p()), &p(), 4, &x()).unwrap();
        assert!(r.check());
        assert_eq!(r.quotient, &(&x() + &p()) * &x());

        let dpp = MultiDiffOp::derivative(one(), mono(0, 2));
        let r = pullout(&dpp, &p(), 2, &one()).unwrap();
        assert!(r.check());
        assert_eq!(r.quotient, MultiPoly::constant(2, int(2)));

        assert!(pullout(&dpp, &p(), 1, &one()).is_err());
        assert!(pullout(&dx(), &MultiPoly::zero(2), 1, &one()).is_err());
    }

    #[test]
    fn tensor_examples() {
        let x1 = MultiPoly::var(1, 0);
        let d1 = MultiDiffOp::derivative(MultiPoly::one(1), Monomial::from_exponents(&[1]));
        let id1 = MultiDiffOp::multiplication(MultiPoly::one(1));
        assert!(tensor_order_check(&d1, &d1).unwrap());
        assert_eq!(tensor(&d1, &d1).unwrap().order(1).unwrap(), 2);
        assert!(tensor_order_check(&id1, &d1).unwrap());
        assert_eq!(tensor(&id1, &d1).unwrap().order(1).unwrap(), 1);
        let xd = MultiDiffOp::derivative(x1.clone(), Monomial::from_exponents(&[1]));
        assert!(tensor_order_check(&xd, &xd).unwrap());
        assert_eq!(tensor(&xd, &xd).unwrap().order(1).unwrap(), 2);
    }

    #[test]
    fn json_round_trip() {
        let vars = vec!["x".to_string(), "p".to_string()];
        let d = MultiDiffOp::from_terms(
            2,
            2,
            vec![
                (one().scale(&int(1)), vec![mono(0, 1), mono(1, 0)]),
                (x(), vec![mono(0, 0), mono(0, 0)]),
            ],
        )
        .unwrap();
        let j = OpJson::from_op(&d, &vars);
        let text = serde_json::to_string(&j).unwrap();
        let back: OpJson = serde_json::from_str(&text).unwrap();
        assert!(back.to_op().unwrap().same_as(&d));
        let bad = OpJson {
            rank: 2,
            vars: vars.clone(),
            terms: vec![OpTermJson {
                coeff: "1".into(),
                alphas: vec![vec![1, 0]],
            }],
        };
        assert!(bad.to_op().is_err());
    }

    fn arb_poly(max_deg: u32) -> impl Strategy<Value = MultiPoly> {
        prop::collection::vec((0..=max_deg, 0..=max_deg, -3i64..=3), 0..4)
            .prop_map(|ts| MultiPoly::from_terms(2, ts.into_iter().map(|(a, b, c)| (mono(a, b), int(c)))))
    }

    fn arb_op(rank: usize) -> impl Strategy<Value = MultiDiffOp<MultiPoly>> {
        prop::collection::vec((arb_poly(1), prop::collection::vec((0u32..3, 0u32..3), rank)), 1..4).prop_map(
            move |ts| {
                MultiDiffOp::from_terms(
                    rank,
                    2,
                    ts.into_iter()
                        .map(|(c, a)| (c, a.into_iter().map(|(i, j)| mono(i, j)).collect())),
                )
                .unwrap()
            },
        )
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn composition_matches_nested_application(
            outer in arb_op(2),
            inner in arb_op(2),
            slot in 1usize..=2,
            args in prop::collection::vec(arb_poly(3), 3),
        ) {
            let composite = outer.compose_at(&inner, slot).unwrap();
            let direct = composite.apply(&args).unwrap();
            let nested = if slot == 1 {
                let v = inner.apply(&args[0..2]).unwrap();
                outer.apply(&[v, args[2].clone()]).unwrap()
            } else {
                let v = inner.apply(&args[1..3]).unwrap();
                outer.apply(&[args[0].clone(), v]).unwrap()
            };
            prop_assert_eq!(direct, nested);
        }

        #[test]
        fn composite_order_is_bounded(a in arb_op(1), b in arb_op(1)) {
            let c = a.compose_at(&b, 1).unwrap();
            prop_assert!(c.order(1).unwrap() <= a.order(1).unwrap() + b.order(1).unwrap());
        }

        #[test]
        fn ad_test_is_sharp(d in arb_op(1)) {
            let k = d.order(1).unwrap();
            let coords = vec![x(), p()];
            prop_assert!(ad_test(&d, k, &coords).unwrap().is_certified());
            if k >= 1 {
                prop_assert!(!ad_test(&d, k - 1, &coords).unwrap().is_certified());
            }
        }

        #[test]
        fn pullout_holds(d in arb_op(1), a in arb_poly(2), extra in 0u32..3, m in arb_poly(2)) {
            prop_assume!(!a.is_zero());
            let k = d.order(1).unwrap();
            let r = pullout(&d, &a, k + extra, &m).unwrap();
            prop_assert!(r.exact);
            prop_assert_eq!(r.quotient, r.binomial_quotient);
        }
    }
}
