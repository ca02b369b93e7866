//! Localization of multidifferential operators and star products at a
//! commutative multiplicative set `S₀ ⊂ A`.
//!
//! A rank-1 operator `D` of order `k` extends to fractions by
//!
//! ```text
//! D_S(m/s) = Σ_{r=1}^{k+1} C(k+1, r) (−1)^{r+1} D(s^{r−1} m) / s^r
//! ```
//!
//! and a rank-`p` operator is treated as an operator on `A^{⊗p}`, applying
//! the formula in each slot. The coordinate form (coefficients lifted to
//! fractions, derivatives by the quotient rule) is kept as an independent
//! second implementation.

use std::sync::Arc;

use num_traits::One;

use crate::error::{Error, Result};
use crate::frac::{LocalFrac, MultSetSpec, SetMode};
use crate::multidiff::MultiDiffOp;
use crate::poly::{self, MultiPoly};
use crate::rational::{self, Rational};
use crate::ring::Coeff;
use crate::series::LambdaSeries;
use crate::star::{StarAlgebra, StarProduct};

/// A polynomial-coefficient operator acting on `A_{S₀}` through the
/// alternating binomial formula, slot by slot.
#[derive(Clone, Debug, PartialEq)]
pub struct LocalizedOp {
    base: MultiDiffOp<MultiPoly>,
    set: Arc<MultSetSpec>,
    bounds: Vec<u32>,
}

fn check_set(set: &Arc<MultSetSpec>, f: &LocalFrac) -> Result<()> {
    if Arc::ptr_eq(set, f.set()) || **set == **f.set() {
        Ok(())
    } else {
        Err(Error::SetMismatch {
            left: set.name().to_string(),
            right: f.set().name().to_string(),
        })
    }
}

impl LocalizedOp {
    /// Uses the syntactic order of each slot as the bound `k`.
    pub fn new(base: MultiDiffOp<MultiPoly>, set: &Arc<MultSetSpec>) -> Result<Self> {
        if base.nvars() != set.nvars() {
            return Err(Error::VarCountMismatch {
                left: set.nvars(),
                right: base.nvars(),
            });
        }
        let bounds = (1..=base.rank()).map(|slot| base.order(slot)).collect::<Result<_>>()?;
        Ok(LocalizedOp {
            base,
            set: Arc::clone(set),
            bounds,
        })
    }

    /// Replaces the per-slot order bounds. Any bound at least the true
    /// order gives the same operator; smaller ones give a wrong one, which
    /// [`LocalizedOp::agrees_with_coordinate_form`] detects.
    pub fn with_bounds(mut self, bounds: Vec<u32>) -> Result<Self> {
        if bounds.len() != self.base.rank() {
            return Err(Error::RankMismatch {
                expected: self.base.rank(),
                got: bounds.len(),
            });
        }
        self.bounds = bounds;
        Ok(self)
    }

    pub fn base(&self) -> &MultiDiffOp<MultiPoly> {
        &self.base
    }

    pub fn set(&self) -> &Arc<MultSetSpec> {
        &self.set
    }

    pub fn bounds(&self) -> &[u32] {
        &self.bounds
    }

    pub fn rank(&self) -> usize {
        self.base.rank()
    }

    /// Slots processed left to right.
    pub fn apply(&self, args: &[LocalFrac]) -> Result<LocalFrac> {
        let order: Vec<usize> = (0..self.rank()).collect();
        self.apply_in_order(args, &order)
    }

    /// Applies the slotwise formula, expanding slots in the given order
    /// (0-based permutation of the slots).
    pub fn apply_in_order(&self, args: &[LocalFrac], order: &[usize]) -> Result<LocalFrac> {
        let rank = self.rank();
        if args.len() != rank {
            return Err(Error::RankMismatch {
                expected: rank,
                got: args.len(),
            });
        }
        let mut seen = vec![false; rank];
        for &i in order {
            if i >= rank || std::mem::replace(&mut seen[i], true) {
                return Err(Error::SlotOutOfRange { slot: i + 1, rank });
            }
        }
        if order.len() != rank {
            return Err(Error::RankMismatch {
                expected: rank,
                got: order.len(),
            });
        }
        for a in args {
            check_set(&self.set, a)?;
        }
        // Per slot: (binomial sign, argument s^{r−1} m, cofactor s^{k+1−r})
        // so that every term sits over the common denominator Π s^{k+1}.
        let mut expansions = Vec::with_capacity(rank);
        let mut common_den = MultiPoly::one(self.set.nvars());
        for (a, &k) in args.iter().zip(&self.bounds) {
            let (m, s) = (a.num(), a.den());
            if s.is_one() {
                // every term of the formula reduces to D(m); the binomial
                // weights sum to 1
                expansions.push(vec![(Rational::one(), m.clone(), MultiPoly::one(self.set.nvars()))]);
                continue;
            }
            let powers: Vec<MultiPoly> = (0..=k + 1).map(|e| s.pow(e)).collect();
            let slot: Vec<(Rational, MultiPoly, MultiPoly)> = (1..=k + 1)
                .map(|r| {
                    let mut c = Rational::from_integer(rational::binomial(k + 1, r));
                    if r % 2 == 0 {
                        c = -c;
                    }
                    let arg = &powers[(r - 1) as usize] * m;
                    (c, arg, powers[(k + 1 - r) as usize].clone())
                })
                .collect();
            common_den = &common_den * &powers[(k + 1) as usize];
            expansions.push(slot);
        }
        let mut num = MultiPoly::zero(self.set.nvars());
        let mut polys: Vec<MultiPoly> = args.iter().map(|a| a.num().clone()).collect();
        self.expand(
            order,
            0,
            &expansions,
            &mut polys,
            Rational::one(),
            MultiPoly::one(self.set.nvars()),
            &mut num,
        )?;
        LocalFrac::new(num, common_den, &self.set)
    }

    #[allow(clippy::too_many_arguments)]
    fn expand(
        &self,
        order: &[usize],
        depth: usize,
        expansions: &[Vec<(Rational, MultiPoly, MultiPoly)>],
        polys: &mut Vec<MultiPoly>,
        coeff: Rational,
        cofactor: MultiPoly,
        acc: &mut MultiPoly,
    ) -> Result<()> {
        if depth == order.len() {
            let value = self.base.apply(polys)?;
            *acc = &*acc + &(&value * &cofactor).scale(&coeff);
            return Ok(());
        }
        let slot = order[depth];
        for (c, arg, co) in &expansions[slot] {
            polys[slot] = arg.clone();
            self.expand(order, depth + 1, expansions, polys, &coeff * c, &cofactor * co, acc)?;
        }
        Ok(())
    }

    /// The same operator with coefficients in `A_{S₀}`, acting through
    /// quotient-rule derivatives of fractions.
    pub fn coordinate_form(&self) -> MultiDiffOp<LocalFrac> {
        let set = Arc::clone(&self.set);
        self.base.map_coeffs(move |c| LocalFrac::from_poly(c.clone(), &set))
    }

    pub fn apply_coordinate(&self, args: &[LocalFrac]) -> Result<LocalFrac> {
        for a in args {
            check_set(&self.set, a)?;
        }
        self.coordinate_form().apply(args)
    }

    pub fn agrees_with_coordinate_form(&self, args: &[LocalFrac]) -> Result<bool> {
        Ok(self.apply(args)? == self.apply_coordinate(args)?)
    }
}

/// `D_S(m/s)` for a rank-1 operator with its syntactic order as bound.
pub fn vezzosi_apply(d: &MultiDiffOp<MultiPoly>, frac: &LocalFrac) -> Result<LocalFrac> {
    if d.rank() != 1 {
        return Err(Error::RankMismatch {
            expected: 1,
            got: d.rank(),
        });
    }
    LocalizedOp::new(d.clone(), frac.set())?.apply(std::slice::from_ref(frac))
}

/// The localization `C_{S₀}` of a rank-`p` operator.
pub fn localize_multidiff(c: &MultiDiffOp<MultiPoly>, set: &Arc<MultSetSpec>) -> Result<LocalizedOp> {
    LocalizedOp::new(c.clone(), set)
}

/// `η`: coefficientwise `f ↦ f/1`.
pub fn eta(f: &LambdaSeries<MultiPoly>, set: &Arc<MultSetSpec>) -> LambdaSeries<LocalFrac> {
    f.map(|c| LocalFrac::from_poly(c.clone(), set))
}

/// A few members of `S₀` used as probe denominators.
pub fn probe_denominators(set: &MultSetSpec) -> Vec<MultiPoly> {
    let n = set.nvars();
    let mut out = vec![MultiPoly::one(n)];
    match set.mode() {
        SetMode::Generators(gens) => {
            let gens: Vec<_> = gens.iter().filter(|g| g.as_constant().is_none()).collect();
            for (i, g) in gens.iter().enumerate() {
                out.push((*g).clone());
                for h in &gens[i..] {
                    out.push(*g * *h);
                }
            }
        }
        SetMode::PointLocal(base) => {
            for (i, a) in base.iter().enumerate() {
                let shift = MultiPoly::constant(n, Rational::one() - a);
                out.push(&MultiPoly::var(n, i) + &shift);
            }
        }
    }
    out
}

/// Probe fractions `m/s` with `m` a monomial of degree ≤ 1 (plus `1 + x₀`)
/// and `s` from [`probe_denominators`].
pub fn probe_fractions(set: &Arc<MultSetSpec>) -> Vec<LocalFrac> {
    let n = set.nvars();
    let mut nums = vec![MultiPoly::one(n)];
    nums.extend((0..n).map(|i| MultiPoly::var(n, i)));
    nums.push(&MultiPoly::one(n) + &MultiPoly::var(n, 0));
    let mut out = Vec::new();
    for s in probe_denominators(set) {
        for m in &nums {
            out.push(LocalFrac::new(m.clone(), s.clone(), set).expect("probe denominators are members"));
        }
    }
    out
}

/// The unique star product on `A_{S₀}` making `η` a morphism.
#[derive(Clone, Debug)]
pub struct LocalizedStarProduct {
    base: StarProduct,
    set: Arc<MultSetSpec>,
    ops: Vec<LocalizedOp>,
}

impl LocalizedStarProduct {
    pub fn base(&self) -> &StarProduct {
        &self.base
    }

    pub fn set(&self) -> &Arc<MultSetSpec> {
        &self.set
    }

    pub fn ops(&self) -> &[LocalizedOp] {
        &self.ops
    }

    pub fn eta(&self, f: &LambdaSeries<MultiPoly>) -> LambdaSeries<LocalFrac> {
        eta(f, &self.set)
    }

    /// `C_{k,S₀}` in coordinate form (quotient-rule evaluation).
    pub fn coordinate_cochain(&self, k: usize, f: &LocalFrac, g: &LocalFrac) -> Result<LocalFrac> {
        self.ops
            .get(k)
            .ok_or(Error::StarTooShort {
                needed: k,
                available: self.ops.len() - 1,
            })?
            .apply_coordinate(&[f.clone(), g.clone()])
    }

    fn validate(&self) -> Result<()> {
        let probes = probe_fractions(&self.set);
        let one = LocalFrac::from_poly(MultiPoly::one(self.set.nvars()), &self.set);
        for f in &probes {
            for g in &probes {
                if self.cochain(0, f, g)? != f.mul(g) {
                    return Err(Error::StarAxiom("localized C_0 is not the product of fractions".into()));
                }
            }
            for k in 1..self.ops.len() {
                if !self.cochain(k, &one, f)?.is_zero() || !self.cochain(k, f, &one)?.is_zero() {
                    return Err(Error::StarAxiom(format!("localized C_{k} does not vanish on 1")));
                }
            }
        }
        let n = self.set.nvars();
        let monos: Vec<MultiPoly> = poly::monomials_up_to(n, 2)
            .into_iter()
            .map(|m| MultiPoly::monomial(n, m, Rational::one()))
            .collect();
        for f in &monos {
            for g in &monos {
                for (k, op) in self.base.ops().iter().enumerate() {
                    let lhs = LocalFrac::from_poly(op.apply(&[f.clone(), g.clone()])?, &self.set);
                    let rhs = self.cochain(
                        k,
                        &LocalFrac::from_poly(f.clone(), &self.set),
                        &LocalFrac::from_poly(g.clone(), &self.set),
                    )?;
                    if lhs != rhs {
                        return Err(Error::StarAxiom(format!("η is not a morphism at order {k}")));
                    }
                }
            }
        }
        Ok(())
    }
}

impl StarAlgebra for LocalizedStarProduct {
    type Elem = LocalFrac;

    fn trunc(&self) -> usize {
        self.ops.len() - 1
    }

    fn cochain(&self, k: usize, f: &LocalFrac, g: &LocalFrac) -> Result<LocalFrac> {
        self.ops
            .get(k)
            .ok_or(Error::StarTooShort {
                needed: k,
                available: self.ops.len() - 1,
            })?
            .apply(&[f.clone(), g.clone()])
    }
}

/// The localized product evaluated through coordinate forms instead of
/// the binomial formula.
pub struct CoordinateForm<'a>(pub &'a LocalizedStarProduct);

impl StarAlgebra for CoordinateForm<'_> {
    type Elem = LocalFrac;

    fn trunc(&self) -> usize {
        self.0.trunc()
    }

    fn cochain(&self, k: usize, f: &LocalFrac, g: &LocalFrac) -> Result<LocalFrac> {
        self.0.coordinate_cochain(k, f, g)
    }
}

impl LocalizedStarProduct {
    pub fn coordinate_product(
        &self,
        u: &LambdaSeries<LocalFrac>,
        v: &LambdaSeries<LocalFrac>,
    ) -> Result<LambdaSeries<LocalFrac>> {
        CoordinateForm(self).star_mul(u, v)
    }
}

/// Localizes every cochain and validates the result.
pub fn localize_star(s: &StarProduct, set: &Arc<MultSetSpec>) -> Result<LocalizedStarProduct> {
    let ops = s
        .ops()
        .iter()
        .map(|op| LocalizedOp::new(op.clone(), set))
        .collect::<Result<_>>()?;
    let l = LocalizedStarProduct {
        base: s.clone(),
        set: Arc::clone(set),
        ops,
    };
    l.validate()?;
    Ok(l)
}

/// Checks that `η(g)` is invertible for samples `g ∈ S₀ + λA[[λ]]`, with a
/// two-sided inverse up to `λ^K`. Samples outside `S` are refused.
pub fn s_inverting_check(l: &LocalizedStarProduct, samples: &[LambdaSeries<MultiPoly>]) -> Result<bool> {
    for g in samples {
        let g0 = g.coeff(0);
        if !l.set.contains(g0) {
            return Err(Error::NotInSet(g0.to_string()));
        }
        let inv0 = LocalFrac::new(MultiPoly::one(l.set.nvars()), g0.clone(), &l.set)?;
        match l.star_inverse(&l.eta(g), &inv0) {
            Ok(psi) => {
                let one = psi.one_like();
                if l.star_mul(&l.eta(g), &psi)? != one || l.star_mul(&psi, &l.eta(g))? != one {
                    return Ok(false);
                }
            }
            Err(Error::StarAxiom(_)) => return Ok(false),
            Err(e) => return Err(e),
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::Monomial;
    use crate::rational::int;
    use crate::star::{StarAlgebra, P, X};
    use proptest::prelude::*;

    fn sx() -> Arc<MultSetSpec> {
        Arc::new(MultSetSpec::generated("Sx", vec![MultiPoly::var(2, X)]).unwrap())
    }
    fn x() -> MultiPoly {
        MultiPoly::var(2, X)
    }
    fn p() -> MultiPoly {
        MultiPoly::var(2, P)
    }
    fn frac(n: MultiPoly, d: MultiPoly) -> LocalFrac {
        LocalFrac::new(n, d, &sx()).unwrap()
    }
    fn dx(k: u32) -> MultiDiffOp<MultiPoly> {
        MultiDiffOp::derivative(MultiPoly::one(2), Monomial::from_exponents(&[k, 0]))
    }

    #[test]
    fn rank_one_examples() {
        let one_over_x = frac(MultiPoly::one(2), x());
        assert_eq!(
            vezzosi_apply(&dx(1), &one_over_x).unwrap(),
            frac(MultiPoly::constant(2, int(-1)), x().pow(2))
        );
        assert_eq!(
            vezzosi_apply(&dx(2), &one_over_x).unwrap(),
            frac(MultiPoly::constant(2, int(2)), x().pow(3))
        );
        let a = &p() + &MultiPoly::constant(2, int(3));
        let mult = MultiDiffOp::multiplication(a.clone());
        let m_over_s = frac(&p() * &p(), x().pow(2));
        assert_eq!(
            vezzosi_apply(&mult, &m_over_s).unwrap(),
            frac(&a * &(&p() * &p()), x().pow(2))
        );
    }

    #[test]
    fn rank_two_examples() {
        let set = sx();
        let st = StarProduct::standard(2);
        let c1 = localize_multidiff(&st.ops()[1], &set).unwrap();
        let inv_x = frac(MultiPoly::one(2), x());
        assert!(c1.apply(&[inv_x.clone(), inv_x.clone()]).unwrap().is_zero());
        let got = c1.apply(&[frac(p(), x()), inv_x.clone()]).unwrap();
        assert_eq!(got, frac(MultiPoly::constant(2, int(-1)), x().pow(3)));
        let c0 = localize_multidiff(&st.ops()[0], &set).unwrap();
        let f = frac(p(), x());
        assert_eq!(c0.apply(&[f.clone(), inv_x.clone()]).unwrap(), f.mul(&inv_x));
        assert_eq!(
            c1.apply_in_order(&[frac(p(), x()), inv_x.clone()], &[1, 0]).unwrap(),
            got
        );
        assert!(c1.apply_in_order(&[inv_x.clone(), inv_x], &[0, 0]).is_err());
    }

    #[test]
    fn low_bound_is_detected() {
        let op = localize_multidiff(&dx(2), &sx()).unwrap().with_bounds(vec![1]).unwrap();
        let f = frac(MultiPoly::one(2), x());
        assert!(!op.agrees_with_coordinate_form(&[f]).unwrap());
    }

    #[test]
    fn localized_standard_product() {
        let set = sx();
        let st = StarProduct::standard(3);
        let l = localize_star(&st, &set).unwrap();
        let px = st
            .star_mul(&LambdaSeries::constant(p(), 3), &LambdaSeries::constant(x(), 3))
            .unwrap();
        let lhs = l.eta(&px);
        let rhs = l
            .star_mul(
                &l.eta(&LambdaSeries::constant(p(), 3)),
                &l.eta(&LambdaSeries::constant(x(), 3)),
            )
            .unwrap();
        assert_eq!(lhs, rhs);
        assert_eq!(lhs.coeff(1), &LocalFrac::from_poly(MultiPoly::one(2), &set));

        let g = LambdaSeries::constant(x(), 3);
        let psi = l.star_inverse_auto(&l.eta(&g)).unwrap();
        let want = LambdaSeries::constant(frac(MultiPoly::one(2), x()), 3);
        assert_eq!(psi, want);

        let g = LambdaSeries::from_prefix(vec![x(), p()], 3);
        let psi = l.star_inverse_auto(&l.eta(&g)).unwrap();
        assert_eq!(psi.coeff(0), &frac(MultiPoly::one(2), x()));
        assert_eq!(psi.coeff(1), &frac(-&p(), x().pow(2)));
    }

    #[test]
    fn s_inverting_examples() {
        let set = sx();
        let l = localize_star(&StarProduct::standard(3), &set).unwrap();
        let samples = vec![
            LambdaSeries::from_prefix(vec![x(), p()], 3),
            LambdaSeries::constant(MultiPoly::one(2), 3),
            LambdaSeries::from_prefix(vec![x().pow(2), &x() + &p().pow(2)], 3),
        ];
        assert!(s_inverting_check(&l, &samples).unwrap());
        let bad = vec![LambdaSeries::constant(p(), 3)];
        assert!(matches!(s_inverting_check(&l, &bad), Err(Error::NotInSet(_))));
    }

    #[test]
    fn point_local_set() {
        let set = Arc::new(MultSetSpec::point_local("S0", vec![int(0), int(2)]).unwrap());
        let l = localize_star(&StarProduct::standard(2), &set).unwrap();
        let d = &p() - &MultiPoly::constant(2, int(1));
        let inv = l
            .star_inverse_auto(&l.eta(&LambdaSeries::constant(d.clone(), 2)))
            .unwrap();
        assert_eq!(inv.coeff(0), &LocalFrac::new(MultiPoly::one(2), d, &set).unwrap());
    }

    #[test]
    fn set_mismatch_is_reported() {
        let other = Arc::new(MultSetSpec::generated("Sp", vec![p()]).unwrap());
        let op = localize_multidiff(&dx(1), &sx()).unwrap();
        let f = LocalFrac::new(MultiPoly::one(2), p(), &other).unwrap();
        assert!(matches!(op.apply(&[f]), Err(Error::SetMismatch { .. })));
    }

    fn arb_poly() -> impl Strategy<Value = MultiPoly> {
        prop::collection::vec((0u32..3, 0u32..3, -3i64..=3), 1..4).prop_map(|ts| {
            MultiPoly::from_terms(
                2,
                ts.into_iter()
                    .map(|(a, b, c)| (Monomial::from_exponents(&[a, b]), int(c))),
            )
        })
    }

    fn arb_op(rank: usize) -> impl Strategy<Value = MultiDiffOp<MultiPoly>> {
        prop::collection::vec((arb_poly(), prop::collection::vec((0u32..3, 0u32..2), rank)), 1..3).prop_map(move |ts| {
            MultiDiffOp::from_terms(
                rank,
                2,
                ts.into_iter().map(|(c, al)| {
                    (
                        c,
                        al.into_iter().map(|(a, b)| Monomial::from_exponents(&[a, b])).collect(),
                    )
                }),
            )
            .unwrap()
        })
    }

    fn arb_frac() -> impl Strategy<Value = LocalFrac> {
        (arb_poly(), 0u32..3).prop_map(|(m, e)| frac(m, x().pow(e)))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]

        #[test]
        fn matches_quotient_rule(d in arb_op(1), f in arb_frac()) {
            let op = localize_multidiff(&d, &sx()).unwrap();
            prop_assert!(op.agrees_with_coordinate_form(&[f]).unwrap());
        }

        #[test]
        fn representative_independent(d in arb_op(1), m in arb_poly(), e in 0u32..3, t in 0u32..3) {
            let set = sx();
            let op = localize_multidiff(&d, &set).unwrap();
            let a = op.apply(&[frac(m.clone(), x().pow(e))]).unwrap();
            let rep = LocalFrac::new_unreduced(&m * &x().pow(t), x().pow(e + t), &set).unwrap();
            prop_assert_eq!(rep.den(), &x().pow(e + t));
            let b = op.apply(&[rep]).unwrap();
            prop_assert_eq!(a, b);
        }

        #[test]
        fn larger_bounds_agree(d in arb_op(2), f in arb_frac(), g in arb_frac(), extra in 0u32..4) {
            let op = localize_multidiff(&d, &sx()).unwrap();
            let plain = op.apply(&[f.clone(), g.clone()]).unwrap();
            let bounds = op.bounds().iter().map(|k| k + extra).collect();
            let wide = op.clone().with_bounds(bounds).unwrap();
            prop_assert_eq!(wide.apply(&[f.clone(), g.clone()]).unwrap(), plain.clone());
            prop_assert_eq!(op.apply_in_order(&[f, g], &[1, 0]).unwrap(), plain);
        }
    }
}
