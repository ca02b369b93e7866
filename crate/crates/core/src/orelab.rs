//! Ore-condition experiments: deviations, bounded witness search by exact
//! linear algebra, and the jet-level non-Ore counterexample.
//!
//! A search that comes back [`OreOutcome::Exhausted`] only says that no
//! witness exists within the stated bounds. Non-Ore conclusions come from
//! [`counterexample_check`], which rests on a closed-form coefficient.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use num_traits::{One, Zero};
use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::frac::{MultSetSpec, SetMode};
use crate::linsolve::{self, Solution};
use crate::poly::{self, Monomial, MultiPoly};
use crate::random;
use crate::rational::{self, Rational};
use crate::series::{LambdaSeries, SeriesJson};
use crate::star::{EquivTransform, StarAlgebra, StarProduct, P, X};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    /// `r ⋆ s′ = s ⋆ r′`
    Right,
    /// `s′ ⋆ r = r′ ⋆ s`
    Left,
}

#[derive(Clone, Debug)]
pub struct OreQuery {
    pub star: StarProduct,
    pub set: Arc<MultSetSpec>,
    pub r: LambdaSeries<MultiPoly>,
    pub s: LambdaSeries<MultiPoly>,
    pub side: Side,
    /// Degree bound for every unknown coefficient of `r′` and `s′`.
    pub degree: u32,
    /// Largest exponent tried for the leading term `s′₀`.
    pub exponent_bound: u32,
}

impl OreQuery {
    pub fn new(
        star: StarProduct,
        set: Arc<MultSetSpec>,
        r: LambdaSeries<MultiPoly>,
        s: LambdaSeries<MultiPoly>,
        side: Side,
        degree: u32,
        exponent_bound: u32,
    ) -> Result<Self> {
        if r.trunc() != s.trunc() {
            return Err(Error::TruncMismatch {
                left: r.trunc(),
                right: s.trunc(),
            });
        }
        if r.trunc() > star.trunc() {
            return Err(Error::StarTooShort {
                needed: r.trunc(),
                available: star.trunc(),
            });
        }
        for c in r.coeffs().iter().chain(s.coeffs()) {
            if c.nvars() != star.nvars() || set.nvars() != star.nvars() {
                return Err(Error::VarCountMismatch {
                    left: star.nvars(),
                    right: c.nvars(),
                });
            }
        }
        if !set.contains(s.coeff(0)) {
            return Err(Error::NotInSet(s.coeff(0).to_string()));
        }
        Ok(OreQuery {
            star: star.truncated(r.trunc()),
            set,
            r,
            s,
            side,
            degree,
            exponent_bound,
        })
    }

    pub fn trunc(&self) -> usize {
        self.r.trunc()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OreWitness {
    pub r_prime: LambdaSeries<MultiPoly>,
    pub s_prime: LambdaSeries<MultiPoly>,
    pub residual: LambdaSeries<MultiPoly>,
}

#[derive(Clone, Debug, PartialEq)]
pub enum OreOutcome {
    Witness(OreWitness),
    Exhausted {
        degree: u32,
        trunc: usize,
        exponent_bound: u32,
    },
}

/// `r⋆s′ − s⋆r′` (right) or `s′⋆r − r′⋆s` (left).
pub fn ore_deviation<S: StarAlgebra<Elem = MultiPoly>>(
    star: &S,
    side: Side,
    r: &LambdaSeries<MultiPoly>,
    s: &LambdaSeries<MultiPoly>,
    r_prime: &LambdaSeries<MultiPoly>,
    s_prime: &LambdaSeries<MultiPoly>,
) -> Result<LambdaSeries<MultiPoly>> {
    match side {
        Side::Right => star.star_mul(r, s_prime)?.sub(&star.star_mul(s, r_prime)?),
        Side::Left => star.star_mul(s_prime, r)?.sub(&star.star_mul(r_prime, s)?),
    }
}

/// Candidates for `s′₀` in the order they are tried: products of the
/// generators by total exponent, or powers of `s₀` for point-local sets.
pub fn leading_candidates(set: &MultSetSpec, s0: &MultiPoly, bound: u32) -> Vec<MultiPoly> {
    let n = set.nvars();
    match set.mode() {
        SetMode::Generators(gens) => {
            let gens: Vec<&MultiPoly> = gens.iter().filter(|g| g.as_constant().is_none()).collect();
            if gens.is_empty() {
                return vec![MultiPoly::one(n)];
            }
            poly::monomials_up_to(gens.len(), bound)
                .into_iter()
                .map(|e| {
                    e.exponents()
                        .iter()
                        .zip(&gens)
                        .fold(MultiPoly::one(n), |acc, (&k, g)| &acc * &g.pow(k))
                })
                .collect()
        }
        SetMode::PointLocal(_) => (0..=bound).map(|e| s0.pow(e)).collect(),
    }
}

fn lambda_monomial(nvars: usize, i: usize, mono: &Monomial, trunc: usize) -> LambdaSeries<MultiPoly> {
    LambdaSeries::constant(MultiPoly::monomial(nvars, mono.clone(), Rational::one()), trunc).shift(i)
}

/// Right-side search with `s′₀` fixed: the deviation is affine in the
/// remaining unknown coefficients, so vanishing is a linear system.
fn solve_right<S: StarAlgebra<Elem = MultiPoly>>(
    star: &S,
    r: &LambdaSeries<MultiPoly>,
    s: &LambdaSeries<MultiPoly>,
    lead: &MultiPoly,
    degree: u32,
) -> Result<Option<(LambdaSeries<MultiPoly>, LambdaSeries<MultiPoly>)>> {
    let trunc = r.trunc();
    let n = lead.nvars();
    let basis = poly::monomials_up_to(n, degree);
    // (is_s_prime, lambda power, monomial)
    let mut unknowns = Vec::new();
    for i in 1..=trunc {
        for m in &basis {
            unknowns.push((true, i, m.clone()));
        }
    }
    for i in 0..=trunc {
        for m in &basis {
            unknowns.push((false, i, m.clone()));
        }
    }
    let mut effects = Vec::with_capacity(unknowns.len());
    for (is_s, i, m) in &unknowns {
        let e = lambda_monomial(n, *i, m, trunc);
        effects.push(if *is_s {
            star.star_mul(r, &e)?
        } else {
            star.star_mul(s, &e)?.neg()
        });
    }
    let constant = star.star_mul(r, &LambdaSeries::constant(lead.clone(), trunc))?;
    let mut keys = BTreeSet::new();
    for series in effects.iter().chain(std::iter::once(&constant)) {
        for (k, c) in series.coeffs().iter().enumerate() {
            for (m, _) in c.terms() {
                keys.insert((k, m.clone()));
            }
        }
    }
    let rows: Vec<Vec<Rational>> = keys
        .iter()
        .map(|(k, m)| effects.iter().map(|e| e.coeff(*k).coeff(m)).collect())
        .collect();
    let rhs: Vec<Rational> = keys.iter().map(|(k, m)| -constant.coeff(*k).coeff(m)).collect();
    let Solution::Solved { x, .. } = linsolve::solve(&rows, &rhs, unknowns.len()) else {
        return Ok(None);
    };
    let mut s_prime = vec![MultiPoly::zero(n); trunc + 1];
    let mut r_prime = vec![MultiPoly::zero(n); trunc + 1];
    s_prime[0] = lead.clone();
    for ((is_s, i, m), v) in unknowns.iter().zip(&x) {
        if v.is_zero() {
            continue;
        }
        let target = if *is_s { &mut s_prime[*i] } else { &mut r_prime[*i] };
        *target = &*target + &MultiPoly::monomial(n, m.clone(), v.clone());
    }
    Ok(Some((LambdaSeries::new(r_prime), LambdaSeries::new(s_prime))))
}

fn is_standard(star: &StarProduct) -> bool {
    star.nvars() == 2 && *star == StarProduct::standard(star.trunc())
}

/// Bounded witness search. Left-side queries are reduced to right-side
/// ones through the anti-automorphism `V`, which is available for the
/// standard product only. Every returned witness has been re-verified.
pub fn ore_search(q: &OreQuery) -> Result<OreOutcome> {
    let trunc = q.trunc();
    let (r, s, back) = match q.side {
        Side::Right => (q.r.clone(), q.s.clone(), None),
        Side::Left => {
            if !is_standard(&q.star) {
                return Err(Error::Unsupported(
                    "left-side search needs the standard product on (x, p)".into(),
                ));
            }
            let v = EquivTransform::v_transform(trunc);
            (v.apply(&q.r)?, v.apply(&q.s)?, Some(v.inverse()?))
        }
    };
    for lead in leading_candidates(&q.set, s.coeff(0), q.exponent_bound) {
        let Some((r_prime, s_prime)) = solve_right(&q.star, &r, &s, &lead, q.degree)? else {
            continue;
        };
        let (r_prime, s_prime) = match &back {
            None => (r_prime, s_prime),
            Some(inv) => (inv.apply(&r_prime)?, inv.apply(&s_prime)?),
        };
        let residual = ore_deviation(&q.star, q.side, &q.r, &q.s, &r_prime, &s_prime)?;
        if residual.is_zero() && q.set.contains(s_prime.coeff(0)) {
            return Ok(OreOutcome::Witness(OreWitness {
                r_prime,
                s_prime,
                residual,
            }));
        }
    }
    Ok(OreOutcome::Exhausted {
        degree: q.degree,
        trunc,
        exponent_bound: q.exponent_bound,
    })
}

/// Partial derivatives of a function of `(x, p)` at a basepoint.
#[derive(Clone, Debug, PartialEq)]
pub struct JetTable {
    pub basepoint: [Rational; 2],
    /// `k ↦ ∂ᵏr/∂pᵏ`
    pub p_jets: BTreeMap<u32, Rational>,
    /// `(a, b) ↦ ∂ᵃ_x ∂ᵇ_p r` with `a ≥ 1`
    pub mixed: BTreeMap<(u32, u32), Rational>,
}

impl JetTable {
    /// Jets at `(0, m)`: `∂ᵏr/∂pᵏ = 0` for `k < m` and `1` for `k = m`.
    pub fn counterexample(m: u32) -> Self {
        JetTable {
            basepoint: [Rational::zero(), rational::int(m as i64)],
            p_jets: (0..=m)
                .map(|k| (k, if k == m { Rational::one() } else { Rational::zero() }))
                .collect(),
            mixed: BTreeMap::new(),
        }
    }

    /// All jets of a polynomial up to total order `order`.
    pub fn of_poly(r: &MultiPoly, basepoint: [Rational; 2], order: u32) -> Self {
        let mut p_jets = BTreeMap::new();
        let mut mixed = BTreeMap::new();
        for a in 0..=order {
            for b in 0..=order - a {
                let v = r.derive(&Monomial::from_exponents(&[a, b])).eval(&basepoint);
                if a == 0 {
                    p_jets.insert(b, v);
                } else {
                    mixed.insert((a, b), v);
                }
            }
        }
        JetTable {
            basepoint,
            p_jets,
            mixed,
        }
    }

    pub fn p_jet(&self, k: u32) -> Result<&Rational> {
        self.p_jets.get(&k).ok_or(Error::MissingJet(k as usize))
    }

    /// Taylor polynomial of total order `order` around the basepoint that
    /// realises every jet in the table; absent coefficients are drawn at
    /// random.
    pub fn taylor_surrogate<R: Rng>(&self, order: u32, rng: &mut R) -> MultiPoly {
        let dx = &MultiPoly::var(2, X) - &MultiPoly::constant(2, self.basepoint[X].clone());
        let dp = &MultiPoly::var(2, P) - &MultiPoly::constant(2, self.basepoint[P].clone());
        let mut acc = MultiPoly::zero(2);
        for a in 0..=order {
            for b in 0..=order - a {
                let jet = if a == 0 {
                    self.p_jets.get(&b).cloned()
                } else {
                    self.mixed.get(&(a, b)).cloned()
                };
                let c = jet.unwrap_or_else(|| random::coeff(rng));
                if c.is_zero() {
                    continue;
                }
                let denom = Rational::from_integer(rational::factorial(a) * rational::factorial(b));
                acc = &acc + &(&dx.pow(a) * &dp.pow(b)).scale(&(c / denom));
            }
        }
        acc
    }
}

/// A polynomial `h(p)` with `h⁽ᵏ⁾(n) = 0` for `k < n` and `h⁽ⁿ⁾(n) = 1`,
/// simultaneously for every `n ≤ n_max` (Hermite interpolation).
pub fn hermite_surrogate(n_max: u32) -> Result<MultiPoly> {
    let ncoef = ((n_max + 1) * (n_max + 2) / 2) as usize;
    let mut rows = Vec::new();
    let mut rhs = Vec::new();
    for n in 0..=n_max {
        for k in 0..=n {
            let row = (0..ncoef as u32)
                .map(|j| {
                    if j < k {
                        Rational::zero()
                    } else {
                        let falling = rational::factorial(j) / rational::factorial(j - k);
                        Rational::from_integer(falling) * num_traits::pow(rational::int(n as i64), (j - k) as usize)
                    }
                })
                .collect();
            rows.push(row);
            rhs.push(if k == n { Rational::one() } else { Rational::zero() });
        }
    }
    let Solution::Solved { x, .. } = linsolve::solve(&rows, &rhs, ncoef) else {
        return Err(Error::Precondition("Hermite conditions are inconsistent".into()));
    };
    Ok(MultiPoly::from_terms(
        2,
        x.into_iter()
            .enumerate()
            .map(|(j, c)| (Monomial::from_exponents(&[0, j as u32]), c)),
    ))
}

/// Closed form of coefficient `k` of `r⋆s′ − x⋆r′` for the standard
/// product with `s′ = xᵐ + g`, `g ∈ λA[[λ]]`, evaluated at the jet
/// basepoint `(x₀, p₀)`:
///
/// `C(m,k) ∂ᵏ_p r · x₀^{m−k} + Σ_{l<k} (1/l!) ∂ˡ_p r · ∂ˡ_x g_{k−l} − x₀ r′_k`.
///
/// Jets are only looked up where their factor is nonzero.
pub fn deviation_coefficient_formula(
    m: u32,
    jets: &JetTable,
    g: &LambdaSeries<MultiPoly>,
    r_prime: &LambdaSeries<MultiPoly>,
    k: usize,
) -> Result<Rational> {
    if k > m as usize {
        return Err(Error::Precondition(format!("k = {k} exceeds m = {m}")));
    }
    if !g.coeff(0).is_zero() {
        return Err(Error::Precondition("g must have no λ⁰ term".into()));
    }
    if k > g.trunc() || k > r_prime.trunc() {
        return Err(Error::StarTooShort {
            needed: k,
            available: g.trunc().min(r_prime.trunc()),
        });
    }
    let bp = &jets.basepoint;
    let mut value = Rational::zero();
    let xpow = num_traits::pow(bp[X].clone(), m as usize - k);
    if !xpow.is_zero() {
        let binom = Rational::from_integer(rational::binomial(m, k as u32));
        value += binom * jets.p_jet(k as u32)? * xpow;
    }
    for l in 0..k {
        let dg = g.coeff(k - l).partial(X, l as u32).eval(bp);
        if dg.is_zero() {
            continue;
        }
        let inv_fact = Rational::from_integer(rational::factorial(l as u32)).recip();
        value += inv_fact * jets.p_jet(l as u32)? * dg;
    }
    value -= &bp[X] * r_prime.coeff(k).eval(bp);
    Ok(value)
}

/// One randomized cell of [`counterexample_check`].
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CounterexampleCell {
    pub m: u32,
    pub trial: usize,
    /// Coefficient `m` of the right deviation at `(0, m)`.
    pub right_value: String,
    /// The closed form agrees with the machinery for every `k ≤ m`.
    pub formula_agrees: bool,
    /// Coefficient `m` at `(0, m)` of `V` applied to the left deviation.
    pub left_value: String,
    pub passed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CounterexampleReport {
    pub m_max: u32,
    pub trials: usize,
    pub cells: Vec<CounterexampleCell>,
    pub passed: bool,
}

fn random_tail<R: Rng>(rng: &mut R, trunc: usize) -> LambdaSeries<MultiPoly> {
    let mut g = random::series(rng, 2, 3, trunc);
    let mut cs = g.coeffs().to_vec();
    cs[0] = MultiPoly::zero(2);
    g = LambdaSeries::new(cs);
    g
}

/// For each `m ≤ m_max` and each trial: builds a Taylor surrogate with the
/// counterexample jets at `(0, m)`, draws random `g ∈ λA[[λ]]` and `r′`
/// (degree ≤ 3), and checks that coefficient `m` of `r⋆(xᵐ+g) − x⋆r′` at
/// `(0, m)` is exactly 1, both from the star product and from the closed
/// form. The left side is checked through `V`: for `r̃ = V⁻¹(r)`,
/// `V(s′⋆r̃ − r′⋆x) = r⋆V(s′) − x⋆V(r′)`, whose coefficient `m` at `(0, m)`
/// must again be 1.
pub fn counterexample_check<R: Rng>(m_max: u32, trials: usize, rng: &mut R) -> Result<CounterexampleReport> {
    let mut cells = Vec::new();
    let x = MultiPoly::var(2, X);
    for m in 0..=m_max {
        let trunc = m as usize;
        let star = StarProduct::standard(trunc);
        let v = EquivTransform::v_transform(trunc);
        let v_inv = v.inverse()?;
        let jets = JetTable::counterexample(m);
        let bp = jets.basepoint.clone();
        let xs = LambdaSeries::constant(x.clone(), trunc);
        let xm = LambdaSeries::constant(x.pow(m), trunc);
        for trial in 0..trials {
            let r = jets.taylor_surrogate(m + 2, rng);
            let rs = LambdaSeries::constant(r.clone(), trunc);

            let g = random_tail(rng, trunc);
            let r_prime = random::series(rng, 2, 3, trunc);
            let s_prime = xm.add(&g)?;
            let dev = ore_deviation(&star, Side::Right, &rs, &xs, &r_prime, &s_prime)?;
            let right_value = dev.coeff(trunc).eval(&bp);
            let mut formula_agrees = true;
            for k in 0..=trunc {
                let closed = deviation_coefficient_formula(m, &jets, &g, &r_prime, k)?;
                formula_agrees &= closed == dev.coeff(k).eval(&bp);
            }

            let r_tilde = v_inv.apply(&rs)?;
            let g_left = random_tail(rng, trunc);
            let r_prime_left = random::series(rng, 2, 3, trunc);
            let s_prime_left = xm.add(&g_left)?;
            let left = ore_deviation(&star, Side::Left, &r_tilde, &xs, &r_prime_left, &s_prime_left)?;
            let image = v.apply(&left)?;
            let left_value = image.coeff(trunc).eval(&bp);
            let vg = v.apply(&s_prime_left)?.sub(&xm)?;
            let closed_left = deviation_coefficient_formula(m, &jets, &vg, &v.apply(&r_prime_left)?, trunc)?;

            let passed = right_value.is_one() && formula_agrees && left_value.is_one() && closed_left.is_one();
            cells.push(CounterexampleCell {
                m,
                trial,
                right_value: rational::format(&right_value),
                formula_agrees,
                left_value: rational::format(&left_value),
                passed,
            });
        }
    }
    let passed = cells.iter().all(|c| c.passed);
    Ok(CounterexampleReport {
        m_max,
        trials,
        cells,
        passed,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OreQueryJson {
    pub r: String,
    pub s: String,
    pub set: String,
    pub side: Side,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OreWitnessJson {
    pub r_prime: SeriesJson,
    pub s_prime: SeriesJson,
    pub residual: SeriesJson,
    pub r_prime_text: String,
    pub s_prime_text: String,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OreBounds {
    pub degree: u32,
    pub trunc: usize,
    pub exponent_bound: u32,
}

/// `{"query", "witness" | null, "bounds", "verified"}`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct OreReport {
    pub query: OreQueryJson,
    pub witness: Option<OreWitnessJson>,
    pub bounds: OreBounds,
    pub verified: bool,
}

impl OreReport {
    pub fn new(q: &OreQuery, outcome: &OreOutcome, names: &[String]) -> Self {
        let witness = match outcome {
            OreOutcome::Witness(w) => Some(OreWitnessJson {
                r_prime: SeriesJson::from_series(&w.r_prime, names),
                s_prime: SeriesJson::from_series(&w.s_prime, names),
                residual: SeriesJson::from_series(&w.residual, names),
                r_prime_text: w.r_prime.display_with(names),
                s_prime_text: w.s_prime.display_with(names),
            }),
            OreOutcome::Exhausted { .. } => None,
        };
        let verified = match outcome {
            OreOutcome::Witness(w) => w.residual.is_zero(),
            OreOutcome::Exhausted { .. } => false,
        };
        OreReport {
            query: OreQueryJson {
                r: q.r.display_with(names),
                s: q.s.display_with(names),
                set: q.set.name().to_string(),
                side: q.side,
            },
            witness,
            bounds: OreBounds {
                degree: q.degree,
                trunc: q.trunc(),
                exponent_bound: q.exponent_bound,
            },
            verified,
        }
    }
}
