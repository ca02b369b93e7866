//! Named randomized verification suites, used by `starloc verify`.
//!
//! Every suite is deterministic for a fixed seed and reports
//! `PASS (n/n <items>, K=…)` or `FAIL (…)`.

use std::fmt;
use std::sync::Arc;

use rand::Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::frac::{LocalFrac, MultSetSpec};
use crate::localize::{self, LocalizedOp};
use crate::multidiff::{self, AdOutcome, MultiDiffOp};
use crate::orelab::{self, OreOutcome, OreQuery, Side};
use crate::poly::MultiPoly;
use crate::random::{self, Rng64};
use crate::ring::Coeff;
use crate::series::LambdaSeries;
use crate::star::{self, gauge_transform, EquivTransform, StarAlgebra, StarProduct, X};

pub const SUITES: &[&str] = &[
    "associativity",
    "operator-associativity",
    "inverse",
    "vezzosi",
    "functoriality",
    "morphism",
    "counterexample",
    "ore",
    "antiautomorphism",
    "pullout",
    "order",
    "bracket",
];

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SuiteResult {
    pub name: String,
    pub passed: usize,
    pub total: usize,
    pub unit: String,
    pub trunc: usize,
    /// First failing case, if any.
    pub failure: Option<String>,
}

impl SuiteResult {
    pub fn ok(&self) -> bool {
        self.passed == self.total && self.failure.is_none()
    }
}

impl fmt::Display for SuiteResult {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.ok() { "PASS" } else { "FAIL" };
        write!(
            f,
            "{verdict} ({}/{} {}, K={})",
            self.passed, self.total, self.unit, self.trunc
        )?;
        if let Some(why) = &self.failure {
            write!(f, ": {why}")?;
        }
        Ok(())
    }
}

struct Tally {
    name: &'static str,
    unit: &'static str,
    trunc: usize,
    passed: usize,
    total: usize,
    failure: Option<String>,
}

impl Tally {
    fn new(name: &'static str, unit: &'static str, trunc: usize) -> Self {
        Tally {
            name,
            unit,
            trunc,
            passed: 0,
            total: 0,
            failure: None,
        }
    }

    fn record(&mut self, ok: bool, describe: impl FnOnce() -> String) {
        self.total += 1;
        if ok {
            self.passed += 1;
        } else if self.failure.is_none() {
            self.failure = Some(describe());
        }
    }

    fn finish(self) -> SuiteResult {
        SuiteResult {
            name: self.name.to_string(),
            passed: self.passed,
            total: self.total,
            unit: self.unit.to_string(),
            trunc: self.trunc,
            failure: self.failure,
        }
    }
}

/// Shared inputs of the suites.
#[derive(Clone, Debug)]
pub struct VerifyContext {
    pub star: StarProduct,
    pub trunc: usize,
    pub seed: u64,
    /// `S₀ = {xⁿ}`.
    pub sx: Arc<MultSetSpec>,
}

impl VerifyContext {
    pub fn new(star: StarProduct, seed: u64) -> Self {
        VerifyContext {
            trunc: star.trunc(),
            star,
            seed,
            sx: Arc::new(MultSetSpec::generated("Sx", vec![MultiPoly::var(2, X)]).expect("x generates a set")),
        }
    }

    pub fn standard(trunc: usize, seed: u64) -> Self {
        Self::new(StarProduct::standard(trunc), seed)
    }

    fn rng(&self, salt: u64) -> Rng64 {
        random::rng(self.seed.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ salt)
    }
}

pub fn run(name: &str, ctx: &VerifyContext) -> Result<SuiteResult> {
    match name {
        "associativity" => associativity(ctx, 100),
        "operator-associativity" => operator_associativity(ctx),
        "inverse" => inverse(ctx, 50),
        "vezzosi" => vezzosi(ctx, 100),
        "functoriality" => functoriality(ctx, 20),
        "morphism" => morphism(ctx, 100),
        "counterexample" => counterexample(ctx, 4, 20),
        "ore" => ore(ctx),
        "antiautomorphism" => antiautomorphism(ctx, 4),
        "pullout" => pullout(ctx, 50),
        "order" => order(ctx, 30),
        "bracket" => bracket(ctx, 30),
        _ => Err(Error::Unknown {
            kind: "verification suite",
            name: name.to_string(),
        }),
    }
}

fn constant(f: MultiPoly, k: usize) -> LambdaSeries<MultiPoly> {
    LambdaSeries::constant(f, k)
}

/// `(f⋆g)⋆h = f⋆(g⋆h)` on random polynomials of degree ≤ 3.
pub fn associativity(ctx: &VerifyContext, triples: usize) -> Result<SuiteResult> {
    let mut rng = ctx.rng(1);
    let mut t = Tally::new("associativity", "triples", ctx.trunc);
    let n = ctx.star.nvars();
    for _ in 0..triples {
        let [f, g, h] = [0; 3].map(|_| constant(random::poly(&mut rng, n, 3, 4), ctx.trunc));
        let l = ctx.star.star_mul(&ctx.star.star_mul(&f, &g)?, &h)?;
        let r = ctx.star.star_mul(&f, &ctx.star.star_mul(&g, &h)?)?;
        t.record(l == r, || format!("f={f} g={g} h={h}"));
    }
    Ok(t.finish())
}

/// `Σ_l (C_l∘₁C_{k−l} − C_l∘₂C_{k−l}) = 0` for every `k ≤ K`.
pub fn operator_associativity(ctx: &VerifyContext) -> Result<SuiteResult> {
    let mut t = Tally::new("operator-associativity", "orders", ctx.trunc);
    for k in 0..=ctx.trunc {
        let defect = ctx.star.associativity_defect(k)?;
        t.record(defect.is_zero(), || format!("order {k}"));
    }
    Ok(t.finish())
}

/// A random `g` with `g₀ = c·xᵉ`.
pub fn random_s_element<R: Rng>(rng: &mut R, set: &MultSetSpec, trunc: usize) -> LambdaSeries<MultiPoly> {
    let mut coeffs = random::series(rng, 2, 2, trunc).coeffs().to_vec();
    let unit = random::coeff(rng);
    coeffs[0] = random::member(rng, set, 2).scale(&unit);
    LambdaSeries::new(coeffs)
}

/// Two-sided inverses over the localization at `{xⁿ}`, plus the two
/// closed-form cases; left and right recursions must agree.
pub fn inverse(ctx: &VerifyContext, samples: usize) -> Result<SuiteResult> {
    let mut rng = ctx.rng(2);
    let mut t = Tally::new("inverse", "series", ctx.trunc);
    let l = localize::localize_star(&ctx.star, &ctx.sx)?;
    let k = ctx.trunc;
    let x = MultiPoly::var(2, X);

    let psi = l.star_inverse_auto(&l.eta(&constant(x.clone(), k)))?;
    let want = LambdaSeries::constant(LocalFrac::new(MultiPoly::one(2), x.clone(), &ctx.sx)?, k);
    t.record(psi == want, || format!("inverse of x is {psi}"));

    let g = LambdaSeries::from_prefix(vec![MultiPoly::one(2), x.clone()], k);
    let psi = ctx.star.star_inverse_auto(&g)?;
    let geometric = LambdaSeries::new(
        (0..=k as u32)
            .map(|i| x.pow(i).scale(&crate::rational::int(if i % 2 == 0 { 1 } else { -1 })))
            .collect(),
    );
    t.record(psi == geometric, || format!("inverse of 1 + L*x is {psi}"));

    for _ in 0..samples {
        let g = random_s_element(&mut rng, &ctx.sx, k);
        let eg = l.eta(&g);
        let inv0 = LocalFrac::new(MultiPoly::one(2), g.coeff(0).clone(), &ctx.sx)?;
        let ok = match l.star_inverse(&eg, &inv0) {
            Ok(psi) => {
                let one = psi.one_like();
                l.star_mul(&eg, &psi)? == one
                    && l.star_mul(&psi, &eg)? == one
                    && l.star_left_inverse(&eg, &inv0)? == psi
            }
            Err(Error::StarAxiom(_)) => false,
            Err(e) => return Err(e),
        };
        t.record(ok, || format!("g={g}"));
    }
    Ok(t.finish())
}

/// A random `m/s` with `s = xᵉ`, `e ≤ max_exp`.
pub fn random_fraction<R: Rng>(rng: &mut R, set: &Arc<MultSetSpec>, max_exp: u32) -> LocalFrac {
    random::fraction(rng, set, 3, max_exp)
}

/// Binomial formula against quotient-rule differentiation, bound
/// stability `k → k′ ≤ k+3`, and representative independence.
pub fn vezzosi(ctx: &VerifyContext, samples: usize) -> Result<SuiteResult> {
    let mut rng = ctx.rng(3);
    let mut t = Tally::new("vezzosi", "operators", ctx.trunc);
    for _ in 0..samples {
        let d = random::operator(&mut rng, 1, 2, 3, 2, 3);
        let f = random_fraction(&mut rng, &ctx.sx, 3);
        let op = LocalizedOp::new(d.clone(), &ctx.sx)?;
        let value = op.apply(std::slice::from_ref(&f))?;
        let mut ok = value == op.apply_coordinate(std::slice::from_ref(&f))?;
        let k = op.bounds()[0];
        for extra in 1..=3 {
            let wide = op.clone().with_bounds(vec![k + extra])?;
            ok &= wide.apply(std::slice::from_ref(&f))? == value;
        }
        let tpow = random::member(&mut rng, &ctx.sx, 2);
        let rep = LocalFrac::new_unreduced(f.num() * &tpow, f.den() * &tpow, &ctx.sx)?;
        ok &= op.apply(&[rep])? == value;
        t.record(ok, || {
            format!("D={} on {f}", multidiff::describe(&d, &crate::poly::default_names(2)))
        });
    }
    Ok(t.finish())
}

/// `(C∘ᵢC′)_{S₀} = C_{S₀}∘ᵢC′_{S₀}`, compared on random fraction
/// arguments and on the localized coordinate forms.
pub fn functoriality(ctx: &VerifyContext, pairs: usize) -> Result<SuiteResult> {
    let mut rng = ctx.rng(4);
    let mut t = Tally::new("functoriality", "pairs", ctx.trunc);
    for i in 0..pairs {
        let (rank, inner_rank) = match i % 3 {
            0 => (1, 1),
            1 => (2, 1),
            _ => (2, 2),
        };
        let outer = random::operator(&mut rng, rank, 2, 2, 1, 2);
        let inner = random::operator(&mut rng, inner_rank, 2, 2, 1, 2);
        let slot = rng.gen_range(1..=rank);
        let composed = outer.compose_at(&inner, slot)?;
        let lc = LocalizedOp::new(composed.clone(), &ctx.sx)?;
        let lo = LocalizedOp::new(outer.clone(), &ctx.sx)?;
        let li = LocalizedOp::new(inner.clone(), &ctx.sx)?;
        let mut ok = lc
            .coordinate_form()
            .same_as(&lo.coordinate_form().compose_at(&li.coordinate_form(), slot)?);
        for _ in 0..3 {
            let args: Vec<LocalFrac> = (0..composed.rank())
                .map(|_| random_fraction(&mut rng, &ctx.sx, 2))
                .collect();
            let direct = lc.apply(&args)?;
            let inner_args = &args[slot - 1..slot - 1 + inner_rank];
            let mut outer_args = args[..slot - 1].to_vec();
            outer_args.push(li.apply(inner_args)?);
            outer_args.extend_from_slice(&args[slot - 1 + inner_rank..]);
            ok &= lo.apply(&outer_args)? == direct;
        }
        t.record(ok, || format!("pair {i} at slot {slot}"));
    }
    Ok(t.finish())
}

/// `η(f⋆g) = η(f) ⋆_{S₀} η(g)` on random series.
pub fn morphism(ctx: &VerifyContext, pairs: usize) -> Result<SuiteResult> {
    let mut rng = ctx.rng(5);
    let mut t = Tally::new("morphism", "pairs", ctx.trunc);
    let l = localize::localize_star(&ctx.star, &ctx.sx)?;
    for _ in 0..pairs {
        let f = random::series(&mut rng, 2, 2, ctx.trunc);
        let g = random::series(&mut rng, 2, 2, ctx.trunc);
        let lhs = l.eta(&ctx.star.star_mul(&f, &g)?);
        let rhs = l.star_mul(&l.eta(&f), &l.eta(&g))?;
        t.record(lhs == rhs, || format!("f={f} g={g}"));
    }
    Ok(t.finish())
}

pub fn counterexample(ctx: &VerifyContext, m_max: u32, trials: usize) -> Result<SuiteResult> {
    let mut rng = ctx.rng(6);
    let report = orelab::counterexample_check(m_max, trials, &mut rng)?;
    let mut t = Tally::new("counterexample", "cells", m_max as usize);
    for c in &report.cells {
        t.record(c.passed, || {
            format!(
                "m={} trial={} right={} left={} formula_agrees={}",
                c.m, c.trial, c.right_value, c.left_value, c.formula_agrees
            )
        });
    }
    Ok(t.finish())
}

/// The hand witness for `(p, x)` on both sides, then random `r` of degree
/// ≤ 2 against `s = xʲ`, `j ≤ 2`, with `d = deg r + 2`.
pub fn ore(ctx: &VerifyContext) -> Result<SuiteResult> {
    let mut rng = ctx.rng(7);
    let k = ctx.trunc.min(4);
    let star = StarProduct::standard(k);
    let mut t = Tally::new("ore", "queries", k);
    let x = MultiPoly::var(2, X);
    let p = MultiPoly::var(2, star::P);
    for side in [Side::Right, Side::Left] {
        let q = OreQuery::new(
            star.clone(),
            Arc::clone(&ctx.sx),
            constant(p.clone(), k),
            constant(x.clone(), k),
            side,
            2,
            3,
        )?;
        let found = matches!(orelab::ore_search(&q)?, OreOutcome::Witness(ref w) if w.residual.is_zero());
        t.record(found, || format!("(p, x) on the {side:?} side"));
    }
    for j in 0..=2u32 {
        for _ in 0..2 {
            let r = random::nonzero_poly(&mut rng, 2, 2, 3);
            let deg = r.total_degree().unwrap_or(0);
            let q = OreQuery::new(
                star.clone(),
                Arc::clone(&ctx.sx),
                constant(r.clone(), k),
                constant(x.pow(j), k),
                Side::Right,
                deg + 2,
                deg + j,
            )?;
            let found = matches!(orelab::ore_search(&q)?, OreOutcome::Witness(ref w) if w.residual.is_zero());
            t.record(found, || format!("r={r} s=x^{j}"));
        }
    }
    Ok(t.finish())
}

pub fn antiautomorphism(ctx: &VerifyContext, max_degree: u32) -> Result<SuiteResult> {
    let k = ctx.trunc;
    let s = StarProduct::standard(k);
    let v = EquivTransform::v_transform(k);
    let monos = star::monomials_up_to(max_degree);
    let mut t = Tally::new("antiautomorphism", "pairs", k);
    let images: Vec<_> = monos
        .iter()
        .map(|f| v.apply(&constant(f.clone(), k)))
        .collect::<Result<_>>()?;
    for (f, vf) in monos.iter().zip(&images) {
        for (g, vg) in monos.iter().zip(&images) {
            let lhs = s.star_mul(vf, vg)?;
            let rhs = v.apply(&s.star_mul(&constant(g.clone(), k), &constant(f.clone(), k))?)?;
            t.record(lhs == rhs, || format!("f={f} g={g}"));
        }
    }
    Ok(t.finish())
}

pub fn pullout(ctx: &VerifyContext, samples: usize) -> Result<SuiteResult> {
    let mut rng = ctx.rng(8);
    let mut t = Tally::new("pullout", "cases", ctx.trunc);
    for _ in 0..samples {
        let d = random::operator(&mut rng, 1, 2, 3, 2, 3);
        let a = random::nonzero_poly(&mut rng, 2, 2, 2);
        let k = d.order(1)?;
        let n = k + rng.gen_range(0..=3);
        let m = random::poly(&mut rng, 2, 2, 3);
        let res = multidiff::pullout(&d, &a, n, &m)?;
        t.record(res.check(), || format!("a={a} n={n} m={m}"));
    }
    Ok(t.finish())
}

/// A deterministic corpus of rank-1 operators of order 1 to 3.
pub fn order_corpus(seed: u64, size: usize) -> Vec<MultiDiffOp<MultiPoly>> {
    let mut rng = random::rng(seed ^ 0x0bad_cafe);
    let mut out = Vec::with_capacity(size);
    while out.len() < size {
        let d = random::operator(&mut rng, 1, 2, 3, 2, 3);
        if d.order(1).is_ok_and(|k| k >= 1) {
            out.push(d);
        }
    }
    out
}

/// `ad_test` certifies the syntactic order (with a sharpness witness) and
/// refutes one less.
pub fn order(ctx: &VerifyContext, size: usize) -> Result<SuiteResult> {
    let mut t = Tally::new("order", "operators", ctx.trunc);
    let probes = multidiff::coordinate_probes(&MultiPoly::one(2));
    for d in order_corpus(ctx.seed, size) {
        let k = d.order(1)?;
        let certified = matches!(
            multidiff::ad_test(&d, k, &probes)?,
            AdOutcome::Certified(ref c) if c.sharpness.is_some()
        );
        let refuted = !multidiff::ad_test(&d, k - 1, &probes)?.is_certified();
        t.record(certified && refuted, || {
            multidiff::describe(&d, &crate::poly::default_names(2))
        });
    }
    Ok(t.finish())
}

/// Antisymmetry, Leibniz and Jacobi for the bracket, the commutator
/// derivation rule, and invariance of the bracket under a random gauge.
pub fn bracket(ctx: &VerifyContext, triples: usize) -> Result<SuiteResult> {
    let mut rng = ctx.rng(9);
    let mut t = Tally::new("bracket", "triples", ctx.trunc);
    let s = &ctx.star;
    let k = ctx.trunc.min(3);
    let gauge_ops: Vec<MultiDiffOp<MultiPoly>> = (0..=k)
        .map(|i| {
            if i == 0 {
                MultiDiffOp::multiplication(MultiPoly::one(2))
            } else {
                random_gauge_term(&mut rng)
            }
        })
        .collect();
    let gauged = gauge_transform(&s.truncated(k), &EquivTransform::new(gauge_ops, false)?)?;
    let sk = s.truncated(k);
    for _ in 0..triples {
        let [f, g, h] = [0; 3].map(|_| random::poly(&mut rng, 2, 3, 3));
        let br = |a: &MultiPoly, b: &MultiPoly| s.poisson_bracket(a, b);
        let mut ok = br(&f, &g)? == br(&g, &f)?.neg();
        ok &= br(&f, &(&g * &h))? == &(&br(&f, &g)? * &h) + &(&g * &br(&f, &h)?);
        let jacobi = &(&br(&f, &br(&g, &h)?)? + &br(&g, &br(&h, &f)?)?) + &br(&h, &br(&f, &g)?)?;
        ok &= jacobi.is_zero();
        ok &= gauged.poisson_bracket(&f, &g)? == br(&f, &g)?;
        let [a, b, c] = [&f, &g, &h].map(|e| constant(e.clone(), k));
        let lhs = sk.star_commutator(&a, &sk.star_mul(&b, &c)?)?;
        let rhs = sk
            .star_mul(&sk.star_commutator(&a, &b)?, &c)?
            .add(&sk.star_mul(&b, &sk.star_commutator(&a, &c)?)?)?;
        ok &= lhs == rhs;
        t.record(ok, || format!("f={f} g={g} h={h}"));
    }
    Ok(t.finish())
}

/// A random rank-1 operator that kills constants.
fn random_gauge_term<R: Rng>(rng: &mut R) -> MultiDiffOp<MultiPoly> {
    loop {
        let d = random::operator(rng, 1, 2, 2, 1, 2);
        let terms: Vec<_> = d
            .terms()
            .filter(|(_, a)| !a[0].is_one())
            .map(|(c, a)| (c.clone(), a.to_vec()))
            .collect();
        let d = MultiDiffOp::from_terms(1, 2, terms).expect("subset of a valid operator");
        if !d.is_zero() && d.apply(&[MultiPoly::one(2)]).is_ok_and(|v| v.is_zero()) {
            return d;
        }
    }
}

/// Runs every suite in [`SUITES`] order.
pub fn run_all(ctx: &VerifyContext) -> Result<Vec<SuiteResult>> {
    SUITES.iter().map(|s| run(s, ctx)).collect()
}
