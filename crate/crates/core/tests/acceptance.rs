//! One line per acceptance criterion; exits nonzero if any criterion fails.

use std::sync::Arc;
use std::time::{Duration, Instant};

use starloc::localize::{self, LocalizedOp};
use starloc::orelab::{self, OreOutcome, OreQuery, Side};
use starloc::rational::{factorial, int, Rational};
use starloc::star::{P, X};
use starloc::verify::{self, VerifyContext};
use starloc::{LambdaSeries, LocalFrac, MultiDiffOp, MultiPoly, StarAlgebra, StarProduct};

const K: usize = 6;
const SEED: u64 = 2024;

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    ok: bool,
    detail: String,
}

fn outcome(ok: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        ok,
        detail: detail.into(),
    }
}

fn constant(f: MultiPoly, k: usize) -> LambdaSeries<MultiPoly> {
    LambdaSeries::constant(f, k)
}

fn ctx() -> VerifyContext {
    VerifyContext::standard(K, SEED)
}

/// `Σ_k λᵏ/k! ∂_pᵏf ∂_xᵏg`, written out directly.
fn standard_closed_form(f: &MultiPoly, g: &MultiPoly, k: usize) -> LambdaSeries<MultiPoly> {
    LambdaSeries::new(
        (0..=k as u32)
            .map(|i| {
                let c = Rational::new(1.into(), factorial(i));
                (&f.partial(P, i) * &g.partial(X, i)).scale(&c)
            })
            .collect(),
    )
}

fn c1_associativity() -> Outcome {
    let start = Instant::now();
    let ctx = ctx();
    let ops = verify::operator_associativity(&ctx).unwrap();
    let triples = verify::associativity(&ctx, 100).unwrap();
    let mut rng = starloc::random::rng(SEED);
    let mut closed = true;
    for _ in 0..50 {
        let f = starloc::random::poly(&mut rng, 2, 3, 4);
        let g = starloc::random::poly(&mut rng, 2, 3, 4);
        closed &= ctx
            .star
            .star_mul(&constant(f.clone(), K), &constant(g.clone(), K))
            .unwrap()
            == standard_closed_form(&f, &g, K);
    }
    let elapsed = start.elapsed();
    outcome(
        ops.ok() && triples.ok() && closed && elapsed < Duration::from_secs(10),
        format!("operator {ops}; triples {triples}; closed form {closed}; {elapsed:.2?}"),
    )
}

fn c2_inverse() -> Outcome {
    let ctx = ctx();
    let suite = verify::inverse(&ctx, 50).unwrap();
    let l = localize::localize_star(&ctx.star, &ctx.sx).unwrap();
    let x = MultiPoly::var(2, X);
    let psi = l.star_inverse_auto(&l.eta(&constant(x.clone(), K))).unwrap();
    let recip = LocalFrac::new(MultiPoly::one(2), x.clone(), &ctx.sx).unwrap();
    let x_ok = psi.coeff(0) == &recip && (1..=K).all(|i| psi.coeff(i).as_poly().is_some_and(|p| p.is_zero()));
    let g = LambdaSeries::from_prefix(vec![MultiPoly::one(2), x.clone()], K);
    let psi = ctx.star.star_inverse_auto(&g).unwrap();
    let geo_ok = (0..=K).all(|i| psi.coeff(i) == &x.pow(i as u32).scale(&int(if i % 2 == 0 { 1 } else { -1 })));
    outcome(
        suite.ok() && x_ok && geo_ok,
        format!("{suite}; 1/x {x_ok}; geometric {geo_ok}"),
    )
}

/// `∂(n/d) = (n′d − nd′)/d²`, unreduced.
fn frac_partial((n, d): &(MultiPoly, MultiPoly), var: usize) -> (MultiPoly, MultiPoly) {
    (&(&n.partial(var, 1) * d) - &(n * &d.partial(var, 1)), d * d)
}

/// Applies a rank-1 operator to `m/s` with the quotient rule only.
fn quotient_rule_apply(d: &MultiDiffOp<MultiPoly>, m: &MultiPoly, s: &MultiPoly) -> (MultiPoly, MultiPoly) {
    let mut acc = (MultiPoly::zero(2), MultiPoly::one(2));
    for (c, alphas) in d.terms() {
        let mut f = (m.clone(), s.clone());
        for (var, &e) in alphas[0].exponents().iter().enumerate() {
            for _ in 0..e {
                f = frac_partial(&f, var);
            }
        }
        let term = (c * &f.0, f.1);
        acc = (&(&acc.0 * &term.1) + &(&term.0 * &acc.1), &acc.1 * &term.1);
    }
    acc
}

fn c3_vezzosi() -> Outcome {
    let ctx = ctx();
    let suite = verify::vezzosi(&ctx, 100).unwrap();
    let mut rng = starloc::random::rng(SEED ^ 3);
    let mut agree = 0;
    for _ in 0..100 {
        let d = starloc::random::operator(&mut rng, 1, 2, 3, 2, 3);
        let f = verify::random_fraction(&mut rng, &ctx.sx, 3);
        let v = LocalizedOp::new(d.clone(), &ctx.sx)
            .unwrap()
            .apply(std::slice::from_ref(&f))
            .unwrap();
        let (n, den) = quotient_rule_apply(&d, f.num(), f.den());
        if (v.num() * &den) == (&n * v.den()) {
            agree += 1;
        }
    }
    outcome(
        suite.ok() && agree == 100,
        format!("{suite}; independent quotient rule {agree}/100"),
    )
}

fn c4_functoriality() -> Outcome {
    let suite = verify::functoriality(&ctx(), 20).unwrap();
    outcome(suite.ok(), suite.to_string())
}

fn c5_morphism() -> Outcome {
    let ctx = ctx();
    let suite = verify::morphism(&ctx, 100).unwrap();
    let l = localize::localize_star(&ctx.star, &ctx.sx).unwrap();
    let x = constant(MultiPoly::var(2, X), K);
    let p = constant(MultiPoly::var(2, P), K);
    let px = l.star_mul(&l.eta(&p), &l.eta(&x)).unwrap();
    let hand = l.eta(&LambdaSeries::from_prefix(
        vec![&MultiPoly::var(2, X) * &MultiPoly::var(2, P), MultiPoly::one(2)],
        K,
    ));
    outcome(
        suite.ok() && px == hand,
        format!("{suite}; p*x = px + L {}", px == hand),
    )
}

fn c6_counterexample() -> Outcome {
    let start = Instant::now();
    let mut rng = starloc::random::rng(SEED ^ 6);
    let report = orelab::counterexample_check(4, 20, &mut rng).unwrap();
    let elapsed = start.elapsed();
    let cells = report.cells.len();
    let right = report.cells.iter().filter(|c| c.right_value == "1").count();
    let left = report.cells.iter().filter(|c| c.left_value == "1").count();
    let formula = report.cells.iter().filter(|c| c.formula_agrees).count();
    let ms: std::collections::BTreeSet<u32> = report.cells.iter().map(|c| c.m).collect();
    outcome(
        report.passed
            && cells == 5 * 20
            && right == cells
            && left == cells
            && formula == cells
            && ms == (0..=4).collect()
            && elapsed < Duration::from_secs(30),
        format!("right {right}/{cells}, left {left}/{cells}, closed formula {formula}/{cells}; {elapsed:.2?}"),
    )
}

fn c7_ore_witness() -> Outcome {
    let k = 4;
    let star = StarProduct::standard(k);
    let ctx = VerifyContext::new(star.clone(), SEED);
    let x = MultiPoly::var(2, X);
    let p = MultiPoly::var(2, P);
    let (r, s) = (constant(p.clone(), k), constant(x.clone(), k));
    let q = OreQuery::new(
        star.clone(),
        Arc::clone(&ctx.sx),
        r.clone(),
        s.clone(),
        Side::Right,
        2,
        3,
    )
    .unwrap();
    let w = match orelab::ore_search(&q).unwrap() {
        OreOutcome::Witness(w) => w,
        OreOutcome::Exhausted { .. } => return outcome(false, "search exhausted"),
    };
    let residual = star
        .star_mul(&r, &w.s_prime)
        .unwrap()
        .sub(&star.star_mul(&s, &w.r_prime).unwrap())
        .unwrap();
    let hand_s = constant(x.pow(2), k);
    let hand_r = LambdaSeries::from_prefix(vec![&x * &p, MultiPoly::constant(2, int(2))], k);
    let hand = star
        .star_mul(&r, &hand_s)
        .unwrap()
        .sub(&star.star_mul(&s, &hand_r).unwrap())
        .unwrap();
    let leading = w.s_prime.coeff(0) == &x.pow(2);
    outcome(
        residual.is_zero() && w.residual.is_zero() && hand.is_zero() && leading,
        {
            let names = ["x".to_string(), "p".to_string()];
            format!(
                "s' = {}; r' = {}; residual 0 {}",
                w.s_prime.display_with(&names),
                w.r_prime.display_with(&names),
                residual.is_zero()
            )
        },
    )
}

fn c8_antiautomorphism() -> Outcome {
    let suite = verify::antiautomorphism(&ctx(), 4).unwrap();
    outcome(suite.ok() && suite.total == 15 * 15, suite.to_string())
}

fn c9_pullout() -> Outcome {
    let suite = verify::pullout(&ctx(), 50).unwrap();
    outcome(suite.ok(), suite.to_string())
}

fn c10_order() -> Outcome {
    let corpus = verify::order_corpus(SEED, 30);
    let orders: Vec<u32> = corpus.iter().map(|d| d.order(1).unwrap()).collect();
    let suite = verify::order(&ctx(), 30).unwrap();
    let spread = (1..=3).filter(|k| orders.contains(k)).count();
    outcome(
        suite.ok() && corpus.len() == 30,
        format!("{suite}; orders 1..3 present: {spread}/3"),
    )
}

fn main() {
    let criteria: [Criterion; 10] = [
        ("standard product associativity", c1_associativity),
        ("star inversion over {x^n}", c2_inverse),
        ("binomial localization formula", c3_vezzosi),
        ("functoriality of localization", c4_functoriality),
        ("numerator morphism", c5_morphism),
        ("Ore counterexample coefficient", c6_counterexample),
        ("Ore witness for (p, x)", c7_ore_witness),
        ("anti-automorphism V", c8_antiautomorphism),
        ("pull-out lemma", c9_pullout),
        ("algebraic order test", c10_order),
    ];
    let mut failed = Vec::new();
    for (i, (name, run)) in criteria.iter().enumerate() {
        let o = run();
        let mark = if o.ok { "PASS" } else { "FAIL" };
        println!("criterion {}: {mark} {name} ({})", i + 1, o.detail);
        if !o.ok {
            failed.push(i + 1);
        }
    }
    if !failed.is_empty() {
        eprintln!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
