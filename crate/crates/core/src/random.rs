//! Seeded generators for random test objects.

use std::sync::Arc;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::frac::{LocalFrac, MultSetSpec, SetMode};
use crate::multidiff::MultiDiffOp;
use crate::poly::{Monomial, MultiPoly};
use crate::rational::{ratio, Rational};
use crate::series::LambdaSeries;

pub type Rng64 = ChaCha8Rng;

pub fn rng(seed: u64) -> Rng64 {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A nonzero rational `n/d` with `|n| ≤ 5`, `1 ≤ d ≤ 3`.
pub fn coeff<R: Rng>(rng: &mut R) -> Rational {
    loop {
        let n = rng.gen_range(-5..=5);
        if n != 0 {
            return ratio(n, rng.gen_range(1..=3));
        }
    }
}

pub fn exponents<R: Rng>(rng: &mut R, nvars: usize, max_deg: u32) -> Monomial {
    let deg = rng.gen_range(0..=max_deg);
    let mut e = vec![0; nvars];
    for _ in 0..deg {
        e[rng.gen_range(0..nvars)] += 1;
    }
    Monomial::from_exponents(&e)
}

/// Up to `max_terms` random terms of total degree at most `max_deg`.
pub fn poly<R: Rng>(rng: &mut R, nvars: usize, max_deg: u32, max_terms: usize) -> MultiPoly {
    let n = rng.gen_range(1..=max_terms.max(1));
    MultiPoly::from_terms(nvars, (0..n).map(|_| (exponents(rng, nvars, max_deg), coeff(rng))))
}

pub fn nonzero_poly<R: Rng>(rng: &mut R, nvars: usize, max_deg: u32, max_terms: usize) -> MultiPoly {
    loop {
        let p = poly(rng, nvars, max_deg, max_terms);
        if !p.is_zero() {
            return p;
        }
    }
}

pub fn series<R: Rng>(rng: &mut R, nvars: usize, max_deg: u32, trunc: usize) -> LambdaSeries<MultiPoly> {
    LambdaSeries::new((0..=trunc).map(|_| poly(rng, nvars, max_deg, 3)).collect())
}

/// A rank-`rank` operator with per-slot order at most `max_order`.
pub fn operator<R: Rng>(
    rng: &mut R,
    rank: usize,
    nvars: usize,
    max_order: u32,
    coeff_deg: u32,
    max_terms: usize,
) -> MultiDiffOp<MultiPoly> {
    loop {
        let n = rng.gen_range(1..=max_terms.max(1));
        let terms: Vec<_> = (0..n)
            .map(|_| {
                let c = nonzero_poly(rng, nvars, coeff_deg, 2);
                let alphas = (0..rank).map(|_| exponents(rng, nvars, max_order)).collect();
                (c, alphas)
            })
            .collect();
        let op = MultiDiffOp::from_terms(rank, nvars, terms).expect("well-formed random operator");
        if !op.is_zero() {
            return op;
        }
    }
}

/// A random element of `S₀` of bounded size.
pub fn member<R: Rng>(rng: &mut R, set: &MultSetSpec, max_exp: u32) -> MultiPoly {
    let n = set.nvars();
    match set.mode() {
        SetMode::Generators(gens) => gens
            .iter()
            .filter(|g| g.as_constant().is_none())
            .fold(MultiPoly::one(n), |acc, g| &acc * &g.pow(rng.gen_range(0..=max_exp))),
        SetMode::PointLocal(base) => {
            let mut acc = MultiPoly::one(n);
            for _ in 0..rng.gen_range(0..=max_exp) {
                let mut f = MultiPoly::constant(n, coeff(rng));
                for (i, b) in base.iter().enumerate() {
                    let a = Rational::from_integer(rng.gen_range(-2..=2).into());
                    let shifted = &MultiPoly::var(n, i) - &MultiPoly::constant(n, b.clone());
                    f = &f + &shifted.scale(&a);
                }
                acc = &acc * &f;
            }
            acc
        }
    }
}

pub fn fraction<R: Rng>(rng: &mut R, set: &Arc<MultSetSpec>, num_deg: u32, max_exp: u32) -> LocalFrac {
    let m = poly(rng, set.nvars(), num_deg, 3);
    let s = member(rng, set, max_exp);
    LocalFrac::new(m, s, set).expect("generated denominators are members")
}
