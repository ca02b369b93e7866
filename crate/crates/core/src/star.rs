//! Star products `f ⋆ g = Σ λᵏ C_k(f, g)` given by bidifferential operators,
//! together with inversion, brackets and gauge equivalences.

use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::multidiff::{MultiDiffOp, OpJson};
use crate::poly::{Monomial, MultiPoly};
use crate::rational::{self, Rational};
use crate::ring::Coeff;
use crate::series::LambdaSeries;

/// Index of `x` in the built-in two-variable products.
pub const X: usize = 0;
/// Index of `p` in the built-in two-variable products.
pub const P: usize = 1;

/// A λ-bilinear product defined by its cochains `C_k`.
///
/// Implementors supply `C_k`; series multiplication, commutators and
/// inversion are derived from it.
pub trait StarAlgebra {
    type Elem: Coeff;

    /// Highest `k` for which `C_k` is known.
    fn trunc(&self) -> usize;

    fn cochain(&self, k: usize, f: &Self::Elem, g: &Self::Elem) -> Result<Self::Elem>;

    fn check_series(&self, u: &LambdaSeries<Self::Elem>, v: &LambdaSeries<Self::Elem>) -> Result<()> {
        if u.trunc() != v.trunc() {
            return Err(Error::TruncMismatch {
                left: u.trunc(),
                right: v.trunc(),
            });
        }
        if u.trunc() > self.trunc() {
            return Err(Error::StarTooShort {
                needed: u.trunc(),
                available: self.trunc(),
            });
        }
        Ok(())
    }

    /// `(u⋆v)_n = Σ_{k+i+j=n} C_k(uᵢ, vⱼ)`.
    fn star_mul(&self, u: &LambdaSeries<Self::Elem>, v: &LambdaSeries<Self::Elem>) -> Result<LambdaSeries<Self::Elem>> {
        self.check_series(u, v)?;
        let trunc = u.trunc();
        let zero = u.coeff(0).zero_like();
        let mut out = vec![zero; trunc + 1];
        for i in 0..=trunc {
            if u.coeff(i).is_zero() {
                continue;
            }
            for j in 0..=trunc - i {
                if v.coeff(j).is_zero() {
                    continue;
                }
                for k in 0..=trunc - i - j {
                    let c = self.cochain(k, u.coeff(i), v.coeff(j))?;
                    out[i + j + k] = out[i + j + k].add(&c);
                }
            }
        }
        Ok(LambdaSeries::new(out))
    }

    /// `[u, v]_⋆ = u⋆v − v⋆u`.
    fn star_commutator(
        &self,
        u: &LambdaSeries<Self::Elem>,
        v: &LambdaSeries<Self::Elem>,
    ) -> Result<LambdaSeries<Self::Elem>> {
        self.star_mul(u, v)?.sub(&self.star_mul(v, u)?)
    }

    /// `{f, g} = ½ (C₁(f,g) − C₁(g,f))`.
    fn poisson_bracket(&self, f: &Self::Elem, g: &Self::Elem) -> Result<Self::Elem> {
        if self.trunc() < 1 {
            return Err(Error::StarTooShort {
                needed: 1,
                available: self.trunc(),
            });
        }
        let half = rational::ratio(1, 2);
        Ok(self.cochain(1, f, g)?.sub(&self.cochain(1, g, f)?).scale(&half))
    }

    /// The bracket read off the commutator: `½ λ⁻¹ [f, g]_⋆ |_{λ=0}`.
    fn bracket_from_commutator(&self, f: &Self::Elem, g: &Self::Elem) -> Result<Self::Elem> {
        let u = LambdaSeries::constant(f.clone(), 1);
        let v = LambdaSeries::constant(g.clone(), 1);
        let c = self.star_commutator(&u, &v)?;
        Ok(c.coeff(1).scale(&rational::ratio(1, 2)))
    }

    /// Solves `g ⋆ ψ = 1` order by order: `ψ₀ = g₀⁻¹` and
    /// `ψ_{n} = −g₀⁻¹ F_n` where `F_n` collects every term of `(g⋆ψ)_n`
    /// except `g₀ψ_n`. The result is checked to be a two-sided inverse.
    fn star_inverse(&self, g: &LambdaSeries<Self::Elem>, g0_inverse: &Self::Elem) -> Result<LambdaSeries<Self::Elem>> {
        let trunc = g.trunc();
        if trunc > self.trunc() {
            return Err(Error::StarTooShort {
                needed: trunc,
                available: self.trunc(),
            });
        }
        if !g.coeff(0).mul(g0_inverse).is_one() {
            return Err(Error::NotUnit(format!("{:?}", g.coeff(0))));
        }
        let mut psi = vec![g0_inverse.clone()];
        for n in 1..=trunc {
            let mut f = g0_inverse.zero_like();
            for (q, psi_q) in psi.iter().enumerate() {
                for p in 0..=n - q {
                    let l = n - q - p;
                    f = f.add(&self.cochain(l, g.coeff(p), psi_q)?);
                }
            }
            psi.push(g0_inverse.mul(&f).neg());
        }
        let psi = LambdaSeries::new(psi);
        let one = g.one_like();
        if self.star_mul(g, &psi)? != one || self.star_mul(&psi, g)? != one {
            return Err(Error::StarAxiom("order-by-order inverse is not two-sided".into()));
        }
        Ok(psi)
    }

    /// Solves `ψ′ ⋆ g = 1` by the mirrored recursion. Agrees with
    /// [`StarAlgebra::star_inverse`] whenever the product is associative.
    fn star_left_inverse(
        &self,
        g: &LambdaSeries<Self::Elem>,
        g0_inverse: &Self::Elem,
    ) -> Result<LambdaSeries<Self::Elem>> {
        let trunc = g.trunc();
        if trunc > self.trunc() {
            return Err(Error::StarTooShort {
                needed: trunc,
                available: self.trunc(),
            });
        }
        if !g.coeff(0).mul(g0_inverse).is_one() {
            return Err(Error::NotUnit(format!("{:?}", g.coeff(0))));
        }
        let mut psi = vec![g0_inverse.clone()];
        for n in 1..=trunc {
            let mut f = g0_inverse.zero_like();
            for (p, psi_p) in psi.iter().enumerate() {
                for q in 0..=n - p {
                    let l = n - p - q;
                    f = f.add(&self.cochain(l, psi_p, g.coeff(q))?);
                }
            }
            psi.push(f.mul(g0_inverse).neg());
        }
        Ok(LambdaSeries::new(psi))
    }

    /// [`StarAlgebra::star_inverse`] with `g₀⁻¹` computed by the ring.
    fn star_inverse_auto(&self, g: &LambdaSeries<Self::Elem>) -> Result<LambdaSeries<Self::Elem>> {
        let inv = g
            .coeff(0)
            .unit_inverse()
            .ok_or_else(|| Error::NotUnit(format!("{:?}", g.coeff(0))))?;
        self.star_inverse(g, &inv)
    }
}

/// A star product with polynomial coefficients, `C₀` the pointwise product.
#[derive(Clone, Debug, PartialEq)]
pub struct StarProduct {
    nvars: usize,
    ops: Vec<MultiDiffOp<MultiPoly>>,
}

impl StarProduct {
    /// Builds and validates: `C₀(f,g) = fg`, `C_k(1,·) = C_k(·,1) = 0` for
    /// `k ≥ 1`, and the associativity identity as operator equalities.
    pub fn new(ops: Vec<MultiDiffOp<MultiPoly>>) -> Result<Self> {
        let s = Self::new_unchecked(ops)?;
        s.validate()?;
        Ok(s)
    }

    /// Shape checks only; the star-product axioms are not verified.
    pub fn new_unchecked(ops: Vec<MultiDiffOp<MultiPoly>>) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| Error::StarAxiom("no cochains given".into()))?;
        let nvars = first.nvars();
        for op in &ops {
            if op.rank() != 2 {
                return Err(Error::RankMismatch {
                    expected: 2,
                    got: op.rank(),
                });
            }
            if op.nvars() != nvars {
                return Err(Error::VarCountMismatch {
                    left: nvars,
                    right: op.nvars(),
                });
            }
        }
        Ok(StarProduct { nvars, ops })
    }

    /// `C_k(f,g) = (1/k!) ∂ᵏf/∂pᵏ · ∂ᵏg/∂xᵏ` on variables `(x, p)`.
    pub fn standard(trunc: usize) -> Self {
        let ops = (0..=trunc as u32)
            .map(|k| {
                let c = MultiPoly::constant(2, Rational::from_integer(rational::factorial(k)).recip());
                let mut dp = [0, 0];
                dp[P] = k;
                let mut dx = [0, 0];
                dx[X] = k;
                MultiDiffOp::from_terms(
                    2,
                    2,
                    vec![(c, vec![Monomial::from_exponents(&dp), Monomial::from_exponents(&dx)])],
                )
                .expect("well-formed standard cochain")
            })
            .collect();
        StarProduct { nvars: 2, ops }
    }

    /// The symmetrised product, obtained from the standard one by the gauge
    /// transformation `exp(λΔ/2)` with `Δ = ∂²/∂x∂p`.
    pub fn moyal(trunc: usize) -> Result<Self> {
        let t = EquivTransform::exp_laplacian(rational::ratio(1, 2), trunc);
        gauge_transform(&Self::standard(trunc), &t)
    }

    pub fn builtin(name: &str, trunc: usize) -> Result<Self> {
        match name {
            "standard" => Ok(Self::standard(trunc)),
            "moyal" => Self::moyal(trunc),
            _ => Err(Error::Unknown {
                kind: "star product",
                name: name.to_string(),
            }),
        }
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn ops(&self) -> &[MultiDiffOp<MultiPoly>] {
        &self.ops
    }

    /// Same product with fewer cochains.
    pub fn truncated(&self, trunc: usize) -> Self {
        StarProduct {
            nvars: self.nvars,
            ops: self.ops[..=trunc.min(self.ops.len() - 1)].to_vec(),
        }
    }

    /// `Σ_{l=0}^{k} (C_l ∘₁ C_{k−l} − C_l ∘₂ C_{k−l})` as a rank-3 operator.
    pub fn associativity_defect(&self, k: usize) -> Result<MultiDiffOp<MultiPoly>> {
        let mut acc = MultiDiffOp::zero(3, self.nvars);
        for l in 0..=k {
            let first = self.ops[l].compose_at(&self.ops[k - l], 1)?;
            let second = self.ops[l].compose_at(&self.ops[k - l], 2)?;
            acc = acc.add(&first)?.sub(&second)?;
        }
        Ok(acc)
    }

    pub fn validate(&self) -> Result<()> {
        let one = MultiPoly::one(self.nvars);
        if !self.ops[0].same_as(&MultiDiffOp::pointwise_product(one)) {
            return Err(Error::StarAxiom("C_0 is not the pointwise product".into()));
        }
        for (k, op) in self.ops.iter().enumerate().skip(1) {
            if op.terms().any(|(_, a)| a[0].is_one() || a[1].is_one()) {
                return Err(Error::StarAxiom(format!("C_{k} does not vanish on constants")));
            }
        }
        for k in 0..self.ops.len() {
            if !self.associativity_defect(k)?.is_zero() {
                return Err(Error::StarAxiom(format!("associativity fails at order {k}")));
            }
        }
        Ok(())
    }
}

impl StarAlgebra for StarProduct {
    type Elem = MultiPoly;

    fn trunc(&self) -> usize {
        self.ops.len() - 1
    }

    fn cochain(&self, k: usize, f: &MultiPoly, g: &MultiPoly) -> Result<MultiPoly> {
        let op = self.ops.get(k).ok_or(Error::StarTooShort {
            needed: k,
            available: self.ops.len() - 1,
        })?;
        op.apply(&[f.clone(), g.clone()])
    }
}

/// `T = id + Σ λᵏ T_k` with `T(1) = 1`, optionally followed by the λ-sign
/// flip (`V = L ∘ T`).
#[derive(Clone, Debug, PartialEq)]
pub struct EquivTransform {
    ops: Vec<MultiDiffOp<MultiPoly>>,
    anti: bool,
}

impl EquivTransform {
    pub fn new(ops: Vec<MultiDiffOp<MultiPoly>>, anti: bool) -> Result<Self> {
        let first = ops
            .first()
            .ok_or_else(|| Error::InvalidTransform("no operators given".into()))?;
        let nvars = first.nvars();
        if !first.same_as(&MultiDiffOp::multiplication(MultiPoly::one(nvars))) {
            return Err(Error::InvalidTransform("T_0 must be the identity".into()));
        }
        for (k, op) in ops.iter().enumerate().skip(1) {
            if op.rank() != 1 || op.nvars() != nvars {
                return Err(Error::InvalidTransform(format!("T_{k} has the wrong shape")));
            }
            if !op.apply(&[MultiPoly::one(nvars)])?.is_zero() {
                return Err(Error::InvalidTransform(format!("T_{k}(1) != 0, so T(1) != 1")));
            }
        }
        Ok(EquivTransform { ops, anti })
    }

    pub fn identity(nvars: usize, trunc: usize) -> Self {
        let mut ops = vec![MultiDiffOp::multiplication(MultiPoly::one(nvars))];
        ops.extend((0..trunc).map(|_| MultiDiffOp::zero(1, nvars)));
        EquivTransform { ops, anti: false }
    }

    /// `exp(c λ Δ)` on `(x, p)`, `Δ = ∂²/∂x∂p`: `T_k = cᵏ Δᵏ / k!`.
    pub fn exp_laplacian(c: Rational, trunc: usize) -> Self {
        let ops = (0..=trunc as u32)
            .map(|k| {
                let coeff = num_traits::pow(c.clone(), k as usize) / Rational::from_integer(rational::factorial(k));
                MultiDiffOp::derivative(MultiPoly::constant(2, coeff), Monomial::from_exponents(&[k, k]))
            })
            .collect();
        EquivTransform { ops, anti: false }
    }

    /// `V = L ∘ exp(−λΔ)`, the anti-automorphism of the standard product.
    pub fn v_transform(trunc: usize) -> Self {
        let mut t = Self::exp_laplacian(-Rational::one(), trunc);
        t.anti = true;
        t
    }

    pub fn trunc(&self) -> usize {
        self.ops.len() - 1
    }

    pub fn ops(&self) -> &[MultiDiffOp<MultiPoly>] {
        &self.ops
    }

    pub fn is_anti(&self) -> bool {
        self.anti
    }

    fn apply_ops(ops: &[MultiDiffOp<MultiPoly>], u: &LambdaSeries<MultiPoly>) -> Result<LambdaSeries<MultiPoly>> {
        let trunc = u.trunc();
        if trunc >= ops.len() {
            return Err(Error::StarTooShort {
                needed: trunc,
                available: ops.len() - 1,
            });
        }
        let mut out = Vec::with_capacity(trunc + 1);
        for n in 0..=trunc {
            let mut acc = MultiPoly::zero(u.coeff(0).nvars());
            for (k, op) in ops.iter().enumerate().take(n + 1) {
                if !u.coeff(n - k).is_zero() {
                    acc = &acc + &op.apply(std::slice::from_ref(u.coeff(n - k)))?;
                }
            }
            out.push(acc);
        }
        Ok(LambdaSeries::new(out))
    }

    pub fn apply(&self, u: &LambdaSeries<MultiPoly>) -> Result<LambdaSeries<MultiPoly>> {
        let t = Self::apply_ops(&self.ops, u)?;
        Ok(if self.anti { t.lambda_flip() } else { t })
    }

    /// Operators of `T⁻¹` (ignoring the flip): `U₀ = id`,
    /// `U_n = −Σ_{j=1}^{n} T_j ∘ U_{n−j}`.
    pub fn inverse_ops(&self) -> Result<Vec<MultiDiffOp<MultiPoly>>> {
        let mut inv: Vec<MultiDiffOp<MultiPoly>> = vec![self.ops[0].clone()];
        for n in 1..self.ops.len() {
            let mut acc = MultiDiffOp::zero(1, self.ops[0].nvars());
            for j in 1..=n {
                acc = acc.add(&self.ops[j].compose_at(&inv[n - j], 1)?)?;
            }
            inv.push(acc.neg());
        }
        Ok(inv)
    }

    /// The inverse map: `T⁻¹`, or `T⁻¹ ∘ L` when the flip is present.
    pub fn inverse(&self) -> Result<InverseTransform> {
        Ok(InverseTransform {
            ops: self.inverse_ops()?,
            anti: self.anti,
        })
    }
}

/// Inverse of an [`EquivTransform`]; applies the flip first, if any.
#[derive(Clone, Debug, PartialEq)]
pub struct InverseTransform {
    ops: Vec<MultiDiffOp<MultiPoly>>,
    anti: bool,
}

impl InverseTransform {
    pub fn apply(&self, u: &LambdaSeries<MultiPoly>) -> Result<LambdaSeries<MultiPoly>> {
        let u = if self.anti { u.lambda_flip() } else { u.clone() };
        EquivTransform::apply_ops(&self.ops, &u)
    }
}

/// `f ⋆′ g = T⁻¹(T(f) ⋆ T(g))`, computed at the operator level:
/// `C′_n = Σ_{j+m=n} U_j ∘₁ Σ_{a+b+c=m} (C_a ∘₁ T_b) ∘₂ T_c`.
pub fn gauge_transform(s: &StarProduct, t: &EquivTransform) -> Result<StarProduct> {
    if t.anti {
        return Err(Error::InvalidTransform(
            "gauge transformations must be λ-linear (no sign flip)".into(),
        ));
    }
    let trunc = s.trunc();
    if t.trunc() < trunc {
        return Err(Error::StarTooShort {
            needed: trunc,
            available: t.trunc(),
        });
    }
    let inv = t.inverse_ops()?;
    let nvars = s.nvars();
    let mut inner = Vec::with_capacity(trunc + 1);
    for m in 0..=trunc {
        let mut acc = MultiDiffOp::zero(2, nvars);
        for a in 0..=m {
            for b in 0..=m - a {
                let c = m - a - b;
                let op = s.ops[a].compose_at(&t.ops[b], 1)?.compose_at(&t.ops[c], 2)?;
                acc = acc.add(&op)?;
            }
        }
        inner.push(acc);
    }
    let mut ops = Vec::with_capacity(trunc + 1);
    for n in 0..=trunc {
        let mut acc = MultiDiffOp::zero(2, nvars);
        for j in 0..=n {
            acc = acc.add(&inv[j].compose_at(&inner[n - j], 1)?)?;
        }
        ops.push(acc);
    }
    StarProduct::new(ops)
}

/// All monomials in `(x, p)` of total degree at most `d`.
pub fn monomials_up_to(d: u32) -> Vec<MultiPoly> {
    let mut out = Vec::new();
    for total in 0..=d {
        for i in 0..=total {
            out.push(MultiPoly::monomial(
                2,
                Monomial::from_exponents(&[i, total - i]),
                Rational::one(),
            ));
        }
    }
    out
}

/// Checks `V(f) ⋆ V(g) = V(g ⋆ f)` for the standard product and all
/// monomials `f, g` of degree at most `max_degree`.
pub fn check_v_antiautomorphism(trunc: usize, max_degree: u32) -> Result<bool> {
    let s = StarProduct::standard(trunc);
    let v = EquivTransform::v_transform(trunc);
    let monos = monomials_up_to(max_degree);
    let images: Vec<_> = monos
        .iter()
        .map(|f| v.apply(&LambdaSeries::constant(f.clone(), trunc)))
        .collect::<Result<_>>()?;
    for (f, vf) in monos.iter().zip(&images) {
        for (g, vg) in monos.iter().zip(&images) {
            let lhs = s.star_mul(vf, vg)?;
            let gf = s.star_mul(
                &LambdaSeries::constant(g.clone(), trunc),
                &LambdaSeries::constant(f.clone(), trunc),
            )?;
            if lhs != v.apply(&gf)? {
                return Ok(false);
            }
        }
    }
    Ok(true)
}

/// JSON star-product format.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StarJson {
    pub vars: Vec<String>,
    pub trunc: usize,
    pub ops: Vec<OpJson>,
}

impl StarJson {
    pub fn from_star(s: &StarProduct, vars: &[String]) -> Self {
        StarJson {
            vars: vars.to_vec(),
            trunc: s.trunc(),
            ops: s.ops.iter().map(|op| OpJson::from_op(op, vars)).collect(),
        }
    }

    pub fn to_star(&self) -> Result<StarProduct> {
        if self.ops.len() != self.trunc + 1 {
            return Err(Error::Json(format!(
                "star product with trunc {} needs {} operators, got {}",
                self.trunc,
                self.trunc + 1,
                self.ops.len()
            )));
        }
        let ops = self
            .ops
            .iter()
            .map(|o| {
                if o.vars != self.vars {
                    return Err(Error::Json("operator variables differ from the product's".into()));
                }
                o.to_op()
            })
            .collect::<Result<Vec<_>>>()?;
        StarProduct::new(ops)
    }
}
