//! Level `-m` differential operators, truncated divided-power algebras,
//! Taylor series of connections, the PD morphism induced by a Frobenius
//! lift and the transition isomorphism between two lifts.
//!
//! Operators are kept in normal order `Σ_l c_l ∂^⟨l⟩` with
//! `∂^⟨l⟩(t^i) = l! C(i,l) p^{m|l|} t^{i-l}`. PD elements are finite sums
//! `Σ_k c_k ξ^[k]` with `ξ_i = τ_i / p^m`, truncated at total order `K`.

use std::collections::BTreeMap;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, ToPrimitive};
use serde::Serialize;

use crate::arith::{binom_int, factorial, factorial_val, pd_ordinary_power_coeff, pd_power_coeff, ModularInt, RingCtx};
use crate::connection::{basis_vector, section_is_zero, section_zero, Basis, Connection, Section};
use crate::error::{Error, Result};
use crate::laurent::{Exponent, FrobLift, LaurentPoly, PolyMatrix};

/// A multi-index in `N^d`.
pub type MultiIndex = Vec<u32>;

/// Total degree `|l|`.
pub fn total(l: &[u32]) -> u32 {
    l.iter().sum()
}

fn mi_add(a: &[u32], b: &[u32]) -> MultiIndex {
    a.iter().zip(b).map(|(x, y)| x + y).collect()
}

/// All multi-indices of length `d` with total degree at most `k`, in graded order.
pub fn multi_indices(d: usize, k: u32) -> Vec<MultiIndex> {
    let mut out = Vec::new();
    for deg in 0..=k {
        multi_indices_of_degree(d, deg, &mut Vec::new(), &mut out);
    }
    out
}

fn multi_indices_of_degree(d: usize, deg: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
    if prefix.len() + 1 == d {
        let mut v = prefix.clone();
        v.push(deg);
        out.push(v);
        return;
    }
    if d == 0 {
        if deg == 0 {
            out.push(Vec::new());
        }
        return;
    }
    for a in (0..=deg).rev() {
        prefix.push(a);
        multi_indices_of_degree(d, deg - a, prefix, out);
        prefix.pop();
    }
}

/// Sub-multi-indices `a' <= a` componentwise.
pub fn sub_indices(a: &[u32]) -> Vec<MultiIndex> {
    let mut out = vec![Vec::new()];
    for &x in a {
        out = out
            .into_iter()
            .flat_map(|pre: MultiIndex| {
                (0..=x).map(move |y| {
                    let mut v = pre.clone();
                    v.push(y);
                    v
                })
            })
            .collect();
    }
    out
}

fn mi_binom(a: &[u32], b: &[u32]) -> BigInt {
    a.iter().zip(b).fold(BigInt::one(), |acc, (x, y)| acc * binom_int(*x as i64, *y as u64))
}

/// `∂^⟨l⟩` applied to a polynomial at level `-m`.
pub fn divided_partial(f: &LaurentPoly, l: &[u32], m: u32) -> LaurentPoly {
    let ctx = f.ctx();
    let scale = ctx.p_pow(m.saturating_mul(total(l)));
    if scale.is_zero() {
        return LaurentPoly::zero(ctx, f.d());
    }
    let mut out = LaurentPoly::zero(ctx, f.d());
    for (e, c) in f.terms() {
        let mut coeff = BigInt::one();
        for (i, &li) in l.iter().enumerate() {
            for s in 0..li as i64 {
                coeff *= BigInt::from(e.0[i] - s);
            }
        }
        let shifted = Exponent(e.0.iter().zip(l).map(|(x, y)| x - *y as i64).collect());
        out.add_term(shifted, c.mul_ref(&ModularInt::from_bigint(ctx, &coeff)).mul_ref(&scale));
    }
    out
}

/// An element `Σ_l c_l ∂^⟨l⟩` of the level `-m` operator ring.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DiffOp {
    ctx: RingCtx,
    d: usize,
    m: u32,
    terms: BTreeMap<MultiIndex, LaurentPoly>,
}

impl DiffOp {
    /// The zero operator.
    pub fn zero(ctx: RingCtx, d: usize, m: u32) -> Self {
        DiffOp { ctx, d, m, terms: BTreeMap::new() }
    }

    /// The identity operator.
    pub fn one(ctx: RingCtx, d: usize, m: u32) -> Self {
        DiffOp::multiplication(&LaurentPoly::one(ctx, d), m)
    }

    /// Multiplication by `f`.
    pub fn multiplication(f: &LaurentPoly, m: u32) -> Self {
        let mut p = DiffOp::zero(f.ctx(), f.d(), m);
        p.add_term(vec![0; f.d()], f.clone());
        p
    }

    /// The basis operator `∂^⟨l⟩`.
    pub fn basis(ctx: RingCtx, d: usize, m: u32, l: &[u32]) -> Self {
        DiffOp::term(&LaurentPoly::one(ctx, d), m, l)
    }

    /// The operator `c ∂^⟨l⟩`.
    pub fn term(c: &LaurentPoly, m: u32, l: &[u32]) -> Self {
        assert_eq!(l.len(), c.d());
        let mut p = DiffOp::zero(c.ctx(), c.d(), m);
        p.add_term(l.to_vec(), c.clone());
        p
    }

    /// The coefficient context.
    pub fn ctx(&self) -> RingCtx {
        self.ctx
    }

    /// Number of variables.
    pub fn d(&self) -> usize {
        self.d
    }

    /// The level exponent.
    pub fn m(&self) -> u32 {
        self.m
    }

    /// The normal-ordered terms.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &LaurentPoly)> {
        self.terms.iter()
    }

    /// Whether the operator is zero.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Largest `|l|` with a nonzero coefficient.
    pub fn order(&self) -> u32 {
        self.terms.keys().map(|l| total(l)).max().unwrap_or(0)
    }

    fn add_term(&mut self, l: MultiIndex, c: LaurentPoly) {
        if c.is_zero() {
            return;
        }
        let entry = self.terms.entry(l.clone()).or_insert_with(|| LaurentPoly::zero(c.ctx(), c.d()));
        *entry = entry.add(&c);
        if entry.is_zero() {
            self.terms.remove(&l);
        }
    }

    fn check(&self, o: &Self) {
        assert!(self.ctx == o.ctx && self.d == o.d && self.m == o.m, "operators over different rings or levels");
    }

    /// Sum.
    pub fn add(&self, o: &Self) -> Self {
        self.check(o);
        let mut r = self.clone();
        for (l, c) in &o.terms {
            r.add_term(l.clone(), c.clone());
        }
        r
    }

    /// Left multiplication by a polynomial.
    pub fn left_mul(&self, f: &LaurentPoly) -> Self {
        let mut r = DiffOp::zero(self.ctx, self.d, self.m);
        for (l, c) in &self.terms {
            r.add_term(l.clone(), f.mul(c));
        }
        r
    }

    /// Applies the operator to a polynomial.
    pub fn apply(&self, f: &LaurentPoly) -> LaurentPoly {
        let mut out = LaurentPoly::zero(self.ctx, self.d);
        for (l, c) in &self.terms {
            out = out.add(&c.mul(&divided_partial(f, l, self.m)));
        }
        out
    }

    /// Normal-ordered product, rewriting `∂^⟨a⟩ q` by the Leibniz rule
    /// `∂^⟨a⟩ q = Σ_{a'+a''=a} C(a,a') ∂^⟨a'⟩(q) ∂^⟨a''⟩`.
    pub fn mul(&self, o: &Self) -> Self {
        self.check(o);
        let mut r = DiffOp::zero(self.ctx, self.d, self.m);
        for (a, ca) in &self.terms {
            for a1 in sub_indices(a) {
                let a2: MultiIndex = a.iter().zip(&a1).map(|(x, y)| x - y).collect();
                let bin = ModularInt::from_bigint(self.ctx, &mi_binom(a, &a1));
                if bin.is_zero() {
                    continue;
                }
                for (b, qb) in &o.terms {
                    let dq = divided_partial(qb, &a1, self.m);
                    if dq.is_zero() {
                        continue;
                    }
                    r.add_term(mi_add(&a2, b), ca.mul(&dq).scalar_mul(&bin));
                }
            }
        }
        r
    }

    /// The level map `ρ`: `∂^⟨l⟩_{-m} ↦ p^{(m-m')|l|} ∂^⟨l⟩_{-m'}`.
    pub fn level_change(&self, m2: u32) -> Result<Self> {
        if m2 > self.m {
            return Err(Error::LevelMismatch(format!("cannot change level from -{} to -{m2}", self.m)));
        }
        let mut r = DiffOp::zero(self.ctx, self.d, m2);
        for (l, c) in &self.terms {
            r.add_term(l.clone(), c.scalar_mul(&self.ctx.p_pow((self.m - m2) * total(l))));
        }
        Ok(r)
    }

    /// Action on a section of a connection of the same level, `∂^⟨l⟩ ↦ Π θ_i^{l_i}` in the `dt` basis.
    pub fn apply_section(&self, c: &Connection, v: &[LaurentPoly]) -> Result<Section> {
        if c.m() != self.m || c.ctx() != self.ctx || c.d() != self.d {
            return Err(Error::LevelMismatch("operator and connection differ in level or chart".into()));
        }
        let mut out = section_zero(self.ctx, self.d, c.rank());
        for (l, coeff) in &self.terms {
            let w = c.theta_power_apply(l, v, Basis::Dt)?;
            for (o, x) in out.iter_mut().zip(&w) {
                *o = o.add(&coeff.mul(x));
            }
        }
        Ok(out)
    }
}

/// A truncated element `Σ_k c_k ξ^[k]` of the level `-m` PD algebra, with
/// coefficients in `d` torus variables and `e` divided variables.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PDElement {
    ctx: RingCtx,
    d: usize,
    e: usize,
    m: u32,
    order: u32,
    terms: BTreeMap<MultiIndex, LaurentPoly>,
}

impl PDElement {
    /// The zero element with `e = d` divided variables.
    pub fn zero(ctx: RingCtx, d: usize, m: u32, order: u32) -> Self {
        PDElement::zero_with(ctx, d, d, m, order)
    }

    /// The zero element with an explicit number of divided variables.
    pub fn zero_with(ctx: RingCtx, d: usize, e: usize, m: u32, order: u32) -> Self {
        PDElement { ctx, d, e, m, order, terms: BTreeMap::new() }
    }

    /// The unit element.
    pub fn one(ctx: RingCtx, d: usize, m: u32, order: u32) -> Self {
        let mut x = PDElement::zero(ctx, d, m, order);
        x.add_term(vec![0; d], LaurentPoly::one(ctx, d));
        x
    }

    /// The generator `ξ_i = τ_i / p^m`.
    pub fn xi(ctx: RingCtx, d: usize, m: u32, order: u32, i: usize) -> Self {
        let mut k = vec![0; d];
        k[i] = 1;
        PDElement::monomial(LaurentPoly::one(ctx, d), k, m, order)
    }

    /// The element `c ξ^[k]` (zero if `|k|` exceeds the order).
    pub fn monomial(c: LaurentPoly, k: MultiIndex, m: u32, order: u32) -> Self {
        let mut x = PDElement::zero_with(c.ctx(), c.d(), k.len(), m, order);
        x.add_term(k, c);
        x
    }

    /// The coefficient context.
    pub fn ctx(&self) -> RingCtx {
        self.ctx
    }

    /// Number of torus variables of the coefficients.
    pub fn d(&self) -> usize {
        self.d
    }

    /// Number of divided variables.
    pub fn e(&self) -> usize {
        self.e
    }

    /// The level exponent.
    pub fn m(&self) -> u32 {
        self.m
    }

    /// The truncation order `K`.
    pub fn order(&self) -> u32 {
        self.order
    }

    /// The nonzero terms.
    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &LaurentPoly)> {
        self.terms.iter()
    }

    /// Coefficient of `ξ^[k]`.
    pub fn coeff(&self, k: &[u32]) -> LaurentPoly {
        self.terms.get(k).cloned().unwrap_or_else(|| LaurentPoly::zero(self.ctx, self.d))
    }

    /// Whether the element vanishes.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Adds `c ξ^[k]`, dropping it when `|k| > K`.
    pub fn add_term(&mut self, k: MultiIndex, c: LaurentPoly) {
        debug_assert_eq!(k.len(), self.e);
        if c.is_zero() || total(&k) > self.order {
            return;
        }
        let entry = self.terms.entry(k.clone()).or_insert_with(|| LaurentPoly::zero(c.ctx(), c.d()));
        *entry = entry.add(&c);
        if entry.is_zero() {
            self.terms.remove(&k);
        }
    }

    /// The same element with a new truncation order.
    pub fn truncate(&self, order: u32) -> Self {
        let mut x = PDElement { order, terms: BTreeMap::new(), ..self.clone() };
        for (k, c) in &self.terms {
            x.add_term(k.clone(), c.clone());
        }
        x
    }

    /// Sum.
    pub fn add(&self, o: &Self) -> Self {
        assert_eq!((self.ctx, self.d, self.e), (o.ctx, o.d, o.e));
        let mut r = self.truncate(self.order.min(o.order));
        for (k, c) in &o.terms {
            r.add_term(k.clone(), c.clone());
        }
        r
    }

    /// Difference.
    pub fn sub(&self, o: &Self) -> Self {
        self.add(&o.map_coeffs(|c| c.neg()))
    }

    /// Applies a map to every coefficient.
    pub fn map_coeffs(&self, f: impl Fn(&LaurentPoly) -> LaurentPoly) -> Self {
        let mut r = PDElement { terms: BTreeMap::new(), ..self.clone() };
        for (k, c) in &self.terms {
            r.add_term(k.clone(), f(c));
        }
        r
    }

    /// Product, using `ξ^[a] ξ^[b] = C(a+b, a) ξ^[a+b]`.
    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!((self.ctx, self.d, self.e), (o.ctx, o.d, o.e));
        let order = self.order.min(o.order);
        let mut r = PDElement { order, terms: BTreeMap::new(), ..self.clone() };
        for (a, ca) in &self.terms {
            for (b, cb) in &o.terms {
                if total(a) + total(b) > order {
                    continue;
                }
                let k = mi_add(a, b);
                let bin = ModularInt::from_bigint(self.ctx, &mi_binom(&k, a));
                if bin.is_zero() {
                    continue;
                }
                r.add_term(k, ca.mul(cb).scalar_mul(&bin));
            }
        }
        r
    }

    /// Ordinary power.
    pub fn pow(&self, j: u32) -> Self {
        let mut acc = PDElement::one_like(self);
        for _ in 0..j {
            acc = acc.mul(self);
        }
        acc
    }

    fn one_like(x: &Self) -> Self {
        let mut r = PDElement { terms: BTreeMap::new(), ..x.clone() };
        r.add_term(vec![0; x.e], LaurentPoly::one(x.ctx, x.d));
        r
    }

    /// The divided power `x^[j]` of an element of the PD ideal (zero constant part).
    pub fn divided_power(&self, j: u32) -> Result<Self> {
        if self.terms.contains_key(&vec![0; self.e]) {
            return Err(Error::Hypothesis("divided powers need an element of the PD ideal".into()));
        }
        let mut acc: Vec<PDElement> =
            (0..=j)
                .map(|i| {
                    if i == 0 {
                        PDElement::one_like(self)
                    } else {
                        PDElement { terms: BTreeMap::new(), ..self.clone() }
                    }
                })
                .collect();
        for (k, c) in &self.terms {
            let powers: Vec<PDElement> = (0..=j).map(|i| self.monomial_divided_power(c, k, i)).collect();
            let mut next: Vec<PDElement> = Vec::with_capacity(j as usize + 1);
            for jj in 0..=j {
                let mut s = PDElement { terms: BTreeMap::new(), ..self.clone() };
                for i in 0..=jj {
                    if powers[i as usize].is_zero() || acc[(jj - i) as usize].is_zero() {
                        continue;
                    }
                    s = s.add(&powers[i as usize].mul(&acc[(jj - i) as usize]));
                }
                next.push(s);
            }
            acc = next;
        }
        Ok(acc.pop().unwrap())
    }

    /// `(c ξ^[k])^[i] = c^i (ξ^[k])^[i]` with
    /// `(ξ^[k])^[i] = ((k_s i)!/(i!(k_s!)^i)) Π_{s'≠s} ((k_{s'} i)!/(k_{s'}!)^i) ξ^[ik]`.
    fn monomial_divided_power(&self, c: &LaurentPoly, k: &[u32], i: u32) -> PDElement {
        if i == 0 {
            return PDElement::one_like(self);
        }
        let ik: MultiIndex = k.iter().map(|x| x * i).collect();
        let mut r = PDElement { terms: BTreeMap::new(), ..self.clone() };
        if total(&ik) > self.order {
            return r;
        }
        let s = k.iter().position(|&x| x > 0).expect("nonconstant monomial");
        let mut coeff = pd_power_coeff(k[s] as u64, i as u64);
        for (t, &kt) in k.iter().enumerate() {
            if t != s && kt > 0 {
                coeff *= pd_ordinary_power_coeff(kt as u64, i as u64);
            }
        }
        let cm = ModularInt::from_biguint(self.ctx, &coeff);
        r.add_term(ik, c.pow(i as u64).scalar_mul(&cm));
        r
    }

    /// The comultiplication `δ(ξ_i) = ξ_i ⊗ 1 + 1 ⊗ ξ_i`, returned with `2e`
    /// divided variables (left factor first).
    pub fn comultiply(&self) -> Self {
        let mut r = PDElement::zero_with(self.ctx, self.d, 2 * self.e, self.m, self.order);
        for (k, c) in &self.terms {
            for a in sub_indices(k) {
                let b: MultiIndex = k.iter().zip(&a).map(|(x, y)| x - y).collect();
                let mut idx = a.clone();
                idx.extend(b);
                r.add_term(idx, c.clone());
            }
        }
        r
    }
}

/// A truncated Taylor series `Σ_{|k|≤K} θ^k(v) ξ^[k]` of a section.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TaylorSeries {
    /// The truncation order `K`.
    pub order: u32,
    /// `θ^k(v)` in the `dt` basis for every `|k| <= K`.
    pub coeffs: BTreeMap<MultiIndex, Section>,
    /// Whether every `θ^k(v)` with `|k| = K + 1` vanishes, so the series is exact.
    pub exact: bool,
}

impl TaylorSeries {
    /// The series as one PD element per component.
    pub fn components(&self, c: &Connection) -> Vec<PDElement> {
        (0..c.rank())
            .map(|j| {
                let mut x = PDElement::zero(c.ctx(), c.d(), c.m(), self.order);
                for (k, v) in &self.coeffs {
                    x.add_term(k.clone(), v[j].clone());
                }
                x
            })
            .collect()
    }
}

fn theta_layers(c: &Connection, v: &[LaurentPoly], order: u32) -> BTreeMap<MultiIndex, Section> {
    let d = c.d();
    let mut out: BTreeMap<MultiIndex, Section> = BTreeMap::new();
    out.insert(vec![0; d], v.to_vec());
    for k in multi_indices(d, order) {
        if total(&k) == 0 {
            continue;
        }
        let i = k.iter().rposition(|&x| x > 0).unwrap();
        let mut prev = k.clone();
        prev[i] -= 1;
        let base = &out[&prev];
        let w = if section_is_zero(base) { base.clone() } else { c.nabla(i, base, Basis::Dt) };
        out.insert(k, w);
    }
    out
}

/// The order-`K` Taylor series of a section (the stratification of `v`).
pub fn taylor_series(c: &Connection, v: &[LaurentPoly], order: u32) -> Result<TaylorSeries> {
    if !c.is_integrable() {
        return Err(Error::NotIntegrable);
    }
    if v.len() != c.rank() {
        return Err(Error::InvalidParameter("section length differs from rank".into()));
    }
    let mut all = theta_layers(c, v, order + 1);
    let exact = all.iter().filter(|(k, _)| total(k) == order + 1).all(|(_, s)| section_is_zero(s));
    all.retain(|k, _| total(k) <= order);
    Ok(TaylorSeries { order, coeffs: all, exact })
}

/// The Taylor series of `Σ_j f_j e_j` assembled by the Leibniz rule
/// `θ^k(f e) = Σ_{k'+k''=k} C(k,k') ∂^⟨k'⟩(f) θ^{k''}(e)` from the basis series.
pub fn taylor_series_leibniz(c: &Connection, f: &[LaurentPoly], order: u32) -> Result<TaylorSeries> {
    let basis: Vec<TaylorSeries> = (0..c.rank())
        .map(|j| taylor_series(c, &basis_vector(c.ctx(), c.d(), c.rank(), j), order))
        .collect::<Result<_>>()?;
    let mut coeffs = BTreeMap::new();
    for k in multi_indices(c.d(), order) {
        let mut acc = section_zero(c.ctx(), c.d(), c.rank());
        for k1 in sub_indices(&k) {
            let k2: MultiIndex = k.iter().zip(&k1).map(|(x, y)| x - y).collect();
            let bin = ModularInt::from_bigint(c.ctx(), &mi_binom(&k, &k1));
            for (j, fj) in f.iter().enumerate() {
                let df = divided_partial(fj, &k1, c.m()).scalar_mul(&bin);
                if df.is_zero() {
                    continue;
                }
                for (a, x) in acc.iter_mut().zip(&basis[j].coeffs[&k2]) {
                    *a = a.add(&df.mul(x));
                }
            }
        }
        coeffs.insert(k, acc);
    }
    let exact = basis.iter().all(|b| b.exact);
    Ok(TaylorSeries { order, coeffs, exact })
}

/// Outcome of a stratification identity check.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct IdentityCheck {
    /// Number of coefficient comparisons made.
    pub checked: usize,
    /// Multi-indices (as strings) where the two sides differ.
    pub failures: Vec<String>,
}

impl IdentityCheck {
    /// Whether every comparison agreed.
    pub fn holds(&self) -> bool {
        self.failures.is_empty()
    }
}

/// Compares `(T ⊗ id) T(v)` with `(id ⊗ δ) T(v)` at all orders `|a| + |b| <= K`.
pub fn cocycle_check(c: &Connection, v: &[LaurentPoly], order: u32) -> Result<IdentityCheck> {
    let t = taylor_series(c, v, order)?;
    let d = c.d();
    let deltas: Vec<PDElement> = t.components(c).iter().map(|x| x.comultiply()).collect();
    let mut checked = 0;
    let mut failures = Vec::new();
    for b in multi_indices(d, order) {
        let inner = theta_layers(c, &t.coeffs[&b], order - total(&b));
        for (a, lhs) in &inner {
            let mut idx = a.clone();
            idx.extend(b.iter().copied());
            let rhs: Section = deltas.iter().map(|x| x.coeff(&idx)).collect();
            checked += 1;
            if *lhs != rhs {
                failures.push(format!("{a:?}|{b:?}"));
            }
        }
    }
    Ok(IdentityCheck { checked, failures })
}

/// Checks that the closed-form inverse `x ⊗ 1 ↦ Σ_l (−1)^{|l|} ξ^[l] ⊗ ∂^⟨l⟩ x`
/// composes with the stratification to the identity on both sides, at order `K`.
pub fn stratification_inverse_check(c: &Connection, v: &[LaurentPoly], order: u32) -> Result<IdentityCheck> {
    let ctx = c.ctx();
    let d = c.d();
    let t = taylor_series(c, v, order)?;
    let mut checked = 0;
    let mut failures = Vec::new();
    for pass in 0..2 {
        // Both composites expand to Σ_{l+k=j} (−1)^{|l|} C(j,l) θ^k θ^l (v) ξ^[j]
        // for ε∘ε^{-1}, and with θ^l θ^k for ε^{-1}∘ε; the outer index is applied first.
        let mut result: BTreeMap<MultiIndex, Section> = BTreeMap::new();
        for outer in multi_indices(d, order) {
            let inner = theta_layers(c, &t.coeffs[&outer], order - total(&outer));
            for (k, w) in &inner {
                let j = mi_add(&outer, k);
                let signed = if pass == 0 { &outer } else { k };
                let sign = if total(signed).is_multiple_of(2) { 1 } else { -1 };
                let bin = BigInt::from(sign) * mi_binom(&j, &outer);
                let s = ModularInt::from_bigint(ctx, &bin);
                let entry = result.entry(j).or_insert_with(|| section_zero(ctx, d, c.rank()));
                for (a, x) in entry.iter_mut().zip(w) {
                    *a = a.add(&x.scalar_mul(&s));
                }
            }
        }
        for (j, s) in &result {
            checked += 1;
            let expected = if total(j) == 0 { v.to_vec() } else { section_zero(ctx, d, c.rank()) };
            if *s != expected {
                failures.push(format!("pass {pass} order {j:?}"));
            }
        }
    }
    Ok(IdentityCheck { checked, failures })
}

/// A ring map `t_i ↦ f_i(s)` from the chart of a connection to another torus.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RingMap {
    /// The images of the coordinates, all units of the source ring.
    pub images: Vec<LaurentPoly>,
}

impl RingMap {
    /// The map given by a Frobenius lift.
    pub fn from_lift(f: &FrobLift) -> Self {
        RingMap { images: f.images() }
    }

    /// Coefficient context of the images.
    pub fn ctx(&self) -> RingCtx {
        self.images[0].ctx()
    }

    /// Number of variables of the source torus.
    pub fn source_d(&self) -> usize {
        self.images[0].d()
    }

    /// Images reduced to a lower level.
    pub fn reduce_to(&self, ctx: RingCtx) -> Result<Self> {
        Ok(RingMap { images: self.images.iter().map(|f| f.reduce_to(ctx)).collect::<Result<_>>()? })
    }

    /// Least valuation of `f_i − g_i` over all coordinates (precision if equal).
    pub fn agreement(&self, o: &Self) -> u32 {
        self.images.iter().zip(&o.images).map(|(a, b)| a.sub(b).valuation()).min().unwrap_or(self.ctx().n())
    }
}

/// Pullback of a connection along a ring map: `Θ̃^Y_j = Σ_i f(Θ̃_i) (s_j∂_j f_i)/f_i`.
pub fn pullback(c: &Connection, f: &RingMap) -> Result<Connection> {
    if f.images.len() != c.d() {
        return Err(Error::ContextMismatch("ring map does not match the chart".into()));
    }
    let ctx = c.ctx();
    let fr = if f.ctx() == ctx { f.clone() } else { f.reduce_to(ctx)? };
    let d2 = fr.source_d();
    let inv: Vec<LaurentPoly> = fr.images.iter().map(|g| g.inverse()).collect::<Result<_>>()?;
    let subst: Vec<PolyMatrix> =
        c.theta().iter().map(|t| t.try_map(|x| x.substitute(&fr.images))).collect::<Result<_>>()?;
    let theta = (0..d2)
        .map(|j| {
            let mut acc = PolyMatrix::zero(ctx, d2, c.rank(), c.rank());
            for (i, s) in subst.iter().enumerate() {
                let w = fr.images[i].log_partial(j).mul(&inv[i]);
                if !w.is_zero() {
                    acc = acc.add(&s.scale(&w));
                }
            }
            acc
        })
        .collect();
    Connection::new(ctx, d2, c.m(), theta)
}

/// Precision needed on lifts so that `τ` can be computed up to order `k`
/// per coordinate at truncation `n` and level `m`.
pub fn tau_precision(p: u64, n: u32, m: u32, k: u32) -> u32 {
    n + m + factorial_val(k as u64, p) as u32
}

/// The transition matrix `τ_{f,f'}`, expressing `f'^*e_j` in the basis `f^*e`:
/// column `j` is `Σ_k ((f' − f)/p^m)^[k] f^*(θ^k e_j)`.
///
/// The lifts must agree modulo `p^{m+1}` and carry enough precision for the exact
/// divisions by `p^m` and `k!`; see [`tau_precision`].
pub fn tau_transition(c: &Connection, f: &RingMap, f2: &RingMap) -> Result<PolyMatrix> {
    let ctx = c.ctx();
    let (p, n, m) = (ctx.p(), ctx.n(), c.m());
    if f.images.len() != c.d() || f2.images.len() != c.d() || f.ctx() != f2.ctx() {
        return Err(Error::ContextMismatch("lifts do not match the chart".into()));
    }
    let hi = f.ctx();
    if hi.n() < n + m {
        return Err(Error::InvalidParameter("lifts need precision at least n + m".into()));
    }
    let agree = f.agreement(f2);
    if agree < m + 1 {
        return Err(Error::Hypothesis(format!("lifts agree only modulo p^{agree}")));
    }
    let d2 = f.source_d();
    // x_i = (f'_i − f_i)/p^m, kept at precision hi.n − m.
    let xs: Vec<LaurentPoly> =
        f.images.iter().zip(&f2.images).map(|(a, b)| b.sub(a).div_p_pow(m)).collect::<Result<_>>()?;
    let val: Vec<u32> = xs.iter().map(|x| x.valuation()).collect();
    // Past k_i the divided powers of x_i vanish modulo p^n for every larger exponent.
    let k_val: Vec<Option<u32>> = val
        .iter()
        .zip(&xs)
        .map(|(&v, x)| {
            if x.is_zero() || v >= n {
                return Some(1);
            }
            let slope = v as i64 * (p as i64 - 1) - 1;
            if slope <= 0 {
                return None;
            }
            let k = ((n as i64 * (p as i64 - 1) - 1) + slope - 1) / slope;
            Some(k.max(1) as u32)
        })
        .collect();
    let qn = if k_val.iter().any(|k| k.is_none()) { c.is_quasi_nilpotent()?.n() } else { None };
    if k_val.iter().any(|k| k.is_none()) && qn.is_none() {
        return Err(Error::BoundExceeded("τ series does not terminate within the certificate bound".into()));
    }
    let max_total = qn.unwrap_or(u32::MAX);
    let per_coord: Vec<u32> = k_val.iter().map(|k| k.unwrap_or(max_total)).collect();
    let need = per_coord.iter().map(|&k| tau_precision(p, n, m, k)).max().unwrap_or(n + m);
    if hi.n() < need {
        return Err(Error::InvalidParameter(format!("lifts need precision p^{need} for this τ series")));
    }
    // Divided powers x_i^[k] reduced to n.
    let mut xpow: Vec<Vec<LaurentPoly>> = Vec::with_capacity(c.d());
    for (i, x) in xs.iter().enumerate() {
        let kmax = per_coord[i].min(max_total);
        let mut list = vec![LaurentPoly::one(ctx, d2)];
        let mut pw = LaurentPoly::one(x.ctx(), d2);
        for k in 1..kmax {
            pw = pw.mul(x);
            let fk = factorial(k as u64);
            let v = factorial_val(k as u64, p) as u32;
            let unit = (&fk / BigUint::from(p).pow(v)).to_u64();
            let q = pw.div_p_pow(v)?;
            let unit = match unit {
                Some(u) => ModularInt::from_u64(q.ctx(), u),
                None => ModularInt::from_biguint(q.ctx(), &(&fk / BigUint::from(p).pow(v))),
            };
            list.push(q.scalar_mul(&unit.inv()?).reduce_to(ctx)?);
        }
        xpow.push(list);
    }
    let fr = f.reduce_to(ctx)?;
    let r = c.rank();
    let total_bound = per_coord.iter().map(|&k| k.saturating_sub(1)).sum::<u32>().min(max_total);
    let mut t = PolyMatrix::zero(ctx, d2, r, r);
    for j in 0..r {
        let layers = theta_layers(c, &basis_vector(ctx, c.d(), r, j), total_bound);
        let mut col = section_zero(ctx, d2, r);
        for (k, v) in &layers {
            if k.iter().enumerate().any(|(i, &ki)| ki as usize >= xpow[i].len()) || section_is_zero(v) {
                continue;
            }
            let mut w = LaurentPoly::one(ctx, d2);
            for (i, &ki) in k.iter().enumerate() {
                w = w.mul(&xpow[i][ki as usize]);
            }
            if w.is_zero() {
                continue;
            }
            for (a, x) in col.iter_mut().zip(v) {
                *a = a.add(&x.substitute(&fr.images)?.mul(&w));
            }
        }
        for (i, x) in col.into_iter().enumerate() {
            t.set(i, j, x);
        }
    }
    Ok(t)
}

/// The image `Φ^*(x)` of a level `-m` PD element on the target under the PD
/// morphism induced by a Frobenius lift, as a level `-(m-1)` element of the
/// given order on the source.
pub fn phi_star(x: &PDElement, lift: &FrobLift, out_order: u32) -> Result<PDElement> {
    let m = x.m();
    if m == 0 {
        return Err(Error::LevelMismatch("Φ^* needs m >= 1".into()));
    }
    if out_order > x.order() {
        return Err(Error::TruncationOverflow(format!(
            "input known to order {} cannot determine output order {out_order}",
            x.order()
        )));
    }
    let ctx = x.ctx();
    let d = x.d();
    let images: Vec<PDElement> = (0..d).map(|i| phi_star_xi(ctx, d, m, lift, i, out_order)).collect::<Result<_>>()?;
    let mut powers: Vec<BTreeMap<u32, PDElement>> = vec![BTreeMap::new(); d];
    let mut out = PDElement::zero(ctx, d, m - 1, out_order);
    for (k, c) in x.terms() {
        if total(k) > out_order {
            continue;
        }
        let mut term = PDElement::monomial(c.frob_substitute(lift)?, vec![0; d], m - 1, out_order);
        for (i, &ki) in k.iter().enumerate() {
            if ki == 0 {
                continue;
            }
            if !powers[i].contains_key(&ki) {
                powers[i].insert(ki, images[i].divided_power(ki)?);
            }
            term = term.mul(&powers[i][&ki]);
        }
        out = out.add(&term);
    }
    Ok(out)
}

/// `Φ^*(ξ'_i) = Σ_{k=1}^{p} ((p!/(p−k)!)/p) p^{(m−1)(k−1)} t_i^{p−k} ξ_i^[k]
/// + Σ_{|k|≥1} p^{(m−1)(|k|−1)} ∂^k(a_i) ξ^[k]`.
pub fn phi_star_xi(ctx: RingCtx, d: usize, m: u32, lift: &FrobLift, i: usize, order: u32) -> Result<PDElement> {
    let p = ctx.p();
    let mut out = PDElement::zero(ctx, d, m - 1, order);
    for k in 1..=p.min(order as u64) {
        let num = factorial(p) / factorial(p - k) / BigUint::from(p);
        let c = ModularInt::from_biguint(ctx, &num).mul_ref(&ctx.p_pow((m - 1) * (k as u32 - 1)));
        let mut e = Exponent::zero(d);
        e.0[i] = (p - k) as i64;
        let mut idx = vec![0; d];
        idx[i] = k as u32;
        out.add_term(idx, LaurentPoly::monomial(c, e.as_slice()));
    }
    let a = &lift.a()[i];
    if !a.is_zero() {
        for k in multi_indices(d, order) {
            let deg = total(&k);
            if deg == 0 {
                continue;
            }
            let scale = ctx.p_pow((m - 1) * (deg - 1));
            if scale.is_zero() {
                continue;
            }
            // Ordinary ∂^k a_i is the level-zero divided operator ∂^⟨k⟩.
            out.add_term(k.clone(), divided_partial(a, &k, 0).scalar_mul(&scale));
        }
    }
    Ok(out)
}

/// Report of the mod-p degree computation for `Φ` in dimension one at level `-1`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PhiRankReport {
    /// The prime.
    pub p: u64,
    /// Number of source divided-power tiers `x_0, ..., x_{L-1}`.
    pub tiers: u32,
    /// Dimension `p^{L+1}` of the truncated target over the base ring.
    pub target_rank: u64,
    /// Dimension `p^L` of the truncated source over the base ring.
    pub source_rank: u64,
    /// `target_rank / source_rank`, the relative rank over the image.
    pub relative_rank: u64,
    /// Rank `p^d` of the base Frobenius.
    pub base_rank: u64,
    /// Degree of the full morphism, `relative_rank * base_rank`.
    pub total_degree: u64,
    /// Whether each `x_l ↦ u y_{l+1} + (polynomial in y_0..y_l)` with `u` a unit.
    pub generator_shape_ok: bool,
    /// Whether the `p^{L+1}` products `x^e y_0^{e'}` are triangular with unit diagonal.
    pub triangular_ok: bool,
    /// `L = 0`: no source tiers.
    pub degenerate: bool,
}

impl PhiRankReport {
    /// Whether the computation confirms freeness with the expected ranks.
    pub fn passes(&self) -> bool {
        let d_rank = self.p;
        self.generator_shape_ok
            && self.triangular_ok
            && self.relative_rank == d_rank
            && self.total_degree == if self.degenerate { d_rank } else { d_rank * d_rank }
    }
}

/// Verifies, modulo `p` and for `d = 1`, `m = 1`, `a = 0`, that the truncated PD
/// morphism is free of rank `p` over its image; with the base Frobenius this gives
/// degree `p^{2d}`.
pub fn phi_rank_check(p: u64, tiers: u32) -> Result<PhiRankReport> {
    let ctx = RingCtx::new(p, 1)?;
    let d = 1;
    let lift = FrobLift::pure(ctx, d);
    let target_rank = p.pow(tiers + 1);
    let order = (target_rank - 1) as u32;
    let xi = PDElement::xi(ctx, d, 1, order, 0);
    let image = phi_star(&xi, &lift, order)?;
    let mut xs = Vec::new();
    let mut shape_ok = true;
    for l in 0..tiers {
        let xl = image.divided_power(p.pow(l) as u32)?;
        let top = p.pow(l + 1) as u32;
        let max_k = xl.terms().map(|(k, _)| k[0]).max().unwrap_or(0);
        shape_ok &= max_k == top && xl.coeff(&[top]).is_unit();
        xs.push(xl);
    }
    let mut tri_ok = true;
    let mut count = 0u64;
    let y0 = PDElement::xi(ctx, d, 0, order, 0);
    let mut exps = vec![0u32; tiers as usize + 1];
    loop {
        let mut prod = y0.pow(exps[0]);
        let mut lead = exps[0] as u64;
        for l in 0..tiers as usize {
            prod = prod.mul(&xs[l].pow(exps[l + 1]));
            lead += exps[l + 1] as u64 * p.pow(l as u32 + 1);
        }
        let max_k = prod.terms().map(|(k, _)| k[0] as u64).max();
        tri_ok &= max_k == Some(lead) && prod.coeff(&[lead as u32]).is_unit();
        count += 1;
        let mut i = 0;
        loop {
            if i == exps.len() {
                break;
            }
            exps[i] += 1;
            if (exps[i] as u64) < p {
                break;
            }
            exps[i] = 0;
            i += 1;
        }
        if i == exps.len() {
            break;
        }
    }
    tri_ok &= count == target_rank;
    let source_rank = p.pow(tiers);
    let relative_rank = target_rank / source_rank;
    let base_rank = p.pow(d as u32);
    let degenerate = tiers == 0;
    let total_degree = if degenerate { relative_rank } else { relative_rank * base_rank };
    Ok(PhiRankReport {
        p,
        tiers,
        target_rank,
        source_rank,
        relative_rank,
        base_rank,
        total_degree,
        generator_shape_ok: shape_ok,
        triangular_ok: tri_ok,
        degenerate,
    })
}
