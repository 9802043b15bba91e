//! Truncated Witt vectors over `F_p[t^±1]`, the degree ≤ 1 de Rham-Witt
//! complex of the one-dimensional torus in weight-graded normal form, and
//! rank-1 p^m-Witt-connections with their level raise.

use std::collections::BTreeMap;

use serde::Serialize;

use crate::arith::{teichmuller_digits, teichmuller_lift, ModularInt, RingCtx};
use crate::error::{Error, Result};
use crate::laurent::LaurentPoly;
use crate::linalg::{cokernel_exponents, ZMat};

/// A Witt vector `x = Σ V^r[x_r]` of length `n` with components in `F_p[t^±1]`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WittVector {
    p: u64,
    comps: Vec<LaurentPoly>,
}

fn fp(p: u64) -> RingCtx {
    RingCtx::new(p, 1).expect("prime context")
}

fn check_component(p: u64, x: &LaurentPoly) -> Result<()> {
    if x.ctx() != fp(p) || x.d() != 1 {
        return Err(Error::ContextMismatch(format!("component must lie in F_{p}[t^±1]")));
    }
    Ok(())
}

impl WittVector {
    /// The zero vector of length `n`.
    pub fn zero(p: u64, n: u32) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("Witt vector of length 0".into()));
        }
        RingCtx::new(p, n)?;
        Ok(WittVector { p, comps: vec![LaurentPoly::zero(fp(p), 1); n as usize] })
    }

    /// The vector with the given components.
    pub fn from_components(p: u64, comps: Vec<LaurentPoly>) -> Result<Self> {
        if comps.is_empty() {
            return Err(Error::InvalidParameter("Witt vector of length 0".into()));
        }
        for x in &comps {
            check_component(p, x)?;
        }
        Ok(WittVector { p, comps })
    }

    /// The Teichmüller representative `[x] = (x, 0, ..., 0)`.
    pub fn teichmuller(x: &LaurentPoly, n: u32) -> Result<Self> {
        let p = x.ctx().p();
        let mut w = WittVector::zero(p, n)?;
        check_component(p, x)?;
        w.comps[0] = x.clone();
        Ok(w)
    }

    /// The prime.
    pub fn p(&self) -> u64 {
        self.p
    }

    /// The length.
    pub fn n(&self) -> u32 {
        self.comps.len() as u32
    }

    /// The components `x_0, ..., x_{n-1}`.
    pub fn components(&self) -> &[LaurentPoly] {
        &self.comps
    }

    /// Whether every component vanishes.
    pub fn is_zero(&self) -> bool {
        self.comps.iter().all(|c| c.is_zero())
    }

    /// The `k`-th ghost component `Σ_{r≤k} p^r x̃_r^{p^{k−r}}` of the digit lift, mod `p^{k+1}`.
    pub fn ghost(&self, k: u32) -> LaurentPoly {
        let top = RingCtx::new(self.p, k + 1).expect("ghost context");
        let mut w = LaurentPoly::zero(top, 1);
        for r in 0..=k.min(self.n() - 1) {
            let prec = RingCtx::new(self.p, k + 1 - r).expect("ghost context");
            let lifted = self.comps[r as usize].lift_to(prec).expect("lift");
            let power = lifted.pow(self.p.pow(k - r));
            let term = power.lift_to(top).expect("lift").mul_p_pow(r);
            w = w.add(&term);
        }
        w
    }

    fn from_ghosts(p: u64, ghosts: &[LaurentPoly]) -> Self {
        let mut comps: Vec<LaurentPoly> = Vec::with_capacity(ghosts.len());
        for (k, g) in ghosts.iter().enumerate() {
            let partial = WittVector { p, comps: comps.clone() };
            let mut rest = g.clone();
            if k > 0 {
                rest = rest.sub(&partial.ghost(k as u32));
            }
            let s = rest.div_p_pow(k as u32).expect("ghost inversion is exact").reduce_to(fp(p)).expect("reduce");
            comps.push(s);
        }
        WittVector { p, comps }
    }

    fn same_shape(&self, o: &Self) -> Result<()> {
        if self.p != o.p || self.n() != o.n() {
            return Err(Error::ContextMismatch("Witt vectors of different shape".into()));
        }
        Ok(())
    }

    fn ghost_combine(&self, o: &Self, op: impl Fn(&LaurentPoly, &LaurentPoly) -> LaurentPoly) -> Result<Self> {
        self.same_shape(o)?;
        let ghosts: Vec<LaurentPoly> = (0..self.n()).map(|k| op(&self.ghost(k), &o.ghost(k))).collect();
        Ok(WittVector::from_ghosts(self.p, &ghosts))
    }

    /// Witt vector sum.
    pub fn add(&self, o: &Self) -> Result<Self> {
        if self.is_zero() {
            self.same_shape(o)?;
            return Ok(o.clone());
        }
        if o.is_zero() {
            self.same_shape(o)?;
            return Ok(self.clone());
        }
        self.ghost_combine(o, |a, b| a.add(b))
    }

    /// Witt vector difference.
    pub fn sub(&self, o: &Self) -> Result<Self> {
        if o.is_zero() {
            self.same_shape(o)?;
            return Ok(self.clone());
        }
        self.ghost_combine(o, |a, b| a.sub(b))
    }

    /// Additive inverse.
    pub fn neg(&self) -> Self {
        let ghosts: Vec<LaurentPoly> = (0..self.n()).map(|k| self.ghost(k).neg()).collect();
        WittVector::from_ghosts(self.p, &ghosts)
    }

    /// Witt vector product.
    pub fn mul(&self, o: &Self) -> Result<Self> {
        self.ghost_combine(o, |a, b| a.mul(b))
    }

    /// Truncation to length `k ≤ n`.
    pub fn truncate(&self, k: u32) -> Result<Self> {
        if k == 0 || k > self.n() {
            return Err(Error::InvalidParameter(format!("cannot truncate length {} to {k}", self.n())));
        }
        Ok(WittVector { p: self.p, comps: self.comps[..k as usize].to_vec() })
    }

    /// Frobenius `W_n → W_{n−1}`, componentwise p-th power in characteristic p.
    pub fn frobenius(&self) -> Result<Self> {
        if self.n() < 2 {
            return Err(Error::InvalidParameter("F needs length at least 2".into()));
        }
        self.frobenius_endo().truncate(self.n() - 1)
    }

    /// Frobenius as an endomorphism of `W_n`.
    pub fn frobenius_endo(&self) -> Self {
        WittVector { p: self.p, comps: self.comps.iter().map(|c| c.pow(self.p)).collect() }
    }

    /// Verschiebung `W_n → W_n`, `(x_0, ...) ↦ (0, x_0, ..., x_{n−2})`.
    pub fn verschiebung(&self) -> Self {
        let mut comps = vec![LaurentPoly::zero(fp(self.p), 1)];
        comps.extend(self.comps[..self.comps.len() - 1].iter().cloned());
        WittVector { p: self.p, comps }
    }

    /// Multiplication by an integer.
    pub fn scale(&self, k: i64) -> Self {
        let ghosts: Vec<LaurentPoly> = (0..self.n()).map(|g| self.ghost(g).scalar_mul_i64(k)).collect();
        WittVector::from_ghosts(self.p, &ghosts)
    }
}

fn ctx_len(p: u64, len: u32) -> RingCtx {
    RingCtx::new(p, len).expect("length context")
}

fn insert(map: &mut BTreeMap<i64, ModularInt>, j: i64, c: ModularInt) {
    let v = match map.remove(&j) {
        Some(old) => old.add_ref(&c),
        None => c,
    };
    if !v.is_zero() {
        map.insert(j, v);
    }
}

fn insert_frac(map: &mut BTreeMap<(u32, i64), ModularInt>, key: (u32, i64), c: ModularInt) {
    let v = match map.remove(&key) {
        Some(old) => old.add_ref(&c),
        None => c,
    };
    if !v.is_zero() {
        map.insert(key, v);
    }
}

fn p_free(p: u64, mut k: i64) -> (u32, i64) {
    let mut s = 0;
    while k != 0 && k % p as i64 == 0 {
        k /= p as i64;
        s += 1;
    }
    (s, k)
}

/// Weight-graded normal form of an element of `W_n(F_p[t^±1])`:
/// `Σ a_j [t]^j + Σ_{r≥1, p∤j} V^r(b_{r,j} [t]^j)` with `a_j ∈ Z/p^n`, `b_{r,j} ∈ Z/p^{n−r}`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WittNormal {
    p: u64,
    n: u32,
    integral: BTreeMap<i64, ModularInt>,
    fractional: BTreeMap<(u32, i64), ModularInt>,
}

impl WittNormal {
    /// The zero element.
    pub fn zero(p: u64, n: u32) -> Self {
        WittNormal { p, n, integral: BTreeMap::new(), fractional: BTreeMap::new() }
    }

    /// The integral embedding `δ(Σ c_j t^j) = Σ c_j [t]^j` of a polynomial over `Z/p^n`.
    pub fn delta(g: &LaurentPoly) -> Result<Self> {
        if g.d() != 1 {
            return Err(Error::InvalidParameter("the Witt chart is one-dimensional".into()));
        }
        let mut out = WittNormal::zero(g.ctx().p(), g.ctx().n());
        for (e, c) in g.terms() {
            insert(&mut out.integral, e.0[0], c.clone());
        }
        Ok(out)
    }

    /// The integral coefficients `a_j`.
    pub fn integral(&self) -> &BTreeMap<i64, ModularInt> {
        &self.integral
    }

    /// The fractional coefficients `b_{r,j}`.
    pub fn fractional(&self) -> &BTreeMap<(u32, i64), ModularInt> {
        &self.fractional
    }

    /// Whether the element vanishes.
    pub fn is_zero(&self) -> bool {
        self.integral.is_empty() && self.fractional.is_empty()
    }

    /// Adds the normal form of `V^r[c t^k]` for `c ∈ F_p`.
    fn add_monomial(&mut self, r: u32, c: u64, k: i64) {
        let (s, j0) = if k == 0 { (r, 0) } else { p_free(self.p, k) };
        let u = s.min(r);
        let jr = r - u;
        let j = if k == 0 { 0 } else { j0 * (self.p as i64).pow(s - u) };
        let len = self.n - jr;
        let ctx = ctx_len(self.p, len);
        let coeff = ModularInt::from_bigint(ctx, &teichmuller_lift(c, self.p, len)).mul_p_pow(u);
        if jr == 0 {
            insert(&mut self.integral, j, coeff);
        } else {
            insert_frac(&mut self.fractional, (jr, j), coeff);
        }
    }

    /// Normal form of a Witt vector.
    pub fn from_witt(x: &WittVector) -> Result<Self> {
        let (p, n) = (x.p, x.n());
        let mut out = WittNormal::zero(p, n);
        let mut y = x.clone();
        for r in 0..n {
            let comp = y.comps[r as usize].clone();
            if comp.is_zero() {
                continue;
            }
            let mut peeled = WittVector::zero(p, n)?;
            for (e, c) in comp.terms() {
                let ci = c.to_u128().expect("F_p digit") as u64;
                out.add_monomial(r, ci, e.0[0]);
                let mut single = WittVector::zero(p, n)?;
                single.comps[r as usize] = LaurentPoly::monomial(c.clone(), e.as_slice());
                peeled = peeled.add(&single)?;
            }
            y = y.sub(&peeled)?;
            debug_assert!(y.comps[..=r as usize].iter().all(|c| c.is_zero()));
        }
        Ok(out)
    }

    /// The Witt vector with this normal form.
    pub fn to_witt(&self) -> Result<WittVector> {
        let (p, n) = (self.p, self.n);
        let mut out = WittVector::zero(p, n)?;
        let mut place = |shift: u32, j: i64, c: &ModularInt| -> Result<()> {
            let mut v = WittVector::zero(p, n)?;
            for (s, dgt) in teichmuller_digits(c).into_iter().enumerate() {
                if dgt != 0 {
                    let e = j * (p as i64).pow(s as u32);
                    v.comps[shift as usize + s] = LaurentPoly::monomial(ModularInt::from_u64(fp(p), dgt), &[e]);
                }
            }
            out = out.add(&v)?;
            Ok(())
        };
        for (&j, a) in &self.integral {
            place(0, j, a)?;
        }
        for (&(r, j), b) in &self.fractional {
            place(r, j, b)?;
        }
        Ok(out)
    }
}

/// An element of `W_nΩ¹` of the torus in normal form:
/// `Σ a_j [t]^j dlog[t] + Σ_{r≥1, p∤j} c_{r,j} dV^r([t]^j)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WittOneForm {
    p: u64,
    n: u32,
    integral: BTreeMap<i64, ModularInt>,
    fractional: BTreeMap<(u32, i64), ModularInt>,
}

impl WittOneForm {
    /// The zero form.
    pub fn zero(p: u64, n: u32) -> Self {
        WittOneForm { p, n, integral: BTreeMap::new(), fractional: BTreeMap::new() }
    }

    /// The prime.
    pub fn p(&self) -> u64 {
        self.p
    }

    /// The length.
    pub fn n(&self) -> u32 {
        self.n
    }

    /// Coefficients `a_j` of `[t]^j dlog[t]`.
    pub fn integral(&self) -> &BTreeMap<i64, ModularInt> {
        &self.integral
    }

    /// Coefficients `c_{r,j}` of `dV^r([t]^j)`.
    pub fn fractional(&self) -> &BTreeMap<(u32, i64), ModularInt> {
        &self.fractional
    }

    /// Whether the form vanishes.
    pub fn is_zero(&self) -> bool {
        self.integral.is_empty() && self.fractional.is_empty()
    }

    /// Adds `a [t]^j dlog[t]`, reducing `a` to `Z/p^n`.
    pub fn add_integral(&mut self, j: i64, a: &ModularInt) -> Result<()> {
        let ctx = ctx_len(self.p, self.n);
        insert(&mut self.integral, j, rescale(a, ctx)?);
        Ok(())
    }

    /// Adds `c dV^r([t]^j)` for `p∤j`, reducing `c` to `Z/p^{n−r}`.
    pub fn add_fractional(&mut self, r: u32, j: i64, c: &ModularInt) -> Result<()> {
        if r == 0 || r >= self.n || j % self.p as i64 == 0 {
            return Err(Error::InvalidParameter(format!("no fractional generator ({r}, {j})")));
        }
        let ctx = ctx_len(self.p, self.n - r);
        insert_frac(&mut self.fractional, (r, j), rescale(c, ctx)?);
        Ok(())
    }

    fn same_shape(&self, o: &Self) -> Result<()> {
        if self.p != o.p || self.n != o.n {
            return Err(Error::ContextMismatch("one-forms of different shape".into()));
        }
        Ok(())
    }

    /// Sum of two forms.
    pub fn add(&self, o: &Self) -> Result<Self> {
        self.same_shape(o)?;
        let mut out = self.clone();
        for (&j, a) in &o.integral {
            insert(&mut out.integral, j, a.clone());
        }
        for (&k, c) in &o.fractional {
            insert_frac(&mut out.fractional, k, c.clone());
        }
        Ok(out)
    }

    /// Multiplication by an integer.
    pub fn scale(&self, k: i64) -> Self {
        let mut out = WittOneForm::zero(self.p, self.n);
        for (&j, a) in &self.integral {
            insert(&mut out.integral, j, a.mul_i64(k));
        }
        for (&key, c) in &self.fractional {
            insert_frac(&mut out.fractional, key, c.mul_i64(k));
        }
        out
    }

    /// Difference of two forms.
    pub fn sub(&self, o: &Self) -> Result<Self> {
        self.add(&o.scale(-1))
    }

    /// Image under the restriction `W_nΩ¹ → W_kΩ¹`.
    pub fn truncate(&self, k: u32) -> Result<Self> {
        if k == 0 || k > self.n {
            return Err(Error::InvalidParameter(format!("cannot truncate length {} to {k}", self.n)));
        }
        let mut out = WittOneForm::zero(self.p, k);
        for (&j, a) in &self.integral {
            out.add_integral(j, a)?;
        }
        for (&(r, j), c) in &self.fractional {
            if r < k {
                out.add_fractional(r, j, c)?;
            }
        }
        Ok(out)
    }
}

fn rescale(a: &ModularInt, ctx: RingCtx) -> Result<ModularInt> {
    if a.ctx().n() >= ctx.n() {
        a.reduce_to(ctx)
    } else {
        Err(Error::ContextMismatch(format!("coefficient {a} lacks precision for {ctx}")))
    }
}

fn inv_mod(j: i64, ctx: RingCtx) -> ModularInt {
    ModularInt::from_i64(ctx, j).inv().expect("prime-to-p index")
}

/// The form `x·dlog[t]` for `x` in normal form, using `V^r([t]^j) dlog[t] = p^r j^{-1} dV^r([t]^j)`.
pub fn dlog_times(x: &WittNormal) -> WittOneForm {
    let mut out = WittOneForm::zero(x.p, x.n);
    for (&j, a) in &x.integral {
        insert(&mut out.integral, j, a.clone());
    }
    for (&(r, j), b) in &x.fractional {
        let c = b.mul_ref(&inv_mod(j, b.ctx())).mul_p_pow(r);
        insert_frac(&mut out.fractional, (r, j), c);
    }
    out
}

/// The differential `d: W_n → W_nΩ¹`.
pub fn drw_d(x: &WittVector) -> Result<WittOneForm> {
    let nf = WittNormal::from_witt(x)?;
    let mut out = WittOneForm::zero(x.p, x.n());
    for (&j, a) in &nf.integral {
        insert(&mut out.integral, j, a.mul_i64(j));
    }
    for (&key, b) in &nf.fractional {
        insert_frac(&mut out.fractional, key, b.clone());
    }
    Ok(out)
}

/// The Frobenius `F: W_nΩ¹ → W_{n−1}Ω¹`, with `F(dlog[t]) = dlog[t]` and `FdV = d`.
pub fn drw_f(w: &WittOneForm) -> Result<WittOneForm> {
    if w.n < 2 {
        return Err(Error::InvalidParameter("F needs length at least 2".into()));
    }
    let p = w.p as i64;
    let mut out = WittOneForm::zero(w.p, w.n - 1);
    for (&j, a) in &w.integral {
        out.add_integral(p * j, a)?;
    }
    for (&(r, j), c) in &w.fractional {
        if r >= 2 {
            out.add_fractional(r - 1, j, c)?;
        } else {
            out.add_integral(j, &c.mul_i64(j))?;
        }
    }
    Ok(out)
}

/// The module action `x·ω` of a normal-form 0-form on a 1-form.
///
/// Products of two fractional elements are not supported.
pub fn mul_form(x: &WittNormal, w: &WittOneForm) -> Result<WittOneForm> {
    if x.p != w.p || x.n != w.n {
        return Err(Error::ContextMismatch("0-form and 1-form of different shape".into()));
    }
    if !x.fractional.is_empty() && !w.fractional.is_empty() {
        return Err(Error::Unsupported("product of two fractional elements".into()));
    }
    let p = x.p as i64;
    let mut out = WittOneForm::zero(x.p, x.n);
    for (&j, a) in &x.integral {
        for (&k, c) in &w.integral {
            out.add_integral(j + k, &a.mul_ref(c))?;
        }
        for (&(r, k), c) in &w.fractional {
            let big = k + p.pow(r) * j;
            let ctx = c.ctx();
            let coeff = a.reduce_to(ctx)?.mul_ref(c).mul_i64(k).mul_ref(&inv_mod(big, ctx));
            out.add_fractional(r, big, &coeff)?;
        }
    }
    for (&(r, j), b) in &x.fractional {
        for (&k, c) in &w.integral {
            let big = j + p.pow(r) * k;
            let ctx = b.ctx();
            let coeff = b.mul_ref(&c.reduce_to(ctx)?).mul_ref(&inv_mod(big, ctx)).mul_p_pow(r);
            out.add_fractional(r, big, &coeff)?;
        }
    }
    Ok(out)
}

/// A rank-1 p^m-Witt-connection `∇ = p^m d + f·dlog[t]` on `W_n(F_p[t^±1])`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WittConnection {
    m: u32,
    f: WittVector,
}

impl WittConnection {
    /// The connection with level `m` and coefficient `f`.
    pub fn new(m: u32, f: WittVector) -> Self {
        WittConnection { m, f }
    }

    /// The trivial connection `(W_n, p^m d)`.
    pub fn trivial(p: u64, n: u32, m: u32) -> Result<Self> {
        Ok(WittConnection { m, f: WittVector::zero(p, n)? })
    }

    /// The level `m`.
    pub fn m(&self) -> u32 {
        self.m
    }

    /// The coefficient `f`.
    pub fn f(&self) -> &WittVector {
        &self.f
    }

    /// The prime.
    pub fn p(&self) -> u64 {
        self.f.p
    }

    /// The length `n`.
    pub fn n(&self) -> u32 {
        self.f.n()
    }

    /// Restriction to length `k`.
    pub fn truncate(&self, k: u32) -> Result<Self> {
        Ok(WittConnection { m: self.m, f: self.f.truncate(k)? })
    }

    /// `∇(x) = p^m dx + f x dlog[t]`.
    pub fn apply(&self, x: &WittVector) -> Result<WittOneForm> {
        let dx = drw_d(x)?;
        let dx = dx.scale((self.p() as i64).pow(self.m));
        let fx = WittNormal::from_witt(&self.f.mul(x)?)?;
        dx.add(&dlog_times(&fx))
    }
}

/// Level raise `F_*`: coefficient `f ↦ F(f)`, level `m ↦ m − 1`.
pub fn witt_level_raise(c: &WittConnection) -> Result<WittConnection> {
    if c.m == 0 {
        return Err(Error::LevelMismatch("level raise needs m ≥ 1".into()));
    }
    Ok(WittConnection { m: c.m - 1, f: c.f.frobenius_endo() })
}

/// A weight of the torus grading on Witt forms: `j / p^r`, with `p∤j` when `r ≥ 1`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub struct WittWeight {
    /// The `p`-power of the denominator.
    pub r: u32,
    /// The numerator.
    pub j: i64,
}

impl WittWeight {
    /// Weight `p·(j/p^r)`.
    pub fn times_p(&self, p: u64) -> WittWeight {
        if self.r == 0 {
            WittWeight { r: 0, j: self.j * p as i64 }
        } else {
            WittWeight { r: self.r - 1, j: self.j }
        }
    }
}

/// The weights `j / p^r` with `0 ≤ r < n` and `|j| ≤ window`.
pub fn witt_weights(p: u64, n: u32, window: i64) -> Vec<WittWeight> {
    let mut out = Vec::new();
    for r in 0..n {
        for j in -window..=window {
            if r == 0 || j % p as i64 != 0 {
                out.push(WittWeight { r, j });
            }
        }
    }
    out
}

/// Group orders read off from a per-weight finite presentation.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PresentationCheck {
    /// Form degree, 0 or 1.
    pub degree: u8,
    /// The weight.
    pub weight: WittWeight,
    /// Exponents predicted by the normal form.
    pub predicted: Vec<u32>,
    /// Exponents of the SNF of the presentation.
    pub computed: Vec<u32>,
}

impl PresentationCheck {
    /// Whether the presentation reproduces the normal form.
    pub fn matches(&self) -> bool {
        self.predicted == self.computed
    }
}

/// Builds the finite presentation of the weight-`w` part of `W_nΩ^degree` and compares
/// its elementary divisors with the normal form, which predicts a single `Z/p^{n−r}`.
///
/// Degree 0 uses generators `X_s = V^s([t]^{k_s})`, `k_s = j p^{s−r}`, with `p^{n−s}X_s = 0` and
/// `X_{s+1} = pX_s` (VF = p). Degree 1 uses `D_s = dV^s([t]^{k_s})`, `M_s = V^s(d[t]^{k_s})` and
/// `L_s = V^s([t]^{k_s})dlog[t]` with the order relations, `D_{s+1} = pD_s` (VF = p under d),
/// `M_{s+1} = p²M_s` (dF = pFd and V(Fω) = V(1)ω), `L_{s+1} = pL_s` (V(xFω) = V(x)ω),
/// `M_s = p^sD_s` (Vd = pdV, from FdV = d) and `M_s = k_sL_s` (Leibniz on `d[t]^k`).
pub fn presentation_check(p: u64, n: u32, degree: u8, w: WittWeight) -> Result<PresentationCheck> {
    if w.r >= n || (w.r > 0 && w.j % p as i64 == 0) || degree > 1 {
        return Err(Error::InvalidParameter(format!("no weight {}/p^{} in degree {degree}", w.j, w.r)));
    }
    let ctx = RingCtx::new(p, n)?;
    let steps: Vec<u32> = (w.r..n).collect();
    let k_of = |s: u32| -> i64 { w.j * (p as i64).pow(s - w.r) };
    let pi = p as i64;
    let families = if degree == 0 { 1 } else { 3 };
    let gens = families * steps.len();
    let idx = |fam: usize, s: u32| -> usize { fam * steps.len() + (s - w.r) as usize };
    let mut rels: Vec<Vec<(usize, i64)>> = Vec::new();
    for &s in &steps {
        for fam in 0..families {
            rels.push(vec![(idx(fam, s), pi.pow(n - s))]);
        }
        if s + 1 < n {
            if degree == 0 {
                rels.push(vec![(idx(0, s + 1), 1), (idx(0, s), -pi)]);
            } else {
                rels.push(vec![(idx(0, s + 1), 1), (idx(0, s), -pi)]);
                rels.push(vec![(idx(1, s + 1), 1), (idx(1, s), -pi * pi)]);
                rels.push(vec![(idx(2, s + 1), 1), (idx(2, s), -pi)]);
            }
        }
        if degree == 1 {
            rels.push(vec![(idx(1, s), 1), (idx(0, s), -pi.pow(s))]);
            rels.push(vec![(idx(1, s), 1), (idx(2, s), -k_of(s))]);
        }
    }
    let mut a = ZMat::zero(ctx, gens, rels.len());
    for (col, rel) in rels.iter().enumerate() {
        for &(row, v) in rel {
            let cur = a.get(row, col).add_ref(&ModularInt::from_i64(ctx, v));
            a.set(row, col, cur);
        }
    }
    Ok(PresentationCheck { degree, weight: w, predicted: vec![n - w.r], computed: cokernel_exponents(&a) })
}

/// Per-weight comparison data for the level raise of a rank-1 Witt connection.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WittWeightComparison {
    /// Weight of the source.
    pub weight: WittWeight,
    /// `H⁰` exponent of the source at length `n`.
    pub h0_source: u32,
    /// `H⁰` exponent of the raise at the weight `p·w`, length `n`.
    pub h0_target: u32,
    /// Kernel exponent of `F: H¹(C, W_n) → H¹(F_*C, W_{n−1})`.
    pub h1_kernel: u32,
    /// Cokernel exponent of the same map.
    pub h1_cokernel: u32,
}

/// Result of comparing a nilpotent rank-1 Witt connection with its level raise.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WittCompareReport {
    /// The prime.
    pub p: u64,
    /// The length.
    pub n: u32,
    /// The source level.
    pub m: u32,
    /// The weight window.
    pub window: i64,
    /// Per-weight data over the window.
    pub weights: Vec<WittWeightComparison>,
    /// `H⁰` exponents agree on every integral weight under `w ↦ pw`.
    pub h0_exact: bool,
    /// `H⁰ ⊗ Q` agrees on every weight.
    pub h0_rational: bool,
    /// Largest `H¹` exponent contributed by fractional weights of the source.
    pub fractional_h1_max: u32,
    /// Largest kernel or cokernel exponent of the `H¹` comparison.
    pub h1_max: u32,
    /// The transported bound on that exponent.
    pub h1_bound: u32,
    /// `F∘∇ = ∇'∘F` on the basis elements of the window.
    pub chain_map: bool,
}

impl WittCompareReport {
    /// Whether every clause of the comparison holds.
    pub fn passes(&self) -> bool {
        self.h0_exact
            && self.h0_rational
            && self.h1_max <= self.h1_bound
            && self.fractional_h1_max <= self.m
            && self.chain_map
    }
}

fn cyclic_exponent(alpha: &ModularInt) -> u32 {
    alpha.val_p().min(alpha.ctx().n())
}

/// Multiplier of `∇ = p^m d + c·dlog[t]` on the weight-`w` generator, as an element of `Z/p^{n−r}`.
fn weight_multiplier(p: u64, n: u32, m: u32, c: &ModularInt, w: WittWeight) -> ModularInt {
    let ctx = ctx_len(p, n - w.r);
    let cw = c.reduce_to(ctx).expect("reduce");
    if w.r == 0 {
        ctx.p_pow(m).mul_i64(w.j).add_ref(&cw)
    } else {
        ctx.p_pow(m).add_ref(&cw.mul_ref(&inv_mod(w.j, ctx)).mul_p_pow(w.r))
    }
}

/// Whether that multiplier vanishes over `Q`, with `c` lifted symmetrically.
fn rationally_zero(p: u64, m: u32, c: &ModularInt, w: WittWeight) -> bool {
    let cl = c.lift_symmetric();
    let pm = num_bigint::BigInt::from(p).pow(m);
    let v = if w.r == 0 { pm * w.j + cl } else { pm * w.j + cl * num_bigint::BigInt::from(p).pow(w.r) };
    v == num_bigint::BigInt::from(0)
}

/// Compares `H⁰` and `H¹` of a nilpotent rank-1 Witt connection with those of its level raise,
/// weight by weight. The coefficient must be a constant `f ∈ p^m·W_n(F_p)`.
pub fn witt_compare(c: &WittConnection, window: i64) -> Result<WittCompareReport> {
    let (p, n, m) = (c.p(), c.n(), c.m);
    if m == 0 {
        return Err(Error::LevelMismatch("level raise needs m ≥ 1".into()));
    }
    if n < 2 {
        return Err(Error::InvalidParameter("the H¹ comparison needs length at least 2".into()));
    }
    let nf = WittNormal::from_witt(&c.f)?;
    if !nf.fractional.is_empty() || nf.integral.keys().any(|&j| j != 0) {
        return Err(Error::Unsupported("witt_compare handles constant coefficients".into()));
    }
    let c0 = nf.integral.get(&0).cloned().unwrap_or_else(|| ModularInt::zero(ctx_len(p, n)));
    if c0.val_p() < m {
        return Err(Error::Hypothesis("coefficient is not divisible by p^m, so the object is not nilpotent".into()));
    }
    let raised = witt_level_raise(c)?;
    let mut weights = Vec::new();
    let mut h0_exact = true;
    let mut h0_rational = true;
    let mut fractional_h1_max = 0;
    let mut h1_max = 0;
    for w in witt_weights(p, n, window) {
        let wp = w.times_p(p);
        let alpha = weight_multiplier(p, n, m, &c0, w);
        let beta = weight_multiplier(p, n, m - 1, &c0, wp);
        let h0_source = cyclic_exponent(&alpha);
        let h0_target = cyclic_exponent(&beta);
        if w.r == 0 && h0_source != h0_target {
            h0_exact = false;
        }
        if rationally_zero(p, m, &c0, w) != rationally_zero(p, m - 1, &c0, wp) {
            h0_rational = false;
        }
        let e1 = h0_source;
        let beta_short = weight_multiplier(p, n - 1, m - 1, &c0, wp);
        let e2 = cyclic_exponent(&beta_short);
        let image = e1.min(e2);
        let (h1_kernel, h1_cokernel) = (e1 - image, e2 - image);
        if w.r > 0 {
            fractional_h1_max = fractional_h1_max.max(e1);
        }
        h1_max = h1_max.max(h1_kernel).max(h1_cokernel);
        weights.push(WittWeightComparison { weight: w, h0_source, h0_target, h1_kernel, h1_cokernel });
    }
    for w in witt_weights(p, n, window) {
        if w.r == n - 1 && rationally_zero(p, m - 1, &c0, w) {
            h0_rational = false;
        }
    }
    let l = 1u32;
    let h1_bound = (4 * l * (m - 1) * 2).min(n) + 1;
    let chain_map = witt_chain_map_check(c, &raised, window)?;
    Ok(WittCompareReport {
        p,
        n,
        m,
        window,
        weights,
        h0_exact,
        h0_rational,
        fractional_h1_max,
        h1_max,
        h1_bound,
        chain_map,
    })
}

/// Checks `F(∇x) = ∇'(F x)` at length `n − 1` on the normal-form basis elements of weight
/// numerator at most `window`.
pub fn witt_chain_map_check(c: &WittConnection, raised: &WittConnection, window: i64) -> Result<bool> {
    let (p, n) = (c.p(), c.n());
    let short = raised.truncate(n - 1)?;
    for w in witt_weights(p, n, window) {
        let mut basis = WittNormal::zero(p, n);
        let one = ModularInt::one(ctx_len(p, n - w.r));
        if w.r == 0 {
            basis.integral.insert(w.j, one);
        } else {
            basis.fractional.insert((w.r, w.j), one);
        }
        let x = basis.to_witt()?;
        let lhs = drw_f(&c.apply(&x)?)?;
        let rhs = short.apply(&x.frobenius()?)?;
        if lhs != rhs {
            return Ok(false);
        }
    }
    Ok(true)
}

/// The Witt vector `δ(g)` of a polynomial over `Z/p^n`.
pub fn delta(g: &LaurentPoly) -> Result<WittVector> {
    WittNormal::delta(g)?.to_witt()
}

/// Parses a component given as a polynomial string over `F_p`.
pub fn parse_component(s: &str, p: u64) -> Result<LaurentPoly> {
    LaurentPoly::parse(s, fp(p), 1)
}

/// Teichmüller monomial `[c t^j]` of length `n`.
pub fn teichmuller_monomial(p: u64, n: u32, c: u64, j: i64) -> Result<WittVector> {
    let x = LaurentPoly::monomial(ModularInt::from_u64(fp(p), c), &[j]);
    WittVector::teichmuller(&x, n)
}
