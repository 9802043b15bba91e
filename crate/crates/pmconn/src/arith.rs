//! Exact arithmetic in `Z/p^nZ` with p-adic valuations and the combinatorial
//! coefficients consumed by divided-power formulas.
//!
//! Residues are stored canonically in `[0, p^n)`. When `p^n < 2^64` a single
//! `u128` word holds the residue and products stay in native arithmetic;
//! larger moduli fall back to arbitrary precision.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

/// The coefficient ring `Z/p^nZ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct RingCtx {
    p: u64,
    n: u32,
    /// `p^n` when it is below `2^64`, zero otherwise.
    word: u128,
}

fn is_prime(p: u64) -> bool {
    if p < 2 {
        return false;
    }
    let mut q = 2u64;
    while q.saturating_mul(q) <= p {
        if p.is_multiple_of(q) {
            return false;
        }
        q += 1;
    }
    true
}

impl RingCtx {
    /// Largest supported truncation level.
    pub const MAX_N: u32 = 4096;

    /// Builds `Z/p^nZ`, checking that `p` is prime and `n >= 1`.
    pub fn new(p: u64, n: u32) -> Result<Self> {
        if !is_prime(p) {
            return Err(Error::InvalidParameter(format!("p = {p} is not prime")));
        }
        if n == 0 || n > Self::MAX_N {
            return Err(Error::InvalidParameter(format!("n = {n} out of range")));
        }
        let mut word: u128 = 1;
        for _ in 0..n {
            word = word.saturating_mul(p as u128);
            if word >= 1u128 << 64 {
                word = 0;
                break;
            }
        }
        Ok(RingCtx { p, n, word })
    }

    /// The prime `p`.
    pub fn p(&self) -> u64 {
        self.p
    }

    /// The truncation level `n`.
    pub fn n(&self) -> u32 {
        self.n
    }

    /// The same prime at another truncation level.
    pub fn with_n(&self, n: u32) -> Result<Self> {
        RingCtx::new(self.p, n)
    }

    /// `p^n` when it fits the single-word fast path.
    pub fn modulus_word(&self) -> Option<u128> {
        (self.word != 0).then_some(self.word)
    }

    /// `p^n` as an arbitrary-precision integer.
    pub fn modulus(&self) -> BigUint {
        match self.modulus_word() {
            Some(w) => BigUint::from(w),
            None => BigUint::from(self.p).pow(self.n),
        }
    }

    /// The residue class of `p^k` (zero once `k >= n`).
    pub fn p_pow(&self, k: u32) -> ModularInt {
        if k >= self.n {
            return ModularInt::zero(*self);
        }
        ModularInt::from_biguint(*self, &BigUint::from(self.p).pow(k))
    }

    fn check(&self, other: &RingCtx) {
        assert!(self == other, "ring context mismatch: Z/{}^{} vs Z/{}^{}", self.p, self.n, other.p, other.n);
    }
}

impl fmt::Display for RingCtx {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Z/{}^{}", self.p, self.n)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
enum Repr {
    Word(u128),
    Big(BigUint),
}

/// An element of `Z/p^nZ` tagged with its context.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ModularInt {
    ctx: RingCtx,
    repr: Repr,
}

impl ModularInt {
    /// The zero residue.
    pub fn zero(ctx: RingCtx) -> Self {
        match ctx.modulus_word() {
            Some(_) => ModularInt { ctx, repr: Repr::Word(0) },
            None => ModularInt { ctx, repr: Repr::Big(BigUint::zero()) },
        }
    }

    /// The unit residue.
    pub fn one(ctx: RingCtx) -> Self {
        ModularInt::from_u64(ctx, 1)
    }

    /// Reduces a non-negative machine integer.
    pub fn from_u64(ctx: RingCtx, v: u64) -> Self {
        match ctx.modulus_word() {
            Some(m) => ModularInt { ctx, repr: Repr::Word(v as u128 % m) },
            None => ModularInt { ctx, repr: Repr::Big(BigUint::from(v)) },
        }
    }

    /// Reduces a signed machine integer.
    pub fn from_i64(ctx: RingCtx, v: i64) -> Self {
        match ctx.modulus_word() {
            Some(m) => {
                let r = (v as i128).rem_euclid(m as i128) as u128;
                ModularInt { ctx, repr: Repr::Word(r) }
            }
            None => ModularInt::from_bigint(ctx, &BigInt::from(v)),
        }
    }

    /// Reduces a non-negative big integer.
    pub fn from_biguint(ctx: RingCtx, v: &BigUint) -> Self {
        match ctx.modulus_word() {
            Some(m) => {
                let r = (v % BigUint::from(m)).to_u128().expect("residue fits");
                ModularInt { ctx, repr: Repr::Word(r) }
            }
            None => ModularInt { ctx, repr: Repr::Big(v % ctx.modulus()) },
        }
    }

    /// Reduces a signed big integer.
    pub fn from_bigint(ctx: RingCtx, v: &BigInt) -> Self {
        let m = BigInt::from_biguint(Sign::Plus, ctx.modulus());
        let r = v.mod_floor(&m);
        ModularInt::from_biguint(ctx, r.magnitude())
    }

    /// The context of this residue.
    pub fn ctx(&self) -> RingCtx {
        self.ctx
    }

    /// Canonical representative in `[0, p^n)`.
    pub fn lift(&self) -> BigUint {
        match &self.repr {
            Repr::Word(w) => BigUint::from(*w),
            Repr::Big(b) => b.clone(),
        }
    }

    /// Canonical representative as a signed integer in `[0, p^n)`.
    pub fn lift_int(&self) -> BigInt {
        BigInt::from_biguint(Sign::Plus, self.lift())
    }

    /// Representative of least absolute value, in `(-p^n/2, p^n/2]`.
    pub fn lift_symmetric(&self) -> BigInt {
        let v = self.lift_int();
        let m = BigInt::from_biguint(Sign::Plus, self.ctx.modulus());
        if &v * 2 > m {
            v - m
        } else {
            v
        }
    }

    /// Canonical representative when it fits a word.
    pub fn to_u128(&self) -> Option<u128> {
        match &self.repr {
            Repr::Word(w) => Some(*w),
            Repr::Big(b) => b.to_u128(),
        }
    }

    /// Symmetric representative as a machine integer, when it fits.
    pub fn to_i64_symmetric(&self) -> Option<i64> {
        self.lift_symmetric().to_i64()
    }

    /// Whether the residue is zero.
    pub fn is_zero(&self) -> bool {
        match &self.repr {
            Repr::Word(w) => *w == 0,
            Repr::Big(b) => b.is_zero(),
        }
    }

    /// Whether the residue is one.
    pub fn is_one(&self) -> bool {
        match &self.repr {
            Repr::Word(w) => *w == 1,
            Repr::Big(b) => b.is_one(),
        }
    }

    /// Largest `e <= n` with `p^e` dividing the representative; `n` for zero.
    pub fn val_p(&self) -> u32 {
        if self.is_zero() {
            return self.ctx.n;
        }
        let p = self.ctx.p;
        match &self.repr {
            Repr::Word(w) => {
                let mut v = *w;
                let mut e = 0;
                while v % p as u128 == 0 {
                    v /= p as u128;
                    e += 1;
                }
                e
            }
            Repr::Big(b) => {
                let pb = BigUint::from(p);
                let mut v = b.clone();
                let mut e = 0;
                while (&v % &pb).is_zero() {
                    v /= &pb;
                    e += 1;
                }
                e
            }
        }
    }

    /// Whether the residue is invertible, i.e. prime to `p`.
    pub fn is_unit(&self) -> bool {
        self.val_p() == 0
    }

    /// Sum of two residues of the same context.
    pub fn add_ref(&self, o: &Self) -> Self {
        self.ctx.check(&o.ctx);
        match (&self.repr, &o.repr) {
            (Repr::Word(a), Repr::Word(b)) => {
                let m = self.ctx.word;
                let s = a + b;
                ModularInt { ctx: self.ctx, repr: Repr::Word(if s >= m { s - m } else { s }) }
            }
            _ => {
                let s = self.lift() + o.lift();
                ModularInt::from_biguint(self.ctx, &s)
            }
        }
    }

    /// Difference of two residues of the same context.
    pub fn sub_ref(&self, o: &Self) -> Self {
        self.add_ref(&o.neg_ref())
    }

    /// Additive inverse.
    pub fn neg_ref(&self) -> Self {
        if self.is_zero() {
            return self.clone();
        }
        match &self.repr {
            Repr::Word(a) => ModularInt { ctx: self.ctx, repr: Repr::Word(self.ctx.word - a) },
            Repr::Big(b) => ModularInt { ctx: self.ctx, repr: Repr::Big(self.ctx.modulus() - b) },
        }
    }

    /// Product of two residues of the same context.
    pub fn mul_ref(&self, o: &Self) -> Self {
        self.ctx.check(&o.ctx);
        match (&self.repr, &o.repr) {
            (Repr::Word(a), Repr::Word(b)) => ModularInt { ctx: self.ctx, repr: Repr::Word(a * b % self.ctx.word) },
            _ => {
                let s = self.lift() * o.lift();
                ModularInt::from_biguint(self.ctx, &s)
            }
        }
    }

    /// Multiplication by a machine integer.
    pub fn mul_i64(&self, k: i64) -> Self {
        self.mul_ref(&ModularInt::from_i64(self.ctx, k))
    }

    /// Power by repeated squaring.
    pub fn pow(&self, mut e: u64) -> Self {
        let mut base = self.clone();
        let mut acc = ModularInt::one(self.ctx);
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul_ref(&base);
            }
            base = base.mul_ref(&base);
            e >>= 1;
        }
        acc
    }

    /// Multiplicative inverse of a unit.
    pub fn inv(&self) -> Result<Self> {
        if !self.is_unit() {
            return Err(Error::NotInvertible(format!("{self} has positive valuation")));
        }
        let m = BigInt::from_biguint(Sign::Plus, self.ctx.modulus());
        let a = self.lift_int();
        let g = a.extended_gcd(&m);
        debug_assert!(g.gcd.is_one());
        Ok(ModularInt::from_bigint(self.ctx, &g.x))
    }

    /// Multiplication by `p^k`.
    pub fn mul_p_pow(&self, k: u32) -> Self {
        self.mul_ref(&self.ctx.p_pow(k))
    }

    /// Exact division by `p^k`, landing in `Z/p^{n-k}Z`.
    pub fn div_p_pow(&self, k: u32) -> Result<Self> {
        if k == 0 {
            return Ok(self.clone());
        }
        if k >= self.ctx.n {
            return Err(Error::InexactDivision(format!("dividing by p^{k} leaves no precision in {}", self.ctx)));
        }
        if self.val_p() < k {
            return Err(Error::InexactDivision(format!("{self} is not divisible by p^{k}")));
        }
        let ctx = self.ctx.with_n(self.ctx.n - k)?;
        let q = self.lift() / BigUint::from(self.ctx.p).pow(k);
        Ok(ModularInt::from_biguint(ctx, &q))
    }

    /// Image under the projection to a lower truncation level of the same prime.
    pub fn reduce_to(&self, ctx: RingCtx) -> Result<Self> {
        if ctx.p != self.ctx.p || ctx.n > self.ctx.n {
            return Err(Error::ContextMismatch(format!("cannot reduce {} to {}", self.ctx, ctx)));
        }
        Ok(ModularInt::from_biguint(ctx, &self.lift()))
    }

    /// Canonical lift to a higher truncation level of the same prime.
    pub fn lift_to(&self, ctx: RingCtx) -> Result<Self> {
        if ctx.p != self.ctx.p || ctx.n < self.ctx.n {
            return Err(Error::ContextMismatch(format!("cannot lift {} to {}", self.ctx, ctx)));
        }
        Ok(ModularInt::from_biguint(ctx, &self.lift()))
    }
}

impl fmt::Display for ModularInt {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.lift())
    }
}

macro_rules! forward_binop {
    ($tr:ident, $m:ident, $inner:ident) => {
        impl $tr<&ModularInt> for &ModularInt {
            type Output = ModularInt;
            fn $m(self, o: &ModularInt) -> ModularInt {
                self.$inner(o)
            }
        }
        impl $tr<ModularInt> for ModularInt {
            type Output = ModularInt;
            fn $m(self, o: ModularInt) -> ModularInt {
                self.$inner(&o)
            }
        }
        impl $tr<&ModularInt> for ModularInt {
            type Output = ModularInt;
            fn $m(self, o: &ModularInt) -> ModularInt {
                self.$inner(o)
            }
        }
    };
}

forward_binop!(Add, add, add_ref);
forward_binop!(Sub, sub, sub_ref);
forward_binop!(Mul, mul, mul_ref);

impl Neg for ModularInt {
    type Output = ModularInt;
    fn neg(self) -> ModularInt {
        self.neg_ref()
    }
}

impl Neg for &ModularInt {
    type Output = ModularInt;
    fn neg(self) -> ModularInt {
        self.neg_ref()
    }
}

/// `val_p` of a residue; free-function form of [`ModularInt::val_p`].
pub fn val_p(x: &ModularInt) -> u32 {
    x.val_p()
}

/// Valuation of a nonzero integer; `None` for zero.
pub fn val_p_int(x: &BigInt, p: u64) -> Option<u32> {
    if x.is_zero() {
        return None;
    }
    let pb = BigInt::from(p);
    let mut v = x.abs();
    let mut e = 0;
    while (&v % &pb).is_zero() {
        v /= &pb;
        e += 1;
    }
    Some(e)
}

/// Legendre's formula: the exponent of `p` in `k!`.
pub fn factorial_val(k: u64, p: u64) -> u64 {
    let mut total = 0;
    let mut q = k;
    while q > 0 {
        q /= p;
        total += q;
    }
    total
}

/// `k!` as a big integer.
pub fn factorial(k: u64) -> BigUint {
    (1..=k).fold(BigUint::one(), |acc, i| acc * BigUint::from(i))
}

/// Generalized binomial coefficient `C(i, l) = i(i-1)...(i-l+1)/l!` for any integer `i`.
pub fn binom_int(i: i64, l: u64) -> BigInt {
    let mut num = BigInt::one();
    for s in 0..l {
        num *= BigInt::from(i) - BigInt::from(s);
    }
    num / BigInt::from_biguint(Sign::Plus, factorial(l))
}

/// Generalized binomial coefficient reduced into `ctx`.
pub fn binom(i: i64, l: u64, ctx: RingCtx) -> ModularInt {
    ModularInt::from_bigint(ctx, &binom_int(i, l))
}

/// Coefficient of the divided-power product `x^[a] x^[b] = C(a+b, a) x^[a+b]`,
/// taken componentwise over a multi-index.
pub fn pd_product_coeff(a: &[u32], b: &[u32], ctx: RingCtx) -> ModularInt {
    let len = a.len().max(b.len());
    let mut acc = BigInt::one();
    for i in 0..len {
        let ai = a.get(i).copied().unwrap_or(0) as i64;
        let bi = b.get(i).copied().unwrap_or(0) as u64;
        acc *= binom_int(ai + bi as i64, bi);
    }
    ModularInt::from_bigint(ctx, &acc)
}

/// Multinomial-style coefficient of the divided power of a divided monomial:
/// `(x^[k])^[j] = (kj)! / (j! (k!)^j) x^[kj]`.
pub fn pd_power_coeff(k: u64, j: u64) -> BigUint {
    if j == 0 {
        return BigUint::one();
    }
    let num = factorial(k * j);
    let den = factorial(j) * factorial(k).pow(j as u32);
    num / den
}

/// Coefficient of the ordinary power of a divided monomial:
/// `(x^[k])^j = (kj)! / (k!)^j x^[kj]`.
pub fn pd_ordinary_power_coeff(k: u64, j: u64) -> BigUint {
    factorial(k * j) / factorial(k).pow(j as u32)
}

/// Digits of the Teichmüller expansion `a = sum_s p^s [a_s]` in `Z/p^nZ`,
/// i.e. the Witt components of `a` viewed in `W_n(F_p)`.
pub fn teichmuller_digits(a: &ModularInt) -> Vec<u64> {
    let ctx = a.ctx();
    let p = ctx.p();
    let n = ctx.n();
    let mut digits = Vec::with_capacity(n as usize);
    let mut rest = a.lift_int();
    let modulus = BigInt::from_biguint(Sign::Plus, ctx.modulus());
    for s in 0..n {
        let scale = BigInt::from(p).pow(s);
        let digit = ((&rest / &scale).mod_floor(&BigInt::from(p))).to_u64().expect("digit");
        digits.push(digit);
        let t = teichmuller_lift(digit, p, n);
        rest = (rest - t * &scale).mod_floor(&modulus);
    }
    digits
}

/// The Teichmüller representative of `c mod p` in `Z/p^nZ`, i.e. `c^{p^{n-1}}`.
pub fn teichmuller_lift(c: u64, p: u64, n: u32) -> BigInt {
    let m = BigUint::from(p).pow(n);
    let e = BigUint::from(p).pow(n - 1);
    BigInt::from_biguint(Sign::Plus, BigUint::from(c % p).modpow(&e, &m))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn word_and_big_paths_agree() {
        let small = RingCtx::new(3, 20).unwrap();
        let big = RingCtx::new(3, 60).unwrap();
        assert!(small.modulus_word().is_some());
        assert!(big.modulus_word().is_none());
        let a = ModularInt::from_i64(big, -7);
        let b = ModularInt::from_i64(big, 11);
        let c = (&a * &b).reduce_to(small).unwrap();
        assert_eq!(c, ModularInt::from_i64(small, -77));
    }

    #[test]
    fn teichmuller_digits_roundtrip() {
        let ctx = RingCtx::new(5, 3).unwrap();
        for v in 0..125 {
            let a = ModularInt::from_i64(ctx, v);
            let digits = teichmuller_digits(&a);
            let mut acc = BigInt::zero();
            for (s, d) in digits.iter().enumerate() {
                acc += teichmuller_lift(*d, 5, 3) * BigInt::from(5u64).pow(s as u32);
            }
            assert_eq!(ModularInt::from_bigint(ctx, &acc), a);
        }
    }
}
