//! Seeded random generators for suite inputs.

use pmconn::dops::{DiffOp, MultiIndex};
use pmconn::{Connection, LaurentPoly, ModularInt, PolyMatrix, RingCtx, WittVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The suite RNG for a case seed.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// A uniformly random element of `Z/p^n`.
pub fn scalar(rng: &mut ChaCha8Rng, ctx: RingCtx) -> ModularInt {
    let bound = ctx.modulus_word().map(|m| m.min(u64::MAX as u128) as u64).unwrap_or(u64::MAX);
    ModularInt::from_u64(ctx, rng.gen_range(0..bound))
}

/// A random exponent vector with entries in `[-r, r]`.
pub fn exponent(rng: &mut ChaCha8Rng, d: usize, r: i64) -> Vec<i64> {
    (0..d).map(|_| rng.gen_range(-r..=r)).collect()
}

/// A random Laurent polynomial with up to `terms` monomials of exponents in `[-r, r]`.
pub fn poly(rng: &mut ChaCha8Rng, ctx: RingCtx, d: usize, terms: usize, r: i64) -> LaurentPoly {
    let mut f = LaurentPoly::zero(ctx, d);
    for _ in 0..rng.gen_range(1..=terms.max(1)) {
        let e = exponent(rng, d, r);
        f = f.add(&LaurentPoly::monomial(scalar(rng, ctx), &e));
    }
    f
}

/// A random multi-index of total order at most `k`.
pub fn multi_index(rng: &mut ChaCha8Rng, d: usize, k: u32) -> MultiIndex {
    let mut left = rng.gen_range(0..=k);
    let mut l = vec![0u32; d];
    for (i, slot) in l.iter_mut().enumerate() {
        let take = if i + 1 == d { left } else { rng.gen_range(0..=left) };
        *slot = take;
        left -= take;
    }
    l
}

/// A random operator of order at most `k` with up to three terms.
pub fn diff_op(rng: &mut ChaCha8Rng, ctx: RingCtx, d: usize, m: u32, k: u32) -> DiffOp {
    let mut p = DiffOp::zero(ctx, d, m);
    for _ in 0..rng.gen_range(1..=3) {
        let c = poly(rng, ctx, d, 2, 2);
        p = p.add(&DiffOp::term(&c, m, &multi_index(rng, d, k)));
    }
    p
}

/// A random rank-2 connection on the one-dimensional torus with `Θ̃ ≡ 0 mod p`.
pub fn rank2_divisible(rng: &mut ChaCha8Rng, ctx: RingCtx, m: u32) -> Connection {
    let p = ctx.p();
    let rows = (0..2).map(|_| (0..2).map(|_| poly(rng, ctx, 1, 2, 2).scalar_mul_i64(p as i64)).collect()).collect();
    Connection::new(ctx, 1, m, vec![PolyMatrix::from_rows(rows).expect("square")]).expect("valid")
}

/// A random rank-2 upper-triangular connection with diagonal in `p·(Z/p^n)` and strictly upper
/// entry a random polynomial.
pub fn rank2_triangular(rng: &mut ChaCha8Rng, ctx: RingCtx, m: u32) -> Connection {
    let p = ctx.p() as i64;
    let a = LaurentPoly::constant(scalar(rng, ctx).mul_i64(p), 1);
    let b = LaurentPoly::constant(scalar(rng, ctx).mul_i64(p), 1);
    let u = poly(rng, ctx, 1, 2, 2);
    let theta = PolyMatrix::from_rows(vec![vec![a, u], vec![LaurentPoly::zero(ctx, 1), b]]).expect("square");
    Connection::new(ctx, 1, m, vec![theta]).expect("valid")
}

/// A random Witt vector of length `n` with sparse components.
pub fn witt_vector(rng: &mut ChaCha8Rng, p: u64, n: u32) -> WittVector {
    let fp = RingCtx::new(p, 1).expect("prime");
    let comps = (0..n)
        .map(|_| {
            let mut x = LaurentPoly::zero(fp, 1);
            for _ in 0..rng.gen_range(0..=2) {
                let c = ModularInt::from_u64(fp, rng.gen_range(0..p));
                x = x.add(&LaurentPoly::monomial(c, &[rng.gen_range(-2..=2)]));
            }
            x
        })
        .collect();
    WittVector::from_components(p, comps).expect("valid components")
}
