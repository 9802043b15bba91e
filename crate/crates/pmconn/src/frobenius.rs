//! The level-raising inverse image along a Frobenius lift, its iterate, the
//! twist decomposition for pure-power lifts and rank-1 Frobenius descent.
//!
//! For a lift `t'_j ↦ t_j^p + p a_j` the divided pullback of `dlog t'_j` is
//! `Σ_i M_{ji} dlog t_i` with `M_{ji} = (δ_{ij} t_j^p + t_i ∂_i a_j) / (t_j^p + p a_j)`,
//! and the raised object has matrices `Θ̃'_i = Σ_j F(Θ̃_j) M_{ji}` at level `m − 1`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::arith::{ModularInt, RingCtx};
use crate::cohomology::{hom_space, window_points};
use crate::connection::{Basis, Connection};
use crate::error::{Error, Result};
use crate::laurent::{Exponent, FrobLift, LaurentPoly, PolyMatrix};

/// A sequence of Frobenius lifts, one per level step.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftChain {
    lifts: Vec<FrobLift>,
}

impl LiftChain {
    /// Builds a chain; all lifts must share ctx and d.
    pub fn new(lifts: Vec<FrobLift>) -> Result<Self> {
        if let Some(f) = lifts.first() {
            if lifts.iter().any(|g| g.ctx() != f.ctx() || g.d() != f.d()) {
                return Err(Error::ContextMismatch("lifts in a chain must share ctx and d".into()));
            }
        }
        Ok(LiftChain { lifts })
    }

    /// `k` copies of the pure-power lift.
    pub fn pure(ctx: RingCtx, d: usize, k: usize) -> Self {
        LiftChain { lifts: vec![FrobLift::pure(ctx, d); k] }
    }

    /// The lifts, applied first to last.
    pub fn lifts(&self) -> &[FrobLift] {
        &self.lifts
    }

    /// Number of lifts.
    pub fn len(&self) -> usize {
        self.lifts.len()
    }

    /// Whether the chain is empty.
    pub fn is_empty(&self) -> bool {
        self.lifts.is_empty()
    }
}

/// The matrix `M` with `F̄*(dlog t'_j) = Σ_i M_{ji} dlog t_i`.
pub fn dlog_pullback_matrix(f: &FrobLift) -> Result<PolyMatrix> {
    let (ctx, d) = (f.ctx(), f.d());
    let p = ctx.p() as i64;
    let images = f.images();
    let mut m = PolyMatrix::zero(ctx, d, d, d);
    for (j, image) in images.iter().enumerate() {
        let inv = image.inverse()?;
        for i in 0..d {
            let mut num = f.a()[j].log_partial(i);
            if i == j {
                let mut e = Exponent::zero(d);
                e.0[j] = p;
                num.add_term(e, ModularInt::one(ctx));
            }
            m.set(j, i, num.mul(&inv));
        }
    }
    Ok(m)
}

/// The level-raising inverse image `F*C`, from level `m ≥ 1` to `m − 1`.
pub fn level_raise(c: &Connection, f: &FrobLift) -> Result<Connection> {
    if c.m() == 0 {
        return Err(Error::LevelMismatch("level raising needs m >= 1".into()));
    }
    if f.ctx() != c.ctx() || f.d() != c.d() {
        return Err(Error::ContextMismatch("lift and connection disagree on ctx or d".into()));
    }
    let (ctx, d, r) = (c.ctx(), c.d(), c.rank());
    let pulled: Vec<PolyMatrix> =
        c.theta().iter().map(|t| t.try_map(|x| x.frob_substitute(f))).collect::<Result<_>>()?;
    let theta = if f.is_pure() {
        pulled
    } else {
        let m = dlog_pullback_matrix(f)?;
        (0..d)
            .map(|i| {
                let mut acc = PolyMatrix::zero(ctx, d, r, r);
                for (j, t) in pulled.iter().enumerate() {
                    acc = acc.add(&t.scale(m.get(j, i)));
                }
                acc
            })
            .collect()
    };
    Connection::new(ctx, d, c.m() - 1, theta)
}

/// The composite of level raisings along a chain, one lift per level, down to level 0.
pub fn psi(c: &Connection, chain: &LiftChain) -> Result<Connection> {
    if chain.len() != c.m() as usize {
        return Err(Error::InvalidParameter(format!("chain has {} lifts for level {}", chain.len(), c.m())));
    }
    let mut cur = c.clone();
    for f in chain.lifts() {
        cur = level_raise(&cur, f)?;
    }
    Ok(cur)
}

/// One summand `(E, ∇ + p^{m−1} θ_a)` of the twist decomposition.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TwistSummand {
    /// The twist `a ∈ [0, p)^d`.
    pub a: Vec<u32>,
    /// The summand, at the level of the input.
    pub connection: Connection,
}

/// All twists `a ∈ [0, p)^d` in lexicographic order.
pub fn twists(p: u64, d: usize) -> Vec<Vec<u32>> {
    window_points(d, 0, p as i64 - 1).into_iter().map(|w| w.into_iter().map(|x| x as u32).collect()).collect()
}

/// Splits `F*C = ⊕_a t^a E` for a pure-power lift into the `p^d` summands
/// `(E, Θ̃_i + p^{m−1} a_i)`, each at level `m` on the target chart.
pub fn twist_decompose(c: &Connection, f: &FrobLift) -> Result<Vec<TwistSummand>> {
    if !f.is_pure() {
        return Err(Error::Hypothesis("twist decomposition needs the pure-power lift".into()));
    }
    if c.m() == 0 {
        return Err(Error::LevelMismatch("twist decomposition needs m >= 1".into()));
    }
    let (ctx, d, r) = (c.ctx(), c.d(), c.rank());
    let pm1 = ctx.p_pow(c.m() - 1);
    let id = PolyMatrix::identity(ctx, d, r);
    twists(ctx.p(), d)
        .into_iter()
        .map(|a| {
            let theta = c
                .theta()
                .iter()
                .zip(&a)
                .map(|(t, &ai)| t.add(&id.scale(&LaurentPoly::constant(pm1.mul_i64(ai as i64), d))))
                .collect();
            Ok(TwistSummand { a, connection: Connection::new(ctx, d, c.m(), theta)? })
        })
        .collect()
}

/// Checks on the window `[−D, D]^d` that each summand, transported by
/// `t'^k e ↦ t^{pk + a} e`, agrees with `level_raise(C, F)`.
pub fn twist_reassembly_check(c: &Connection, f: &FrobLift, window: i64) -> Result<bool> {
    let raised = level_raise(c, f)?;
    let (ctx, d, r) = (c.ctx(), c.d(), c.rank());
    let p = ctx.p() as i64;
    for s in twist_decompose(c, f)? {
        let a: Vec<i64> = s.a.iter().map(|&x| x as i64).collect();
        let push = |e: &Exponent| Exponent(e.0.iter().zip(&a).map(|(x, ai)| p * x + ai).collect());
        for k in window_points(d, -window, window) {
            for j in 0..r {
                let mut v = vec![LaurentPoly::zero(ctx, d); r];
                v[j] = LaurentPoly::monomial(ModularInt::one(ctx), &k);
                let pushed: Vec<LaurentPoly> = v.iter().map(|x| x.map_exponents(d, push)).collect();
                for i in 0..d {
                    let lhs: Vec<LaurentPoly> =
                        s.connection.nabla(i, &v, Basis::Dlog).iter().map(|x| x.map_exponents(d, push)).collect();
                    if lhs != raised.nabla(i, &pushed, Basis::Dlog) {
                        return Ok(false);
                    }
                }
            }
        }
    }
    Ok(true)
}

const RANDOM_COMBINATIONS: usize = 64;

/// Searches for an invertible `g` with entries in `[−D, D]^d` and
/// `gauge(level_raise(C', F), g) = C`.
///
/// The intertwining condition is linear in `g`: its solutions are the
/// horizontal sections of `Hom(C, F*C')`. In rank 1 a solution is a unit
/// exactly when its reduction mod `p` is a monomial, which is decided by
/// linear algebra over `F_p`; in higher rank random combinations are tried.
pub fn verify_pullback_iso(c_up: &Connection, c: &Connection, f: &FrobLift, window: i64) -> Result<Option<PolyMatrix>> {
    if c_up.rank() != c.rank() {
        return Err(Error::InvalidParameter("ranks differ".into()));
    }
    let raised = level_raise(c_up, f)?;
    if raised.m() != c.m() {
        return Err(Error::LevelMismatch(format!("raised level {} differs from {}", raised.m(), c.m())));
    }
    let gens = hom_space(c, &raised, window)?;
    let ctx = c.ctx();
    let verify = |g: &PolyMatrix| -> bool { g.det().is_unit() && raised.gauge(g).is_ok_and(|x| &x == c) };
    if c.rank() == 1 {
        let free: Vec<&LaurentPoly> = gens.iter().filter(|g| g.order == ctx.n()).map(|g| g.matrix.get(0, 0)).collect();
        if let Some(x) = unit_in_span(&free, ctx, c.d(), window) {
            let mut g = LaurentPoly::zero(ctx, c.d());
            for (coef, gen) in x.iter().zip(&free) {
                g = g.add(&gen.scalar_mul(coef));
            }
            let g = PolyMatrix::single(g);
            if verify(&g) {
                return Ok(Some(g));
            }
        }
        return Ok(None);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let modulus = ctx.modulus();
    for attempt in 0..RANDOM_COMBINATIONS {
        let mut g = PolyMatrix::zero(ctx, c.d(), c.rank(), c.rank());
        for (j, gen) in gens.iter().enumerate() {
            let x = if attempt == 0 && j == 0 {
                ModularInt::one(ctx)
            } else {
                let k: u64 = rng.gen();
                ModularInt::from_biguint(ctx, &(num_bigint::BigUint::from(k) % &modulus))
            };
            g = g.add(&gen.matrix.map(|e| e.scalar_mul(&x)));
        }
        if verify(&g) {
            return Ok(Some(g));
        }
    }
    Ok(None)
}

/// Coefficients `x` with `Σ x_j g_j ≡ c t^k (mod p)` for some monomial, if any.
fn unit_in_span(gens: &[&LaurentPoly], ctx: RingCtx, d: usize, window: i64) -> Option<Vec<ModularInt>> {
    let p = ctx.p() as u128;
    let pts = window_points(d, -window, window);
    let red = |x: &ModularInt| -> u128 { (x.lift() % num_bigint::BigUint::from(p)).try_into().unwrap_or(0) };
    // Rows are generators extended by an identity block recording the combination.
    let g = gens.len();
    let mut rows: Vec<Vec<u128>> = gens
        .iter()
        .enumerate()
        .map(|(j, f)| {
            let mut row: Vec<u128> = pts.iter().map(|e| red(&f.coeff(e))).collect();
            row.extend((0..g).map(|i| u128::from(i == j)));
            row
        })
        .collect();
    let inv = |a: u128| -> u128 { pow_mod(a, p - 2, p) };
    let cols = pts.len();
    let mut rank = 0;
    for col in 0..cols {
        let Some(piv) = (rank..rows.len()).find(|&r| rows[r][col] != 0) else { continue };
        rows.swap(rank, piv);
        let s = inv(rows[rank][col]);
        for x in rows[rank].iter_mut() {
            *x = *x * s % p;
        }
        for r in 0..rows.len() {
            if r != rank && rows[r][col] != 0 {
                let q = rows[r][col];
                for k in 0..rows[r].len() {
                    rows[r][k] = (rows[r][k] + p * p - q * rows[rank][k] % p) % p;
                }
            }
        }
        rank += 1;
    }
    // In reduced row echelon form a monomial lies in the span iff some row has a single nonzero entry.
    for row in rows.iter().take(rank) {
        if row[..cols].iter().filter(|&&x| x != 0).count() == 1 {
            return Some(row[cols..].iter().map(|&x| ModularInt::from_u64(ctx, x as u64)).collect());
        }
    }
    None
}

fn pow_mod(mut a: u128, mut e: u128, m: u128) -> u128 {
    let mut r = 1 % m;
    a %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = r * a % m;
        }
        a = a * a % m;
        e >>= 1;
    }
    r
}

/// Why a rank-1 level-0 connection does not descend.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DescentObstruction {
    /// An exponent `k ≠ 0` where `f mod p` has a nonzero coefficient.
    pub exponent: i64,
    /// That coefficient mod `p`.
    pub coefficient: u64,
}

impl DescentObstruction {
    /// Whether `p ∤ k`, so that no object of the form `F*C'` is isomorphic to the input.
    pub fn excludes_image(&self, p: u64) -> bool {
        self.exponent.rem_euclid(p as i64) != 0
    }
}

/// Outcome of [`descend_rank1`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DescentOutcome {
    /// `gauge(level_raise(C', F), witness) = C`.
    Descended {
        /// The level-1 object `C'`.
        connection: Connection,
        /// The verified gauge witness.
        witness: PolyMatrix,
    },
    /// The input is not quasi-nilpotent.
    Obstructed(DescentObstruction),
}

const DESCENT_MAX_STEPS: usize = 100_000;

/// Descends a rank-1 level-0 connection `∇_f` on the one-dimensional torus
/// along the pure-power lift.
///
/// Such a connection is quasi-nilpotent exactly when `f ≡ c (mod p)` for a
/// constant `c`; otherwise a coefficient of `f mod p` at `k ≠ 0` is returned.
/// Gauging by `t^N` with `N ≡ −c` makes `f ≡ 0 mod p`, then each monomial
/// `c_k t^k` with `p ∤ k` is removed by the unit `1 − (c_k/k) t^k` in order
/// of increasing valuation. The result is `∇_{h(t^p)}`, which descends to
/// `∇_h` at level 1. The witness log-degree is capped by `bound`.
pub fn descend_rank1(c: &Connection, f: &FrobLift, bound: i64) -> Result<DescentOutcome> {
    if c.d() != 1 || c.rank() != 1 || c.m() != 0 {
        return Err(Error::Unsupported("descent is implemented for rank 1, d = 1, level 0".into()));
    }
    if !f.is_pure() || f.ctx() != c.ctx() || f.d() != 1 {
        return Err(Error::Hypothesis("descent needs the pure-power lift on the same chart".into()));
    }
    let ctx = c.ctx();
    let p = ctx.p();
    let theta = c.theta()[0].get(0, 0).clone();
    let mod_p = |x: &ModularInt| -> u64 { (x.lift() % num_bigint::BigUint::from(p)).try_into().unwrap_or(0) };
    let mut bad: Vec<(i64, u64)> =
        theta.terms().filter(|(e, x)| e.0[0] != 0 && mod_p(x) != 0).map(|(e, x)| (e.0[0], mod_p(x))).collect();
    if !bad.is_empty() {
        // Prefer an exponent prime to p: it certifies that no pullback is isomorphic.
        bad.sort_by_key(|(k, _)| (k.rem_euclid(p as i64) == 0, k.abs(), *k));
        let (exponent, coefficient) = bad[0];
        return Ok(DescentOutcome::Obstructed(DescentObstruction { exponent, coefficient }));
    }
    let c0 = mod_p(&theta.constant_term());
    let shift = ((p - c0) % p) as i64;
    let mut g = LaurentPoly::monomial(ModularInt::one(ctx), &[shift]);
    let mut cur = c.gauge(&PolyMatrix::single(g.clone()))?;
    for _ in 0..DESCENT_MAX_STEPS {
        let h = cur.theta()[0].get(0, 0).clone();
        let pick = h
            .terms()
            .filter(|(e, _)| e.0[0].rem_euclid(p as i64) != 0)
            .min_by_key(|(e, x)| (x.val_p(), e.0[0].abs(), e.0[0]))
            .map(|(e, x)| (e.0[0], x.clone()));
        let Some((k, coef)) = pick else { break };
        let b = coef.mul_ref(&ModularInt::from_i64(ctx, k).inv()?).neg_ref();
        let mut step = LaurentPoly::one(ctx, 1);
        step.add_term(Exponent::from_slice(&[k]), b);
        g = g.mul(&step);
        if g.max_abs_exponent() > bound {
            return Err(Error::BoundExceeded(format!("descent witness exceeds log-degree {bound}")));
        }
        cur = cur.gauge(&PolyMatrix::single(step))?;
    }
    let h = cur.theta()[0].get(0, 0).clone();
    if h.terms().any(|(e, _)| e.0[0].rem_euclid(p as i64) != 0) {
        return Err(Error::BoundExceeded("descent normalization did not terminate".into()));
    }
    let down = h.map_exponents(1, |e| Exponent::from_slice(&[e.0[0] / p as i64]));
    let c_up = Connection::nabla_f(ctx, 1, down)?;
    let witness = PolyMatrix::single(g.inverse()?);
    if level_raise(&c_up, f)?.gauge(&witness)? != *c {
        return Err(Error::Hypothesis("descent witness failed verification".into()));
    }
    Ok(DescentOutcome::Descended { connection: c_up, witness })
}
