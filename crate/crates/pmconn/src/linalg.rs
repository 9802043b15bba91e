//! Dense linear algebra over `Z/p^nZ`: Smith normal form with transforms,
//! kernels, subquotients of complexes and rational ranks of integer lifts.
//!
//! `Z/p^nZ` is local, so the entry of least valuation divides every other
//! entry and the elimination never needs gcd steps. The elementary divisors
//! returned are exactly those of any integer lift, capped at `n`.

use num_bigint::BigInt;
use num_traits::Zero;

use crate::arith::{ModularInt, RingCtx};

/// A dense matrix over `Z/p^nZ`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ZMat {
    ctx: RingCtx,
    rows: usize,
    cols: usize,
    data: Vec<ModularInt>,
}

impl ZMat {
    /// The zero matrix.
    pub fn zero(ctx: RingCtx, rows: usize, cols: usize) -> Self {
        ZMat { ctx, rows, cols, data: vec![ModularInt::zero(ctx); rows * cols] }
    }

    /// The identity matrix.
    pub fn identity(ctx: RingCtx, r: usize) -> Self {
        let mut m = ZMat::zero(ctx, r, r);
        for i in 0..r {
            m.set(i, i, ModularInt::one(ctx));
        }
        m
    }

    /// Builds a matrix from machine integers.
    pub fn from_i64(ctx: RingCtx, rows: &[Vec<i64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        let mut m = ZMat::zero(ctx, r, c);
        for (i, row) in rows.iter().enumerate() {
            for (j, x) in row.iter().enumerate() {
                m.set(i, j, ModularInt::from_i64(ctx, *x));
            }
        }
        m
    }

    /// The coefficient context.
    pub fn ctx(&self) -> RingCtx {
        self.ctx
    }

    /// Number of rows.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of columns.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Entry `(i, j)`.
    pub fn get(&self, i: usize, j: usize) -> &ModularInt {
        &self.data[i * self.cols + j]
    }

    /// Sets entry `(i, j)`.
    pub fn set(&mut self, i: usize, j: usize, x: ModularInt) {
        self.data[i * self.cols + j] = x;
    }

    /// Column `j` as a vector.
    pub fn column(&self, j: usize) -> Vec<ModularInt> {
        (0..self.rows).map(|i| self.get(i, j).clone()).collect()
    }

    /// Whether every entry vanishes.
    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|x| x.is_zero())
    }

    /// Matrix product.
    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows, "dimension mismatch");
        let mut m = ZMat::zero(self.ctx, self.rows, o.cols);
        for i in 0..self.rows {
            for k in 0..self.cols {
                let a = self.get(i, k);
                if a.is_zero() {
                    continue;
                }
                for j in 0..o.cols {
                    let b = o.get(k, j);
                    if !b.is_zero() {
                        let s = m.get(i, j).add_ref(&a.mul_ref(b));
                        m.set(i, j, s);
                    }
                }
            }
        }
        m
    }

    /// Matrix-vector product.
    pub fn apply(&self, v: &[ModularInt]) -> Vec<ModularInt> {
        (0..self.rows)
            .map(|i| {
                let mut acc = ModularInt::zero(self.ctx);
                for (j, x) in v.iter().enumerate() {
                    acc = acc.add_ref(&self.get(i, j).mul_ref(x));
                }
                acc
            })
            .collect()
    }

    /// Vertical concatenation.
    pub fn vstack(blocks: &[ZMat]) -> Self {
        let cols = blocks[0].cols;
        let rows = blocks.iter().map(|b| b.rows).sum();
        let mut data = Vec::with_capacity(rows * cols);
        for b in blocks {
            assert_eq!(b.cols, cols);
            data.extend(b.data.iter().cloned());
        }
        ZMat { ctx: blocks[0].ctx, rows, cols, data }
    }

    fn swap_rows(&mut self, a: usize, b: usize) {
        if a != b {
            for j in 0..self.cols {
                self.data.swap(a * self.cols + j, b * self.cols + j);
            }
        }
    }

    fn swap_cols(&mut self, a: usize, b: usize) {
        if a != b {
            for i in 0..self.rows {
                self.data.swap(i * self.cols + a, i * self.cols + b);
            }
        }
    }

    /// `row_dst -= q row_src`.
    fn row_axpy(&mut self, dst: usize, src: usize, q: &ModularInt) {
        for j in 0..self.cols {
            let s = self.get(src, j);
            if !s.is_zero() {
                let v = self.get(dst, j).sub_ref(&q.mul_ref(s));
                self.set(dst, j, v);
            }
        }
    }

    /// `col_dst -= q col_src`.
    fn col_axpy(&mut self, dst: usize, src: usize, q: &ModularInt) {
        for i in 0..self.rows {
            let s = self.get(i, src);
            if !s.is_zero() {
                let v = self.get(i, dst).sub_ref(&q.mul_ref(s));
                self.set(i, dst, v);
            }
        }
    }

    fn scale_col(&mut self, j: usize, u: &ModularInt) {
        for i in 0..self.rows {
            let v = self.get(i, j).mul_ref(u);
            self.set(i, j, v);
        }
    }

    fn scale_row(&mut self, i: usize, u: &ModularInt) {
        for j in 0..self.cols {
            let v = self.get(i, j).mul_ref(u);
            self.set(i, j, v);
        }
    }
}

/// Unit part `u` with `a = p^v u` for an entry of valuation `v`.
fn unit_part(a: &ModularInt, v: u32) -> ModularInt {
    let ctx = a.ctx();
    let q = a.lift() / num_bigint::BigUint::from(ctx.p()).pow(v);
    ModularInt::from_biguint(ctx, &q)
}

/// `b / a` where `v_p(a) <= v_p(b)`, given the unit part of `a`.
fn exact_quotient(b: &ModularInt, u_inv: &ModularInt, v: u32) -> ModularInt {
    unit_part(b, v).mul_ref(u_inv)
}

/// Smith normal form `U A V = diag(p^{e_1}, ..., p^{e_k}, 0, ...)`.
#[derive(Clone, Debug)]
pub struct Snf {
    /// Exponents `e_1 <= e_2 <= ...` of the nonzero diagonal entries.
    pub exponents: Vec<u32>,
    /// The left transform, when tracked.
    pub u: Option<ZMat>,
    /// The right transform, when tracked.
    pub v: Option<ZMat>,
    /// The inverse of the right transform, when tracked.
    pub v_inv: Option<ZMat>,
}

/// Which transforms [`snf`] records.
#[derive(Clone, Copy, Debug, Default)]
pub struct Track {
    /// Record `U`.
    pub u: bool,
    /// Record `V`.
    pub v: bool,
    /// Record `V^{-1}`.
    pub v_inv: bool,
}

/// Computes the Smith normal form.
pub fn snf(a: &ZMat, track: Track) -> Snf {
    let ctx = a.ctx;
    let n = ctx.n();
    let mut m = a.clone();
    let mut u = track.u.then(|| ZMat::identity(ctx, a.rows));
    let mut v = track.v.then(|| ZMat::identity(ctx, a.cols));
    let mut vi = track.v_inv.then(|| ZMat::identity(ctx, a.cols));
    let mut exps = Vec::new();
    let kmax = a.rows.min(a.cols);
    for k in 0..kmax {
        let mut best: Option<(usize, usize, u32)> = None;
        'search: for i in k..m.rows {
            for j in k..m.cols {
                let x = m.get(i, j);
                if x.is_zero() {
                    continue;
                }
                let val = x.val_p();
                if best.is_none_or(|(_, _, b)| val < b) {
                    best = Some((i, j, val));
                    if val == 0 {
                        break 'search;
                    }
                }
            }
        }
        let Some((pi, pj, val)) = best else { break };
        debug_assert!(val < n);
        m.swap_rows(k, pi);
        if let Some(u) = u.as_mut() {
            u.swap_rows(k, pi);
        }
        m.swap_cols(k, pj);
        if let Some(v) = v.as_mut() {
            v.swap_cols(k, pj);
        }
        if let Some(vi) = vi.as_mut() {
            vi.swap_rows(k, pj);
        }
        let unit = unit_part(m.get(k, k), val);
        let u_inv = unit.inv().expect("unit part is invertible");
        for i in k + 1..m.rows {
            if m.get(i, k).is_zero() {
                continue;
            }
            let q = exact_quotient(m.get(i, k), &u_inv, val);
            m.row_axpy(i, k, &q);
            if let Some(u) = u.as_mut() {
                u.row_axpy(i, k, &q);
            }
        }
        for j in k + 1..m.cols {
            if m.get(k, j).is_zero() {
                continue;
            }
            let q = exact_quotient(m.get(k, j), &u_inv, val);
            m.col_axpy(j, k, &q);
            if let Some(v) = v.as_mut() {
                v.col_axpy(j, k, &q);
            }
            if let Some(vi) = vi.as_mut() {
                // The inverse of `col_j -= q col_k` acts as `row_k += q row_j`.
                vi.row_axpy(k, j, &q.neg_ref());
            }
        }
        m.scale_col(k, &u_inv);
        if let Some(v) = v.as_mut() {
            v.scale_col(k, &u_inv);
        }
        if let Some(vi) = vi.as_mut() {
            vi.scale_row(k, &unit);
        }
        exps.push(val);
    }
    // Pivots were chosen with non-decreasing valuation, so the exponents are sorted.
    Snf { exponents: exps, u, v, v_inv: vi }
}

/// Elementary divisor exponents of the cokernel of `A: (Z/p^n)^cols → (Z/p^n)^rows`,
/// omitting trivial ones; `n` stands for a free summand.
pub fn cokernel_exponents(a: &ZMat) -> Vec<u32> {
    let n = a.ctx.n();
    let s = snf(a, Track::default());
    let mut out: Vec<u32> = s.exponents.iter().copied().filter(|&e| e > 0).collect();
    out.extend(std::iter::repeat_n(n, a.rows - s.exponents.len()));
    out.sort_unstable();
    out
}

/// Generators of `ker A` with their additive orders `p^e`.
pub fn kernel(a: &ZMat) -> Vec<(Vec<ModularInt>, u32)> {
    let ctx = a.ctx;
    let n = ctx.n();
    let s = snf(a, Track { v: true, ..Track::default() });
    let v = s.v.unwrap();
    let mut out = Vec::new();
    for j in 0..a.cols {
        let e = s.exponents.get(j).copied().unwrap_or(n);
        if e == 0 {
            continue;
        }
        let scale = ctx.p_pow(n - e);
        out.push((v.column(j).iter().map(|x| x.mul_ref(&scale)).collect(), e));
    }
    out
}

/// Elementary divisors of `ker(next) / im(prev)` on a space of dimension `dim`.
/// Either map may be absent (zero).
pub fn subquotient_exponents(prev: Option<&ZMat>, next: Option<&ZMat>, ctx: RingCtx, dim: usize) -> Vec<u32> {
    let n = ctx.n();
    let (kexp, vinv) = match next {
        Some(d) if d.rows > 0 => {
            let s = snf(d, Track { v_inv: true, ..Track::default() });
            let mut e: Vec<u32> = (0..dim).map(|j| s.exponents.get(j).copied().unwrap_or(n)).collect();
            for x in e.iter_mut() {
                *x = (*x).min(n);
            }
            (e, s.v_inv)
        }
        _ => (vec![n; dim], None),
    };
    let b = match (prev, vinv.as_ref()) {
        (Some(b), Some(vi)) => Some(vi.mul(b)),
        (Some(b), None) => Some(b.clone()),
        _ => None,
    };
    let live: Vec<usize> = (0..dim).filter(|&j| kexp[j] > 0).collect();
    let extra = b.as_ref().map_or(0, |b| b.cols);
    let mut m = ZMat::zero(ctx, live.len(), extra + live.len());
    for (r, &j) in live.iter().enumerate() {
        let shift = n - kexp[j];
        if let Some(b) = b.as_ref() {
            for c in 0..b.cols {
                let x = b.get(j, c);
                if !x.is_zero() {
                    debug_assert!(x.val_p() >= shift, "image must lie in the kernel");
                    m.set(r, c, unit_part(x, shift));
                }
            }
        }
        m.set(r, extra + r, ctx.p_pow(kexp[j]));
    }
    if live.is_empty() {
        return Vec::new();
    }
    cokernel_exponents(&m)
}

/// Rank over `Q` of the symmetric integer lift of a matrix.
pub fn rational_rank(a: &ZMat) -> usize {
    let mut m: Vec<Vec<BigInt>> =
        (0..a.rows).map(|i| (0..a.cols).map(|j| a.get(i, j).lift_symmetric()).collect()).collect();
    rank_bigint(&mut m)
}

/// Rank over `Q` of an integer matrix by fraction-free elimination.
pub fn rank_bigint(m: &mut [Vec<BigInt>]) -> usize {
    let rows = m.len();
    if rows == 0 {
        return 0;
    }
    let cols = m[0].len();
    let mut rank = 0;
    for c in 0..cols {
        let Some(piv) = (rank..rows).find(|&r| !m[r][c].is_zero()) else { continue };
        m.swap(rank, piv);
        for r in rank + 1..rows {
            if m[r][c].is_zero() {
                continue;
            }
            let (top, bottom) = m.split_at_mut(r);
            let (pivot, row) = (&top[rank], &mut bottom[0]);
            let a = pivot[c].clone();
            let b = row[c].clone();
            for (x, y) in row[c..cols].iter_mut().zip(&pivot[c..cols]) {
                *x = &*x * &a - y * &b;
            }
        }
        rank += 1;
        if rank == rows {
            break;
        }
    }
    rank
}
