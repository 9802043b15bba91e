//! De Rham cohomology of connections on the torus chart, Hom spaces, the
//! rank-1 triviality test and the comparison across the level-raising functor.
//!
//! A connection whose matrix entries are single monomials compatible with a
//! shift vector `s` splits into weight pieces: the vectors `t^{w+s_k} e_k`
//! span a copy of `(Z/p^n)^r` on which `∇_i` acts by the constant matrix
//! `A_i(w) = p^m diag((w + s)_i) + C_i`. The de Rham complex is then the
//! direct sum over `w` of the Koszul complexes of `A_1(w), ..., A_d(w)`.
//! Other connections are handled on a box-truncated subcomplex.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};

use serde::Serialize;

use crate::arith::{val_p_int, ModularInt, RingCtx};
use crate::connection::{Basis, Connection, ExtensionPresentation, Section};
use crate::error::{Error, Result};
use crate::frobenius::{level_raise, twist_decompose};
use crate::laurent::{Exponent, FrobLift, LaurentPoly, PolyMatrix};
use crate::linalg::{kernel, rational_rank, subquotient_exponents, ZMat};

/// A torus character, indexing one weight piece of the de Rham complex.
pub type Weight = Vec<i64>;

/// All integer points of the box `[lo, hi]^d`, in lexicographic order.
pub fn window_points(d: usize, lo: i64, hi: i64) -> Vec<Weight> {
    let mut out = vec![Vec::new()];
    for _ in 0..d {
        let mut next = Vec::with_capacity(out.len() * (hi - lo + 1).max(0) as usize);
        for w in &out {
            for x in lo..=hi {
                let mut v = w.clone();
                v.push(x);
                next.push(v);
            }
        }
        out = next;
    }
    out
}

/// Elementary divisors of one weight piece.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct WeightDivisors {
    /// The weight, or the smallest exponent of a coupled block.
    pub w: Weight,
    /// Exponents `e` of the cyclic summands `Z/p^e`, sorted.
    pub divisors: Vec<u32>,
}

/// How a cohomology report was computed.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    /// Exact weight decoupling.
    Weight,
    /// Box-truncated subcomplex split into coupled blocks.
    Banded,
}

/// The groups `H^i` of a connection on a weight window.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CohomologyReport {
    /// The degree `i`.
    pub degree: usize,
    /// The window radius `D`.
    pub window: i64,
    /// Nonzero pieces, by weight.
    pub weights: Vec<WeightDivisors>,
    /// Number of free summands `Z/p^n` in the window.
    pub free_rank: usize,
    /// Whether the window `D + 2` gives the same divisors.
    pub stable: bool,
    /// Computation method.
    pub method: Method,
}

impl CohomologyReport {
    /// All divisors, sorted.
    pub fn all_divisors(&self) -> Vec<u32> {
        let mut v: Vec<u32> = self.weights.iter().flat_map(|w| w.divisors.iter().copied()).collect();
        v.sort_unstable();
        v
    }

    /// Divisors of the piece of weight `w`.
    pub fn at(&self, w: &[i64]) -> &[u32] {
        self.weights.iter().find(|x| x.w == w).map(|x| x.divisors.as_slice()).unwrap_or(&[])
    }
}

/// Shift vectors exhibiting a connection as weight-homogeneous.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Homogeneous {
    /// `s_k` for each basis vector.
    pub shifts: Vec<Exponent>,
    /// The constant matrices `C_i`.
    pub consts: Vec<ZMat>,
}

/// Finds shifts with every entry `(k, l)` of every `Θ̃_i` a multiple of `t^{s_k − s_l}`.
pub fn homogeneous_form(c: &Connection) -> Option<Homogeneous> {
    let (r, d, ctx) = (c.rank(), c.d(), c.ctx());
    let mut edges: Vec<Vec<(usize, Exponent)>> = vec![Vec::new(); r];
    for t in c.theta() {
        for k in 0..r {
            for l in 0..r {
                let f = t.get(k, l);
                match f.len() {
                    0 => {}
                    1 => {
                        let (e, _) = f.terms().next().unwrap();
                        edges[l].push((k, e.clone()));
                        edges[k].push((l, e.scale(-1)));
                    }
                    _ => return None,
                }
            }
        }
    }
    let mut shifts: Vec<Option<Exponent>> = vec![None; r];
    for root in 0..r {
        if shifts[root].is_some() {
            continue;
        }
        shifts[root] = Some(Exponent::zero(d));
        let mut queue = VecDeque::from([root]);
        while let Some(l) = queue.pop_front() {
            let sl = shifts[l].clone().unwrap();
            for (k, e) in &edges[l] {
                let want = sl.add(e);
                match &shifts[*k] {
                    Some(s) if *s != want => return None,
                    Some(_) => {}
                    None => {
                        shifts[*k] = Some(want);
                        queue.push_back(*k);
                    }
                }
            }
        }
    }
    let shifts: Vec<Exponent> = shifts.into_iter().map(Option::unwrap).collect();
    let consts = c
        .theta()
        .iter()
        .map(|t| {
            let mut m = ZMat::zero(ctx, r, r);
            for k in 0..r {
                for l in 0..r {
                    if let Some((_, v)) = t.get(k, l).terms().next() {
                        m.set(k, l, v.clone());
                    }
                }
            }
            m
        })
        .collect();
    Some(Homogeneous { shifts, consts })
}

/// The matrices `A_i(w)` of the weight-`w` piece.
pub fn weight_blocks(c: &Connection, h: &Homogeneous, w: &[i64]) -> Vec<ZMat> {
    let pm = c.pm();
    (0..c.d())
        .map(|i| {
            let mut a = h.consts[i].clone();
            for (k, s) in h.shifts.iter().enumerate() {
                let x = a.get(k, k).add_ref(&pm.mul_i64(w[i] + s.0[i]));
                a.set(k, k, x);
            }
            a
        })
        .collect()
}

fn subsets_by_size(d: usize) -> Vec<Vec<u32>> {
    let mut by = vec![Vec::new(); d + 1];
    for mask in 0u32..(1 << d) {
        by[mask.count_ones() as usize].push(mask);
    }
    by
}

/// Sign of `dlog t_i ∧ ω_I` relative to `ω_{I ∪ {i}}`.
fn wedge_sign(mask: u32, i: usize) -> i64 {
    if (mask & ((1u32 << i) - 1)).count_ones().is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// The Koszul complex of commuting matrices, as boundary maps `d_0, ..., d_{d−1}`.
pub fn koszul(blocks: &[ZMat]) -> Vec<ZMat> {
    let d = blocks.len();
    let ctx = blocks[0].ctx();
    let r = blocks[0].rows();
    let subsets = subsets_by_size(d);
    let index: Vec<HashMap<u32, usize>> =
        subsets.iter().map(|s| s.iter().enumerate().map(|(j, m)| (*m, j)).collect()).collect();
    (0..d)
        .map(|q| {
            let mut m = ZMat::zero(ctx, subsets[q + 1].len() * r, subsets[q].len() * r);
            for (src, &mask) in subsets[q].iter().enumerate() {
                for (i, a) in blocks.iter().enumerate() {
                    if mask & (1 << i) != 0 {
                        continue;
                    }
                    let tgt = index[q + 1][&(mask | (1 << i))];
                    let sign = wedge_sign(mask, i);
                    for k in 0..r {
                        for l in 0..r {
                            let x = a.get(k, l);
                            if !x.is_zero() {
                                m.set(tgt * r + k, src * r + l, x.mul_i64(sign));
                            }
                        }
                    }
                }
            }
            m
        })
        .collect()
}

fn degree_divisors(maps: &[ZMat], ctx: RingCtx, dims: &[usize], i: usize) -> Vec<u32> {
    let prev = if i == 0 { None } else { maps.get(i - 1) };
    let next = maps.get(i);
    subquotient_exponents(prev, next, ctx, dims[i])
}

/// The de Rham complex restricted to a box window, in the log basis.
#[derive(Clone, Debug)]
pub struct DeRhamComplex {
    /// Window radius for degree 0; degree `q` uses radius `D + qδ`.
    pub window: i64,
    /// The coupling range `δ`.
    pub delta: i64,
    /// Basis labels `(form subset, exponent, basis vector)` per degree.
    pub bases: Vec<Vec<(u32, Weight, usize)>>,
    /// Boundary matrices `∇_q : C^q → C^{q+1}`.
    pub boundaries: Vec<ZMat>,
}

/// Builds the box-truncated de Rham complex; each `∇_q` is exact on its box.
pub fn de_rham_complex(c: &Connection, window: i64) -> Result<DeRhamComplex> {
    if !c.is_integrable() {
        return Err(Error::NotIntegrable);
    }
    let (d, r, ctx) = (c.d(), c.rank(), c.ctx());
    let delta = c.max_abs_exponent().max(1);
    let subsets = subsets_by_size(d);
    let mut bases = Vec::with_capacity(d + 1);
    let mut index: Vec<HashMap<(u32, Weight, usize), usize>> = Vec::with_capacity(d + 1);
    for (q, masks) in subsets.iter().enumerate() {
        let rad = window + q as i64 * delta;
        let pts = window_points(d, -rad, rad);
        let mut b = Vec::with_capacity(masks.len() * pts.len() * r);
        for &mask in masks {
            for w in &pts {
                for k in 0..r {
                    b.push((mask, w.clone(), k));
                }
            }
        }
        index.push(b.iter().cloned().enumerate().map(|(j, key)| (key, j)).collect());
        bases.push(b);
    }
    let mut boundaries = Vec::with_capacity(d);
    for q in 0..d {
        let mut m = ZMat::zero(ctx, bases[q + 1].len(), bases[q].len());
        for (src, (mask, w, l)) in bases[q].iter().enumerate() {
            let mut v = vec![LaurentPoly::zero(ctx, d); r];
            v[*l] = LaurentPoly::monomial(ModularInt::one(ctx), w);
            for i in 0..d {
                if mask & (1 << i) != 0 {
                    continue;
                }
                let sign = wedge_sign(*mask, i);
                let img = c.nabla(i, &v, Basis::Dlog);
                for (k, f) in img.iter().enumerate() {
                    for (e, x) in f.terms() {
                        let key = (mask | (1 << i), e.0.to_vec(), k);
                        let tgt = *index[q + 1].get(&key).expect("box window closed under ∇");
                        let y = m.get(tgt, src).add_ref(&x.mul_i64(sign));
                        m.set(tgt, src, y);
                    }
                }
            }
        }
        boundaries.push(m);
    }
    Ok(DeRhamComplex { window, delta, bases, boundaries })
}

/// Coupled blocks of a box complex, as basis indices per degree.
fn coupled_blocks(cx: &DeRhamComplex) -> Vec<Vec<Vec<usize>>> {
    let d = cx.bases.len() - 1;
    let offsets: Vec<usize> = cx
        .bases
        .iter()
        .scan(0, |acc, b| {
            let o = *acc;
            *acc += b.len();
            Some(o)
        })
        .collect();
    let total: usize = cx.bases.iter().map(|b| b.len()).sum();
    let mut parent: Vec<usize> = (0..total).collect();
    fn find(p: &mut [usize], x: usize) -> usize {
        let mut x = x;
        while p[x] != x {
            p[x] = p[p[x]];
            x = p[x];
        }
        x
    }
    for (q, m) in cx.boundaries.iter().enumerate() {
        for row in 0..m.rows() {
            for col in 0..m.cols() {
                if !m.get(row, col).is_zero() {
                    let (a, b) = (find(&mut parent, offsets[q + 1] + row), find(&mut parent, offsets[q] + col));
                    if a != b {
                        parent[a] = b;
                    }
                }
            }
        }
    }
    let mut comps: BTreeMap<usize, Vec<Vec<usize>>> = BTreeMap::new();
    for (q, (basis, off)) in cx.bases.iter().zip(&offsets).enumerate() {
        for j in 0..basis.len() {
            let root = find(&mut parent, off + j);
            comps.entry(root).or_insert_with(|| vec![Vec::new(); d + 1])[q].push(j);
        }
    }
    comps.into_values().collect()
}

/// One exact block of the banded computation.
#[derive(Clone, Debug, PartialEq, Eq)]
struct BandedBlock {
    /// Smallest degree-`i` weight of the block.
    w: Weight,
    /// Largest `|w_j|` over the degree-`i` weights of the block.
    reach: i64,
    divisors: Vec<u32>,
}

/// Divisors of `H^i` on the whole components of the untruncated complex whose degree-`i`
/// weights lie in `[−D, D]^d`.
///
/// Blocks are taken from the box of radius `D + 2δ`. A block is whole when the same basis
/// elements form a block at radius `D + 4δ`, since every coupling has range at most `δ` and the
/// degree-`q` box has radius `R + qδ`. Blocks cut by the box edge are dropped.
fn banded_blocks(c: &Connection, i: usize, window: i64) -> Result<Vec<BandedBlock>> {
    let delta = c.max_abs_exponent().max(1);
    let cx = de_rham_complex(c, window + 2 * delta)?;
    let outer = de_rham_complex(c, window + 4 * delta)?;
    let ctx = c.ctx();
    let d = c.d();
    let mut outer_id: HashMap<(u32, Weight, usize), usize> = HashMap::new();
    let outer_blocks = coupled_blocks(&outer);
    for (id, members) in outer_blocks.iter().enumerate() {
        for (q, idx) in members.iter().enumerate() {
            for &j in idx {
                outer_id.insert(outer.bases[q][j].clone(), id);
            }
        }
    }
    let mut out = Vec::new();
    for members in coupled_blocks(&cx) {
        if members[i].is_empty() {
            continue;
        }
        let size: usize = members.iter().map(|m| m.len()).sum();
        let ids: BTreeSet<usize> = members
            .iter()
            .enumerate()
            .flat_map(|(q, idx)| idx.iter().map(move |&j| (q, j)))
            .map(|(q, j)| outer_id.get(&cx.bases[q][j]).copied().unwrap_or(usize::MAX))
            .collect();
        let whole = ids.len() == 1
            && ids
                .iter()
                .all(|&id| id != usize::MAX && outer_blocks[id].iter().map(|m| m.len()).sum::<usize>() == size);
        if !whole {
            continue;
        }
        let sub = |q: usize| -> ZMat {
            let m = &cx.boundaries[q];
            let mut s = ZMat::zero(ctx, members[q + 1].len(), members[q].len());
            for (a, &row) in members[q + 1].iter().enumerate() {
                for (b, &col) in members[q].iter().enumerate() {
                    s.set(a, b, m.get(row, col).clone());
                }
            }
            s
        };
        let prev = (i > 0).then(|| sub(i - 1));
        let next = (i < d).then(|| sub(i));
        let divisors = subquotient_exponents(prev.as_ref(), next.as_ref(), ctx, members[i].len());
        let ws = members[i].iter().map(|&j| &cx.bases[i][j].1);
        let reach = ws.clone().flat_map(|w| w.iter().map(|x| x.abs())).max().unwrap_or(0);
        if !divisors.is_empty() && reach <= window {
            let w = ws.min().cloned().unwrap_or_default();
            out.push(BandedBlock { w, reach, divisors });
        }
    }
    out.sort_by(|a, b| (&a.w, &a.divisors).cmp(&(&b.w, &b.divisors)));
    Ok(out)
}

/// Divisors of `H^i` at one weight of a weight-homogeneous connection.
pub fn weight_divisors(c: &Connection, h: &Homogeneous, i: usize, w: &[i64]) -> Vec<u32> {
    let blocks = weight_blocks(c, h, w);
    let maps = koszul(&blocks);
    let r = c.rank();
    let dims: Vec<usize> = subsets_by_size(c.d()).iter().map(|s| s.len() * r).collect();
    degree_divisors(&maps, c.ctx(), &dims, i)
}

/// Computes `H^i` on the weight window `[−D, D]^d`.
pub fn compute_h(c: &Connection, i: usize, window: i64) -> Result<CohomologyReport> {
    if !c.is_integrable() {
        return Err(Error::NotIntegrable);
    }
    if i > c.d() {
        return Err(Error::InvalidParameter(format!("degree {i} exceeds dimension {}", c.d())));
    }
    let n = c.ctx().n();
    let (weights, stable, method) = match homogeneous_form(c) {
        Some(h) => {
            let weights: Vec<WeightDivisors> = window_points(c.d(), -window, window)
                .into_iter()
                .filter_map(|w| {
                    let divisors = weight_divisors(c, &h, i, &w);
                    (!divisors.is_empty()).then_some(WeightDivisors { w, divisors })
                })
                .collect();
            // Weight pieces are computed exactly, so enlarging the window cannot change them.
            (weights, true, Method::Weight)
        }
        None => {
            let a = banded_blocks(c, i, window)?;
            let b = banded_blocks(c, i, window + 2)?;
            // Whole blocks inside the window must not depend on the window.
            let inner: Vec<BandedBlock> = b.into_iter().filter(|x| x.reach <= window).collect();
            let stable = a == inner;
            let a = a.into_iter().map(|x| WeightDivisors { w: x.w, divisors: x.divisors }).collect();
            (a, stable, Method::Banded)
        }
    };
    let free_rank = weights.iter().flat_map(|w| w.divisors.iter()).filter(|&&e| e == n).count();
    Ok(CohomologyReport { degree: i, window, weights, free_rank, stable, method })
}

/// Horizontal sections supported in `[−D, D]^d`, with their additive orders `p^e`.
pub fn horizontal_sections(c: &Connection, window: i64) -> Result<Vec<(Section, u32)>> {
    let cx = de_rham_complex(c, window)?;
    let (ctx, d, r) = (c.ctx(), c.d(), c.rank());
    let to_section = |v: &[ModularInt]| -> Section {
        let mut s = vec![LaurentPoly::zero(ctx, d); r];
        for (j, x) in v.iter().enumerate() {
            if !x.is_zero() {
                let (_, w, k) = &cx.bases[0][j];
                s[*k].add_term(Exponent::from_slice(w), x.clone());
            }
        }
        s
    };
    let gens = match cx.boundaries.first() {
        Some(m) => kernel(m),
        None => Vec::new(),
    };
    Ok(gens.iter().map(|(v, e)| (to_section(v), *e)).collect())
}

/// One generator of a Hom space.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct HomGenerator {
    /// The morphism as an `r_2 × r_1` matrix.
    pub matrix: PolyMatrix,
    /// Its additive order is `p^order`.
    pub order: u32,
}

/// Generators of `Hom(C_1, C_2)` with entries in `[−D, D]`, as horizontal
/// sections of the internal hom.
pub fn hom_space(c1: &Connection, c2: &Connection, window: i64) -> Result<Vec<HomGenerator>> {
    if c1.m() != c2.m() {
        return Err(Error::LevelMismatch(format!("levels {} and {} differ", c1.m(), c2.m())));
    }
    let h = c1.internal_hom(c2)?;
    let (r1, r2) = (c1.rank(), c2.rank());
    Ok(horizontal_sections(&h, window)?
        .into_iter()
        .map(|(s, order)| {
            let mut m = PolyMatrix::zero(c1.ctx(), c1.d(), r2, r1);
            for a in 0..r2 {
                for b in 0..r1 {
                    m.set(a, b, s[a * r1 + b].clone());
                }
            }
            HomGenerator { matrix: m, order }
        })
        .collect())
}

/// Outcome of [`rank1_trivial_test`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Triviality {
    /// `gauge(∇_f, witness) = (O, p^m d)`.
    Iso {
        /// The gauge unit.
        witness: LaurentPoly,
    },
    /// No unit gauges `∇_f` to the trivial object.
    NotIso {
        /// The exponent whose coefficient has too small a valuation.
        exponent: i64,
        /// The valuation found.
        valuation: u32,
        /// The least valuation that would be solvable.
        required: u32,
    },
    /// The solver hit its degree or step bound.
    Undetermined,
}

const TRIVIALITY_MAX_DEGREE: i64 = 1 << 12;
const TRIVIALITY_MAX_STEPS: usize = 100_000;

/// Decides whether `(O, p^m d + f dlog t)` on the one-dimensional torus is
/// isomorphic to `(O, p^m d)`.
///
/// The test is exact: the coefficient `f_0` must have valuation at least `m`
/// and `f_k` for `k ≠ 0` at least `m + 1 + v_p(k)`, capped at `n`. When the
/// test passes, the unit is built by repeatedly gauging away the monomial of
/// least valuation with `1 + b t^k`, `b = −f_k / (p^m k)`, and finally
/// `t^N` with `p^m N = −f_0`.
pub fn rank1_trivial_test(f: &LaurentPoly, m: u32, ctx: RingCtx) -> Result<Triviality> {
    if f.d() != 1 || f.ctx() != ctx {
        return Err(Error::InvalidParameter("rank-1 triviality needs a one-variable polynomial over ctx".into()));
    }
    let n = ctx.n();
    let p = ctx.p();
    let required = |k: i64| -> u32 {
        if k == 0 {
            m.min(n)
        } else {
            let v = val_p_int(&k.into(), p).unwrap_or(0);
            (m + 1 + v).min(n)
        }
    };
    for (e, c) in f.terms() {
        let k = e.0[0];
        if c.val_p() < required(k) {
            return Ok(Triviality::NotIso { exponent: k, valuation: c.val_p(), required: required(k) });
        }
    }
    let c0 = Connection::nabla_f(ctx, m, f.clone())?;
    let mut cur = c0.clone();
    let mut g = LaurentPoly::one(ctx, 1);
    for _ in 0..TRIVIALITY_MAX_STEPS {
        let h = cur.theta()[0].get(0, 0).clone();
        let pick = h
            .terms()
            .filter(|(e, _)| e.0[0] != 0)
            .min_by_key(|(e, c)| (c.val_p(), e.0[0].abs(), e.0[0]))
            .map(|(e, c)| (e.0[0], c.clone()));
        let Some((k, c)) = pick else { break };
        // b = −c / (p^m k), exact since v(c) ≥ m + 1 + v(k).
        let vk = val_p_int(&k.into(), p).unwrap_or(0);
        let unit_k = ModularInt::from_i64(ctx, k).div_p_pow(vk)?.lift_to(ctx)?.inv()?;
        let b = c.div_p_pow(m + vk)?.lift_to(ctx)?.mul_ref(&unit_k).neg_ref();
        let mut step = LaurentPoly::one(ctx, 1);
        step.add_term(Exponent::from_slice(&[k]), b);
        g = g.mul(&step);
        if g.max_abs_exponent() > TRIVIALITY_MAX_DEGREE {
            return Ok(Triviality::Undetermined);
        }
        cur = cur.gauge(&PolyMatrix::single(step))?;
    }
    let h = cur.theta()[0].get(0, 0).clone();
    if h.terms().any(|(e, _)| e.0[0] != 0) {
        return Ok(Triviality::Undetermined);
    }
    let c = h.constant_term();
    if !c.is_zero() {
        // p^m N = −c with N determined modulo p^{n−m}.
        let big = c.div_p_pow(m)?.neg_ref().lift_symmetric();
        let nv: i64 = i64::try_from(big).map_err(|_| Error::BoundExceeded("shift exponent too large".into()))?;
        g = g.shift(&Exponent::from_slice(&[nv]));
    }
    let check = c0.gauge(&PolyMatrix::single(g.clone()))?;
    if check != Connection::trivial(ctx, 1, m, 1) {
        return Err(Error::Hypothesis("triviality witness failed verification".into()));
    }
    Ok(Triviality::Iso { witness: g })
}

/// Kill bound of one twist summand in one degree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TwistBound {
    /// The twist `a`.
    pub a: Vec<u32>,
    /// The degree `i`.
    pub degree: usize,
    /// Largest divisor exponent found on the window.
    pub max_exponent: u32,
    /// The bound `min(4l(m−1)(i+1), n)`.
    pub bound: u32,
    /// The sharper intermediate bound `min(2l(m−1)(i+1), n)`.
    pub sharp_bound: u32,
    /// Whether `max_exponent ≤ bound`.
    pub holds: bool,
}

/// Result of [`compare_raised_cohomology`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RaisedCohomologyReport {
    /// Extension length `l`.
    pub length: usize,
    /// Level `m` of the input.
    pub level: u32,
    /// Per weight, `H^i(F*C)` at `pw + a` equals `H^i` of the `a`-twist at `w`, all `i`.
    pub decomposition: bool,
    /// `H^0(C) ⊗ Q` and `H^0(F*C) ⊗ Q` have equal per-weight ranks, and twists `a ≠ 0` contribute none.
    pub h0_rational: bool,
    /// At finite level, `H^0(C)` and the weights `pw` of `H^0(F*C)` have equal divisors.
    pub h0_untwisted: bool,
    /// The `a = 0` summand has the cohomology of `C` in every degree.
    pub untwisted_matches: bool,
    /// Kill bounds for the twists `a ≠ 0`.
    pub bounds: Vec<TwistBound>,
}

impl RaisedCohomologyReport {
    /// Whether every comparison and bound holds.
    pub fn passes(&self) -> bool {
        self.decomposition
            && self.h0_rational
            && self.h0_untwisted
            && self.untwisted_matches
            && self.bounds.iter().all(|b| b.holds)
    }
}

/// Compares the cohomology of `C` with that of its level raising along a pure lift.
pub fn compare_raised_cohomology(
    pres: &ExtensionPresentation,
    f: &FrobLift,
    window: i64,
) -> Result<RaisedCohomologyReport> {
    let report = crate::connection::check_presentation(pres)?;
    if let crate::connection::NilpotenceKind::Invalid(why) = report.kind {
        return Err(Error::MalformedPresentation(why));
    }
    let c = &pres.connection;
    let m = c.m();
    let n = c.ctx().n();
    let l = report.length as u32;
    let raised = level_raise(c, f)?;
    let twists = twist_decompose(c, f)?;
    let hc =
        homogeneous_form(c).ok_or_else(|| Error::Unsupported("comparison needs weight-homogeneous matrices".into()))?;
    let hr = homogeneous_form(&raised)
        .ok_or_else(|| Error::Unsupported("raised object is not weight-homogeneous".into()))?;
    let ht: Vec<Homogeneous> = twists
        .iter()
        .map(|t| {
            homogeneous_form(&t.connection).ok_or_else(|| Error::Unsupported("twist is not weight-homogeneous".into()))
        })
        .collect::<Result<_>>()?;
    // The raised shifts are p times the original ones, so weight w' of a twist sits at p w' + a.
    let p = c.ctx().p() as i64;
    let d = c.d();
    let r = c.rank();
    let mut decomposition = true;
    let mut h0_rational = true;
    let mut h0_untwisted = true;
    let mut untwisted_matches = true;
    let mut maxima: BTreeMap<(Vec<u32>, usize), u32> = BTreeMap::new();
    for w in window_points(d, -window, window) {
        for (t, h) in twists.iter().zip(&ht) {
            let target: Weight = w.iter().zip(&t.a).map(|(x, a)| p * x + *a as i64).collect();
            let is_zero_twist = t.a.iter().all(|&a| a == 0);
            for i in 0..=d {
                let lhs = weight_divisors(&raised, &hr, i, &target);
                let rhs = weight_divisors(&t.connection, h, i, &w);
                if lhs != rhs {
                    decomposition = false;
                }
                if is_zero_twist {
                    if rhs != weight_divisors(c, &hc, i, &w) {
                        untwisted_matches = false;
                    }
                    if i == 0 && lhs != weight_divisors(c, &hc, 0, &w) {
                        h0_untwisted = false;
                    }
                } else {
                    let mx = rhs.iter().copied().max().unwrap_or(0);
                    let e = maxima.entry((t.a.clone(), i)).or_insert(0);
                    *e = (*e).max(mx);
                }
            }
            let raised_rank = r - rational_rank(&ZMat::vstack(&weight_blocks(&raised, &hr, &target)));
            let twist_rank = r - rational_rank(&ZMat::vstack(&weight_blocks(&t.connection, h, &w)));
            let base_rank = r - rational_rank(&ZMat::vstack(&weight_blocks(c, &hc, &w)));
            if raised_rank != twist_rank
                || (is_zero_twist && twist_rank != base_rank)
                || (!is_zero_twist && twist_rank != 0)
            {
                h0_rational = false;
            }
        }
    }
    let bounds = maxima
        .into_iter()
        .map(|((a, i), max_exponent)| {
            let base = l * m.saturating_sub(1) * (i as u32 + 1);
            let bound = (4 * base).min(n);
            TwistBound {
                a,
                degree: i,
                max_exponent,
                bound,
                sharp_bound: (2 * base).min(n),
                holds: max_exponent <= bound,
            }
        })
        .collect();
    Ok(RaisedCohomologyReport {
        length: report.length,
        level: m,
        decomposition,
        h0_rational,
        h0_untwisted,
        untwisted_matches,
        bounds,
    })
}

/// Whether `H^i((O, θ_a)) = 0` for all `i` over `Z/pZ`, on the window.
pub fn higgs_vanishing(p: u64, a: &[i64], window: i64) -> Result<bool> {
    let ctx = RingCtx::new(p, 1)?;
    let f = a.iter().map(|&x| LaurentPoly::from_i64(ctx, a.len(), x)).collect();
    let c = Connection::rank1(ctx, 1, f)?;
    for i in 0..=a.len() {
        if !compute_h(&c, i, window)?.weights.is_empty() {
            return Ok(false);
        }
    }
    Ok(true)
}
