//! Free modules with integrable p^m-connections on the torus chart.
//!
//! A connection of level `m` and rank `r` is stored through its matrices
//! `Θ̃_i` against the logarithmic basis, so that on a column vector `s`
//! `∇(s) = Σ_i (p^m t_i∂_i s + Θ̃_i s) dlog t_i`.
//! The `dt` basis matrices are `Θ_i = t_i^{-1} Θ̃_i`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::arith::{ModularInt, RingCtx};
use crate::error::{Error, Result};
use crate::laurent::{Exponent, LaurentPoly, PolyMatrix};

/// Which 1-form basis a matrix or operator refers to.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Basis {
    /// `dlog t_i = dt_i / t_i`.
    Dlog,
    /// `dt_i`.
    Dt,
}

/// A column vector of Laurent polynomials.
pub type Section = Vec<LaurentPoly>;

/// A free module of rank `r` with a p^m-connection.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Connection {
    ctx: RingCtx,
    d: usize,
    m: u32,
    rank: usize,
    theta: Vec<PolyMatrix>,
}

pub(crate) fn section_zero(ctx: RingCtx, d: usize, r: usize) -> Section {
    vec![LaurentPoly::zero(ctx, d); r]
}

pub(crate) fn section_is_zero(v: &[LaurentPoly]) -> bool {
    v.iter().all(|f| f.is_zero())
}

/// The standard basis vector `e_k`.
pub fn basis_vector(ctx: RingCtx, d: usize, r: usize, k: usize) -> Section {
    let mut v = section_zero(ctx, d, r);
    v[k] = LaurentPoly::one(ctx, d);
    v
}

impl Connection {
    /// Builds a connection from log-basis matrices.
    pub fn new(ctx: RingCtx, d: usize, m: u32, theta: Vec<PolyMatrix>) -> Result<Self> {
        if theta.len() != d || d == 0 {
            return Err(Error::InvalidParameter(format!("need {d} >= 1 connection matrices, got {}", theta.len())));
        }
        let rank = theta[0].rows();
        for t in &theta {
            if t.rows() != rank || t.cols() != rank {
                return Err(Error::InvalidParameter("connection matrices must be square of equal size".into()));
            }
            if t.ctx() != ctx || t.d() != d {
                return Err(Error::ContextMismatch("connection matrix entries disagree with ctx or d".into()));
            }
        }
        Ok(Connection { ctx, d, m, rank, theta })
    }

    /// Builds a connection from `dt` basis matrices, `Θ̃_i = t_i Θ_i`.
    pub fn from_dt(ctx: RingCtx, d: usize, m: u32, theta_dt: Vec<PolyMatrix>) -> Result<Self> {
        let theta = theta_dt.iter().enumerate().map(|(i, t)| t.scale(&LaurentPoly::var(ctx, d, i))).collect();
        Connection::new(ctx, d, m, theta)
    }

    /// Builds a connection from matrices in the given basis.
    pub fn from_basis(ctx: RingCtx, d: usize, m: u32, basis: Basis, theta: Vec<PolyMatrix>) -> Result<Self> {
        match basis {
            Basis::Dlog => Connection::new(ctx, d, m, theta),
            Basis::Dt => Connection::from_dt(ctx, d, m, theta),
        }
    }

    /// The rank-1 connection `p^m d + Σ f_i dlog t_i`.
    pub fn rank1(ctx: RingCtx, m: u32, f: Vec<LaurentPoly>) -> Result<Self> {
        let d = f.len();
        Connection::new(ctx, d, m, f.into_iter().map(PolyMatrix::single).collect())
    }

    /// The rank-1 connection `∇_f = p^m d + f t^{-1} dt` on the one-dimensional torus.
    pub fn nabla_f(ctx: RingCtx, m: u32, f: LaurentPoly) -> Result<Self> {
        Connection::rank1(ctx, m, vec![f])
    }

    /// The trivial object `(O^r, p^m d)`.
    pub fn trivial(ctx: RingCtx, d: usize, m: u32, r: usize) -> Self {
        Connection { ctx, d, m, rank: r, theta: vec![PolyMatrix::zero(ctx, d, r, r); d] }
    }

    /// The coefficient context.
    pub fn ctx(&self) -> RingCtx {
        self.ctx
    }

    /// Number of torus coordinates.
    pub fn d(&self) -> usize {
        self.d
    }

    /// The level exponent `m` (the connection has level `-m`).
    pub fn m(&self) -> u32 {
        self.m
    }

    /// The rank.
    pub fn rank(&self) -> usize {
        self.rank
    }

    /// Log-basis matrices `Θ̃_i`.
    pub fn theta(&self) -> &[PolyMatrix] {
        &self.theta
    }

    /// The `dt` basis matrix `Θ_i = t_i^{-1} Θ̃_i`.
    pub fn theta_dt(&self, i: usize) -> PolyMatrix {
        let mut e = Exponent::zero(self.d);
        e.0[i] = -1;
        self.theta[i].map(|f| f.shift(&e))
    }

    /// Matrices in the requested basis.
    pub fn theta_in(&self, basis: Basis) -> Vec<PolyMatrix> {
        match basis {
            Basis::Dlog => self.theta.clone(),
            Basis::Dt => (0..self.d).map(|i| self.theta_dt(i)).collect(),
        }
    }

    /// The scalar `p^m` of the derivation term (zero for Higgs objects).
    pub fn pm(&self) -> ModularInt {
        self.ctx.p_pow(self.m)
    }

    /// Whether `p^m = 0`, so that the object is a Higgs module.
    pub fn is_higgs(&self) -> bool {
        self.m >= self.ctx.n()
    }

    /// The same matrices viewed at another level.
    pub fn with_level(&self, m: u32) -> Self {
        Connection { m, ..self.clone() }
    }

    /// Replaces every matrix entry by the image of a map.
    pub fn map_entries(&self, f: impl Fn(&LaurentPoly) -> LaurentPoly) -> Self {
        Connection { theta: self.theta.iter().map(|t| t.map(&f)).collect(), ..self.clone() }
    }

    fn check_compatible(&self, o: &Self) -> Result<()> {
        if self.ctx != o.ctx || self.d != o.d {
            return Err(Error::ContextMismatch("connections over different charts".into()));
        }
        if self.m != o.m {
            return Err(Error::LevelMismatch(format!("levels {} and {}", self.m, o.m)));
        }
        Ok(())
    }

    /// The curvature matrices `K_ij`, `i < j`.
    pub fn curvature(&self) -> Vec<((usize, usize), PolyMatrix)> {
        let pm = self.pm();
        let mut out = Vec::new();
        for i in 0..self.d {
            for j in i + 1..self.d {
                let a = self.theta[j].map(|f| f.log_partial(i).scalar_mul(&pm));
                let b = self.theta[i].map(|f| f.log_partial(j).scalar_mul(&pm));
                let comm = self.theta[i].mul(&self.theta[j]).sub(&self.theta[j].mul(&self.theta[i]));
                out.push(((i, j), a.sub(&b).add(&comm)));
            }
        }
        out
    }

    /// Whether every curvature matrix vanishes.
    pub fn is_integrable(&self) -> bool {
        self.curvature().iter().all(|(_, k)| k.is_zero())
    }

    fn require_integrable(&self) -> Result<()> {
        if self.is_integrable() {
            Ok(())
        } else {
            Err(Error::NotIntegrable)
        }
    }

    /// The gauge transform `Θ̃'_i = g^{-1}(Θ̃_i g + p^m t_i∂_i g)`.
    pub fn gauge(&self, g: &PolyMatrix) -> Result<Self> {
        if g.rows() != self.rank || g.cols() != self.rank {
            return Err(Error::InvalidParameter("gauge matrix has the wrong size".into()));
        }
        let ginv = g.inverse()?;
        Ok(self.gauge_with_inverse(g, &ginv))
    }

    /// Gauge transform given both `g` and its inverse.
    pub fn gauge_with_inverse(&self, g: &PolyMatrix, ginv: &PolyMatrix) -> Self {
        let pm = self.pm();
        let theta = (0..self.d)
            .map(|i| {
                let dg = g.map(|f| f.log_partial(i).scalar_mul(&pm));
                ginv.mul(&self.theta[i].mul(g).add(&dg))
            })
            .collect();
        Connection { theta, ..self.clone() }
    }

    /// The `i`-th component of `∇` on a section, in the requested basis.
    pub fn nabla(&self, i: usize, v: &[LaurentPoly], basis: Basis) -> Section {
        let pm = self.pm();
        let mut out = self.theta[i].apply(v);
        for (o, f) in out.iter_mut().zip(v) {
            *o = o.add(&f.log_partial(i).scalar_mul(&pm));
        }
        match basis {
            Basis::Dlog => out,
            Basis::Dt => {
                let mut e = Exponent::zero(self.d);
                e.0[i] = -1;
                out.iter().map(|f| f.shift(&e)).collect()
            }
        }
    }

    /// Applies `θ^a = Π_i θ_i^{a_i}` to a section, where `θ_i` is the `i`-th
    /// component of `∇` in the requested basis.
    pub fn theta_power_apply(&self, a: &[u32], v: &[LaurentPoly], basis: Basis) -> Result<Section> {
        if a.len() != self.d || v.len() != self.rank {
            return Err(Error::InvalidParameter("multi-index or section has the wrong length".into()));
        }
        self.require_integrable()?;
        let mut cur = v.to_vec();
        for (i, &k) in a.iter().enumerate() {
            for _ in 0..k {
                if section_is_zero(&cur) {
                    return Ok(cur);
                }
                cur = self.nabla(i, &cur, basis);
            }
        }
        Ok(cur)
    }

    /// Searches for the quasi-nilpotence exponent of the standard generators.
    pub fn is_quasi_nilpotent(&self) -> Result<QnReport> {
        self.require_integrable()?;
        let bound = self.qn_bound();
        let mut per_generator = Vec::with_capacity(self.rank);
        for k in 0..self.rank {
            match self.qn_generator(k, bound) {
                QnGenerator::Vanishes(n) => per_generator.push(n),
                QnGenerator::Cycle(cert) => {
                    return Ok(QnReport { status: QnStatus::False(cert), per_generator, bound });
                }
                QnGenerator::Undetermined => {
                    return Ok(QnReport { status: QnStatus::Undetermined, per_generator, bound });
                }
            }
        }
        let n = per_generator.iter().copied().max().unwrap_or(0);
        let margin = (self.ctx.p() as u128)
            .checked_pow(self.ctx.n())
            .map(|q| q * self.d as u128 + n as u128)
            .unwrap_or(u128::MAX);
        Ok(QnReport { status: QnStatus::True { n, margin }, per_generator, bound })
    }

    /// The iteration cap used by [`Connection::is_quasi_nilpotent`].
    pub fn qn_bound(&self) -> u32 {
        let deg = self.theta.iter().map(|t| t.max_abs_exponent()).max().unwrap_or(0) as u64;
        let base = 4 * self.ctx.n() as u64 * self.rank as u64 * self.d as u64 * (1 + deg) * self.ctx.p();
        base.clamp(8, 2048) as u32
    }

    /// Iterates `θ_i` alone on a generator, returning a periodic orbit if one appears.
    fn qn_axis(&self, k: usize, i: usize, bound: u32) -> Option<QnCycle> {
        let mut cur = basis_vector(self.ctx, self.d, self.rank, k);
        let mut seen: Vec<Section> = Vec::new();
        let at = |l: usize| -> Vec<u32> {
            let mut a = vec![0; self.d];
            a[i] = l as u32;
            a
        };
        for l in 0..=bound as usize {
            if section_is_zero(&cur) || cur.iter().map(|f| f.len()).sum::<usize>() > 200_000 {
                return None;
            }
            let neg: Section = cur.iter().map(|f| f.neg()).collect();
            if let Some(j) = seen.iter().position(|w| *w == cur || *w == neg) {
                return Some(QnCycle {
                    generator: k,
                    from: at(j),
                    to: at(l),
                    value: cur.iter().map(|f| f.to_string()).collect(),
                    sign: if seen[j] == cur { 1 } else { -1 },
                });
            }
            seen.push(cur.clone());
            cur = self.nabla(i, &cur, Basis::Dt);
        }
        None
    }

    fn qn_generator(&self, k: usize, bound: u32) -> QnGenerator {
        if self.d > 1 {
            if let Some(cert) = (0..self.d).find_map(|i| self.qn_axis(k, i, bound)) {
                return QnGenerator::Cycle(cert);
            }
        }
        let mut layer: BTreeMap<Vec<u32>, Section> = BTreeMap::new();
        layer.insert(vec![0; self.d], basis_vector(self.ctx, self.d, self.rank, k));
        let mut seen: Vec<(Vec<u32>, Section)> = Vec::new();
        const TERM_CAP: usize = 200_000;
        for l in 0..=bound {
            layer.retain(|_, v| !section_is_zero(v));
            if layer.is_empty() {
                return QnGenerator::Vanishes(l);
            }
            for (a, v) in &layer {
                let neg: Section = v.iter().map(|f| f.neg()).collect();
                for (b, w) in &seen {
                    let dominated = b.iter().zip(a).all(|(x, y)| x <= y) && b != a;
                    if dominated && (w == v || *w == neg) {
                        return QnGenerator::Cycle(QnCycle {
                            generator: k,
                            from: b.clone(),
                            to: a.clone(),
                            value: v.iter().map(|f| f.to_string()).collect(),
                            sign: if w == v { 1 } else { -1 },
                        });
                    }
                }
            }
            let size: usize = layer.values().flat_map(|v| v.iter().map(|f| f.len())).sum();
            if size > TERM_CAP {
                return QnGenerator::Undetermined;
            }
            if self.d == 1 {
                seen.extend(layer.iter().map(|(a, v)| (a.clone(), v.clone())));
            } else {
                seen = layer.iter().map(|(a, v)| (a.clone(), v.clone())).collect();
            }
            let mut next: BTreeMap<Vec<u32>, Section> = BTreeMap::new();
            for (a, v) in &layer {
                for i in 0..self.d {
                    let mut b = a.clone();
                    b[i] += 1;
                    // Integrability makes θ^b independent of the path taken.
                    next.entry(b).or_insert_with(|| self.nabla(i, v, Basis::Dt));
                }
            }
            layer = next;
        }
        QnGenerator::Undetermined
    }

    /// Change of coordinates `t_i = c_i Π_j t'_j^{M_ij}`.
    pub fn coordinate_change(&self, tr: &MonomialTransform) -> Result<Self> {
        if tr.matrix.len() != self.d || tr.scalars.len() != self.d {
            return Err(Error::InvalidParameter("transform dimension differs from chart".into()));
        }
        let det = int_det(&tr.matrix);
        if det.abs() != 1 {
            return Err(Error::NotInvertible(format!("exponent matrix has determinant {det}")));
        }
        if tr.scalars.iter().any(|c| !c.is_unit()) {
            return Err(Error::NotInvertible("scalings must be units".into()));
        }
        let images: Vec<LaurentPoly> =
            (0..self.d).map(|i| LaurentPoly::monomial(tr.scalars[i].clone(), &tr.matrix[i])).collect();
        let subst: Vec<PolyMatrix> =
            self.theta.iter().map(|t| t.try_map(|f| f.substitute(&images))).collect::<Result<_>>()?;
        let theta = (0..self.d)
            .map(|j| {
                let mut acc = PolyMatrix::zero(self.ctx, self.d, self.rank, self.rank);
                for (i, s) in subst.iter().enumerate() {
                    let c = tr.matrix[i][j];
                    if c != 0 {
                        acc = acc.add(&s.map(|f| f.scalar_mul_i64(c)));
                    }
                }
                acc
            })
            .collect();
        Ok(Connection { theta, ..self.clone() })
    }

    /// The tensor product, with matrices `Θ̃_1 ⊗ 1 + 1 ⊗ Θ̃_2`.
    pub fn tensor(&self, o: &Self) -> Result<Self> {
        self.check_compatible(o)?;
        let i1 = PolyMatrix::identity(self.ctx, self.d, self.rank);
        let i2 = PolyMatrix::identity(self.ctx, self.d, o.rank);
        let theta = (0..self.d).map(|i| self.theta[i].kron(&i2).add(&i1.kron(&o.theta[i]))).collect();
        Ok(Connection { ctx: self.ctx, d: self.d, m: self.m, rank: self.rank * o.rank, theta })
    }

    /// The dual, with matrices `-Θ̃^T`.
    pub fn dual(&self) -> Self {
        Connection { theta: self.theta.iter().map(|t| t.transpose().map(|f| f.neg())).collect(), ..self.clone() }
    }

    /// The internal hom `Hom(self, o)`, on `r_2 x r_1` matrices flattened row-major,
    /// with `∇(φ) = ∇_2 ∘ φ − φ ∘ ∇_1`.
    pub fn internal_hom(&self, o: &Self) -> Result<Self> {
        self.check_compatible(o)?;
        let i1 = PolyMatrix::identity(self.ctx, self.d, self.rank);
        let i2 = PolyMatrix::identity(self.ctx, self.d, o.rank);
        let theta = (0..self.d).map(|i| o.theta[i].kron(&i1).sub(&i2.kron(&self.theta[i].transpose()))).collect();
        Ok(Connection { ctx: self.ctx, d: self.d, m: self.m, rank: self.rank * o.rank, theta })
    }

    /// The sign twist `(E, θ) ↦ (E, −θ)`.
    pub fn iota(&self) -> Self {
        self.map_entries(|f| f.neg())
    }

    /// Direct sum.
    pub fn direct_sum(&self, o: &Self) -> Result<Self> {
        self.check_compatible(o)?;
        let r = self.rank + o.rank;
        let theta = (0..self.d)
            .map(|i| {
                let mut t = PolyMatrix::zero(self.ctx, self.d, r, r);
                for a in 0..self.rank {
                    for b in 0..self.rank {
                        t.set(a, b, self.theta[i].get(a, b).clone());
                    }
                }
                for a in 0..o.rank {
                    for b in 0..o.rank {
                        t.set(self.rank + a, self.rank + b, o.theta[i].get(a, b).clone());
                    }
                }
                t
            })
            .collect();
        Ok(Connection { ctx: self.ctx, d: self.d, m: self.m, rank: r, theta })
    }

    /// Largest log-degree of the matrix entries.
    pub fn max_abs_exponent(&self) -> i64 {
        self.theta.iter().map(|t| t.max_abs_exponent()).max().unwrap_or(0)
    }

    /// Coefficients projected to a lower truncation level.
    pub fn reduce_to(&self, ctx: RingCtx) -> Result<Self> {
        let theta = self.theta.iter().map(|t| t.try_map(|f| f.reduce_to(ctx))).collect::<Result<_>>()?;
        Ok(Connection { ctx, theta, ..self.clone() })
    }

    /// Coefficients lifted canonically to a higher truncation level.
    pub fn lift_to(&self, ctx: RingCtx) -> Result<Self> {
        let theta = self.theta.iter().map(|t| t.try_map(|f| f.lift_to(ctx))).collect::<Result<_>>()?;
        Ok(Connection { ctx, theta, ..self.clone() })
    }
}

/// Integer determinant by cofactor expansion.
pub(crate) fn int_det(m: &[Vec<i64>]) -> i64 {
    let n = m.len();
    if n == 0 {
        return 1;
    }
    if n == 1 {
        return m[0][0];
    }
    let mut acc = 0;
    for c in 0..n {
        let minor: Vec<Vec<i64>> = m[1..]
            .iter()
            .map(|row| row.iter().enumerate().filter(|(j, _)| *j != c).map(|(_, x)| *x).collect())
            .collect();
        let s = if c % 2 == 0 { 1 } else { -1 };
        acc += s * m[0][c] * int_det(&minor);
    }
    acc
}

/// A monomial coordinate change `t_i = c_i Π_j t'_j^{M_ij}` with `M ∈ GL_d(Z)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MonomialTransform {
    /// The exponent matrix `M`.
    pub matrix: Vec<Vec<i64>>,
    /// The unit scalings `c_i`.
    pub scalars: Vec<ModularInt>,
}

impl MonomialTransform {
    /// The identity transform.
    pub fn identity(ctx: RingCtx, d: usize) -> Self {
        MonomialTransform {
            matrix: (0..d).map(|i| (0..d).map(|j| (i == j) as i64).collect()).collect(),
            scalars: vec![ModularInt::one(ctx); d],
        }
    }
}

/// A certificate that `θ^{from + k(to − from)}(e) = ±^k θ^{from}(e) ≠ 0` for all `k`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QnCycle {
    /// Generator index.
    pub generator: usize,
    /// Earlier multi-index.
    pub from: Vec<u32>,
    /// Later multi-index with the same value up to sign.
    pub to: Vec<u32>,
    /// The repeating nonzero value.
    pub value: Vec<String>,
    /// `+1` or `-1`.
    pub sign: i32,
}

/// Three-valued outcome of the quasi-nilpotence search.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum QnStatus {
    /// All `θ^a(e_k)` with `|a| >= n` vanish; `margin = n + p^n d` covers arbitrary sections.
    True {
        /// Smallest vanishing order valid for every generator.
        n: u32,
        /// The margin for arbitrary sections.
        margin: u128,
    },
    /// A periodic nonzero orbit was found.
    False(QnCycle),
    /// The search reached its cap.
    Undetermined,
}

/// Result of [`Connection::is_quasi_nilpotent`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct QnReport {
    /// The verdict.
    pub status: QnStatus,
    /// Vanishing order found for each generator processed.
    pub per_generator: Vec<u32>,
    /// The iteration cap.
    pub bound: u32,
}

impl QnReport {
    /// Whether quasi-nilpotence was established.
    pub fn is_true(&self) -> bool {
        matches!(self.status, QnStatus::True { .. })
    }

    /// The vanishing order, when established.
    pub fn n(&self) -> Option<u32> {
        match self.status {
            QnStatus::True { n, .. } => Some(n),
            _ => None,
        }
    }
}

enum QnGenerator {
    Vanishes(u32),
    Cycle(QnCycle),
    Undetermined,
}

/// The claim made about one layer of an extension presentation.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LayerClaim {
    /// The layer is a sum of copies of `(O, p^m d)`.
    Trivial,
    /// The layer is generated by the given horizontal sections (columns of a unit-determinant matrix).
    FConstant {
        /// Generators as vectors in the layer's basis.
        generators: Vec<Section>,
    },
}

/// A connection with a block upper-triangular basis exhibiting it as an iterated extension.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ExtensionPresentation {
    /// The extension.
    pub connection: Connection,
    /// Block sizes, summing to the rank; block `k` spans the `k`-th layer.
    pub blocks: Vec<usize>,
    /// One claim per block.
    pub layers: Vec<LayerClaim>,
}

/// Nilpotence kind accepted by [`check_presentation`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub enum NilpotenceKind {
    /// Iterated extension of trivial objects.
    Nilpotent,
    /// Iterated extension of f-constant objects.
    FNilpotent,
    /// Some claim failed.
    Invalid(String),
}

/// Classification returned by [`check_presentation`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct PresentationReport {
    /// The verdict.
    pub kind: NilpotenceKind,
    /// Number of layers.
    pub length: usize,
}

impl ExtensionPresentation {
    /// The presentation of `C` by rank-1 trivial layers.
    pub fn unipotent(connection: Connection) -> Self {
        let r = connection.rank();
        ExtensionPresentation { connection, blocks: vec![1; r], layers: vec![LayerClaim::Trivial; r] }
    }

    /// The diagonal block connection of layer `k`.
    pub fn layer(&self, k: usize) -> Connection {
        let start: usize = self.blocks[..k].iter().sum();
        let b = self.blocks[k];
        let c = &self.connection;
        let theta = c
            .theta
            .iter()
            .map(|t| {
                let mut s = PolyMatrix::zero(c.ctx, c.d, b, b);
                for i in 0..b {
                    for j in 0..b {
                        s.set(i, j, t.get(start + i, start + j).clone());
                    }
                }
                s
            })
            .collect();
        Connection { ctx: c.ctx, d: c.d, m: c.m, rank: b, theta }
    }
}

/// Verifies the layer claims of an extension presentation.
pub fn check_presentation(p: &ExtensionPresentation) -> Result<PresentationReport> {
    let c = &p.connection;
    if p.blocks.len() != p.layers.len() || p.blocks.iter().sum::<usize>() != c.rank || p.blocks.contains(&0) {
        return Err(Error::MalformedPresentation(
            "block sizes must be positive, one per layer, summing to the rank".into(),
        ));
    }
    let length = p.blocks.len();
    let invalid = |s: String| Ok(PresentationReport { kind: NilpotenceKind::Invalid(s), length });
    if !c.is_integrable() {
        return invalid("connection is not integrable".into());
    }
    let mut owner = Vec::with_capacity(c.rank);
    for (k, &b) in p.blocks.iter().enumerate() {
        owner.extend(std::iter::repeat_n(k, b));
    }
    for (i, t) in c.theta.iter().enumerate() {
        for row in 0..c.rank {
            for col in 0..c.rank {
                if owner[row] > owner[col] && !t.get(row, col).is_zero() {
                    return invalid(format!("Θ̃_{} entry ({row},{col}) lies below the block diagonal", i + 1));
                }
            }
        }
    }
    let mut all_trivial = true;
    for (k, claim) in p.layers.iter().enumerate() {
        let layer = p.layer(k);
        match claim {
            LayerClaim::Trivial => {
                if layer.theta.iter().any(|t| !t.is_zero()) {
                    return invalid(format!("layer {k} is claimed trivial but has a nonzero connection block"));
                }
            }
            LayerClaim::FConstant { generators } => {
                all_trivial = false;
                let b = layer.rank;
                if generators.len() != b || generators.iter().any(|g| g.len() != b) {
                    return Err(Error::MalformedPresentation(format!("layer {k} needs {b} generators of length {b}")));
                }
                for (gi, g) in generators.iter().enumerate() {
                    for i in 0..c.d {
                        if !section_is_zero(&layer.nabla(i, g, Basis::Dlog)) {
                            return invalid(format!("generator {gi} of layer {k} is not horizontal"));
                        }
                    }
                }
                let mut gm = PolyMatrix::zero(c.ctx, c.d, b, b);
                for (j, g) in generators.iter().enumerate() {
                    for (i, f) in g.iter().enumerate() {
                        gm.set(i, j, f.clone());
                    }
                }
                if !gm.det().is_unit() {
                    return invalid(format!("generators of layer {k} do not span the layer"));
                }
            }
        }
    }
    let kind = if all_trivial { NilpotenceKind::Nilpotent } else { NilpotenceKind::FNilpotent };
    Ok(PresentationReport { kind, length })
}
