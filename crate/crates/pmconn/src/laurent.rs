//! Sparse multivariate Laurent polynomials over `Z/p^nZ`, the coordinate ring
//! of the torus chart, with derivations, logarithmic derivations, ring-map
//! substitution and small polynomial matrices.

use std::collections::BTreeMap;
use std::fmt;

use num_bigint::BigInt;
use smallvec::SmallVec;

use crate::arith::{ModularInt, RingCtx};
use crate::error::{Error, Result};

/// Exponent vector of a Laurent monomial.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Exponent(pub SmallVec<[i64; 2]>);

impl Exponent {
    /// The zero exponent vector of length `d`.
    pub fn zero(d: usize) -> Self {
        Exponent(SmallVec::from_elem(0, d))
    }

    /// Builds an exponent vector from a slice.
    pub fn from_slice(e: &[i64]) -> Self {
        Exponent(SmallVec::from_slice(e))
    }

    /// The `i`-th unit vector of length `d`.
    pub fn unit(d: usize, i: usize) -> Self {
        let mut e = Exponent::zero(d);
        e.0[i] = 1;
        e
    }

    /// Componentwise sum.
    pub fn add(&self, o: &Self) -> Self {
        Exponent(self.0.iter().zip(o.0.iter()).map(|(a, b)| a + b).collect())
    }

    /// Componentwise difference.
    pub fn sub(&self, o: &Self) -> Self {
        Exponent(self.0.iter().zip(o.0.iter()).map(|(a, b)| a - b).collect())
    }

    /// Scaling by an integer.
    pub fn scale(&self, k: i64) -> Self {
        Exponent(self.0.iter().map(|a| a * k).collect())
    }

    /// Largest absolute entry.
    pub fn max_abs(&self) -> i64 {
        self.0.iter().map(|a| a.abs()).max().unwrap_or(0)
    }

    /// Whether every entry vanishes.
    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|a| *a == 0)
    }

    /// The entries.
    pub fn as_slice(&self) -> &[i64] {
        &self.0
    }
}

/// A Laurent polynomial in `d` variables with coefficients in `Z/p^nZ`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LaurentPoly {
    ctx: RingCtx,
    d: usize,
    terms: BTreeMap<Exponent, ModularInt>,
}

impl LaurentPoly {
    /// The zero polynomial.
    pub fn zero(ctx: RingCtx, d: usize) -> Self {
        LaurentPoly { ctx, d, terms: BTreeMap::new() }
    }

    /// The constant one.
    pub fn one(ctx: RingCtx, d: usize) -> Self {
        LaurentPoly::constant(ModularInt::one(ctx), d)
    }

    /// A constant polynomial.
    pub fn constant(c: ModularInt, d: usize) -> Self {
        let ctx = c.ctx();
        let mut f = LaurentPoly::zero(ctx, d);
        f.add_term(Exponent::zero(d), c);
        f
    }

    /// A constant given by a machine integer.
    pub fn from_i64(ctx: RingCtx, d: usize, c: i64) -> Self {
        LaurentPoly::constant(ModularInt::from_i64(ctx, c), d)
    }

    /// The monomial `c * t^e`.
    pub fn monomial(c: ModularInt, e: &[i64]) -> Self {
        let ctx = c.ctx();
        let mut f = LaurentPoly::zero(ctx, e.len());
        f.add_term(Exponent::from_slice(e), c);
        f
    }

    /// The coordinate `t_i` (zero-based index).
    pub fn var(ctx: RingCtx, d: usize, i: usize) -> Self {
        LaurentPoly::monomial(ModularInt::one(ctx), Exponent::unit(d, i).as_slice())
    }

    /// Builds a polynomial from `(coefficient, exponent)` pairs given as machine integers.
    pub fn from_terms(ctx: RingCtx, d: usize, terms: &[(i64, &[i64])]) -> Self {
        let mut f = LaurentPoly::zero(ctx, d);
        for (c, e) in terms {
            assert_eq!(e.len(), d, "exponent length must equal d");
            f.add_term(Exponent::from_slice(e), ModularInt::from_i64(ctx, *c));
        }
        f
    }

    /// The coefficient context.
    pub fn ctx(&self) -> RingCtx {
        self.ctx
    }

    /// Number of variables.
    pub fn d(&self) -> usize {
        self.d
    }

    /// Iterator over the nonzero terms in lexicographic exponent order.
    pub fn terms(&self) -> impl Iterator<Item = (&Exponent, &ModularInt)> {
        self.terms.iter()
    }

    /// Number of nonzero terms.
    pub fn len(&self) -> usize {
        self.terms.len()
    }

    /// Whether the polynomial is zero.
    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    /// Whether there are no terms, the same as [`LaurentPoly::is_zero`].
    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// Whether the polynomial is a constant (possibly zero).
    pub fn is_constant(&self) -> bool {
        self.terms.keys().all(|e| e.is_zero())
    }

    /// Coefficient of `t^e`.
    pub fn coeff(&self, e: &[i64]) -> ModularInt {
        self.terms.get(&Exponent::from_slice(e)).cloned().unwrap_or_else(|| ModularInt::zero(self.ctx))
    }

    /// The constant term.
    pub fn constant_term(&self) -> ModularInt {
        self.coeff(&vec![0; self.d])
    }

    /// Adds `c * t^e` in place.
    pub fn add_term(&mut self, e: Exponent, c: ModularInt) {
        debug_assert_eq!(e.0.len(), self.d);
        if c.is_zero() {
            return;
        }
        match self.terms.entry(e) {
            std::collections::btree_map::Entry::Vacant(v) => {
                v.insert(c);
            }
            std::collections::btree_map::Entry::Occupied(mut o) => {
                let s = o.get().add_ref(&c);
                if s.is_zero() {
                    o.remove();
                } else {
                    *o.get_mut() = s;
                }
            }
        }
    }

    fn check(&self, o: &Self) -> Result<()> {
        if self.ctx != o.ctx || self.d != o.d {
            return Err(Error::ContextMismatch(format!(
                "{} in {} variables vs {} in {} variables",
                self.ctx, self.d, o.ctx, o.d
            )));
        }
        Ok(())
    }

    /// Sum, failing on a context mismatch.
    pub fn try_add(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let mut r = self.clone();
        for (e, c) in &o.terms {
            r.add_term(e.clone(), c.clone());
        }
        Ok(r)
    }

    /// Product, failing on a context mismatch.
    pub fn try_mul(&self, o: &Self) -> Result<Self> {
        self.check(o)?;
        let mut r = LaurentPoly::zero(self.ctx, self.d);
        for (e1, c1) in &self.terms {
            for (e2, c2) in &o.terms {
                r.add_term(e1.add(e2), c1.mul_ref(c2));
            }
        }
        Ok(r)
    }

    /// Sum; panics on a context mismatch.
    pub fn add(&self, o: &Self) -> Self {
        self.try_add(o).expect("laurent add")
    }

    /// Difference; panics on a context mismatch.
    pub fn sub(&self, o: &Self) -> Self {
        self.try_add(&o.neg()).expect("laurent sub")
    }

    /// Product; panics on a context mismatch.
    pub fn mul(&self, o: &Self) -> Self {
        self.try_mul(o).expect("laurent mul")
    }

    /// Additive inverse.
    pub fn neg(&self) -> Self {
        LaurentPoly {
            ctx: self.ctx,
            d: self.d,
            terms: self.terms.iter().map(|(e, c)| (e.clone(), c.neg_ref())).collect(),
        }
    }

    /// Multiplication by a scalar.
    pub fn scalar_mul(&self, s: &ModularInt) -> Self {
        let mut r = LaurentPoly::zero(self.ctx, self.d);
        for (e, c) in &self.terms {
            r.add_term(e.clone(), c.mul_ref(s));
        }
        r
    }

    /// Multiplication by a machine integer.
    pub fn scalar_mul_i64(&self, k: i64) -> Self {
        self.scalar_mul(&ModularInt::from_i64(self.ctx, k))
    }

    /// Multiplication by the monomial `t^e`.
    pub fn shift(&self, e: &Exponent) -> Self {
        LaurentPoly { ctx: self.ctx, d: self.d, terms: self.terms.iter().map(|(f, c)| (f.add(e), c.clone())).collect() }
    }

    /// Non-negative power.
    pub fn pow(&self, mut k: u64) -> Self {
        let mut base = self.clone();
        let mut acc = LaurentPoly::one(self.ctx, self.d);
        while k > 0 {
            if k & 1 == 1 {
                acc = acc.mul(&base);
            }
            k >>= 1;
            if k > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// Partial derivative `d/dt_i` (zero-based `i`): `t^k -> k_i t^{k - e_i}`.
    pub fn partial(&self, i: usize) -> Self {
        assert!(i < self.d, "axis out of range");
        let mut r = LaurentPoly::zero(self.ctx, self.d);
        for (e, c) in &self.terms {
            let k = e.0[i];
            if k != 0 {
                let mut f = e.clone();
                f.0[i] -= 1;
                r.add_term(f, c.mul_i64(k));
            }
        }
        r
    }

    /// Logarithmic derivative `t_i d/dt_i`: `t^k -> k_i t^k`.
    pub fn log_partial(&self, i: usize) -> Self {
        assert!(i < self.d, "axis out of range");
        let mut r = LaurentPoly::zero(self.ctx, self.d);
        for (e, c) in &self.terms {
            r.add_term(e.clone(), c.mul_i64(e.0[i]));
        }
        r
    }

    /// Image under the ring map `t_i -> images[i]`; negative exponents require
    /// the images to be units.
    pub fn substitute(&self, images: &[LaurentPoly]) -> Result<Self> {
        if images.len() != self.d {
            return Err(Error::ContextMismatch(format!("{} images for {} variables", images.len(), self.d)));
        }
        let (ctx, d2) = match images.first() {
            Some(g) => (g.ctx, g.d),
            None => (self.ctx, 0),
        };
        for g in images {
            if g.ctx != self.ctx || g.d != d2 {
                return Err(Error::ContextMismatch("substitution images disagree".into()));
            }
        }
        let mut inverses: Vec<Option<LaurentPoly>> = vec![None; self.d];
        let mut powers: Vec<BTreeMap<i64, LaurentPoly>> = vec![BTreeMap::new(); self.d];
        let mut out = LaurentPoly::zero(ctx, d2);
        for (e, c) in &self.terms {
            let mut term = LaurentPoly::constant(c.clone(), d2);
            for (i, &k) in e.0.iter().enumerate() {
                if k == 0 {
                    continue;
                }
                if k < 0 && inverses[i].is_none() {
                    inverses[i] = Some(images[i].inverse()?);
                }
                if !powers[i].contains_key(&k) {
                    let base = if k > 0 { images[i].clone() } else { inverses[i].clone().unwrap() };
                    powers[i].insert(k, base.pow(k.unsigned_abs()));
                }
                term = term.mul(&powers[i][&k]);
            }
            out = out.add(&term);
        }
        Ok(out)
    }

    /// Image under the Frobenius lift `t_i -> t_i^p + p a_i`.
    pub fn frob_substitute(&self, lift: &FrobLift) -> Result<Self> {
        if lift.ctx != self.ctx || lift.d != self.d {
            return Err(Error::ContextMismatch("lift context differs from polynomial".into()));
        }
        if lift.is_pure() {
            return Ok(self.scale_exponents(lift.ctx.p() as i64));
        }
        self.substitute(&lift.images())
    }

    /// Replaces every exponent vector `e` by `k e`.
    pub fn scale_exponents(&self, k: i64) -> Self {
        let mut r = LaurentPoly::zero(self.ctx, self.d);
        for (e, c) in &self.terms {
            r.add_term(e.scale(k), c.clone());
        }
        r
    }

    /// Multiplicative inverse of a unit; a unit is a monomial with unit
    /// coefficient plus a multiple of `p`.
    pub fn inverse(&self) -> Result<Self> {
        let lead: Vec<_> = self.terms.iter().filter(|(_, c)| c.is_unit()).collect();
        if lead.len() != 1 {
            return Err(Error::NotInvertible(format!("{self} is not a unit of the Laurent ring")));
        }
        let (e0, c0) = (lead[0].0.clone(), lead[0].1.clone());
        let c0_inv = c0.inv()?;
        let neg_e0 = e0.scale(-1);
        // u = c0 t^e0 (1 + x) with x divisible by p.
        let mut x = self.shift(&neg_e0).scalar_mul(&c0_inv);
        x.add_term(Exponent::zero(self.d), ModularInt::from_i64(self.ctx, -1));
        let minus_x = x.neg();
        let mut acc = LaurentPoly::one(self.ctx, self.d);
        let mut pw = LaurentPoly::one(self.ctx, self.d);
        for _ in 1..self.ctx.n() {
            pw = pw.mul(&minus_x);
            if pw.is_zero() {
                break;
            }
            acc = acc.add(&pw);
        }
        Ok(acc.shift(&neg_e0).scalar_mul(&c0_inv))
    }

    /// Whether the polynomial is a unit of the Laurent ring.
    pub fn is_unit(&self) -> bool {
        self.terms.values().filter(|c| c.is_unit()).count() == 1
    }

    /// Minimum coefficient valuation; `n` for the zero polynomial.
    pub fn valuation(&self) -> u32 {
        self.terms.values().map(|c| c.val_p()).min().unwrap_or(self.ctx.n())
    }

    /// Largest absolute exponent over all terms (the log-degree).
    pub fn max_abs_exponent(&self) -> i64 {
        self.terms.keys().map(|e| e.max_abs()).max().unwrap_or(0)
    }

    /// Projection of the coefficients to a lower truncation level.
    pub fn reduce_to(&self, ctx: RingCtx) -> Result<Self> {
        let mut r = LaurentPoly::zero(ctx, self.d);
        for (e, c) in &self.terms {
            r.add_term(e.clone(), c.reduce_to(ctx)?);
        }
        Ok(r)
    }

    /// Canonical coefficientwise lift to a higher truncation level.
    pub fn lift_to(&self, ctx: RingCtx) -> Result<Self> {
        let mut r = LaurentPoly::zero(ctx, self.d);
        for (e, c) in &self.terms {
            r.add_term(e.clone(), c.lift_to(ctx)?);
        }
        Ok(r)
    }

    /// Exact coefficientwise division by `p^k`, landing at level `n - k`.
    pub fn div_p_pow(&self, k: u32) -> Result<Self> {
        let ctx = if k == 0 { self.ctx } else { self.ctx.with_n(self.ctx.n().saturating_sub(k).max(1))? };
        if k >= self.ctx.n() {
            return Err(Error::InexactDivision("division leaves no precision".into()));
        }
        let mut r = LaurentPoly::zero(ctx, self.d);
        for (e, c) in &self.terms {
            r.add_term(e.clone(), c.div_p_pow(k)?);
        }
        Ok(r)
    }

    /// Multiplication by `p^k`.
    pub fn mul_p_pow(&self, k: u32) -> Self {
        self.scalar_mul(&self.ctx.p_pow(k))
    }

    /// Keeps only the terms whose exponent satisfies the predicate.
    pub fn filter_terms(&self, keep: impl Fn(&Exponent, &ModularInt) -> bool) -> Self {
        LaurentPoly {
            ctx: self.ctx,
            d: self.d,
            terms: self.terms.iter().filter(|(e, c)| keep(e, c)).map(|(e, c)| (e.clone(), c.clone())).collect(),
        }
    }

    /// Applies a map to every exponent vector, summing collisions.
    pub fn map_exponents(&self, d2: usize, f: impl Fn(&Exponent) -> Exponent) -> Self {
        let mut r = LaurentPoly::zero(self.ctx, d2);
        for (e, c) in &self.terms {
            r.add_term(f(e), c.clone());
        }
        r
    }

    /// Parses the text grammar `c*t1^e1*...*td^ed + ...`.
    pub fn parse(s: &str, ctx: RingCtx, d: usize) -> Result<Self> {
        Parser { chars: s.chars().filter(|c| !c.is_whitespace()).collect(), pos: 0, ctx, d }.poly()
    }
}

impl fmt::Display for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let mut first = true;
        for (e, c) in &self.terms {
            if !first {
                write!(f, "+")?;
            }
            first = false;
            write!(f, "{c}")?;
            for (i, k) in e.0.iter().enumerate() {
                match *k {
                    0 => {}
                    1 => write!(f, "*t{}", i + 1)?,
                    k => write!(f, "*t{}^{}", i + 1, k)?,
                }
            }
        }
        Ok(())
    }
}

struct Parser {
    chars: Vec<char>,
    pos: usize,
    ctx: RingCtx,
    d: usize,
}

impl Parser {
    fn peek(&self) -> Option<char> {
        self.chars.get(self.pos).copied()
    }

    fn err(&self, msg: &str) -> Error {
        let text: String = self.chars.iter().collect();
        Error::Parse(format!("{msg} at offset {} in '{text}'", self.pos))
    }

    fn integer(&mut self) -> Result<BigInt> {
        let start = self.pos;
        if matches!(self.peek(), Some('-') | Some('+')) {
            self.pos += 1;
        }
        while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
            self.pos += 1;
        }
        let text: String = self.chars[start..self.pos].iter().collect();
        text.parse::<BigInt>().map_err(|_| self.err("expected integer"))
    }

    fn poly(&mut self) -> Result<LaurentPoly> {
        let mut out = LaurentPoly::zero(self.ctx, self.d);
        if self.chars.is_empty() {
            return Err(self.err("empty polynomial"));
        }
        let mut first = true;
        while self.pos < self.chars.len() {
            let mut sign = 1i64;
            match self.peek() {
                Some('+') => self.pos += 1,
                Some('-') => {
                    sign = -1;
                    self.pos += 1;
                }
                _ if first => {}
                _ => return Err(self.err("expected '+' or '-'")),
            }
            first = false;
            let (c, e) = self.term()?;
            out.add_term(e, ModularInt::from_bigint(self.ctx, &(c * sign)));
        }
        Ok(out)
    }

    fn term(&mut self) -> Result<(BigInt, Exponent)> {
        let mut coeff = BigInt::from(1);
        let mut exp = Exponent::zero(self.d);
        loop {
            match self.peek() {
                Some(c) if c.is_ascii_digit() => coeff *= self.integer()?,
                Some('t') => {
                    self.pos += 1;
                    let start = self.pos;
                    while matches!(self.peek(), Some(c) if c.is_ascii_digit()) {
                        self.pos += 1;
                    }
                    let idx: usize = if start == self.pos {
                        if self.d != 1 {
                            return Err(self.err("bare 't' needs d = 1"));
                        }
                        1
                    } else {
                        let text: String = self.chars[start..self.pos].iter().collect();
                        text.parse().map_err(|_| self.err("bad variable index"))?
                    };
                    if idx == 0 || idx > self.d {
                        return Err(self.err("variable index out of range"));
                    }
                    let mut k = 1i64;
                    if self.peek() == Some('^') {
                        self.pos += 1;
                        let v = self.integer()?;
                        k = i64::try_from(v).map_err(|_| self.err("exponent too large"))?;
                    }
                    exp.0[idx - 1] += k;
                }
                _ => return Err(self.err("expected coefficient or variable")),
            }
            if self.peek() == Some('*') {
                self.pos += 1;
            } else {
                break;
            }
        }
        Ok((coeff, exp))
    }
}

/// A Frobenius lift `t'_i -> t_i^p + p a_i` of the torus chart.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct FrobLift {
    ctx: RingCtx,
    d: usize,
    a: Vec<LaurentPoly>,
}

impl FrobLift {
    /// A lift with the given correction terms.
    pub fn new(ctx: RingCtx, d: usize, a: Vec<LaurentPoly>) -> Result<Self> {
        if a.len() != d || a.iter().any(|f| f.ctx() != ctx || f.d() != d) {
            return Err(Error::ContextMismatch("lift corrections must share ctx and d".into()));
        }
        Ok(FrobLift { ctx, d, a })
    }

    /// The pure-power lift `t' -> t^p`.
    pub fn pure(ctx: RingCtx, d: usize) -> Self {
        FrobLift { ctx, d, a: vec![LaurentPoly::zero(ctx, d); d] }
    }

    /// The coefficient context.
    pub fn ctx(&self) -> RingCtx {
        self.ctx
    }

    /// Number of variables.
    pub fn d(&self) -> usize {
        self.d
    }

    /// The correction terms `a_i`.
    pub fn a(&self) -> &[LaurentPoly] {
        &self.a
    }

    /// Whether every correction vanishes.
    pub fn is_pure(&self) -> bool {
        self.a.iter().all(|f| f.is_zero())
    }

    /// The lift with corrections projected to a lower truncation level.
    pub fn reduce_to(&self, ctx: RingCtx) -> Result<Self> {
        let a = self.a.iter().map(|f| f.reduce_to(ctx)).collect::<Result<_>>()?;
        Ok(FrobLift { ctx, d: self.d, a })
    }

    /// The images `t_i^p + p a_i` of the coordinates.
    pub fn images(&self) -> Vec<LaurentPoly> {
        let p = self.ctx.p() as i64;
        (0..self.d)
            .map(|i| {
                let mut e = Exponent::zero(self.d);
                e.0[i] = p;
                let mut g = self.a[i].mul_p_pow(1);
                g.add_term(e, ModularInt::one(self.ctx));
                g
            })
            .collect()
    }
}

/// A dense matrix of Laurent polynomials.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct PolyMatrix {
    rows: usize,
    cols: usize,
    data: Vec<LaurentPoly>,
}

impl PolyMatrix {
    /// The zero matrix.
    pub fn zero(ctx: RingCtx, d: usize, rows: usize, cols: usize) -> Self {
        PolyMatrix { rows, cols, data: vec![LaurentPoly::zero(ctx, d); rows * cols] }
    }

    /// The identity matrix.
    pub fn identity(ctx: RingCtx, d: usize, r: usize) -> Self {
        let mut m = PolyMatrix::zero(ctx, d, r, r);
        for i in 0..r {
            m.set(i, i, LaurentPoly::one(ctx, d));
        }
        m
    }

    /// A scalar multiple of the identity.
    pub fn scalar(f: &LaurentPoly, r: usize) -> Self {
        let mut m = PolyMatrix::zero(f.ctx(), f.d(), r, r);
        for i in 0..r {
            m.set(i, i, f.clone());
        }
        m
    }

    /// Builds a matrix from rows.
    pub fn from_rows(rows: Vec<Vec<LaurentPoly>>) -> Result<Self> {
        let r = rows.len();
        let c = rows.first().map(|x| x.len()).unwrap_or(0);
        if rows.iter().any(|x| x.len() != c) || r == 0 || c == 0 {
            return Err(Error::InvalidParameter("ragged or empty matrix".into()));
        }
        Ok(PolyMatrix { rows: r, cols: c, data: rows.into_iter().flatten().collect() })
    }

    /// A 1x1 matrix.
    pub fn single(f: LaurentPoly) -> Self {
        PolyMatrix { rows: 1, cols: 1, data: vec![f] }
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
    pub fn get(&self, i: usize, j: usize) -> &LaurentPoly {
        &self.data[i * self.cols + j]
    }

    /// Sets entry `(i, j)`.
    pub fn set(&mut self, i: usize, j: usize, f: LaurentPoly) {
        self.data[i * self.cols + j] = f;
    }

    /// Iterator over all entries.
    pub fn entries(&self) -> impl Iterator<Item = &LaurentPoly> {
        self.data.iter()
    }

    /// The coefficient context.
    pub fn ctx(&self) -> RingCtx {
        self.data[0].ctx()
    }

    /// Number of variables.
    pub fn d(&self) -> usize {
        self.data[0].d()
    }

    /// Applies a map to every entry.
    pub fn map(&self, f: impl Fn(&LaurentPoly) -> LaurentPoly) -> Self {
        PolyMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect() }
    }

    /// Applies a fallible map to every entry.
    pub fn try_map(&self, f: impl Fn(&LaurentPoly) -> Result<LaurentPoly>) -> Result<Self> {
        Ok(PolyMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(f).collect::<Result<_>>()? })
    }

    /// Entrywise sum.
    pub fn add(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        PolyMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a.add(b)).collect(),
        }
    }

    /// Entrywise difference.
    pub fn sub(&self, o: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (o.rows, o.cols));
        PolyMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&o.data).map(|(a, b)| a.sub(b)).collect(),
        }
    }

    /// Matrix product.
    pub fn mul(&self, o: &Self) -> Self {
        assert_eq!(self.cols, o.rows, "dimension mismatch");
        let mut m = PolyMatrix::zero(self.ctx(), self.d(), self.rows, o.cols);
        for i in 0..self.rows {
            for j in 0..o.cols {
                let mut acc = LaurentPoly::zero(self.ctx(), self.d());
                for k in 0..self.cols {
                    let a = self.get(i, k);
                    let b = o.get(k, j);
                    if !a.is_zero() && !b.is_zero() {
                        acc = acc.add(&a.mul(b));
                    }
                }
                m.set(i, j, acc);
            }
        }
        m
    }

    /// Multiplication of every entry by a polynomial.
    pub fn scale(&self, f: &LaurentPoly) -> Self {
        self.map(|x| x.mul(f))
    }

    /// Transpose.
    pub fn transpose(&self) -> Self {
        let mut m = PolyMatrix::zero(self.ctx(), self.d(), self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                m.set(j, i, self.get(i, j).clone());
            }
        }
        m
    }

    /// Kronecker product `self (x) o`.
    pub fn kron(&self, o: &Self) -> Self {
        let mut m = PolyMatrix::zero(self.ctx(), self.d(), self.rows * o.rows, self.cols * o.cols);
        for i in 0..self.rows {
            for j in 0..self.cols {
                for k in 0..o.rows {
                    for l in 0..o.cols {
                        m.set(i * o.rows + k, j * o.cols + l, self.get(i, j).mul(o.get(k, l)));
                    }
                }
            }
        }
        m
    }

    /// Applies the matrix to a column vector.
    pub fn apply(&self, v: &[LaurentPoly]) -> Vec<LaurentPoly> {
        assert_eq!(v.len(), self.cols);
        (0..self.rows)
            .map(|i| {
                let mut acc = LaurentPoly::zero(self.ctx(), self.d());
                for (j, vj) in v.iter().enumerate() {
                    let a = self.get(i, j);
                    if !a.is_zero() && !vj.is_zero() {
                        acc = acc.add(&a.mul(vj));
                    }
                }
                acc
            })
            .collect()
    }

    /// Whether every entry vanishes.
    pub fn is_zero(&self) -> bool {
        self.data.iter().all(|f| f.is_zero())
    }

    /// Determinant by cofactor expansion (square matrices only).
    pub fn det(&self) -> LaurentPoly {
        assert_eq!(self.rows, self.cols, "determinant of a non-square matrix");
        let idx: Vec<usize> = (0..self.cols).collect();
        self.det_minor(0, &idx)
    }

    fn det_minor(&self, row: usize, cols: &[usize]) -> LaurentPoly {
        if cols.len() == 1 {
            return self.get(row, cols[0]).clone();
        }
        let mut acc = LaurentPoly::zero(self.ctx(), self.d());
        for (k, &c) in cols.iter().enumerate() {
            let a = self.get(row, c);
            if a.is_zero() {
                continue;
            }
            let rest: Vec<usize> = cols.iter().copied().filter(|&x| x != c).collect();
            let term = a.mul(&self.det_minor(row + 1, &rest));
            acc = if k % 2 == 0 { acc.add(&term) } else { acc.sub(&term) };
        }
        acc
    }

    /// Inverse over the Laurent ring, via the adjugate.
    pub fn inverse(&self) -> Result<Self> {
        let r = self.rows;
        let det_inv =
            self.det().inverse().map_err(|_| Error::NotInvertible("matrix determinant is not a unit".into()))?;
        if r == 1 {
            return Ok(PolyMatrix::single(det_inv));
        }
        let mut adj = PolyMatrix::zero(self.ctx(), self.d(), r, r);
        for i in 0..r {
            for j in 0..r {
                let minor = self.minor(j, i);
                let c = minor.det();
                adj.set(i, j, if (i + j) % 2 == 0 { c } else { c.neg() });
            }
        }
        Ok(adj.scale(&det_inv))
    }

    fn minor(&self, row: usize, col: usize) -> Self {
        let mut data = Vec::with_capacity((self.rows - 1) * (self.cols - 1));
        for i in 0..self.rows {
            for j in 0..self.cols {
                if i != row && j != col {
                    data.push(self.get(i, j).clone());
                }
            }
        }
        PolyMatrix { rows: self.rows - 1, cols: self.cols - 1, data }
    }

    /// Largest log-degree over all entries.
    pub fn max_abs_exponent(&self) -> i64 {
        self.data.iter().map(|f| f.max_abs_exponent()).max().unwrap_or(0)
    }

    /// Rows as nested vectors of display strings.
    pub fn to_strings(&self) -> Vec<Vec<String>> {
        (0..self.rows).map(|i| (0..self.cols).map(|j| self.get(i, j).to_string()).collect()).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_display_roundtrip() {
        let ctx = RingCtx::new(5, 2).unwrap();
        let f = LaurentPoly::parse("2*t1^-1 + 3 - t2*t1^2", ctx, 2).unwrap();
        assert_eq!(f.len(), 3);
        let g = LaurentPoly::parse(&f.to_string(), ctx, 2).unwrap();
        assert_eq!(f, g);
        assert!(LaurentPoly::parse("2**t1", ctx, 2).is_err());
        assert!(LaurentPoly::parse("t3", ctx, 2).is_err());
    }

    #[test]
    fn inverse_of_unit() {
        let ctx = RingCtx::new(3, 4).unwrap();
        let f = LaurentPoly::parse("2*t^3 + 3*t^-1 + 9", ctx, 1).unwrap();
        let g = f.inverse().unwrap();
        assert_eq!(f.mul(&g), LaurentPoly::one(ctx, 1));
        assert!(LaurentPoly::parse("1 + t", ctx, 1).unwrap().inverse().is_err());
    }
}
