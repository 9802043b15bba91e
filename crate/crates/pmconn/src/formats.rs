//! JSON file formats for connections, Frobenius lifts, cohomology reports and
//! Witt connections.

use serde::{Deserialize, Serialize};

use crate::arith::RingCtx;
use crate::cohomology::CohomologyReport;
use crate::connection::{Basis, Connection};
use crate::error::{Error, Result};
use crate::laurent::{FrobLift, LaurentPoly, PolyMatrix};
use crate::witt::{WittConnection, WittVector};

/// On-disk form of a connection.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ConnectionFile {
    /// The prime.
    pub p: u64,
    /// Truncation level of the coefficients.
    pub n: u32,
    /// Level of the connection.
    pub m: u32,
    /// Number of variables.
    pub d: usize,
    /// Rank of the module.
    pub rank: usize,
    /// Basis the matrices refer to.
    pub basis: Basis,
    /// One `rank × rank` matrix of polynomial strings per variable.
    pub theta: Vec<Vec<Vec<String>>>,
}

/// On-disk form of a Frobenius lift `t_i ↦ t_i^p + p a_i`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct LiftFile {
    /// The prime.
    pub p: u64,
    /// Truncation level.
    pub n: u32,
    /// Number of variables.
    pub d: usize,
    /// The correction terms `a_i`.
    pub a: Vec<String>,
}

/// On-disk form of a rank-1 Witt connection.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct WittConnectionFile {
    /// The prime.
    pub p: u64,
    /// Witt length.
    pub n: u32,
    /// Level.
    pub m: u32,
    /// Components of the coefficient `f` over `F_p`.
    pub f_components: Vec<String>,
}

/// Compact on-disk form of a cohomology report.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportFile {
    /// The degree.
    pub degree: usize,
    /// Nonzero pieces by weight.
    pub weights: Vec<ReportWeight>,
    /// Whether the window was stable.
    pub stable: bool,
}

/// One weight of a [`ReportFile`].
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportWeight {
    /// The weight.
    pub w: Vec<i64>,
    /// Elementary divisor exponents.
    pub divisors: Vec<u32>,
}

fn parse_json<T: for<'de> Deserialize<'de>>(s: &str) -> Result<T> {
    serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
}

fn to_json<T: Serialize>(v: &T) -> String {
    serde_json::to_string_pretty(v).expect("serializable")
}

impl ConnectionFile {
    /// Serializes a connection in the given basis.
    pub fn from_connection(c: &Connection, basis: Basis) -> Self {
        let ctx = c.ctx();
        ConnectionFile {
            p: ctx.p(),
            n: ctx.n(),
            m: c.m(),
            d: c.d(),
            rank: c.rank(),
            basis,
            theta: c.theta_in(basis).iter().map(|m| m.to_strings()).collect(),
        }
    }

    /// Builds the connection, validating shapes and polynomial strings.
    ///
    /// Integrability is not checked here.
    pub fn to_connection(&self) -> Result<Connection> {
        let ctx = RingCtx::new(self.p, self.n)?;
        if self.theta.len() != self.d {
            return Err(Error::Parse(format!("expected {} matrices, found {}", self.d, self.theta.len())));
        }
        let mut mats = Vec::with_capacity(self.d);
        for m in &self.theta {
            if m.len() != self.rank || m.iter().any(|r| r.len() != self.rank) {
                return Err(Error::Parse(format!("matrix is not {0}×{0}", self.rank)));
            }
            let rows = m
                .iter()
                .map(|r| r.iter().map(|s| LaurentPoly::parse(s, ctx, self.d)).collect::<Result<Vec<_>>>())
                .collect::<Result<Vec<_>>>()?;
            mats.push(PolyMatrix::from_rows(rows)?);
        }
        Connection::from_basis(ctx, self.d, self.m, self.basis, mats)
    }

    /// Parses the JSON form.
    pub fn parse(s: &str) -> Result<Self> {
        parse_json(s)
    }

    /// Pretty-printed JSON.
    pub fn to_json(&self) -> String {
        to_json(self)
    }
}

impl LiftFile {
    /// Serializes a lift.
    pub fn from_lift(f: &FrobLift) -> Self {
        let ctx = f.ctx();
        LiftFile { p: ctx.p(), n: ctx.n(), d: f.d(), a: f.a().iter().map(|x| x.to_string()).collect() }
    }

    /// Builds the lift.
    pub fn to_lift(&self) -> Result<FrobLift> {
        let ctx = RingCtx::new(self.p, self.n)?;
        if self.a.len() != self.d {
            return Err(Error::Parse(format!("expected {} lift terms, found {}", self.d, self.a.len())));
        }
        let a = self.a.iter().map(|s| LaurentPoly::parse(s, ctx, self.d)).collect::<Result<Vec<_>>>()?;
        FrobLift::new(ctx, self.d, a)
    }

    /// Parses the JSON form.
    pub fn parse(s: &str) -> Result<Self> {
        parse_json(s)
    }

    /// Pretty-printed JSON.
    pub fn to_json(&self) -> String {
        to_json(self)
    }
}

impl WittConnectionFile {
    /// Serializes a Witt connection.
    pub fn from_connection(c: &WittConnection) -> Self {
        WittConnectionFile {
            p: c.p(),
            n: c.n(),
            m: c.m(),
            f_components: c.f().components().iter().map(|x| x.to_string()).collect(),
        }
    }

    /// Builds the Witt connection.
    pub fn to_connection(&self) -> Result<WittConnection> {
        if self.f_components.len() != self.n as usize {
            return Err(Error::Parse(format!("expected {} components, found {}", self.n, self.f_components.len())));
        }
        let fp = RingCtx::new(self.p, 1)?;
        let comps = self.f_components.iter().map(|s| LaurentPoly::parse(s, fp, 1)).collect::<Result<Vec<_>>>()?;
        Ok(WittConnection::new(self.m, WittVector::from_components(self.p, comps)?))
    }

    /// Parses the JSON form.
    pub fn parse(s: &str) -> Result<Self> {
        parse_json(s)
    }

    /// Pretty-printed JSON.
    pub fn to_json(&self) -> String {
        to_json(self)
    }
}

impl ReportFile {
    /// The compact form of a report.
    pub fn from_report(r: &CohomologyReport) -> Self {
        ReportFile {
            degree: r.degree,
            weights: r.weights.iter().map(|w| ReportWeight { w: w.w.clone(), divisors: w.divisors.clone() }).collect(),
            stable: r.stable,
        }
    }

    /// Pretty-printed JSON.
    pub fn to_json(&self) -> String {
        to_json(self)
    }
}
