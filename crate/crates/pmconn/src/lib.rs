//! Exact computation with integrable p^m-connections on the torus over
//! `Z/p^nZ`: level-raising Frobenius pullback, negative-level differential
//! operators, Frobenius descent, de Rham cohomology and the Witt analogue.

pub mod arith;
pub mod cohomology;
pub mod connection;
pub mod dops;
pub mod error;
pub mod formats;
pub mod frobenius;
pub mod laurent;
pub mod linalg;
pub mod witt;

pub use arith::{ModularInt, RingCtx};
pub use cohomology::{
    compare_raised_cohomology, compute_h, hom_space, rank1_trivial_test, CohomologyReport, HomGenerator,
    RaisedCohomologyReport, Triviality, Weight, WeightDivisors,
};
pub use connection::{
    check_presentation, Basis, Connection, ExtensionPresentation, LayerClaim, MonomialTransform, NilpotenceKind,
    QnReport, QnStatus, Section,
};
pub use dops::{DiffOp, MultiIndex, PDElement, RingMap, TaylorSeries};
pub use error::{Error, Result};
pub use formats::{ConnectionFile, LiftFile, ReportFile, WittConnectionFile};
pub use frobenius::{
    descend_rank1, level_raise, psi, twist_decompose, verify_pullback_iso, DescentObstruction, DescentOutcome,
    LiftChain, TwistSummand,
};
pub use laurent::{Exponent, FrobLift, LaurentPoly, PolyMatrix};
pub use linalg::ZMat;
pub use witt::{
    drw_d, drw_f, witt_compare, witt_level_raise, WittCompareReport, WittConnection, WittNormal, WittOneForm,
    WittVector, WittWeight,
};
