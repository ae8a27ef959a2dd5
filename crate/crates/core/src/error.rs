use thiserror::Error;

use crate::expr::ExprError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

/// Errors raised by the numerical modules.
///
/// Positions are reported as `f64` regardless of the scalar type in use.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(transparent)]
    Expr(#[from] ExprError),

    #[error("unknown potential family `{0}` (expected one of airy, weber, coulomb, radial-free)")]
    UnknownFamily(String),

    #[error("potential `{family}` requires parameter `{name}`")]
    MissingParameter { family: String, name: String },

    #[error("domain conflict: {0}")]
    DomainConflict(String),

    #[error("z = {z} lies outside the domain ({lo}, {hi})")]
    OutsideDomain { z: f64, lo: f64, hi: f64 },

    #[error("z = {z} is at a turning point or in a forbidden region (Q² = {q2:e})")]
    Forbidden { z: f64, q2: f64 },

    #[error("z = 0 is singular for s = {s}")]
    SingularPoint { s: f64 },

    #[error("quadrature on [{a}, {b}] failed after {evaluations} evaluations (error estimate {error_estimate:e})")]
    Quadrature { a: f64, b: f64, evaluations: usize, error_estimate: f64 },

    #[error("phase-integral approximation breaks down at z = {z}: effective q = {q:e}")]
    Breakdown { z: f64, q: f64 },

    #[error("step size underflow at z = {z}")]
    StepUnderflow { z: f64 },

    #[error("expected two turning points, found {0}")]
    TurningPointCount(usize),

    #[error("no sign change in bracket [{lo}, {hi}]")]
    NoSignChange { lo: f64, hi: f64 },

    #[error("derivative consistency check failed at z = {z}: {what}")]
    InconsistentDerivative { z: f64, what: String },

    #[error("non-finite value at z = {z}")]
    NonFinite { z: f64 },

    #[error("no checks selected")]
    NoChecksSelected,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),
}
