//! Error type shared by every module.

use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("domain too short: window needs L >= {needed}, grid has L = {have}")]
    DomainTooShort { needed: f64, have: f64 },

    #[error("not a weight: psi({x}) = {value} is not positive")]
    NotAWeight { x: f64, value: f64 },

    #[error("no unique root with negative real part at lambda = {lambda} (below-cutoff regime)")]
    BelowCutoff { lambda: f64 },

    #[error("lambda0 calibration failed for a = {a}, b = {b}: scan exhausted at {scanned}")]
    CalibrationFailed { a: f64, b: f64, scanned: f64 },

    #[error("frequency splitting violated: mass {mass:e} below lambda0 = {lambda0} in the high band")]
    SplittingViolation { lambda0: f64, mass: f64 },

    #[error("spectral resolution insufficient: relative tail mass {tail:e} exceeds {limit:e}")]
    Resolution { tail: f64, limit: f64 },

    #[error("grid too coarse for derivative order {order}: needs at least {needed} nodes, has {have}")]
    Accuracy { order: usize, needed: usize, have: usize },

    #[error("ill-conditioned basis: Gram condition estimate {cond:e} exceeds {limit:e}")]
    IllConditionedBasis { cond: f64, limit: f64 },

    #[error("stiff Galerkin system: step rejection cascade at t = {t}")]
    Stiffness { t: f64 },

    #[error("fixed-point iteration failed to contract within {max_iter} iterations (distance {distance:e}); reduce dt")]
    ContractionFailure { max_iter: usize, distance: f64 },

    #[error("insufficient history: {0}")]
    InsufficientData(String),

    #[error("energy functional undefined: beta + gamma = 0")]
    UndefinedFunctional,

    #[error("invalid test function: {0}")]
    InvalidTest(String),

    #[error("numerical degeneracy: {0}")]
    NumericalDegeneracy(String),

    #[error("singular linear operator: zero pivot at index {index}")]
    SingularOperator { index: usize },

    #[error("tail contamination at t = {t}: tail mass {tail:e} exceeds {limit:e} * ||u||^2")]
    TailContamination { t: f64, tail: f64, limit: f64 },

    #[error("config rejected: {0}")]
    ConfigRejected(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
