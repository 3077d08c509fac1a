//! Crate error type.

use thiserror::Error;

use crate::rational::Rational;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("dimension mismatch: {left} vs {right}")]
    DimensionMismatch { left: usize, right: usize },

    #[error("division weights must sum to exactly 1, got {sum}")]
    NotNormalized { sum: Rational },

    #[error("division weight out of [0, 1]: {value}")]
    WeightOutOfRange { value: Rational },

    #[error("a division needs at least one alternative")]
    EmptyDivision,

    #[error("a profile needs at least one voter")]
    EmptyProfile,

    #[error("profiles need at least two alternatives, got {m}")]
    TooFewAlternatives { m: usize },

    #[error("voter index {voter} out of range for {n} voters")]
    VoterOutOfRange { voter: usize, n: usize },

    #[error("time parameter outside [0, 1]: {t}")]
    TimeOutOfRange { t: Rational },

    #[error("phantom trajectory {k} is invalid: {reason}")]
    InvalidTrajectory { k: usize, reason: String },

    #[error("phantom ordering violated at t = {t}: f_{upper}(t) < f_{lower}(t)")]
    PhantomOrdering { t: Rational, upper: usize, lower: usize },

    #[error("normalization never reached: generalized medians sum to {sum} at t = 1")]
    NormalizationUnreachable { sum: Rational },

    #[error("mechanism requires exactly two alternatives, got {m}")]
    NotTwoAlternatives { m: usize },

    #[error("expected {expected} phantom values, got {got}")]
    WrongPhantomCount { expected: usize, got: usize },

    #[error("phantom values must be weakly decreasing and lie in [0, 1]")]
    InvalidPhantomValues,

    #[error("market supply must be positive")]
    ZeroSupply,

    #[error("market value must be nonnegative, got {value}")]
    NegativeValue { value: Rational },

    #[error("lp certificate failed: {reason}")]
    CertificateFailed { reason: String },

    #[error("spending profile has zero total spend, outcome undefined")]
    ZeroSpending,

    #[error("spending entry out of [0, 1]: {value}")]
    SpendOutOfRange { value: Rational },

    #[error("fixed-point iteration did not converge after {iterations} iterations")]
    NonConvergence { iterations: usize },

    #[error("grid of {points} lattice points exceeds the cap of {cap}")]
    GridTooLarge { points: u128, cap: u128 },

    #[error("monotonicity premise violated: {reason}")]
    BadMonotonicityPair { reason: String },

    #[error("unknown mechanism id `{id}`")]
    UnknownMechanism { id: String },

    #[error("mechanism `{id}` does not support {operation}")]
    UnsupportedOperation { id: String, operation: String },

    #[error("cannot parse `{input}` as a rational number")]
    ParseRational { input: String },

    #[error("voter {voter}: {source}")]
    InvalidReport { voter: usize, source: Box<Error> },

    #[error("malformed profile document: {reason}")]
    MalformedDocument { reason: String },
}
