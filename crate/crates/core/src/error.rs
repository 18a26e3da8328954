use thiserror::Error;

/// Errors raised by the exact and numeric routines of this crate.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("undefined content: the zero matrix has no content")]
    UndefinedContent,

    #[error("denominator must be positive, got {0}")]
    NonPositiveDenominator(String),

    #[error("undefined point: both homogeneous coordinates vanish")]
    UndefinedPoint,

    #[error("domain is the positive rationals, got {0}")]
    NotPositiveRational(String),

    #[error("sequence is not admissible: {0}")]
    NotAdmissible(String),

    #[error("not a partition: {0}")]
    NotPartition(String),

    #[error("index {index} out of range 1..={max}")]
    IndexOutOfRange { index: usize, max: usize },

    #[error("not a Farey triple at position {0}")]
    NotFareyTriple(usize),

    #[error("join endpoints differ: {left} vs {right}")]
    JoinMismatch { left: String, right: String },

    #[error("action undefined on this sequence: {0}")]
    ActionUndefined(String),

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("not in I_{n}: gcd({x}, {y}, {n}) > 1")]
    NotInCosetSpace { n: u64, x: String, y: String },

    #[error("not an element of GL(2,Z): determinant {0}")]
    NotUnimodular(String),

    #[error("pair ({c}, {b}) is not {n}-admissible")]
    NotAdmissiblePair { n: u64, c: u64, b: u64 },

    #[error("level mismatch: {0}")]
    LevelMismatch(String),

    #[error("chain terminus: {0} lies in Y_n")]
    ChainTerminus(String),

    #[error("chain origin: {0} lies in X_n")]
    ChainOrigin(String),

    #[error("not in S_n: {0}")]
    NotInSn(String),

    #[error("outside the slash domain: {0}")]
    OutsideSlashDomain(String),

    #[error("branching condition violated: {0}")]
    BranchingViolated(String),

    #[error("point {0} lies on the branch cut")]
    OnBranchCut(String),

    #[error("exact mode requires integer weight, got {0}")]
    NonIntegerWeight(String),

    #[error("pole: {0}")]
    Pole(String),

    #[error("numeric failure: {0}")]
    Numeric(String),

    #[error("outside the Taylor disc: {0}")]
    OutsideDisc(String),

    #[error("integrity failure: {0}")]
    Integrity(String),
}

pub type Result<T> = std::result::Result<T, Error>;
