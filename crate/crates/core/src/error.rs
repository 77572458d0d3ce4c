use thiserror::Error;

/// Errors raised by the stellar-representation library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("amplitude count {got} does not match two_s + 1 = {expected}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("state vector is identically zero")]
    EmptyState,

    #[error("polynomial has no nonzero coefficient")]
    ZeroPolynomial,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("constellation is empty")]
    EmptyConstellation,

    #[error("operation requires N = {expected}, got N = {got}")]
    WrongSize { expected: usize, got: usize },

    #[error("operation requires N >= {min}, got N = {got}")]
    TooFewStars { min: usize, got: usize },

    #[error("multipole order {max_l} exceeds 2S = {two_s}")]
    OrderOutOfRange { max_l: usize, two_s: usize },

    #[error("matrix size {n} exceeds the exact-permanent guard of {limit}")]
    SizeGuard { n: usize, limit: usize },

    #[error("vector is not of unit length (norm {0})")]
    NotUnit(f64),

    #[error("zero-norm axis")]
    ZeroAxis,

    #[error("mean spin vanishes; squeezing parameter undefined")]
    VanishingMeanSpin,

    #[error("input sequence is empty")]
    EmptyInput,

    #[error("path is not closed (endpoint gap {0})")]
    OpenLoop(f64),

    #[error("drive is nonlinear; star-wise Riccati integration needs a linear drive")]
    NonlinearDrive,

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("antipodal basis is rank deficient near star cluster {cluster} (gram determinant {det:e})")]
    RankDeficient { cluster: usize, det: f64 },

    #[error("star matching is ambiguous at step {step}")]
    MatchingAmbiguity { step: usize },

    #[error("malformed input: {0}")]
    Malformed(String),
}

pub type Result<T> = std::result::Result<T, Error>;
