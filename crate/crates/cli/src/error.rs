use std::fmt;

use majorana_core::Error;
use serde::Serialize;

/// Machine-readable failure written to standard error as one JSON line.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CliError {
    pub code: &'static str,
    pub message: String,
}

impl CliError {
    pub fn new(code: &'static str, message: impl Into<String>) -> Self {
        CliError { code, message: message.into() }
    }

    pub fn invalid(message: impl Into<String>) -> Self {
        Self::new("INVALID_ARGUMENT", message)
    }

    pub fn io(path: &std::path::Path, err: std::io::Error) -> Self {
        let code = match err.kind() {
            std::io::ErrorKind::NotFound => "FILE_NOT_FOUND",
            std::io::ErrorKind::PermissionDenied => "PERMISSION_DENIED",
            _ => "IO_ERROR",
        };
        Self::new(code, format!("{}: {err}", path.display()))
    }

    pub fn json(what: &str, err: serde_json::Error) -> Self {
        Self::new("MALFORMED_JSON", format!("{what}: {err}"))
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.code, self.message)
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::LengthMismatch { .. } | Error::DimensionMismatch { .. } => "DIMENSION_MISMATCH",
            Error::EmptyState => "EMPTY_STATE",
            Error::ZeroPolynomial => "ZERO_POLYNOMIAL",
            Error::EmptyConstellation => "EMPTY_CONSTELLATION",
            Error::WrongSize { .. } => "WRONG_SIZE",
            Error::TooFewStars { .. } => "TOO_FEW_STARS",
            Error::OrderOutOfRange { .. } => "ORDER_OUT_OF_RANGE",
            Error::SizeGuard { .. } => "SIZE_GUARD",
            Error::NotUnit(_) => "NOT_UNIT",
            Error::ZeroAxis => "ZERO_AXIS",
            Error::VanishingMeanSpin => "VANISHING_MEAN_SPIN",
            Error::EmptyInput => "EMPTY_INPUT",
            Error::OpenLoop(_) => "OPEN_LOOP",
            Error::NonlinearDrive => "NONLINEAR_DRIVE",
            Error::InvalidArgument(_) => "INVALID_ARGUMENT",
            Error::RankDeficient { .. } => "RANK_DEFICIENT",
            Error::MatchingAmbiguity { .. } => "MATCHING_AMBIGUITY",
            Error::Malformed(_) => "MALFORMED_INPUT",
        };
        CliError::new(code, e.to_string())
    }
}

pub type CliResult<T> = std::result::Result<T, CliError>;
