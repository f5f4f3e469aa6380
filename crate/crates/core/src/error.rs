use thiserror::Error;

/// Errors raised across the library.
///
/// Sampling failures that only weaken evidence (starved clouds, stalled
/// ladders) are not errors; they surface as `Inconclusive` statuses instead.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("syntax error at position {pos}: {message}")]
    Syntax { pos: usize, message: String },

    #[error("unknown variable `{0}`")]
    UnknownVariable(String),

    #[error("negative exponent at position {pos}")]
    NegativeExponent { pos: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("variable lists differ: {0}")]
    VariableMismatch(String),

    #[error("floating-point evaluation is not finite")]
    NonFinite,

    #[error("component {0} does not vanish at the origin")]
    NotAGerm(usize),

    #[error("invalid tolerance {0}: must be positive")]
    InvalidTolerance(f64),

    #[error("invalid rho: {0}")]
    InvalidRho(String),

    #[error("no convergence: {0}")]
    NoConvergence(String),

    #[error("precondition not met: {0}")]
    PreconditionNotMet(String),

    #[error("gradient vanishes on the sphere of radius {radius} near {point:?}")]
    GradientVanishesOnSphere { radius: f64, point: Vec<f64> },

    #[error("regular-value directions disagree on the degree: {candidates:?}")]
    DegreeDisagreement { candidates: Vec<i64> },

    #[error("invalid input: {0}")]
    Input(String),

    #[error("i/o: {0}")]
    Io(String),
}

impl Error {
    /// Stable machine-readable kind, used in CLI error documents.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::Syntax { .. } => "SyntaxError",
            Error::UnknownVariable(_) => "UnknownVariable",
            Error::NegativeExponent { .. } => "NegativeExponent",
            Error::DimensionMismatch { .. } => "DimensionMismatch",
            Error::VariableMismatch(_) => "VariableMismatch",
            Error::NonFinite => "NonFinite",
            Error::NotAGerm(_) => "NotAGerm",
            Error::InvalidTolerance(_) => "InvalidTolerance",
            Error::InvalidRho(_) => "InvalidRho",
            Error::NoConvergence(_) => "NoConvergence",
            Error::PreconditionNotMet(_) => "PreconditionNotMet",
            Error::GradientVanishesOnSphere { .. } => "GradientVanishesOnSphere",
            Error::DegreeDisagreement { .. } => "DegreeDisagreement",
            Error::Input(_) => "InputError",
            Error::Io(_) => "IoError",
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
