use thiserror::Error;

/// Errors raised by the toolkit.
///
/// `Config`, `Domain`, `HomogeneousOnly`, `AmbiguousRoot`, `Tail` and `Shape`
/// are caller-side problems (CLI exit code 2); the rest, including a failed
/// consistency gate, are internal faults.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum HmfError {
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("no nontrivial steady state: {0}")]
    HomogeneousOnly(String),
    #[error("several nontrivial roots in bracket: {0}")]
    AmbiguousRoot(String),
    #[error("integration budget exceeded in {what} (partial value {value:e}, error estimate {error:e})")]
    Integration { what: String, value: f64, error: f64 },
    #[error("non-convergent tail: {0}")]
    Tail(String),
    #[error("grid shape mismatch: {0}")]
    Shape(String),
    #[error("consistency gate failed: {0}")]
    Gate(String),
    #[error("non-finite state at t = {t}")]
    NonFinite { t: f64 },
    #[error("i/o error: {0}")]
    Io(String),
}

impl HmfError {
    /// Machine-readable tag used in JSON error objects.
    pub fn kind(&self) -> &'static str {
        match self {
            HmfError::Config(_) => "config",
            HmfError::Domain(_) => "domain",
            HmfError::HomogeneousOnly(_) => "homogeneous_only",
            HmfError::AmbiguousRoot(_) => "ambiguous_root",
            HmfError::Integration { .. } => "integration",
            HmfError::Tail(_) => "tail",
            HmfError::Shape(_) => "shape",
            HmfError::Gate(_) => "gate",
            HmfError::NonFinite { .. } => "non_finite",
            HmfError::Io(_) => "io",
        }
    }

    pub fn is_user_error(&self) -> bool {
        !matches!(
            self,
            HmfError::Integration { .. } | HmfError::NonFinite { .. } | HmfError::Io(_) | HmfError::Gate(_)
        )
    }
}

impl From<std::io::Error> for HmfError {
    fn from(e: std::io::Error) -> Self {
        HmfError::Io(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, HmfError>;
