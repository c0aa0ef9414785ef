use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("index {index} out of range for input dimension {p}")]
    IndexOutOfRange { index: usize, p: usize },

    #[error("invalid kernel: {0}")]
    InvalidKernel(String),

    #[error("invalid boundary `{label}`: {reason}")]
    InvalidBoundary { label: String, reason: String },

    #[error("boundary pairs neither intersect nor nest: {}", fmt_pairs(.pairs))]
    InvalidPair { pairs: Vec<(String, String)> },

    #[error("identical boundaries: {}", fmt_pairs(.pairs))]
    IdenticalBoundaries { pairs: Vec<(String, String)> },

    #[error("boundary solver `{label}` failed: {reason}")]
    Solver { label: String, reason: String },

    #[error("degenerate denominator while adjusting by boundary `{0}`")]
    DegenerateDenominator(String),

    #[error("training covariance is singular: {0}")]
    SingularTrainingCovariance(String),

    #[error("covariance matrix of the augmented design is singular (size {size})")]
    SingularMatrix { size: usize },

    #[error("output covariance is not positive semi-definite (min eigenvalue {min_eigenvalue:e})")]
    NotPositiveSemiDefinite { min_eigenvalue: f64 },

    #[error("unsupported multivariate update: {0}")]
    UnsupportedChain(String),

    #[error("input `{name}` = {value} outside [{min}, {max}]")]
    OutOfRange {
        name: String,
        value: f64,
        min: f64,
        max: f64,
    },

    #[error("ODE integration failed: {reason}; parameters = {params:?}")]
    Integration { reason: String, params: Vec<f64> },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

fn fmt_pairs(pairs: &[(String, String)]) -> String {
    pairs
        .iter()
        .map(|(a, b)| format!("({a}, {b})"))
        .collect::<Vec<_>>()
        .join(", ")
}

impl Error {
    /// True for failures of the numerical machinery rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::DegenerateDenominator(_)
                | Error::SingularTrainingCovariance(_)
                | Error::SingularMatrix { .. }
                | Error::NotPositiveSemiDefinite { .. }
                | Error::Integration { .. }
                | Error::Solver { .. }
        )
    }
}
