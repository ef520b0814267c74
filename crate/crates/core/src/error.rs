use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("state is not normalized (norm {norm}, tolerance {tolerance:e})")]
    NotNormalized { norm: f64, tolerance: f64 },

    #[error("index out of range: {0}")]
    IndexOutOfRange(String),

    #[error("X X^dagger is singular with lambda = 0 (smallest singular value {smallest_singular_value:e})")]
    IllConditioned { smallest_singular_value: f64 },

    #[error("degenerate prediction: {0}")]
    DegeneratePrediction(String),

    #[error("subnormalization {alpha} is below the operator norm {norm} of the encoded matrix")]
    InfeasibleSubnormalization { alpha: f64, norm: f64 },

    #[error("post-selection success probability {probability:e} is below {threshold:e}")]
    DegeneratePostSelection { probability: f64, threshold: f64 },

    #[error("precondition violated ({condition}): {detail}")]
    Precondition { condition: &'static str, detail: String },

    #[error("singular values outside the polynomial domain [{lower}, 1]: {offenders:?}")]
    DomainViolation { lower: f64, offenders: Vec<f64> },

    #[error(
        "inversion polynomial did not converge at degree cap {degree_cap}: sup error {sup_error:e} > target {target:e}"
    )]
    PolynomialDidNotConverge {
        degree_cap: usize,
        sup_error: f64,
        target: f64,
    },

    #[error("register budget exceeded: {required} qubits required, limit is {limit}")]
    RegisterBudget { required: usize, limit: usize },

    #[error("numerical routine failed: {0}")]
    Numerical(String),

    #[error("format error: {0}")]
    Format(String),

    #[error("configuration error in `{field}`: {message}")]
    Config { field: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable machine-readable tag for the error class.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidArgument(_) => "invalid_argument",
            Error::DimensionMismatch(_) => "dimension_mismatch",
            Error::NotNormalized { .. } => "not_normalized",
            Error::IndexOutOfRange(_) => "index_out_of_range",
            Error::IllConditioned { .. } => "ill_conditioned",
            Error::DegeneratePrediction(_) => "degenerate_prediction",
            Error::InfeasibleSubnormalization { .. } => "infeasible_subnormalization",
            Error::DegeneratePostSelection { .. } => "degenerate_post_selection",
            Error::Precondition { .. } => "precondition",
            Error::DomainViolation { .. } => "domain_violation",
            Error::PolynomialDidNotConverge { .. } => "polynomial_did_not_converge",
            Error::RegisterBudget { .. } => "register_budget",
            Error::Numerical(_) => "numerical",
            Error::Format(_) => "format",
            Error::Config { .. } => "config",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
            Error::Csv(_) => "csv",
        }
    }

    pub(crate) fn precondition(condition: &'static str, detail: impl Into<String>) -> Self {
        Error::Precondition {
            condition,
            detail: detail.into(),
        }
    }
}
