use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid {field}: {reason}")]
    Config { field: &'static str, reason: String },

    #[error("capacity exceeded for {what}: need {required}, limit {limit}")]
    Capacity {
        what: &'static str,
        required: u128,
        limit: u128,
    },

    #[error("unsupported: {0}")]
    Unsupported(String),

    #[error("empty sector: {0}")]
    EmptySector(String),

    #[error("operator is not flagged Hermitian")]
    NotHermitian,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("no convergence after {iterations} iterations, best residuals {residuals:?}")]
    NoConvergence { iterations: usize, residuals: Vec<f64> },

    #[error("degenerate denominator {gap:e} at state {state}")]
    Degeneracy { state: usize, gap: f64 },

    #[error("gap undefined: spectrum has a single cluster")]
    UndefinedGap,

    #[error("fit failed: {0}")]
    Fit(String),
}

impl Error {
    pub(crate) fn config(field: &'static str, reason: impl Into<String>) -> Self {
        Error::Config {
            field,
            reason: reason.into(),
        }
    }
}
