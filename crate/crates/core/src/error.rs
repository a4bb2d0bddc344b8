use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),

    /// The conditioning system could not be solved: the matrix is singular, or
    /// indefinite where a positive-definite matrix was required.
    #[error("singular conditioning matrix (lambda_min = {lambda_min:e}, lambda_max = {lambda_max:e})")]
    SingularConditioning { lambda_min: f64, lambda_max: f64 },

    #[error("evaluation failed at theta = {theta:?}: {reason}")]
    Evaluation { theta: Vec<f64>, reason: String },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("all {attempted} evaluations failed")]
    AllFailed { attempted: usize },

    #[error("config error: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidInput(msg.into())
    }

    pub(crate) fn evaluation(theta: &[f64], reason: impl Into<String>) -> Self {
        Error::Evaluation {
            theta: theta.to_vec(),
            reason: reason.into(),
        }
    }

    /// True for failures raised while evaluating a model (including domain refusals).
    pub fn is_evaluation(&self) -> bool {
        matches!(self, Error::Evaluation { .. } | Error::Domain(_))
    }
}
