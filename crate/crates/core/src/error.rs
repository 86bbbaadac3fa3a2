use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("contract violation: {0}")]
    Contract(String),

    #[error("non-finite entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("{routine} did not converge")]
    FactorizationFailure { routine: &'static str },

    /// The sample has no support on either retained spectrum, so the
    /// alignment angle is undefined.
    #[error(
        "non-relational sample: a = b = 0 (block masses r={mass_r:.3e}, k={mass_k:.3e}, t={mass_t:.3e})"
    )]
    NonRelational { mass_r: f64, mass_k: f64, mass_t: f64 },

    #[error("sample outside column spaces (relative residuals A={residual_a:.3e}, B={residual_b:.3e})")]
    OutsideColumnSpace { residual_a: f64, residual_b: f64 },

    #[error("no shared block (k = 0)")]
    NoSharedBlock,

    #[error("out of range: {0}")]
    Range(String),

    #[error("shared mask is empty at threshold {threshold}")]
    DegenerateAlignment { threshold: f64 },

    #[error("format error: {0}")]
    Format(String),

    #[error("inconsistent inputs: {0}")]
    Consistency(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Errors caused by the caller's inputs, as opposed to numerical trouble.
    pub fn is_input_error(&self) -> bool {
        !matches!(
            self,
            Error::FactorizationFailure { .. }
                | Error::NonRelational { .. }
                | Error::NoSharedBlock
                | Error::DegenerateAlignment { .. }
        )
    }

    /// Short machine-readable tag, used by the CLI's JSON error reports.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::EmptyInput(_) => "empty_input",
            Error::Contract(_) => "contract_violation",
            Error::NonFinite { .. } => "non_finite",
            Error::FactorizationFailure { .. } => "factorization_failure",
            Error::NonRelational { .. } => "non_relational",
            Error::OutsideColumnSpace { .. } => "outside_column_space",
            Error::NoSharedBlock => "no_shared_block",
            Error::Range(_) => "range",
            Error::DegenerateAlignment { .. } => "degenerate_alignment",
            Error::Format(_) => "format",
            Error::Consistency(_) => "consistency",
            Error::Io(_) => "io",
            Error::Json(_) => "json",
        }
    }
}
