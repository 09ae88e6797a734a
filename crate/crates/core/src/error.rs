use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("missing config key `{0}`")]
    MissingKey(String),

    #[error("invalid value for config key `{key}`: {reason}")]
    InvalidKey { key: String, reason: String },

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("degenerate channel: {0}")]
    DegenerateChannel(String),

    #[error("degenerate input: {0}")]
    DegenerateInput(String),

    #[error("non-finite input value {0}")]
    NonFinite(f64),

    #[error("matrix is singular")]
    Singular,

    #[error("matrix is not positive definite")]
    NotPositiveDefinite,

    #[error("quantizer alphabet is empty")]
    EmptyAlphabet,

    #[error("unsupported quantizer resolution B = {0} (supported: 1..=8)")]
    UnsupportedBits(u32),

    #[error(
        "instance too large for exact one-stage search: 2*M*log2(L) = {tree_bits} exceeds the \
         guard of {limit}; reduce M or B, or pass --allow-large"
    )]
    BudgetExceeded { tree_bits: usize, limit: usize },

    #[error("alphabet cannot meet the power budget: smallest achievable power {min_power} > q = {q}")]
    InfeasiblePower { min_power: f64, q: f64 },

    #[error("infinite rate for UE {0}: zero noise and zero interference")]
    InfiniteRate(usize),

    #[error("fronthaul budgets differ: one-stage {one_stage} bits vs split {split} bits")]
    InconsistentBudget { split: u64, one_stage: u64 },

    #[error("malformed csv: {0}")]
    Csv(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl Error {
    /// Errors caused by user-supplied configuration or input files.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config(_)
                | Error::MissingKey(_)
                | Error::InvalidKey { .. }
                | Error::UnsupportedBits(_)
                | Error::InfeasiblePower { .. }
                | Error::InconsistentBudget { .. }
                | Error::Csv(_)
        )
    }

    pub fn is_budget(&self) -> bool {
        matches!(self, Error::BudgetExceeded { .. })
    }
}
