//! Error type shared by every module of the engine.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("cycle detected: back edge {from} -> {to}")]
    CycleDetected { from: String, to: String },

    #[error("mechanism for '{child}' is partial: {detail}")]
    PartialMechanism { child: String, detail: String },

    #[error("bad distribution for '{variable}': probabilities sum to {sum}")]
    BadDistribution { variable: String, sum: f64 },

    #[error("unknown variable '{0}'")]
    UnknownVariable(String),

    #[error("cannot intervene on latent variable '{0}'")]
    LatentIntervention(String),

    #[error("value {value} out of range for '{variable}' (cardinality {cardinality})")]
    ValueOutOfRange {
        variable: String,
        value: u32,
        cardinality: u32,
    },

    #[error("latent support of {support} configurations exceeds enumeration cap {cap}")]
    EnumerationTooLarge { support: u128, cap: u64 },

    #[error("evidence has probability {prob:e}, below the zero-evidence threshold")]
    ZeroEvidence { prob: f64 },

    #[error("no samples matched the evidence after {draws} draws")]
    NoAcceptedSamples { draws: usize },

    #[error("'{variable}' must be binary, found cardinality {cardinality}")]
    NonBinary { variable: String, cardinality: u32 },

    #[error("no matching unit for treatment {treatment}: treated subsample is empty")]
    NoMatch { treatment: usize },

    #[error("loss became non-finite at epoch {epoch}, batch {batch}")]
    NonFiniteLoss { epoch: usize, batch: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("invalid SCM description: {0}")]
    InvalidSpec(String),

    #[error("invalid query: {0}")]
    InvalidQuery(String),

    #[error("invalid ordering: {0}")]
    InvalidOrdering(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    /// Stable machine-readable name, used in CLI error objects and FFI codes.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::CycleDetected { .. } => "CycleDetected",
            Error::PartialMechanism { .. } => "PartialMechanism",
            Error::BadDistribution { .. } => "BadDistribution",
            Error::UnknownVariable(_) => "UnknownVariable",
            Error::LatentIntervention(_) => "LatentIntervention",
            Error::ValueOutOfRange { .. } => "ValueOutOfRange",
            Error::EnumerationTooLarge { .. } => "EnumerationTooLarge",
            Error::ZeroEvidence { .. } => "ZeroEvidence",
            Error::NoAcceptedSamples { .. } => "NoAcceptedSamples",
            Error::NonBinary { .. } => "NonBinary",
            Error::NoMatch { .. } => "NoMatch",
            Error::NonFiniteLoss { .. } => "NonFiniteLoss",
            Error::DimensionMismatch(_) => "DimensionMismatch",
            Error::InvalidSpec(_) => "InvalidSpec",
            Error::InvalidQuery(_) => "InvalidQuery",
            Error::InvalidOrdering(_) => "InvalidOrdering",
            Error::InvalidData(_) => "InvalidData",
            Error::InvalidConfig(_) => "InvalidConfig",
            Error::Io(_) => "Io",
            Error::Json(_) => "Json",
            Error::Csv(_) => "Csv",
        }
    }
}
