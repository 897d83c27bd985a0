use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("parameter `{0}` is not part of the one-compartment model")]
    NotInModel(&'static str),

    #[error("invalid design: {0}")]
    InvalidDesign(String),

    #[error("invalid data: {0}")]
    InvalidData(String),

    #[error("subject {subject} keeps {kept} observation(s) after sacrifice truncation, need at least 2")]
    Truncated { subject: usize, kept: usize },

    #[error("invalid weights: {0}")]
    InvalidWeights(String),

    #[error("summary statistic undefined: {0}")]
    Summary(String),

    #[error("dimension mismatch: expected {expected}, got {got}")]
    Dimension { expected: usize, got: usize },

    #[error("not enough samples: {0}")]
    Samples(String),

    #[error("chain initialization failed: {0}")]
    Initialization(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn param(msg: impl Into<String>) -> Self {
        Error::InvalidParameter(msg.into())
    }
}
