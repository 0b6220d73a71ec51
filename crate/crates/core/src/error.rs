use alloc::string::String;

/// Errors raised across the crate.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("value {value} outside domain {domain}")]
    Domain { value: f64, domain: &'static str },
    #[error("invalid argument: {0}")]
    Argument(String),
    #[error("invalid distribution: {0}")]
    Distribution(String),
    #[error("no root: {0}")]
    NoRoot(String),
    #[error("invalid action: {0}")]
    Action(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("unsupported: {0}")]
    Capability(String),
    #[error("horizon exhausted after {played} rounds")]
    HorizonExhausted { played: u64 },
    #[error("invariant violated: {0}")]
    Invariant(String),
}

pub type Result<T, E = Error> = core::result::Result<T, E>;

impl Error {
    pub(crate) fn arg(msg: impl Into<String>) -> Self {
        Error::Argument(msg.into())
    }

    pub fn is_horizon(&self) -> bool {
        matches!(self, Error::HorizonExhausted { .. })
    }
}
