use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SetError {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },
}

impl SetError {
    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        SetError::InvalidInput(msg.into())
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RateError {
    /// An iteration count or magnitude exceeded the configured caps. `formula`
    /// names the sub-formula chain, outermost first.
    #[error("resource cap exceeded in {formula}: {detail}")]
    Resource { formula: String, detail: String },
    #[error("invalid rate input: {0}")]
    InvalidInput(String),
    #[error("parse error: {0}")]
    Parse(String),
}

impl RateError {
    pub(crate) fn resource(formula: impl Into<String>, detail: impl Into<String>) -> Self {
        RateError::Resource {
            formula: formula.into(),
            detail: detail.into(),
        }
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        RateError::InvalidInput(msg.into())
    }

    /// Prefixes the offending formula path with an enclosing formula name.
    pub(crate) fn within(self, outer: &str) -> Self {
        match self {
            RateError::Resource { formula, detail } => RateError::Resource {
                formula: format!("{outer} > {formula}"),
                detail,
            },
            other => other,
        }
    }

    pub fn is_resource(&self) -> bool {
        matches!(self, RateError::Resource { .. })
    }
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DiagnosticsError {
    #[error("index {index} outside trace range 0..={steps}")]
    IndexOutOfRange { index: usize, steps: usize },
    #[error("invalid witness: {0}")]
    InvalidWitness(String),
    #[error("invalid diagnostics input: {0}")]
    InvalidInput(String),
    #[error(transparent)]
    Set(#[from] SetError),
    #[error(transparent)]
    Rate(#[from] RateError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EngineError {
    #[error("resource limit: {0}")]
    Resource(String),
    #[error(transparent)]
    Set(#[from] SetError),
}
