use thiserror::Error;

/// Failures reported by every fallible operation in the crate.
///
/// Validation errors are caused by malformed or inconsistent inputs.
/// Numeric failures come from evaluations that leave the finite domain
/// (singular solves, non-finite states, vanishing integrands).
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),
    #[error("numeric failure: {0}")]
    Numeric(String),
}

impl Error {
    pub fn validation(msg: impl Into<String>) -> Self {
        Error::Validation(msg.into())
    }

    pub fn numeric(msg: impl Into<String>) -> Self {
        Error::Numeric(msg.into())
    }

    pub fn is_numeric(&self) -> bool {
        matches!(self, Error::Numeric(_))
    }
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn ensure_len(what: &str, got: usize, want: usize) -> Result<()> {
    if got != want {
        return Err(Error::validation(format!(
            "{what}: expected length {want}, got {got}"
        )));
    }
    Ok(())
}
