use thiserror::Error;

/// Errors raised by the simulator and its probes.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum SksError {
    #[error("configuration error: {0}")]
    Config(String),
    #[error("domain error: {0}")]
    Domain(String),
    #[error("non-finite value in {0}")]
    Numeric(String),
    #[error("kernel singular at r = 0 in dimension {0}")]
    Singularity(usize),
    #[error("contract violation: {0}")]
    Contract(String),
    #[error("degenerate probe: {0}")]
    Degenerate(String),
    #[error("all {0} ensemble members blew up")]
    EnsembleBlowUp(usize),
}

pub type Result<T> = std::result::Result<T, SksError>;

pub(crate) fn ensure_finite(values: &[f64], what: &str) -> Result<()> {
    if values.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(SksError::Numeric(what.to_string()))
    }
}
