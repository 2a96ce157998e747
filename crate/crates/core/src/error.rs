use thiserror::Error;

pub type Result<T> = std::result::Result<T, FlockError>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlockError {
    /// An input violates the domain of the operation (non-finite values,
    /// out-of-range parameters, malformed rules).
    #[error("domain error: {0}")]
    Domain(String),

    #[error("dimension mismatch: {0}")]
    Dimension(String),

    /// Every raw influence weight of a row underflowed to zero.
    #[error("influence row {row} has zero raw weight sum (underflow)")]
    DegenerateRow { row: usize },

    #[error("integration blew up; last valid time t = {last_valid_t}")]
    BlowUp { last_valid_t: f64 },

    #[error(
        "adaptive step underflow at t = {t} (dt = {dt:e}); the system is too stiff for \
         this tolerance, use rk4 with dt <= eps/20 or loosen rtol/atol"
    )]
    StepUnderflow { t: f64, dt: f64 },

    #[error("sampling too coarse: {0}")]
    Sampling(String),

    /// Linear algebra failed beyond the expected rank-one deficiency.
    #[error("singular system: {0}")]
    Singular(String),

    #[error("unsupported configuration: {0}")]
    Unsupported(String),
}

pub(crate) fn ensure_finite(values: &[f64], what: &str) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(k) => Err(FlockError::Domain(format!(
            "{what} contains a non-finite entry at flat index {k}"
        ))),
        None => Ok(()),
    }
}
