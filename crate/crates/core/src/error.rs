use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    /// An operation precondition does not hold (bad parameter range, invalid
    /// pair, malformed word, ...).
    #[error("precondition violated: {0}")]
    Precondition(String),

    /// A frequency is outside the quadrature-validity range of the integral
    /// evaluator; callers should fall back to the decay bound instead.
    #[error("oscillation budget exceeded: |x| * X^c = {product:.3e} > {budget:.3e}")]
    OscillationBudget { product: f64, budget: f64 },

    /// A configured desk-scale cap (memory or work) would be exceeded.
    #[error("resource cap exceeded: {0}")]
    ResourceCap(String),
}

pub type Result<T> = std::result::Result<T, Error>;

impl Error {
    pub fn precondition(msg: impl Into<String>) -> Self {
        Error::Precondition(msg.into())
    }

    pub fn cap(msg: impl Into<String>) -> Self {
        Error::ResourceCap(msg.into())
    }
}
