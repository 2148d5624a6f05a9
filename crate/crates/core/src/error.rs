use thiserror::Error;

/// Errors produced while evaluating products, sums, integrals and identity checks.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum QError {
    #[error("truncation cap of {max_terms} terms reached in {context} before the tail bound was met")]
    TruncationExceeded { context: &'static str, max_terms: usize },

    #[error("domain error: {0}")]
    Domain(String),

    #[error("non-finite value encountered in {0}")]
    NonFinite(&'static str),

    #[error("pole hit: {0}")]
    PoleHit(String),

    #[error("endpoints q/a_{i} and q/a_{j} lie on a common q-lattice")]
    LatticeCollision { i: usize, j: usize },

    #[error("balance condition violated (relative residual {residual:.3e})")]
    BalanceViolation { residual: f64 },

    #[error("outside the convergence domain: {0}")]
    ConvergenceDomain(String),

    #[error("sampler exhausted after {attempts} rejections")]
    SamplerExhausted { attempts: usize },

    #[error("degenerate coefficient: {0}")]
    DegenerateCoefficient(String),

    #[error("invalid parameters: {0}")]
    InvalidParams(String),
}

pub type Result<T> = std::result::Result<T, QError>;
