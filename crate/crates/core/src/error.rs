use thiserror::Error;

pub type Result<T> = std::result::Result<T, DceError>;

#[derive(Debug, Error)]
pub enum DceError {
    /// Rejected configuration or physical input.
    #[error("invalid configuration: {0}")]
    Config(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("root solve did not converge on branch {branch}: bracket [{lo:e}, {hi:e}], residual {residual:e}")]
    NoConvergence {
        branch: u32,
        lo: f64,
        hi: f64,
        residual: f64,
    },

    #[error("quadrature did not converge: estimate {estimate:e}, last change {change:e}")]
    Quadrature { estimate: f64, change: f64 },

    #[error("insufficient samples: {samples} samples cannot resolve harmonic {harmonic} (need {needed})")]
    Resolution {
        samples: usize,
        harmonic: u32,
        needed: usize,
    },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("step-size audit failed: halving dt changed N by {relative_change:.3e} (limit {limit:.1e})")]
    StepAudit { relative_change: f64, limit: f64 },

    #[error("step budget exceeded: {steps} steps requested, limit {limit}")]
    StepBudget { steps: u64, limit: u64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl DceError {
    /// Config-class errors map to CLI exit code 2, everything else to 3.
    pub fn is_config(&self) -> bool {
        matches!(self, DceError::Config(_) | DceError::Io(_) | DceError::Csv(_))
    }
}
