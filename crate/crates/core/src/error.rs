use thiserror::Error;

/// Errors raised by the core library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid design: {0}")]
    InvalidDesign(String),

    #[error("arithmetic overflow: {0}")]
    Overflow(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("assignments belong to different designs")]
    DesignMismatch,

    #[error("relabeling requires a balanced design (2n = N), got N = {cups}, n = {tm}")]
    UnbalancedRelabel { cups: u32, tm: u32 },

    #[error("enumeration guard: C(N, n) = {count} exceeds the limit {limit}")]
    EnumerationGuard { count: u64, limit: u64 },

    #[error("invalid distribution: {0}")]
    InvalidDistribution(String),

    #[error("infeasible entropy level {h}: must lie in ({min}, {max}]")]
    InfeasibleEntropy { h: f64, min: f64, max: f64 },

    #[error("solver did not converge after {iterations} iterations (residual {residual:e})")]
    NonConvergence { iterations: usize, residual: f64 },

    #[error("distributions are defined on different loss-class tables")]
    TableMismatch,

    #[error("entropy levels out of order: low = {low}, high = {high}")]
    UnorderedEntropies { low: f64, high: f64 },

    #[error("invalid rejection region: {0}")]
    InvalidRegion(String),

    #[error("invalid observed loss {loss}: must be even and at most {max}")]
    InvalidLoss { loss: u32, max: u32 },
}

impl Error {
    /// Short machine-readable tag for the error variant.
    pub fn kind(&self) -> &'static str {
        match self {
            Error::InvalidDesign(_) => "invalid_design",
            Error::Overflow(_) => "overflow",
            Error::InvalidArgument(_) => "invalid_argument",
            Error::DesignMismatch => "design_mismatch",
            Error::UnbalancedRelabel { .. } => "unbalanced_relabel",
            Error::EnumerationGuard { .. } => "enumeration_guard",
            Error::InvalidDistribution(_) => "invalid_distribution",
            Error::InfeasibleEntropy { .. } => "infeasible_entropy",
            Error::NonConvergence { .. } => "non_convergence",
            Error::TableMismatch => "table_mismatch",
            Error::UnorderedEntropies { .. } => "unordered_entropies",
            Error::InvalidRegion(_) => "invalid_region",
            Error::InvalidLoss { .. } => "invalid_loss",
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
