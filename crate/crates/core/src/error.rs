use thiserror::Error;

/// Errors raised by the solvers. Metric violations are reported as data by
/// [`crate::validate_metric`] rather than through this type.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("invalid instance: {0}")]
    InvalidInstance(String),

    #[error("clustering invalid: {0}")]
    ClusteringInvalid(String),

    #[error("no centers given")]
    EmptyCenters,

    #[error("invalid perturbation: {0}")]
    InvalidPerturbation(String),

    #[error("instance too large for exhaustive search ({work} candidates, cap {cap})")]
    InstanceTooLarge { work: u128, cap: u128 },

    #[error("floating-point simplex lost precision; retry in exact mode")]
    SolverPrecisionExceeded,

    #[error("operation requires a symmetric instance")]
    AsymmetricUnsupported,

    #[error("operation does not support outliers (z must be 0)")]
    OutliersUnsupported,

    #[error("no feasible clustering with k = {k} clusters and at most {z} outliers")]
    Infeasible { k: usize, z: usize },

    #[error("generator configuration infeasible: {0}")]
    ConfigInfeasible(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
