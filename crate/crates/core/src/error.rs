use thiserror::Error;

use crate::sdp::SolveStatus;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: {0}")]
    Dimension(String),

    #[error("invalid permutation: {0}")]
    Permutation(String),

    #[error("matrix is not Hermitian (relative asymmetry {asymmetry:.3e})")]
    NotHermitian { asymmetry: f64 },

    #[error("matrix is not positive semidefinite (eigenvalue {eigenvalue:.3e})")]
    NotPsd { eigenvalue: f64 },

    #[error("matrix is not a projector (residual {residual:.3e})")]
    NotProjector { residual: f64 },

    #[error("invalid specification: {0}")]
    Spec(String),

    #[error("dimension {dim} exceeds the supported limit {limit}")]
    TooLarge { dim: usize, limit: usize },

    #[error("missing data: {0}")]
    Missing(String),

    #[error("solver finished with status {status:?} while computing {what}")]
    Solver { what: String, status: SolveStatus },

    #[error("infeasible request: {0}")]
    Infeasible(String),

    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl Error {
    pub(crate) fn dim(msg: impl Into<String>) -> Self {
        Error::Dimension(msg.into())
    }

    pub(crate) fn spec(msg: impl Into<String>) -> Self {
        Error::Spec(msg.into())
    }
}
