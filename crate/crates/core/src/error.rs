use crate::lp_solver::LpStatus;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("direction (u={u}, v={v}) lies outside the visible region")]
    OutsideVisibleRegion { u: f64, v: f64 },

    #[error("angle grid is empty after visible-region filtering")]
    EmptyGrid,

    #[error("index {index} out of range for length {len}")]
    IndexOutOfRange { index: usize, len: usize },

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not Hermitian (relative asymmetry {0:e})")]
    NotHermitian(f64),

    #[error("source {source_index} coincides with element {element}")]
    CoincidentSource { source_index: usize, element: usize },

    #[error("{stage}: linear program ended with status {status:?}")]
    Solver { stage: String, status: LpStatus },

    #[error("unsupported geometry: {0}")]
    UnsupportedGeometry(String),
}

impl Error {
    pub(crate) fn dims(msg: impl Into<String>) -> Self {
        Error::DimensionMismatch(msg.into())
    }

    pub(crate) fn invalid(msg: impl Into<String>) -> Self {
        Error::InvalidArgument(msg.into())
    }

    /// Prefix the stage label of a solver failure, e.g. with the outer
    /// iteration that produced it.
    pub fn in_stage(self, label: &str) -> Self {
        match self {
            Error::Solver { stage, status } => Error::Solver {
                stage: format!("{label}: {stage}"),
                status,
            },
            other => other,
        }
    }
}
