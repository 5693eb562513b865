use thiserror::Error;

/// Errors raised by the library. Numerical values are carried as `f64` so
/// that the error type does not depend on the scalar parameter.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid spacetime: {0}")]
    InvalidSpacetime(String),
    #[error("grid resolution too small: need at least {min} nodes per axis, got {got}")]
    ResolutionTooSmall { min: usize, got: usize },
    #[error("tangent vectors are based at different points")]
    BaseMismatch,
    #[error("operation requires a constant warp factor")]
    NonConstantWarp,
    #[error("fields live on different grids ({left} vs {right} nodes)")]
    GridMismatch { left: usize, right: usize },
    #[error("the function {0} is not smooth enough for this operation")]
    NonSmoothFunction(String),
    #[error("geodesic is not timelike")]
    NotTimelike,
    #[error("boundary-value problem is singular (conjugate point) at {0}")]
    ConjugatePoint(String),
    #[error("geodesic shooting did not converge: {0}")]
    ShootingFailed(String),
    #[error("singular linear system")]
    SingularSystem,
    #[error("malformed partition: {0}")]
    MalformedPartition(String),
    #[error("parameter out of range: {0}")]
    OutOfRange(String),
    #[error("precondition violated: {0}")]
    Precondition(String),
    #[error("neighbourhood graph is disconnected: {0}")]
    Disconnected(String),
    #[error("no boundary point detected: {0}")]
    EmptyBoundary(String),
    #[error("finite-difference step underflow")]
    StepUnderflow,
    #[error("hypotheses not met: {0}")]
    Hypotheses(String),
    #[error("configuration error: {0}")]
    Config(String),
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
