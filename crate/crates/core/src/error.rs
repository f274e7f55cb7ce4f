//! Error type shared across the kit.

use std::fmt;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug)]
pub enum Error {
    /// Mesh failed a structural invariant (orientation, interface matching, ...).
    InvalidMesh(String),
    /// Geometry tag not recognized by the mesh builder.
    UnknownGeometry(String),
    /// A mesh motion flipped an element and was rejected.
    InvalidMotion { min_det: f64 },
    /// Time step must be strictly positive.
    NonPositiveTimeStep,
    /// Material parameters must be strictly positive.
    InvalidParameter(String),
    /// Factorization hit a zero (or structurally missing) pivot.
    SingularMatrix { pivot: usize },
    /// Operand dimensions disagree.
    DimensionMismatch { expected: usize, got: usize },
    /// A previous-step field required by the assembly is missing or mis-sized.
    MissingState(String),
    /// A boundary value was supplied for a DOF that is not constrained.
    NonDirichletDof { dof: usize },
    /// Iterative solve exhausted its iteration budget.
    NotConverged { iterations: usize, residual: f64 },
    /// Dense analysis refused a problem above its size guard.
    SizeTooLarge { size: usize, limit: usize },
    /// A time step could not be completed.
    StepAborted { step: usize, reason: String },
    /// Malformed text input (mesh files, config files).
    Parse(String),
    Io(std::io::Error),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidMesh(msg) => write!(f, "invalid mesh: {msg}"),
            Error::UnknownGeometry(tag) => write!(f, "unknown geometry tag '{tag}'"),
            Error::InvalidMotion { min_det } => {
                write!(f, "mesh motion rejected: min det(grad A) = {min_det:e} <= 0")
            }
            Error::NonPositiveTimeStep => write!(f, "time step must be positive"),
            Error::InvalidParameter(msg) => write!(f, "invalid parameter: {msg}"),
            Error::SingularMatrix { pivot } => {
                write!(f, "matrix is singular at pivot {pivot}")
            }
            Error::DimensionMismatch { expected, got } => {
                write!(f, "dimension mismatch: expected {expected}, got {got}")
            }
            Error::MissingState(msg) => write!(f, "missing state field: {msg}"),
            Error::NonDirichletDof { dof } => {
                write!(f, "boundary value given for non-Dirichlet DOF {dof}")
            }
            Error::NotConverged { iterations, residual } => write!(
                f,
                "solver did not converge in {iterations} iterations (residual {residual:e})"
            ),
            Error::SizeTooLarge { size, limit } => {
                write!(f, "problem size {size} exceeds dense-analysis limit {limit}")
            }
            Error::StepAborted { step, reason } => {
                write!(f, "time step {step} aborted: {reason}")
            }
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
            Error::Io(e) => write!(f, "io error: {e}"),
        }
    }
}

impl std::error::Error for Error {}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e)
    }
}
