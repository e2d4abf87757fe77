use alloc::boxed::Box;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    DimensionMismatch {
        expected: usize,
        found: usize,
    },
    NonFinite,
    InvalidCone(String),
    InvalidNorm(String),
    InvalidArgument(String),
    InvalidCoefficients(String),
    /// An input vector that must lie in the cone does not.
    NotInCone {
        distance: f64,
    },
    /// Iteration budget exhausted before the stopping rule was met.
    Convergence {
        best: Vec<f64>,
        value: f64,
        residual: f64,
        iterations: usize,
    },
    Unsupported(String),
    /// A transform produced a table that is no longer a cone metric.
    Transform(String),
    /// The equivalent-metric table violated the triangle inequality; this
    /// indicates a solver fault, not a property of the input.
    TriangleViolation {
        i: usize,
        j: usize,
        k: usize,
        excess: f64,
    },
    /// A solver error raised while computing the table entry `(i, j)`.
    At {
        i: usize,
        j: usize,
        source: Box<Error>,
    },
    LabelMismatch,
    Sampler(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::NonFinite => f.write_str("non-finite entry"),
            Error::InvalidCone(msg) => write!(f, "invalid cone: {msg}"),
            Error::InvalidNorm(msg) => write!(f, "invalid norm: {msg}"),
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
            Error::InvalidCoefficients(msg) => write!(f, "invalid coefficients: {msg}"),
            Error::NotInCone { distance } => {
                write!(f, "vector is not in the cone (distance {distance:e})")
            }
            Error::Convergence {
                value,
                residual,
                iterations,
                ..
            } => write!(
                f,
                "no convergence after {iterations} iterations (best value {value}, residual {residual:e})"
            ),
            Error::Unsupported(msg) => write!(f, "unsupported: {msg}"),
            Error::Transform(msg) => write!(f, "transform broke the cone metric axioms: {msg}"),
            Error::TriangleViolation { i, j, k, excess } => write!(
                f,
                "equivalent metric violates the triangle inequality at ({i},{j}) via {k} by {excess:e}"
            ),
            Error::At { i, j, source } => write!(f, "at entry ({i},{j}): {source}"),
            Error::LabelMismatch => f.write_str("spaces do not share the same labels"),
            Error::Sampler(msg) => write!(f, "sampler failure: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
