use alloc::string::String;
use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A configuration field violates its invariant.
    InvalidConfig { field: &'static str, reason: String },
    /// Shapes of cooperating values disagree.
    DimensionMismatch { what: &'static str, expected: usize, found: usize },
    InvalidGeometry { inner: f64, outer: f64 },
    ZeroDistance { device: usize, rrh: usize },
    /// The sample covariance has fewer than `requested` significant eigenvalues.
    RankDeficient { requested: usize, achievable: usize },
    /// A class has fewer than two labelled samples.
    EmptyClass { label: usize, count: usize },
    NonPositiveQuantization { index: usize, value: f64 },
    /// Dimension `dim` carries no discriminant information (all class means equal).
    InactiveDimension { dim: usize },
    /// Every feature dimension is inactive, there is nothing to optimize.
    InactiveProblem,
    NonPositiveAnchor { dim: usize, value: f64 },
    DegenerateChannels,
    VanishingEffectiveChannel { device: usize, dim: usize },
    ZeroScale { dim: usize },
    /// The convex solver could not certify a solution.
    Solver { status: crate::solver::SolveStatus, context: &'static str },
    InvalidProgram(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidConfig { field, reason } => write!(f, "invalid config field `{field}`: {reason}"),
            Error::DimensionMismatch { what, expected, found } => {
                write!(f, "dimension mismatch for {what}: expected {expected}, found {found}")
            }
            Error::InvalidGeometry { inner, outer } => {
                write!(f, "invalid annulus: need 0 < inner ({inner}) < outer ({outer})")
            }
            Error::ZeroDistance { device, rrh } => write!(f, "device {device} coincides with RRH {rrh}"),
            Error::RankDeficient { requested, achievable } => write!(
                f,
                "sample covariance supports only {achievable} principal dimensions, {requested} requested"
            ),
            Error::EmptyClass { label, count } => {
                write!(f, "class {label} has {count} samples, at least 2 are required")
            }
            Error::NonPositiveQuantization { index, value } => {
                write!(f, "quantization noise variance q[{index}] = {value} must be positive")
            }
            Error::InactiveDimension { dim } => write!(f, "dimension {dim} has identical class means"),
            Error::InactiveProblem => write!(f, "all feature dimensions are inactive"),
            Error::NonPositiveAnchor { dim, value } => {
                write!(f, "expansion point alpha[{dim}] = {value} must be positive")
            }
            Error::DegenerateChannels => write!(f, "all channel vectors vanish"),
            Error::VanishingEffectiveChannel { device, dim } => write!(
                f,
                "effective channel of device {device} vanishes in slot {dim} while its receive strength is positive"
            ),
            Error::ZeroScale { dim } => write!(f, "aggregate scale of active dimension {dim} is zero"),
            Error::Solver { status, context } => write!(f, "convex solver returned {status:?} in {context}"),
            Error::InvalidProgram(msg) => write!(f, "malformed convex program: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
