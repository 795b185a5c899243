//! Error type shared by the whole crate.

use std::fmt;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Error {
    /// Two sequences that must have equal length do not.
    LengthMismatch { expected: usize, found: usize },
    /// An insertion index is outside `1..=n`.
    IndexOutOfRange { index: usize, arity: usize },
    /// Cochain arities or parities do not line up.
    ArityMismatch { expected: usize, found: usize },
    ParityMismatch,
    /// An element that must be parity homogeneous mixes parities.
    InhomogeneousParity,
    /// The operation is only defined over free modules.
    TorsionUnsupported(&'static str),
    /// A chiral evaluation needed seeds beyond the declared pole cutoff.
    CutoffExceeded { needed: usize, cutoff: usize },
    /// Structure data violates one of its defining identities.
    Inconsistent(String),
    /// The weight grading required by the cohomology solver is absent.
    NotWeightGraded(String),
    UnknownGenerator(String),
    Parse(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::LengthMismatch { expected, found } => {
                write!(f, "length mismatch: expected {expected}, found {found}")
            }
            Error::IndexOutOfRange { index, arity } => {
                write!(f, "index {index} out of range for arity {arity}")
            }
            Error::ArityMismatch { expected, found } => {
                write!(f, "arity mismatch: expected {expected}, found {found}")
            }
            Error::ParityMismatch => write!(f, "parity mismatch"),
            Error::InhomogeneousParity => write!(f, "element is not parity homogeneous"),
            Error::TorsionUnsupported(what) => {
                write!(f, "{what} is only defined over free modules (lift failure)")
            }
            Error::CutoffExceeded { needed, cutoff } => {
                write!(f, "pole order {needed} exceeds cutoff {cutoff}")
            }
            Error::Inconsistent(msg) => write!(f, "inconsistent structure data: {msg}"),
            Error::NotWeightGraded(msg) => write!(f, "not weight graded: {msg}"),
            Error::UnknownGenerator(name) => write!(f, "unknown generator `{name}`"),
            Error::Parse(msg) => write!(f, "parse error: {msg}"),
        }
    }
}

impl std::error::Error for Error {}

pub type Result<T> = std::result::Result<T, Error>;
