use alloc::string::String;
use core::fmt;

/// Failure modes of constructions and checks.
#[derive(Clone, Debug, PartialEq)]
pub enum Error {
    WindowTooSmall { needed: usize, got: usize },
    /// A lattice step `Δx_k` vanished where a division by it was required; `site2` is twice `s`.
    DegenerateSite { site2: i64, k: i64 },
    UnknownFamily(String),
    ParameterOutOfRange(String),
    PearsonFailure(String),
    /// The requested index lies outside what the family admits (for example `n` past a finite support).
    NotAdmissible(String),
    /// The scalar field cannot represent a value this computation needs (square root, exponential...).
    FieldUnsupported(String),
    Singular(String),
    ConstructionMismatch(String),
    CoefficientMismatch(String),
    TruncationNotConverged(String),
    OutOfSupport(String),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::WindowTooSmall { needed, got } => {
                write!(f, "window too small: need {needed} samples, got {got}")
            }
            Error::DegenerateSite { site2, k } => {
                write!(f, "degenerate lattice site: Δx_{k} vanishes at s = {}/2", site2)
            }
            Error::UnknownFamily(n) => write!(f, "unknown family '{n}'"),
            Error::ParameterOutOfRange(m) => write!(f, "parameter out of range: {m}"),
            Error::PearsonFailure(m) => write!(f, "Pearson check failed: {m}"),
            Error::NotAdmissible(m) => write!(f, "not admissible: {m}"),
            Error::FieldUnsupported(m) => write!(f, "not representable in this field: {m}"),
            Error::Singular(m) => write!(f, "singular system: {m}"),
            Error::ConstructionMismatch(m) => write!(f, "construction mismatch: {m}"),
            Error::CoefficientMismatch(m) => write!(f, "coefficient mismatch: {m}"),
            Error::TruncationNotConverged(m) => write!(f, "truncation did not converge: {m}"),
            Error::OutOfSupport(m) => write!(f, "out of support: {m}"),
        }
    }
}

pub type Result<T> = core::result::Result<T, Error>;
