use core::fmt;

pub type Result<T, E = Error> = core::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// Atoms or points of different space dimensions were combined.
    DimensionMismatch {
        expected: usize,
        found: usize,
    },
    /// Coefficient component counts do not fit the requested operation.
    ComponentMismatch {
        expected: usize,
        found: usize,
    },
    /// Space dimension outside {2, 3}.
    UnsupportedDimension(usize),
    /// A symbol was evaluated where it is undefined (e.g. the Helmholtz symbol at ξ = 0).
    SingularSymbol {
        xi: [f64; 3],
    },
    /// An operation would produce more atoms than the configured cap.
    AtomCap {
        count: usize,
        cap: usize,
    },
    InvalidParams(&'static str),
    InvalidSteadyState(&'static str),
    /// An atom does not lie on the integer lattice in use.
    OffLattice {
        xi: [f64; 3],
    },
    NonFinite,
    NumericFailure(&'static str),
    ExperimentFailure(&'static str),
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::DimensionMismatch { expected, found } => {
                write!(f, "dimension mismatch: expected {expected}, found {found}")
            }
            Error::ComponentMismatch { expected, found } => {
                write!(f, "component mismatch: expected {expected}, found {found}")
            }
            Error::UnsupportedDimension(n) => write!(f, "space dimension must be 2 or 3, got {n}"),
            Error::SingularSymbol { xi } => write!(f, "symbol undefined at wavevector {xi:?}"),
            Error::AtomCap { count, cap } => {
                write!(f, "atom cap exceeded: {count} atoms (cap {cap})")
            }
            Error::InvalidParams(msg) => write!(f, "invalid parameters: {msg}"),
            Error::InvalidSteadyState(msg) => write!(f, "invalid steady state: {msg}"),
            Error::OffLattice { xi } => write!(f, "atom at {xi:?} is not on the lattice"),
            Error::NonFinite => f.write_str("non-finite coefficient"),
            Error::NumericFailure(msg) => write!(f, "numeric failure: {msg}"),
            Error::ExperimentFailure(msg) => write!(f, "experiment failure: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
