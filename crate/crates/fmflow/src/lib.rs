//! Command-line experiments and IO around `fmflow-core`: TOML configs,
//! CSV/JSONL outputs with run manifests, a pseudospectral grid oracle and
//! the verification suites.

pub mod commands;
pub mod config;
pub mod formats;
pub mod grid;
pub mod manifest;
pub mod seedgen;
pub mod verify;

use grid::GridError;

#[derive(Debug, thiserror::Error)]
pub enum CliError {
    #[error("config error: {0}")]
    Config(String),
    #[error("usage error: {0}")]
    Usage(String),
    #[error(transparent)]
    Core(#[from] fmflow_core::Error),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
    #[error("verification failed: {0}")]
    Verify(String),
}

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERIC: i32 = 3;
pub const EXIT_ATOM_CAP: i32 = 4;

fn core_exit(e: &fmflow_core::Error) -> i32 {
    use fmflow_core::Error::*;
    match e {
        AtomCap { .. } => EXIT_ATOM_CAP,
        InvalidParams(_)
        | InvalidSteadyState(_)
        | UnsupportedDimension(_)
        | DimensionMismatch { .. }
        | ComponentMismatch { .. }
        | OffLattice { .. } => EXIT_CONFIG,
        SingularSymbol { .. } | NonFinite | NumericFailure(_) | ExperimentFailure(_) => EXIT_NUMERIC,
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) | CliError::Usage(_) => EXIT_CONFIG,
            CliError::Core(e) => core_exit(e),
            CliError::Grid(GridError::Core(e)) => core_exit(e),
            CliError::Grid(_) => EXIT_CONFIG,
            CliError::Io(_) => EXIT_IO,
            CliError::Verify(_) => EXIT_NUMERIC,
        }
    }
}
