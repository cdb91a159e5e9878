use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("Pauli index must be 1, 2 or 3 (got {0})")]
    PauliIndex(usize),

    #[error("Bloch vector is not unit length (norm {norm})")]
    NonUnitVector { norm: f64 },

    #[error("dimension mismatch in {op}: {left:?} vs {right:?}")]
    DimensionMismatch {
        op: &'static str,
        left: (usize, usize),
        right: (usize, usize),
    },

    #[error("matrix has non-finite entries")]
    NonFinite,

    #[error("NotHermitian: max |A - A^dagger| = {deviation:e}")]
    NotHermitian { deviation: f64 },

    #[error("NotUnitTrace: trace = {trace}")]
    NotUnitTrace { trace: f64 },

    #[error("NotPSD: min eigenvalue = {min_eigenvalue:e}")]
    NotPsd { min_eigenvalue: f64 },

    #[error("{name} = {value} is outside [0, 1]")]
    ParameterOutOfRange { name: &'static str, value: f64 },

    #[error("filter is not positive semidefinite (min eigenvalue {min_eigenvalue:e})")]
    FilterNotPsd { min_eigenvalue: f64 },

    #[error("BothSingularValuesZero: the zero operator is not a filter")]
    ZeroFilter,

    #[error("FilterAnnihilatesState: normalisation {norm:e} is below the post-selection floor")]
    FilterAnnihilatesState { norm: f64 },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error("NonMonotoneIndicator: violation flags change more than once on the pre-sweep grid {grid:?}")]
    NonMonotoneIndicator { grid: Vec<(f64, bool)> },

    #[error("NoViolationAnywhere: no grid point in [{lo}, {hi}] violates the Mermin inequality")]
    NoViolationAnywhere { lo: f64, hi: f64 },

    #[error("ViolationEverywhere: every grid point in [{lo}, {hi}] violates the Mermin inequality")]
    ViolationEverywhere { lo: f64, hi: f64 },

    #[error("invalid option: {0}")]
    InvalidOption(String),
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse(e.to_string())
    }
}

pub type Result<T> = std::result::Result<T, Error>;
