use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("pauli index {0} out of range 0..=3")]
    PauliIndex(usize),
    #[error("site {site} out of range for a {width}-site operator on {n} qubits")]
    SiteOutOfRange { site: usize, width: usize, n: usize },
    #[error("invalid qubit count {0}: lattices need an even number of sites >= 2")]
    QubitCount(usize),
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("depolarizing probability {0} outside [0, 15/16]")]
    NoiseStrength(f64),
    #[error("dense composition limited to L <= {limit}, got L = {n}")]
    DimensionLimit { n: usize, limit: usize },
    #[error("imaginary residue {0:e} above tolerance")]
    ImaginaryResidue(f64),
    #[error("non-finite cost at iteration {iteration}")]
    NonFinite { iteration: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("eigensolver failed: {0}")]
    Eigensolver(String),
    #[error("empty budget: at least one shot is required")]
    EmptyBudget,
    #[error("shot budget {requested} exceeds limit {limit}")]
    BudgetExceeded { requested: u64, limit: u64 },
}

pub type Result<T> = std::result::Result<T, Error>;
