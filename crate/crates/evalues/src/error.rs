use thiserror::Error;

/// Errors surfaced by evaluators, merging functions, and certification oracles.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("e-vector must not be empty")]
    EmptyEVector,

    #[error("e-value at position {index} is invalid: {value} (must be finite and >= 0)")]
    InvalidEValue { index: usize, value: f64 },

    #[error("initial capital {0} outside [0, 1]")]
    InvalidCapital(f64),

    #[error("gambling system returned bet {bet} outside [0, 1] at prefix {prefix:?}")]
    BetOutOfRange { prefix: Vec<f64>, bet: f64 },

    #[error("stake function returned negative stake {stake} at prefix {prefix:?}")]
    NegativeStake { prefix: Vec<f64>, stake: f64 },

    #[error("infeasible stake: capital would become {capital} at step {step}")]
    InfeasibleStake { step: usize, capital: f64 },

    #[error("weights do not form a probability vector (sum = {sum})")]
    BadWeights { sum: f64 },

    #[error("negative weight {weight} at component {index}")]
    NegativeWeight { index: usize, weight: f64 },

    #[error("reading strategy chose index {index} at step {step}, which is out of range for {len} e-values")]
    IndexOutOfRange { step: usize, index: usize, len: usize },

    #[error("reading strategy repeated index {index} at step {step}")]
    RepeatedIndex { step: usize, index: usize },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("subset size {n} out of range for {len} e-values")]
    SubsetSizeOutOfRange { n: usize, len: usize },

    #[error("block breaks {breaks:?} are not strictly increasing within 1..{len}")]
    InvalidBreaks { breaks: Vec<usize>, len: usize },

    #[error("grid table needs {cells} cells, exceeding the budget of {budget}")]
    BudgetExceeded { cells: u128, budget: u128 },

    #[error("no grid points to optimize over")]
    EmptyGrid,

    #[error("grid must start at 0 (got first point {0})")]
    GridMissingZero(f64),

    #[error("merging function returned invalid value {value} at grid index {index} (must be finite and >= 0)")]
    InvalidFunctionValue { index: usize, value: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
