use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("malformed matrix text: {0}")]
    Parse(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("generator matrix has rank {rank}, expected {expected}")]
    RankDeficient { rank: usize, expected: usize },

    #[error("qubit index {index} out of range for {num_qubits} qubits")]
    QubitOutOfRange { index: usize, num_qubits: usize },

    #[error("CNOT control and target coincide on qubit {0}")]
    CnotSelfLoop(usize),

    #[error("partial trace needs an even number of qubits, got {0}")]
    OddQubitCount(usize),

    #[error("measurement branch probabilities sum to {0}, state is not normalized")]
    NotNormalized(f64),

    #[error("coset label is invalid: {0}")]
    InvalidLabel(String),

    #[error("m = {m} is outside the supported range {min}..={max}")]
    UnsupportedSize { m: usize, min: usize, max: usize },

    #[error("round count must be at least 1")]
    NoRounds,
}
