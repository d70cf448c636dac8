use alloc::string::String;

/// Errors raised by the numerical core.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("unknown node {0}")]
    UnknownNode(usize),
    #[error("no simple path with {0} nodes")]
    NoSuchPath(usize),
    #[error("not a simple path in the topology: {0}")]
    NotAPath(String),
    #[error("invalid edge coloring: {0}")]
    InvalidColoring(String),
    #[error("invalid gate: {0}")]
    InvalidGate(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("probability out of range: {0}")]
    ProbabilityOutOfRange(String),
    #[error("diagonal does not define a Pauli channel: {0}")]
    NotTwirlable(String),
    #[error("confusion matrix for qubit {0} is not column-stochastic")]
    NonStochastic(usize),
    #[error("confusion matrix for qubit {0} is singular")]
    SingularConfusion(usize),
    #[error("{qubits} qubits exceeds the {limit}-qubit limit of this simulator")]
    TooManyQubits { qubits: usize, limit: usize },
    #[error("qubit {qubit} was measured in the {measured} basis, not {requested}")]
    BasisMismatch {
        qubit: usize,
        measured: char,
        requested: char,
    },
    #[error("channel on {0} qubits cannot be unraveled into trajectories")]
    NotUnravelable(usize),
    #[error("duplicate stretch factor {0}")]
    DuplicateStretch(f64),
    #[error("extrapolation of order {order} needs more than {order} points, got {points}")]
    NotEnoughPoints { order: usize, points: usize },
    #[error("counts are empty")]
    EmptyCounts,
    #[error("metric undefined: {0}")]
    UndefinedMetric(&'static str),
    #[error("length mismatch: expected {expected}, found {found}")]
    LengthMismatch { expected: usize, found: usize },
}

pub type Result<T> = core::result::Result<T, Error>;
