use std::fmt;

/// Location-tagged syntax error shared by every text format in the crate.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseError {
    pub line: usize,
    pub column: usize,
    pub message: String,
}

impl ParseError {
    pub fn new(line: usize, column: usize, message: impl Into<String>) -> Self {
        Self {
            line,
            column,
            message: message.into(),
        }
    }
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}, column {}: {}", self.line, self.column, self.message)
    }
}

impl std::error::Error for ParseError {}

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("parse error at {0}")]
    Parse(#[from] ParseError),

    #[error("arity {arity} exceeds the limit of {limit}")]
    ArityTooLarge { arity: usize, limit: usize },

    #[error("invalid gate: {0}")]
    InvalidGate(String),

    #[error("invalid circuit: {0}")]
    InvalidCircuit(String),

    #[error("expected a gate with {expected} controls, found {found}")]
    ControlCount { expected: usize, found: usize },

    #[error("insufficient ancillas: need {needed}, {available} available")]
    InsufficientAncillas { needed: usize, available: usize },

    #[error("ancilla budget exhausted: circuit may not exceed {limit} wires")]
    AncillaBudget { limit: usize },

    #[error("{qubits} qubits exceeds the simulator limit of {limit}")]
    TooManyQubits { qubits: usize, limit: usize },

    #[error("incompatible wire sets: {0}")]
    IncompatibleWires(String),

    #[error("non-classical output state for input assignment {assignment}")]
    NonClassicalOutput { assignment: usize },

    #[error("gate position {position} out of range (circuit has {len} gates)")]
    PositionOutOfRange { position: usize, len: usize },

    #[error("XOR support is empty")]
    EmptySupport,

    #[error("control expansion at gate {position} spans {wires} wires (limit {limit})")]
    ExpansionTooLarge {
        position: usize,
        wires: usize,
        limit: usize,
    },

    #[error("rule `{rule}` at gate {position} changed the output function")]
    RuleBroke { rule: &'static str, position: usize },

    #[error("rewriting did not converge after {0} iterations")]
    NoConvergence(usize),

    #[error("operator algebra self-test failed: {0}")]
    SelfTest(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
