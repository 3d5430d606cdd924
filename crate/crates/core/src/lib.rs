//! Synthesis and minimization of CNOT/CV/CV† circuits from ESOP forms.
//!
//! The crate turns an exclusive-or sum of products into a cascade of
//! multi-controlled Toffoli gates, decomposes it into two-qubit CNOT and
//! controlled-V operators, linearizes the result into a quantum operator
//! form (QOF) with virtual gates, and minimizes that form with a small set
//! of rewrite rules. Every rewrite can be checked against an exact
//! dense-unitary simulator in [`oracle`].
//!
//! ```text
//! ESOP ─► merge ─► cascade ─► decompose-classical ─► decompose-quantum
//!      ─► linearize ─► minimize (group, PE merge, interrupt factoring,
//!                               adjacency reduction) ─► rematerialize
//! ```

pub mod circuit;
pub mod classical;
pub mod error;
pub mod esop;
pub mod linearize;
pub mod minimize;
pub mod oracle;
pub mod pipeline;
pub mod qof;
pub mod quantum;

pub use circuit::{emit_netlist, gates_commute, parse_netlist, Circuit, Control, Gate, OpKind, Wire, WireRole};
pub use error::{Error, ParseError, Result};
pub use esop::{parse_esop, EsopExpr, Literal, Polarity, ProductTerm, RmClass};
pub use oracle::{EquivalenceMode, Unitary};
pub use pipeline::{canonicalize, PipelineConfig, StageReport};
