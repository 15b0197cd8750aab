use thiserror::Error;

/// Errors produced by network construction, contraction, and estimation.
#[derive(Debug, Error)]
pub enum Error {
    /// A tensor or network parameter is outside its documented domain.
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// Tensor entry buffer length does not match `bond_dim^rank`.
    #[error("entry buffer has length {got}, expected {expected} (= {bond_dim}^{rank})")]
    EntryLength {
        got: usize,
        expected: usize,
        bond_dim: usize,
        rank: usize,
    },

    /// A port index fell outside a tensor's rank.
    #[error("port {port} out of range for vertex {vertex} of rank {rank}")]
    PortOutOfRange {
        vertex: usize,
        port: usize,
        rank: usize,
    },

    /// The same (vertex, port) was attached to more than one edge endpoint.
    #[error("port ({vertex}, {port}) is attached to more than one edge")]
    DuplicatePort { vertex: usize, port: usize },

    /// A (vertex, port) is not attached to any edge; networks must be closed.
    #[error("port ({vertex}, {port}) is not attached to any edge")]
    DanglingPort { vertex: usize, port: usize },

    /// A tensor's bond dimension disagrees with the network's.
    #[error("vertex {vertex} has bond dimension {got}, network requires {expected}")]
    BondMismatch {
        vertex: usize,
        got: usize,
        expected: usize,
    },

    /// The requested computation exceeds the configured work or memory budget.
    #[error("budget exceeded: {task} needs {needed} units, budget is {budget}")]
    BudgetExceeded {
        task: String,
        needed: u128,
        budget: u128,
    },

    /// A structured document failed validation; `location` points at the offending field.
    #[error("schema error at {location}: {message}")]
    Schema { location: String, message: String },

    /// Document parsing / serialization failure.
    #[error("document error: {0}")]
    Document(String),

    /// An iterative numerical routine failed to converge.
    #[error("no convergence: {0}")]
    NoConvergence(String),
}

pub type Result<T> = std::result::Result<T, Error>;
