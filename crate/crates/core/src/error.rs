use thiserror::Error;

use crate::topology::{Link, NodeId};

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid grid spec: {0}")]
    InvalidSpec(String),

    #[error("unknown node {0}")]
    UnknownNode(NodeId),

    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("invariant violated: {0}")]
    InvariantViolation(String),

    #[error("node {node}: channel {channel} outside 1..={max}")]
    ChannelOutOfRange { node: NodeId, channel: u32, max: u8 },

    #[error("node {node}: {assigned} channels assigned but only {radios} radios")]
    TooManyChannels {
        node: NodeId,
        assigned: usize,
        radios: u8,
    },

    #[error("assignment covers {found} nodes, topology has {expected}")]
    NodeCountMismatch { expected: usize, found: usize },

    #[error("link {0} has no common channel")]
    UncoveredLink(Link),

    #[error("invalid input: {0}")]
    InvalidInput(String),

    #[error("no topology-preserving assignment exists with {channels} channels")]
    Infeasible { channels: u8 },

    #[error("search budget of {states} states ran out before any feasible assignment")]
    BudgetExhausted { states: u64 },

    #[error("reports were computed over different topologies: {0}")]
    MismatchedTopology(String),

    #[error("traffic scenario needs a square grid, got {rows}x{cols}")]
    NonSquareGrid { rows: usize, cols: usize },

    #[error("degenerate grid {rows}x{cols}: flows need at least one link")]
    DegenerateGrid { rows: usize, cols: usize },

    #[error("path has no links")]
    EmptyPath,

    #[error("channels constraint violated: {channels} channels < {radios} radios on some node")]
    ChannelsConstraint { channels: u8, radios: u8 },
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        }
    }
}
