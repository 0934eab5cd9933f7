//! Communication graph model for a planar sensor field.
//!
//! Nodes carry 2-D positions in meters and every link is weighted by the
//! Euclidean distance between its endpoints. Weights are computed once when
//! the edge is created and stored, so every consumer (protocol, oracle,
//! verifier) compares bit-identical values.
//!
//! Equal weights are legal. [`EdgeKey`] orders edges by `(weight, lo, hi)`,
//! which makes the minimum spanning tree unique and every "pick the minimum
//! edge" decision deterministic.

mod dump;
mod edge;
mod graph;
mod mst;
mod rgg;

pub use dump::{parse_dump, write_dump};
pub use edge::{edge_order, EdgeKey};
pub use graph::{is_connected, remove_nodes, AggregationTree, CommGraph, ReducedGraph};
pub use mst::{oracle_msf, oracle_mst};
pub use rgg::{generate_rgg, RggParams, DEFAULT_SIDE};

use serde::{Deserialize, Serialize};
use std::fmt;

/// Identifier of a sensor node. Unique within a scenario.
#[derive(
    Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Default, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl From<u32> for NodeId {
    fn from(v: u32) -> Self {
        NodeId(v)
    }
}

/// Planar position in meters.
#[derive(Copy, Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct Position {
    pub x: f64,
    pub y: f64,
}

impl Position {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn distance(&self, other: &Position) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }
}

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum TopologyError {
    #[error("graph is not connected")]
    DisconnectedGraph,
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("duplicate node {0}")]
    DuplicateNode(NodeId),
    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),
    #[error("duplicate edge {0}-{1}")]
    DuplicateEdge(NodeId, NodeId),
    #[error("invalid position for node {0}")]
    InvalidPosition(NodeId),
    #[error("edge {lo}-{hi}: weight {stored} does not match distance {distance}")]
    WeightMismatch {
        lo: NodeId,
        hi: NodeId,
        stored: f64,
        distance: f64,
    },
    #[error("edge {0}-{1} has zero length")]
    ZeroLengthEdge(NodeId, NodeId),
    #[error("edge {0}-{1} is too long to represent")]
    InfiniteEdge(NodeId, NodeId),
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
}
