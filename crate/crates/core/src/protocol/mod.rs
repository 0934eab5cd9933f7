//! Tree-repair protocol: clusters left by failed nodes repeatedly find their
//! minimum outgoing edge and merge across it until one tree remains.
//!
//! One super-round runs four barrier-separated phases:
//!
//! 1. moe finding: Find flood, Test/Accept/Reject probing, Report
//!    convergecast and an Inform down to the moe owner;
//! 2. merge requests: the owner sends MergeReq across the moe; receivers
//!    with a smaller cluster id answer Ignore, others relay the request to
//!    their root with Internal hops;
//! 3. merge decision: each root sends Merge to its smallest-id requester
//!    and Ignore to the rest, or Merge along its own moe if it kept none;
//! 4. merging: Commit and Modify join the clusters and flood the surviving
//!    cluster id.

mod cluster;
mod message;
mod node;

pub use cluster::{decompose, Cluster};
pub use message::{Body, Candidate, ClusterId, Message, MessageKind, Relay};
pub use node::{NodeState, RootOutcome};

use crate::topology::NodeId;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum ProtocolError {
    #[error("protocol violation at node {node}: {detail}")]
    Violation { node: NodeId, detail: String },
}
