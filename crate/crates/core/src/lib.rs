//! Repair of MST-based aggregation trees in wireless sensor networks.
//!
//! When sensor nodes fail permanently, the aggregation tree falls apart into
//! clusters. This crate simulates a synchronous, message-passing protocol in
//! which the clusters repeatedly locate their minimum outgoing edges and
//! merge across them until a single tree remains, and checks that the result
//! is cycle-free and equal to the minimum spanning tree of the surviving
//! communication graph.
//!
//! * [`topology`]: graph model, random geometric graphs, the MST oracle.
//! * [`protocol`]: cluster decomposition and the per-node state machine.
//! * [`sim`]: fault injection and the round scheduler.
//! * [`verify`]: tree and message-count checkers.

mod dsu;

pub mod protocol;
pub mod sim;
pub mod topology;
pub mod verify;

pub use dsu::DisjointSet;
