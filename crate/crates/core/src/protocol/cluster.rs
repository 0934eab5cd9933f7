use super::ClusterId;
use crate::topology::{AggregationTree, EdgeKey, NodeId};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

/// A connected fragment of the aggregation tree.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cluster {
    pub id: ClusterId,
    pub members: BTreeSet<NodeId>,
    pub tree_edges: BTreeSet<EdgeKey>,
}

impl Cluster {
    pub fn root(&self) -> NodeId {
        self.id.root()
    }

    pub fn size(&self) -> usize {
        self.members.len()
    }
}

/// Splits `tree` into the fragments left after removing `faulty`.
///
/// Each fragment is rooted at its smallest-id member that was a tree
/// neighbor of a faulty node. A fragment with no such member (no faults,
/// or a forest component untouched by them) is rooted at its smallest
/// member. Nodes without tree edges are not reported. Fragments
/// are returned in ascending cluster id order.
pub fn decompose(tree: &AggregationTree, faulty: &BTreeSet<NodeId>) -> Vec<Cluster> {
    let mut adj: BTreeMap<NodeId, Vec<EdgeKey>> = BTreeMap::new();
    let mut fault_adjacent = BTreeSet::new();
    for e in tree.edges() {
        for (a, b) in [(e.lo, e.hi), (e.hi, e.lo)] {
            adj.entry(a).or_default();
            if faulty.contains(&a) {
                continue;
            }
            if faulty.contains(&b) {
                fault_adjacent.insert(a);
            } else {
                adj.entry(a).or_default().push(e);
            }
        }
    }

    let mut seen = BTreeSet::new();
    let mut clusters = Vec::new();
    for &start in adj.keys() {
        if faulty.contains(&start) || !seen.insert(start) {
            continue;
        }
        let mut members = BTreeSet::from([start]);
        let mut tree_edges = BTreeSet::new();
        let mut stack = vec![start];
        while let Some(u) = stack.pop() {
            for e in &adj[&u] {
                tree_edges.insert(*e);
                let v = e.other(u);
                if seen.insert(v) {
                    members.insert(v);
                    stack.push(v);
                }
            }
        }
        let root = members
            .iter()
            .copied()
            .find(|m| fault_adjacent.contains(m))
            .unwrap_or(start);
        clusters.push(Cluster {
            id: ClusterId(root),
            members,
            tree_edges,
        });
    }
    clusters.sort_by_key(|c| c.id);
    clusters
}
