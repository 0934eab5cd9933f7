use super::{EdgeKey, NodeId, Position, TopologyError};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet, VecDeque};
use std::ops::Deref;

/// Weighted undirected communication graph over positioned sensor nodes.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct CommGraph {
    positions: BTreeMap<NodeId, Position>,
    by_pair: BTreeMap<(NodeId, NodeId), EdgeKey>,
    edges: BTreeSet<EdgeKey>,
    adjacency: BTreeMap<NodeId, BTreeSet<EdgeKey>>,
}

impl CommGraph {
    /// An edgeless graph over the given nodes.
    pub fn with_nodes(
        nodes: impl IntoIterator<Item = (NodeId, Position)>,
    ) -> Result<Self, TopologyError> {
        let mut g = CommGraph::default();
        for (id, pos) in nodes {
            g.insert_node(id, pos)?;
        }
        Ok(g)
    }

    /// Unit-disk graph: an edge joins every pair at distance `<= radius`.
    pub fn unit_disk(
        nodes: impl IntoIterator<Item = (NodeId, Position)>,
        radius: f64,
    ) -> Result<Self, TopologyError> {
        let mut g = Self::with_nodes(nodes)?;
        let pts: Vec<(NodeId, Position)> = g.nodes().collect();
        for (i, (a, pa)) in pts.iter().enumerate() {
            for (b, pb) in &pts[i + 1..] {
                if pa.distance(pb) <= radius {
                    g.insert_edge(*a, *b)?;
                }
            }
        }
        Ok(g)
    }

    pub fn insert_node(&mut self, id: NodeId, pos: Position) -> Result<(), TopologyError> {
        if !(pos.x.is_finite() && pos.y.is_finite()) {
            return Err(TopologyError::InvalidPosition(id));
        }
        if self.positions.insert(id, pos).is_some() {
            return Err(TopologyError::DuplicateNode(id));
        }
        self.adjacency.entry(id).or_default();
        Ok(())
    }

    /// Adds the link `a`-`b`, weighted by the distance between the endpoints.
    pub fn insert_edge(&mut self, a: NodeId, b: NodeId) -> Result<EdgeKey, TopologyError> {
        let (pa, pb) = self.endpoint_positions(a, b)?;
        let weight = pa.distance(&pb);
        self.insert_weighted(a, b, weight)
    }

    /// Adds a link with an externally stored weight. The weight must agree
    /// with the endpoint distance to within `rel_tol` relative error.
    pub fn insert_edge_checked(
        &mut self,
        a: NodeId,
        b: NodeId,
        weight: f64,
        rel_tol: f64,
    ) -> Result<EdgeKey, TopologyError> {
        let (pa, pb) = self.endpoint_positions(a, b)?;
        let distance = pa.distance(&pb);
        let scale = distance.abs().max(f64::MIN_POSITIVE);
        if !weight.is_finite() || (weight - distance).abs() > rel_tol * scale {
            let (lo, hi) = if a < b { (a, b) } else { (b, a) };
            return Err(TopologyError::WeightMismatch {
                lo,
                hi,
                stored: weight,
                distance,
            });
        }
        self.insert_weighted(a, b, weight)
    }

    fn endpoint_positions(
        &self,
        a: NodeId,
        b: NodeId,
    ) -> Result<(Position, Position), TopologyError> {
        if a == b {
            return Err(TopologyError::SelfLoop(a));
        }
        let pa = *self.positions.get(&a).ok_or(TopologyError::UnknownNode(a))?;
        let pb = *self.positions.get(&b).ok_or(TopologyError::UnknownNode(b))?;
        Ok((pa, pb))
    }

    fn insert_weighted(
        &mut self,
        a: NodeId,
        b: NodeId,
        weight: f64,
    ) -> Result<EdgeKey, TopologyError> {
        let key = EdgeKey::new(a, b, weight);
        if !(weight > 0.0) {
            return Err(TopologyError::ZeroLengthEdge(key.lo, key.hi));
        }
        if weight.is_infinite() {
            return Err(TopologyError::InfiniteEdge(key.lo, key.hi));
        }
        if self.by_pair.contains_key(&key.endpoints()) {
            return Err(TopologyError::DuplicateEdge(key.lo, key.hi));
        }
        self.by_pair.insert(key.endpoints(), key);
        self.edges.insert(key);
        self.adjacency.entry(key.lo).or_default().insert(key);
        self.adjacency.entry(key.hi).or_default().insert(key);
        Ok(key)
    }

    pub fn node_count(&self) -> usize {
        self.positions.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn contains_node(&self, id: NodeId) -> bool {
        self.positions.contains_key(&id)
    }

    pub fn position(&self, id: NodeId) -> Option<Position> {
        self.positions.get(&id).copied()
    }

    /// Nodes in ascending id order.
    pub fn nodes(&self) -> impl Iterator<Item = (NodeId, Position)> + '_ {
        self.positions.iter().map(|(k, v)| (*k, *v))
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> + '_ {
        self.positions.keys().copied()
    }

    /// Edges in ascending [`edge_order`](super::edge_order).
    pub fn edges(&self) -> impl Iterator<Item = EdgeKey> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_between(&self, a: NodeId, b: NodeId) -> Option<EdgeKey> {
        let key = if a < b { (a, b) } else { (b, a) };
        self.by_pair.get(&key).copied()
    }

    /// Edges incident to `id` in ascending edge order.
    pub fn incident(&self, id: NodeId) -> impl Iterator<Item = EdgeKey> + '_ {
        self.adjacency.get(&id).into_iter().flatten().copied()
    }

    pub fn degree(&self, id: NodeId) -> usize {
        self.adjacency.get(&id).map_or(0, BTreeSet::len)
    }

    /// Connected components, each sorted, ordered by smallest member.
    pub fn components(&self) -> Vec<Vec<NodeId>> {
        let mut seen = BTreeSet::new();
        let mut out = Vec::new();
        for start in self.node_ids() {
            if !seen.insert(start) {
                continue;
            }
            let mut comp = vec![start];
            let mut queue = VecDeque::from([start]);
            while let Some(u) = queue.pop_front() {
                for e in self.incident(u) {
                    let v = e.other(u);
                    if seen.insert(v) {
                        comp.push(v);
                        queue.push_back(v);
                    }
                }
            }
            comp.sort_unstable();
            out.push(comp);
        }
        out
    }
}

/// True iff the graph has at most one connected component.
pub fn is_connected(g: &CommGraph) -> bool {
    g.components().len() <= 1
}

/// Communication graph with faulty nodes and their links removed.
#[derive(Clone, Debug, PartialEq)]
pub struct ReducedGraph {
    graph: CommGraph,
    removed: BTreeSet<NodeId>,
}

impl ReducedGraph {
    pub fn removed(&self) -> &BTreeSet<NodeId> {
        &self.removed
    }

    pub fn as_graph(&self) -> &CommGraph {
        &self.graph
    }
}

impl Deref for ReducedGraph {
    type Target = CommGraph;

    fn deref(&self) -> &CommGraph {
        &self.graph
    }
}

/// Drops `faulty` and every edge incident to them.
pub fn remove_nodes(
    g: &CommGraph,
    faulty: &BTreeSet<NodeId>,
) -> Result<ReducedGraph, TopologyError> {
    if let Some(bad) = faulty.iter().find(|id| !g.contains_node(**id)) {
        return Err(TopologyError::UnknownNode(*bad));
    }
    let mut graph = CommGraph::default();
    for (id, pos) in g.nodes().filter(|(id, _)| !faulty.contains(id)) {
        graph.insert_node(id, pos)?;
    }
    for e in g.edges() {
        if !faulty.contains(&e.lo) && !faulty.contains(&e.hi) {
            graph.insert_weighted(e.lo, e.hi, e.weight)?;
        }
    }
    Ok(ReducedGraph {
        graph,
        removed: faulty.clone(),
    })
}

/// A set of tree edges, e.g. the aggregation tree or a reconstructed one.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AggregationTree {
    edges: BTreeSet<EdgeKey>,
}

impl AggregationTree {
    pub fn from_edges(edges: impl IntoIterator<Item = EdgeKey>) -> Self {
        Self {
            edges: edges.into_iter().collect(),
        }
    }

    pub fn edges(&self) -> impl Iterator<Item = EdgeKey> + '_ {
        self.edges.iter().copied()
    }

    pub fn edge_set(&self) -> &BTreeSet<EdgeKey> {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.edges.len()
    }

    pub fn is_empty(&self) -> bool {
        self.edges.is_empty()
    }

    pub fn contains(&self, e: &EdgeKey) -> bool {
        self.edges.contains(e)
    }

    pub fn total_weight(&self) -> f64 {
        self.edges.iter().map(|e| e.weight).sum()
    }

    /// Tree neighbors of `node`.
    pub fn neighbors(&self, node: NodeId) -> impl Iterator<Item = NodeId> + '_ {
        self.edges
            .iter()
            .filter(move |e| e.touches(node))
            .map(move |e| e.other(node))
    }

    pub fn degree(&self, node: NodeId) -> usize {
        self.neighbors(node).count()
    }
}
