//! Deterministic synchronous simulator.
//!
//! A run injects the fault set into the scenario, seeds one protocol state
//! per live node and then executes super-rounds until a single cluster is
//! left, every root reports that no outgoing edge exists, or the round
//! limit is hit. Within a phase, messages emitted in one delivery step are
//! delivered in the next, sorted by `(src, dst, kind)`. Sequential and
//! parallel execution produce identical traces.

mod network;
mod trace;

pub use network::{Network, RoundOutcome};
pub use trace::{parse_trace, Phase, TraceLevel, TraceRecord};

use crate::protocol::{decompose, Cluster, ClusterId, MessageKind, ProtocolError};
use crate::topology::{
    oracle_msf, remove_nodes, AggregationTree, CommGraph, EdgeKey, NodeId, ReducedGraph,
    TopologyError,
};
use crate::verify::{self, Verdicts};
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Topology(#[from] TopologyError),
    #[error(transparent)]
    Protocol(#[from] ProtocolError),
    #[error("round {round}, phase {phase}: no quiescence after {steps} steps")]
    RoundDivergence {
        round: usize,
        phase: Phase,
        steps: usize,
    },
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
    #[error("inconsistent simulation state: {0}")]
    Inconsistent(String),
}

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExecMode {
    #[default]
    Sequential,
    /// Handlers of distinct nodes in a delivery step run on the rayon pool.
    Parallel,
}

/// A communication graph, its MST aggregation tree and the nodes that fail.
#[derive(Clone, Debug)]
pub struct Scenario {
    graph: CommGraph,
    initial_tree: AggregationTree,
    faulty: BTreeSet<NodeId>,
    max_rounds: usize,
    trace_level: TraceLevel,
}

impl Scenario {
    /// Builds the initial aggregation tree as the MST of `graph`. A
    /// disconnected graph gets its minimum spanning forest instead. The
    /// round limit defaults to the node count.
    pub fn new(
        graph: CommGraph,
        faulty: impl IntoIterator<Item = NodeId>,
    ) -> Result<Self, SimError> {
        let faulty: BTreeSet<NodeId> = faulty.into_iter().collect();
        if let Some(bad) = faulty.iter().find(|f| !graph.contains_node(**f)) {
            return Err(TopologyError::UnknownNode(*bad).into());
        }
        let initial_tree = AggregationTree::from_edges(oracle_msf(&graph));
        let max_rounds = graph.node_count().max(1);
        Ok(Self {
            graph,
            initial_tree,
            faulty,
            max_rounds,
            trace_level: TraceLevel::default(),
        })
    }

    pub fn with_max_rounds(mut self, max_rounds: usize) -> Self {
        self.max_rounds = max_rounds.max(1);
        self
    }

    pub fn with_trace_level(mut self, level: TraceLevel) -> Self {
        self.trace_level = level;
        self
    }

    pub fn graph(&self) -> &CommGraph {
        &self.graph
    }

    pub fn initial_tree(&self) -> &AggregationTree {
        &self.initial_tree
    }

    pub fn faulty(&self) -> &BTreeSet<NodeId> {
        &self.faulty
    }

    pub fn max_rounds(&self) -> usize {
        self.max_rounds
    }

    pub fn trace_level(&self) -> TraceLevel {
        self.trace_level
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Status {
    Reconstructed,
    Irreparable,
    RoundLimit,
}

impl Status {
    pub fn as_str(self) -> &'static str {
        match self {
            Status::Reconstructed => "reconstructed",
            Status::Irreparable => "irreparable",
            Status::RoundLimit => "round_limit",
        }
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergeRecord {
    pub winner: ClusterId,
    pub absorbed: ClusterId,
    pub edge: EdgeKey,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RoundReport {
    pub round: usize,
    pub clusters_before: usize,
    pub clusters_after: usize,
    /// Member counts of the clusters at the start of the round.
    pub cluster_sizes: Vec<usize>,
    pub merges: Vec<MergeRecord>,
    pub messages_by_kind: BTreeMap<MessageKind, usize>,
    /// Ignore messages keyed by the sending cluster.
    pub ignores_by_cluster: BTreeMap<ClusterId, usize>,
    /// Delivery steps taken by each phase.
    pub phase_steps: [usize; 4],
    /// All tree edges formed a forest at the end of the round.
    pub acyclic: bool,
}

impl RoundReport {
    pub fn count(&self, kind: MessageKind) -> usize {
        self.messages_by_kind.get(&kind).copied().unwrap_or(0)
    }

    pub fn total_messages(&self) -> usize {
        self.messages_by_kind.values().sum()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SimResult {
    pub status: Status,
    pub rounds_used: usize,
    /// Clusters right after fault injection.
    pub initial_clusters: usize,
    pub final_clusters: usize,
    pub live_nodes: usize,
    pub reduced_edges: usize,
    pub final_tree: AggregationTree,
    pub reports: Vec<RoundReport>,
    pub verdicts: Verdicts,
    #[serde(skip)]
    pub trace: Vec<TraceRecord>,
}

impl SimResult {
    pub fn messages_by_kind(&self) -> BTreeMap<MessageKind, usize> {
        let mut total: BTreeMap<MessageKind, usize> =
            MessageKind::ALL.iter().map(|k| (*k, 0)).collect();
        for r in &self.reports {
            for (k, v) in &r.messages_by_kind {
                *total.entry(*k).or_default() += v;
            }
        }
        total
    }

    pub fn merge_count(&self) -> usize {
        self.reports.iter().map(|r| r.merges.len()).sum()
    }
}

/// Removes the faulty nodes and splits the aggregation tree into clusters.
pub fn inject_faults(scenario: &Scenario) -> Result<(ReducedGraph, Vec<Cluster>), SimError> {
    let reduced = remove_nodes(&scenario.graph, &scenario.faulty)?;
    let mut clusters = decompose(&scenario.initial_tree, &scenario.faulty);
    // Nodes without any tree edge only occur when the graph itself was
    // disconnected; each stands alone.
    let covered: BTreeSet<NodeId> = clusters.iter().flat_map(|c| c.members.clone()).collect();
    for v in reduced.node_ids().filter(|v| !covered.contains(v)) {
        clusters.push(Cluster {
            id: ClusterId(v),
            members: BTreeSet::from([v]),
            tree_edges: BTreeSet::new(),
        });
    }
    clusters.sort_by_key(|c| c.id);
    Ok((reduced, clusters))
}

/// Runs the scenario to completion in sequential mode.
pub fn run(scenario: &Scenario) -> Result<SimResult, SimError> {
    run_with_mode(scenario, ExecMode::Sequential)
}

pub fn run_with_mode(scenario: &Scenario, mode: ExecMode) -> Result<SimResult, SimError> {
    let (reduced, clusters) = inject_faults(scenario)?;
    let initial_clusters = clusters.len();
    let mut net = Network::new(reduced, &clusters, mode, scenario.trace_level)?;
    let mut reports = Vec::new();
    let mut cluster_count = initial_clusters;
    let status = loop {
        if cluster_count <= 1 {
            break Status::Reconstructed;
        }
        if reports.len() >= scenario.max_rounds {
            break Status::RoundLimit;
        }
        let outcome = net.run_round()?;
        cluster_count = outcome.report.clusters_after;
        reports.push(outcome.report);
        if outcome.terminated {
            break if cluster_count <= 1 {
                Status::Reconstructed
            } else {
                Status::Irreparable
            };
        }
    };
    let final_tree = net.tree();
    let verdicts = verify::evaluate(
        status,
        &final_tree,
        net.reduced(),
        &reports,
        initial_clusters,
    );
    Ok(SimResult {
        status,
        rounds_used: reports.len(),
        initial_clusters,
        final_clusters: cluster_count,
        live_nodes: net.reduced().node_count(),
        reduced_edges: net.reduced().edge_count(),
        final_tree,
        reports,
        verdicts,
        trace: net.take_trace(),
    })
}
