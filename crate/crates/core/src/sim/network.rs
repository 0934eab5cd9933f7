//! Global simulation state and the barrier-synchronized round scheduler.

use super::{ExecMode, MergeRecord, Phase, RoundReport, SimError, TraceLevel, TraceRecord};
use crate::protocol::{
    Body, Cluster, ClusterId, Message, MessageKind, NodeState, ProtocolError, RootOutcome,
};
use crate::topology::{AggregationTree, EdgeKey, NodeId, ReducedGraph};
use crate::verify;
use rayon::prelude::*;
use std::collections::{BTreeMap, BTreeSet};

/// Result of one super-round.
#[derive(Clone, Debug)]
pub struct RoundOutcome {
    pub report: RoundReport,
    /// Every root found no outgoing edge during moe finding.
    pub terminated: bool,
}

pub struct Network {
    reduced: ReducedGraph,
    nodes: BTreeMap<NodeId, NodeState>,
    round: usize,
    mode: ExecMode,
    trace_level: TraceLevel,
    trace: Vec<TraceRecord>,
    step_budget: usize,
}

impl Network {
    /// Seeds node states from the fragments of the broken tree. Each
    /// cluster's root learns of the fault; every other member points at its
    /// tree parent toward that root.
    pub fn new(
        reduced: ReducedGraph,
        clusters: &[Cluster],
        mode: ExecMode,
        trace_level: TraceLevel,
    ) -> Result<Self, SimError> {
        let mut nodes = BTreeMap::new();
        for cluster in clusters {
            let mut adj: BTreeMap<NodeId, Vec<NodeId>> = BTreeMap::new();
            for e in &cluster.tree_edges {
                adj.entry(e.lo).or_default().push(e.hi);
                adj.entry(e.hi).or_default().push(e.lo);
            }
            let mut parent: BTreeMap<NodeId, Option<NodeId>> =
                BTreeMap::from([(cluster.root(), None)]);
            let mut stack = vec![cluster.root()];
            while let Some(u) = stack.pop() {
                for &v in adj.get(&u).into_iter().flatten() {
                    if !parent.contains_key(&v) {
                        parent.insert(v, Some(u));
                        stack.push(v);
                    }
                }
            }
            for &m in &cluster.members {
                let p = *parent
                    .get(&m)
                    .ok_or_else(|| SimError::Inconsistent(format!("{m} unreachable in cluster")))?;
                if !reduced.contains_node(m) {
                    return Err(SimError::Inconsistent(format!("{m} is not a live node")));
                }
                let state = NodeState::new(
                    m,
                    cluster.id,
                    p,
                    adj.get(&m).cloned().unwrap_or_default(),
                    reduced.incident(m),
                );
                if nodes.insert(m, state).is_some() {
                    return Err(SimError::Inconsistent(format!("{m} in two clusters")));
                }
            }
        }
        if nodes.len() != reduced.node_count() {
            return Err(SimError::Inconsistent(
                "clusters do not cover the live nodes".into(),
            ));
        }
        let step_budget = 8 * reduced.node_count() + 8;
        Ok(Self {
            reduced,
            nodes,
            round: 0,
            mode,
            trace_level,
            trace: Vec::new(),
            step_budget,
        })
    }

    pub fn reduced(&self) -> &ReducedGraph {
        &self.reduced
    }

    pub fn node(&self, id: NodeId) -> Option<&NodeState> {
        self.nodes.get(&id)
    }

    pub fn rounds_run(&self) -> usize {
        self.round
    }

    pub fn take_trace(&mut self) -> Vec<TraceRecord> {
        std::mem::take(&mut self.trace)
    }

    /// All tree edges currently held by the nodes.
    pub fn tree(&self) -> AggregationTree {
        AggregationTree::from_edges(self.nodes.values().flat_map(|s| s.owned_tree_edges()))
    }

    /// Current clusters, rebuilt from node state and checked for
    /// consistency: symmetric tree links, parent chains ending at a root
    /// whose id names the cluster, and one tree per cluster.
    pub fn clusters(&self) -> Result<Vec<Cluster>, SimError> {
        let bad = |m: String| Err(SimError::Inconsistent(m));
        let mut by_id: BTreeMap<ClusterId, Cluster> = BTreeMap::new();
        for (id, s) in &self.nodes {
            for n in s.tree_neighbors() {
                match self.nodes.get(n) {
                    Some(o) if o.tree_neighbors().contains(id) => {}
                    _ => return bad(format!("tree link {id}-{n} is not symmetric")),
                }
                if self.nodes[n].cluster() != s.cluster() {
                    return bad(format!("tree link {id}-{n} spans two clusters"));
                }
            }
            if let Some(p) = s.parent() {
                if !s.tree_neighbors().contains(&p) {
                    return bad(format!("parent of {id} is not a tree neighbor"));
                }
            } else if s.cluster().root() != *id {
                return bad(format!("root {id} carries cluster id {}", s.cluster()));
            }
            // Walk to the root; more hops than nodes means a parent cycle.
            let mut cur = *id;
            for hop in 0.. {
                if hop > self.nodes.len() {
                    return bad(format!("parent cycle through {id}"));
                }
                match self.nodes[&cur].parent() {
                    Some(p) => cur = p,
                    None => break,
                }
            }
            if cur != s.cluster().root() {
                return bad(format!("{id} reaches root {cur}, not {}", s.cluster()));
            }
            let entry = by_id.entry(s.cluster()).or_insert_with(|| Cluster {
                id: s.cluster(),
                members: BTreeSet::new(),
                tree_edges: BTreeSet::new(),
            });
            entry.members.insert(*id);
            entry.tree_edges.extend(s.owned_tree_edges());
        }
        for c in by_id.values() {
            if c.tree_edges.len() + 1 != c.members.len() {
                return bad(format!("cluster {} is not a tree", c.id));
            }
        }
        Ok(by_id.into_values().collect())
    }

    /// Runs one super-round (phases I-IV).
    pub fn run_round(&mut self) -> Result<RoundOutcome, SimError> {
        self.round += 1;
        let before = self.clusters()?;
        let mut report = RoundReport {
            round: self.round,
            clusters_before: before.len(),
            clusters_after: before.len(),
            cluster_sizes: before.iter().map(Cluster::size).collect(),
            merges: Vec::new(),
            messages_by_kind: MessageKind::ALL.iter().map(|k| (*k, 0)).collect(),
            ignores_by_cluster: BTreeMap::new(),
            phase_steps: [0; 4],
            acyclic: true,
        };

        // Phase I: moe finding.
        let mut init = Vec::new();
        for s in self.nodes.values_mut() {
            s.begin_round(&mut init);
        }
        let (steps, _) = self.run_phase(Phase::MoeFinding, init, &[], &mut report, None)?;
        report.phase_steps[0] = steps;

        let mut any_moe = false;
        for s in self.nodes.values().filter(|s| s.is_root()) {
            match s.root_outcome() {
                RootOutcome::Pending => {
                    return Err(SimError::Inconsistent(format!(
                        "root {} did not finish moe finding",
                        s.id()
                    )))
                }
                RootOutcome::NoMoe => {}
                RootOutcome::Moe(_) => any_moe = true,
            }
        }
        if !any_moe {
            report.acyclic = verify::check_acyclic_spanning(&self.tree(), self.reduced.node_ids()).0;
            return Ok(RoundOutcome {
                report,
                terminated: true,
            });
        }

        // Phase II: merge requests.
        let mut init = Vec::new();
        for s in self.nodes.values_mut() {
            s.begin_merge_request(&mut init);
        }
        let (steps, _) = self.run_phase(Phase::MergeRequest, init, &[], &mut report, None)?;
        report.phase_steps[1] = steps;

        // Phase III: decisions; crossing Merge/Ignore wait for phase IV.
        let mut init = Vec::new();
        for s in self.nodes.values_mut() {
            s.decide_merge(&mut init)?;
        }
        let (steps, deferred) = self.run_phase(
            Phase::MergeDecision,
            init,
            &[MessageKind::Merge, MessageKind::Ignore],
            &mut report,
            None,
        )?;
        report.phase_steps[2] = steps;

        // Phase IV: merging.
        let mut log = Vec::new();
        let (mut steps, _) =
            self.run_phase(Phase::Merging, deferred, &[], &mut report, Some(&mut log))?;
        // Modify floods start one winning cluster at a time, lowest id
        // first. The lowest winner of a merged group is its final root, so
        // its flood reaches every absorbed node before any other starts.
        while let Some(winner) = self
            .nodes
            .values()
            .filter(|s| s.has_pending_modify())
            .map(NodeState::cluster)
            .min()
        {
            let mut init = Vec::new();
            for s in self.nodes.values_mut().filter(|s| s.cluster() == winner) {
                s.initiate_modify(&mut init);
            }
            let (more, _) = self.run_phase(Phase::Merging, init, &[], &mut report, None)?;
            steps += more;
        }
        report.phase_steps[3] = steps;

        report.merges = merges_from_log(&log);
        let after = self.clusters()?;
        report.clusters_after = after.len();
        report.acyclic = verify::check_acyclic_spanning(&self.tree(), self.reduced.node_ids()).0;
        Ok(RoundOutcome {
            report,
            terminated: false,
        })
    }

    /// Delivers messages step by step until the phase is quiescent.
    /// Messages of a `defer` kind are held back and returned instead.
    fn run_phase(
        &mut self,
        phase: Phase,
        init: Vec<Message>,
        defer: &[MessageKind],
        report: &mut RoundReport,
        mut log: Option<&mut Vec<Message>>,
    ) -> Result<(usize, Vec<Message>), SimError> {
        let mut deferred = Vec::new();
        let mut pending = Vec::new();
        let mut split = |batch: Vec<Message>, pending: &mut Vec<Message>| {
            for m in batch {
                if defer.contains(&m.kind()) {
                    deferred.push(m);
                } else {
                    pending.push(m);
                }
            }
        };
        split(sort_batch(init), &mut pending);
        let mut steps = 0;
        while !pending.is_empty() {
            steps += 1;
            if steps > self.step_budget {
                return Err(SimError::RoundDivergence {
                    round: self.round,
                    phase,
                    steps,
                });
            }
            for m in &pending {
                *report.messages_by_kind.entry(m.kind()).or_default() += 1;
                if let Body::Ignore { cluster, .. } = m.body {
                    *report.ignores_by_cluster.entry(cluster).or_default() += 1;
                }
                if self.trace_level == TraceLevel::Full {
                    self.trace.push(TraceRecord {
                        round: self.round,
                        phase,
                        msg: *m,
                    });
                }
                if let Some(log) = log.as_deref_mut() {
                    if matches!(m.kind(), MessageKind::Merge | MessageKind::Commit) {
                        log.push(*m);
                    }
                }
            }
            let batch = std::mem::take(&mut pending);
            let out = self.deliver(batch)?;
            split(out, &mut pending);
        }
        Ok((steps, sort_batch(deferred)))
    }

    fn deliver(&mut self, batch: Vec<Message>) -> Result<Vec<Message>, SimError> {
        let mut inbox: BTreeMap<NodeId, Vec<Message>> = BTreeMap::new();
        for m in batch {
            if !self.nodes.contains_key(&m.dst) {
                return Err(SimError::Inconsistent(format!("message to unknown node {}", m.dst)));
            }
            inbox.entry(m.dst).or_default().push(m);
        }
        let jobs: Vec<(&mut NodeState, Vec<Message>)> = self
            .nodes
            .iter_mut()
            .filter_map(|(id, s)| inbox.remove(id).map(|msgs| (s, msgs)))
            .collect();
        let results: Vec<Result<Vec<Message>, ProtocolError>> = match self.mode {
            ExecMode::Sequential => jobs.into_iter().map(step_node).collect(),
            ExecMode::Parallel => jobs.into_par_iter().map(step_node).collect(),
        };
        let mut out = Vec::new();
        for r in results {
            out.extend(r?);
        }
        Ok(sort_batch(out))
    }
}

fn step_node((state, msgs): (&mut NodeState, Vec<Message>)) -> Result<Vec<Message>, ProtocolError> {
    let mut out = Vec::new();
    for m in &msgs {
        state.handle(m, &mut out)?;
    }
    Ok(out)
}

/// Delivery order: by (src, dst, kind); ties keep emission order.
fn sort_batch(mut batch: Vec<Message>) -> Vec<Message> {
    batch.sort_by_key(|m| (m.src, m.dst, m.kind()));
    batch
}

/// Pairs each Commit with the Merge its receiver sent over the same edge.
fn merges_from_log(log: &[Message]) -> Vec<MergeRecord> {
    let mut sent: BTreeMap<(NodeId, EdgeKey), ClusterId> = BTreeMap::new();
    for m in log {
        if let Body::Merge { cluster, edge } = m.body {
            sent.insert((m.src, edge), cluster);
        }
    }
    let mut merges: Vec<MergeRecord> = log
        .iter()
        .filter_map(|m| match m.body {
            Body::Commit { cluster, edge } => {
                sent.get(&(m.dst, edge)).map(|absorbed| MergeRecord {
                    winner: cluster,
                    absorbed: *absorbed,
                    edge,
                })
            }
            _ => None,
        })
        .collect();
    merges.sort_by_key(|m| (m.winner, m.absorbed));
    merges
}
