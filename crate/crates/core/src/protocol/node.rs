//! Per-node protocol state machine.
//!
//! Handlers only read and write the receiving node's own state and emit
//! messages addressed to graph neighbors, so nodes can be stepped
//! independently within a delivery step.

use super::{Body, Candidate, ClusterId, Message, ProtocolError, Relay};
use crate::topology::{EdgeKey, NodeId};
use std::collections::{BTreeMap, BTreeSet};

#[derive(Copy, Clone, Debug, PartialEq, Eq, Default)]
enum Search {
    #[default]
    Idle,
    Testing(EdgeKey),
    Done,
}

/// Bookkeeping that lives for one super-round.
#[derive(Clone, Debug, Default)]
struct RoundScratch {
    started: bool,
    search: Search,
    local_moe: Option<EdgeKey>,
    best: Option<Candidate>,
    /// Child whose report currently holds `best`; `None` when it is local.
    best_via: Option<NodeId>,
    reported: BTreeSet<NodeId>,
    report_done: bool,
    moe_owner: bool,
    /// Root only: merge requests kept from other clusters.
    requests: Vec<(ClusterId, EdgeKey)>,
    /// Relayed request edge -> child it arrived from.
    routes: BTreeMap<EdgeKey, NodeId>,
    merge_sent: Option<EdgeKey>,
    /// Absorbed peers still waiting for this node's Modify.
    pending_modify: BTreeSet<NodeId>,
}

/// What a root learned at the end of moe finding.
#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum RootOutcome {
    Pending,
    NoMoe,
    Moe(Candidate),
}

#[derive(Clone, Debug)]
pub struct NodeState {
    me: NodeId,
    cluster: ClusterId,
    parent: Option<NodeId>,
    tree_nbrs: BTreeSet<NodeId>,
    /// Incident reduced-graph edges, ascending edge order.
    incident: Vec<EdgeKey>,
    by_peer: BTreeMap<NodeId, EdgeKey>,
    rejected: BTreeSet<EdgeKey>,
    scratch: RoundScratch,
}

impl NodeState {
    pub fn new(
        me: NodeId,
        cluster: ClusterId,
        parent: Option<NodeId>,
        tree_nbrs: impl IntoIterator<Item = NodeId>,
        incident: impl IntoIterator<Item = EdgeKey>,
    ) -> Self {
        let mut incident: Vec<EdgeKey> = incident.into_iter().collect();
        incident.sort();
        let by_peer = incident.iter().map(|e| (e.other(me), *e)).collect();
        Self {
            me,
            cluster,
            parent,
            tree_nbrs: tree_nbrs.into_iter().collect(),
            incident,
            by_peer,
            rejected: BTreeSet::new(),
            scratch: RoundScratch::default(),
        }
    }

    pub fn id(&self) -> NodeId {
        self.me
    }

    pub fn cluster(&self) -> ClusterId {
        self.cluster
    }

    pub fn parent(&self) -> Option<NodeId> {
        self.parent
    }

    pub fn is_root(&self) -> bool {
        self.parent.is_none()
    }

    pub fn tree_neighbors(&self) -> &BTreeSet<NodeId> {
        &self.tree_nbrs
    }

    pub fn children(&self) -> impl Iterator<Item = NodeId> + '_ {
        let parent = self.parent;
        self.tree_nbrs.iter().copied().filter(move |n| Some(*n) != parent)
    }

    pub fn rejected_edges(&self) -> &BTreeSet<EdgeKey> {
        &self.rejected
    }

    pub fn local_moe(&self) -> Option<EdgeKey> {
        self.scratch.local_moe
    }

    pub fn subtree_moe(&self) -> Option<Candidate> {
        self.scratch.best
    }

    pub fn is_moe_owner(&self) -> bool {
        self.scratch.moe_owner
    }

    pub fn merge_sent(&self) -> Option<EdgeKey> {
        self.scratch.merge_sent
    }

    /// Tree edges to neighbors with a larger id (each tree edge reported once).
    pub fn owned_tree_edges(&self) -> impl Iterator<Item = EdgeKey> + '_ {
        self.tree_nbrs
            .iter()
            .filter(move |n| **n > self.me)
            .filter_map(move |n| self.by_peer.get(n).copied())
    }

    pub fn root_outcome(&self) -> RootOutcome {
        if !self.scratch.report_done {
            RootOutcome::Pending
        } else {
            match self.scratch.best {
                None => RootOutcome::NoMoe,
                Some(c) => RootOutcome::Moe(c),
            }
        }
    }

    fn violation(&self, detail: impl Into<String>) -> ProtocolError {
        ProtocolError::Violation {
            node: self.me,
            detail: detail.into(),
        }
    }

    fn send(&self, out: &mut Vec<Message>, dst: NodeId, body: Body) {
        out.push(Message {
            src: self.me,
            dst,
            body,
        });
    }

    fn edge_to(&self, peer: NodeId) -> Result<EdgeKey, ProtocolError> {
        self.by_peer
            .get(&peer)
            .copied()
            .ok_or_else(|| self.violation(format!("message from non-neighbor {peer}")))
    }

    /// Subround I entry. Roots flood Find and start their own search.
    pub fn begin_round(&mut self, out: &mut Vec<Message>) {
        self.scratch = RoundScratch::default();
        if self.is_root() {
            self.scratch.started = true;
            let cluster = self.cluster;
            for child in self.children().collect::<Vec<_>>() {
                self.send(out, child, Body::Find { cluster });
            }
            self.test_next(out);
        }
    }

    /// Subround II entry: the moe owner sends the merge request across.
    pub fn begin_merge_request(&mut self, out: &mut Vec<Message>) {
        if !self.scratch.moe_owner {
            return;
        }
        if let Some(edge) = self.scratch.local_moe {
            let cluster = self.cluster;
            self.send(out, edge.other(self.me), Body::MergeReq { cluster, edge });
        }
    }

    /// Subround III entry (roots only): answer the smallest requester with
    /// Merge and the rest with Ignore, or push Merge out along the own moe
    /// when nothing was kept.
    pub fn decide_merge(&mut self, out: &mut Vec<Message>) -> Result<(), ProtocolError> {
        if !self.is_root() {
            return Ok(());
        }
        let Some(own) = self.scratch.best else {
            return Ok(());
        };
        let mut requests = std::mem::take(&mut self.scratch.requests);
        requests.sort();
        match requests.split_first() {
            Some((&(_, chosen), rest)) => {
                self.dispatch(Relay::MergeDown { edge: chosen }, out)?;
                for &(_, edge) in rest {
                    self.dispatch(Relay::IgnoreDown { edge }, out)?;
                }
            }
            None => self.dispatch(Relay::MergeDown { edge: own.edge }, out)?,
        }
        self.scratch.requests = requests;
        Ok(())
    }

    /// True while an absorbed neighbor has not yet been sent a Modify.
    pub fn has_pending_modify(&self) -> bool {
        !self.scratch.pending_modify.is_empty()
    }

    /// Starts the Modify flood into every cluster this node committed to.
    /// A flood passing through first clears the pending entries, so each
    /// absorbed node ends up receiving a single Modify.
    pub fn initiate_modify(&mut self, out: &mut Vec<Message>) {
        let cluster = self.cluster;
        for peer in std::mem::take(&mut self.scratch.pending_modify) {
            self.send(out, peer, Body::Modify { cluster });
        }
    }

    pub fn handle(&mut self, msg: &Message, out: &mut Vec<Message>) -> Result<(), ProtocolError> {
        debug_assert_eq!(msg.dst, self.me);
        let from = msg.src;
        let edge = self.edge_to(from)?;
        match msg.body {
            Body::Find { cluster } => {
                if self.parent != Some(from) {
                    return Err(self.violation(format!("find from non-parent {from}")));
                }
                if self.scratch.started {
                    return Err(self.violation("duplicate find"));
                }
                self.cluster = cluster;
                self.scratch.started = true;
                for child in self.children().collect::<Vec<_>>() {
                    self.send(out, child, Body::Find { cluster });
                }
                self.test_next(out);
            }
            Body::Test { cluster } => self.on_test(from, edge, cluster, out),
            Body::Accept => {
                if self.scratch.search != Search::Testing(edge) {
                    return Err(self.violation(format!("unexpected accept from {from}")));
                }
                self.scratch.local_moe = Some(edge);
                self.scratch.search = Search::Done;
                self.try_report(out);
            }
            Body::Reject => {
                if self.scratch.search != Search::Testing(edge) {
                    return Err(self.violation(format!("unexpected reject from {from}")));
                }
                self.rejected.insert(edge);
                self.test_next(out);
            }
            Body::Report { best } => {
                if !self.children().any(|c| c == from) {
                    return Err(self.violation(format!("report from non-child {from}")));
                }
                if !self.scratch.reported.insert(from) {
                    return Err(self.violation(format!("duplicate report from {from}")));
                }
                if let Some(cand) = best {
                    if self.scratch.best.map_or(true, |b| cand < b) {
                        self.scratch.best = Some(cand);
                        self.scratch.best_via = Some(from);
                    }
                }
                self.try_report(out);
            }
            Body::Inform { edge: target } => {
                if self.parent != Some(from) {
                    return Err(self.violation(format!("inform from non-parent {from}")));
                }
                self.route_inform(target, out)?;
            }
            Body::MergeReq { cluster, edge: e } => {
                if e != edge {
                    return Err(self.violation("merge request names a different edge"));
                }
                if cluster == self.cluster {
                    return Err(self.violation("merge request from own cluster"));
                }
                if self.cluster < cluster {
                    let mine = self.cluster;
                    self.send(out, from, Body::Ignore { cluster: mine, edge });
                } else if self.is_root() {
                    self.scratch.requests.push((cluster, edge));
                } else {
                    let parent = self.parent.expect("non-root has a parent");
                    self.send(
                        out,
                        parent,
                        Body::Internal {
                            relay: Relay::Up {
                                requester: cluster,
                                edge,
                            },
                        },
                    );
                }
            }
            Body::Internal { relay } => match relay {
                Relay::Up { requester, edge: e } => {
                    if !self.children().any(|c| c == from) {
                        return Err(self.violation(format!("relay from non-child {from}")));
                    }
                    self.scratch.routes.insert(e, from);
                    match self.parent {
                        None => self.scratch.requests.push((requester, e)),
                        Some(p) => self.send(out, p, msg.body),
                    }
                }
                Relay::MergeDown { .. } | Relay::IgnoreDown { .. } => {
                    if self.parent != Some(from) {
                        return Err(self.violation(format!("instruction from non-parent {from}")));
                    }
                    self.dispatch(relay, out)?;
                }
            },
            Body::Ignore { .. } => {}
            Body::Merge { cluster, edge: e } => {
                if e != edge || cluster == self.cluster {
                    return Err(self.violation("malformed merge"));
                }
                let mutual = self.scratch.merge_sent == Some(edge);
                // Mutual: the lower id commits. Otherwise only a merge from a
                // higher id is taken; a lower id that was not answered with
                // Merge is dropped.
                if (mutual && self.cluster < cluster) || (!mutual && cluster > self.cluster) {
                    self.tree_nbrs.insert(from);
                    self.scratch.pending_modify.insert(from);
                    let mine = self.cluster;
                    self.send(out, from, Body::Commit { cluster: mine, edge });
                }
            }
            Body::Commit { .. } => {
                if self.scratch.merge_sent != Some(edge) {
                    return Err(self.violation(format!("commit from {from} without merge")));
                }
                self.tree_nbrs.insert(from);
            }
            Body::Modify { cluster } => {
                if !self.tree_nbrs.contains(&from) {
                    return Err(self.violation(format!("modify over non-tree link {from}")));
                }
                if cluster < self.cluster {
                    self.cluster = cluster;
                    self.parent = Some(from);
                    let targets: Vec<_> =
                        self.tree_nbrs.iter().copied().filter(|n| *n != from).collect();
                    for t in targets {
                        self.scratch.pending_modify.remove(&t);
                        self.send(out, t, Body::Modify { cluster });
                    }
                }
            }
        }
        Ok(())
    }

    fn on_test(&mut self, from: NodeId, edge: EdgeKey, cluster: ClusterId, out: &mut Vec<Message>) {
        if cluster != self.cluster {
            self.send(out, from, Body::Accept);
            return;
        }
        self.rejected.insert(edge);
        if self.scratch.search == Search::Testing(edge) {
            // Both ends probed the same internal edge; each treats the
            // other's test as its answer.
            self.test_next(out);
        } else {
            self.send(out, from, Body::Reject);
        }
    }

    /// Tests the smallest incident edge that is neither rejected nor a tree
    /// edge, or finishes the local search when none is left.
    fn test_next(&mut self, out: &mut Vec<Message>) {
        let next = self.incident.iter().copied().find(|e| {
            !self.rejected.contains(e) && !self.tree_nbrs.contains(&e.other(self.me))
        });
        match next {
            Some(edge) => {
                self.scratch.search = Search::Testing(edge);
                let cluster = self.cluster;
                self.send(out, edge.other(self.me), Body::Test { cluster });
            }
            None => {
                self.scratch.local_moe = None;
                self.scratch.search = Search::Done;
                self.try_report(out);
            }
        }
    }

    fn try_report(&mut self, out: &mut Vec<Message>) {
        let s = &self.scratch;
        if !s.started || s.search != Search::Done || s.report_done {
            return;
        }
        if self.children().any(|c| !s.reported.contains(&c)) {
            return;
        }
        self.scratch.report_done = true;
        if let Some(edge) = self.scratch.local_moe {
            let own = Candidate {
                edge,
                owner: self.me,
            };
            if self.scratch.best.map_or(true, |b| own < b) {
                self.scratch.best = Some(own);
                self.scratch.best_via = None;
            }
        }
        let best = self.scratch.best;
        match self.parent {
            Some(p) => self.send(out, p, Body::Report { best }),
            None => {
                if let Some(cand) = best {
                    // Cannot fail: `best` was just set consistently.
                    let _ = self.route_inform(cand.edge, out);
                }
            }
        }
    }

    fn route_inform(&mut self, target: EdgeKey, out: &mut Vec<Message>) -> Result<(), ProtocolError> {
        match self.scratch.best {
            Some(c) if c.edge == target => match self.scratch.best_via {
                None => {
                    self.scratch.moe_owner = true;
                    Ok(())
                }
                Some(child) => {
                    self.send(out, child, Body::Inform { edge: target });
                    Ok(())
                }
            },
            _ => Err(self.violation(format!("inform for unknown moe {target}"))),
        }
    }

    /// Sends a relay instruction one hop toward the endpoint of its edge, or
    /// acts on it when this node is that endpoint.
    fn dispatch(&mut self, relay: Relay, out: &mut Vec<Message>) -> Result<(), ProtocolError> {
        let edge = match relay {
            Relay::MergeDown { edge } | Relay::IgnoreDown { edge } => edge,
            Relay::Up { .. } => return Err(self.violation("upward relay dispatched downward")),
        };
        let cluster = self.cluster;
        if edge.touches(self.me) {
            let peer = edge.other(self.me);
            match relay {
                Relay::MergeDown { .. } => {
                    self.scratch.merge_sent = Some(edge);
                    self.send(out, peer, Body::Merge { cluster, edge });
                }
                _ => self.send(out, peer, Body::Ignore { cluster, edge }),
            }
            return Ok(());
        }
        let hop = match self.scratch.routes.get(&edge) {
            Some(child) => *child,
            None => match (self.scratch.best, self.scratch.best_via) {
                (Some(c), Some(child)) if c.edge == edge => child,
                _ => return Err(self.violation(format!("no route for {edge}"))),
            },
        };
        self.send(out, hop, Body::Internal { relay });
        Ok(())
    }
}
