use crate::topology::{EdgeKey, NodeId};
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

/// Identifier of a cluster: the node id of its current root.
#[derive(
    Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(transparent)]
pub struct ClusterId(pub NodeId);

impl ClusterId {
    pub fn root(self) -> NodeId {
        self.0
    }
}

impl fmt::Display for ClusterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// The twelve protocol message kinds, in delivery tie-break order.
#[derive(
    Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize,
)]
#[serde(rename_all = "snake_case")]
pub enum MessageKind {
    Find,
    Report,
    Test,
    Accept,
    Reject,
    Inform,
    MergeReq,
    Internal,
    Merge,
    Commit,
    Ignore,
    Modify,
}

impl MessageKind {
    pub const ALL: [MessageKind; 12] = [
        MessageKind::Find,
        MessageKind::Report,
        MessageKind::Test,
        MessageKind::Accept,
        MessageKind::Reject,
        MessageKind::Inform,
        MessageKind::MergeReq,
        MessageKind::Internal,
        MessageKind::Merge,
        MessageKind::Commit,
        MessageKind::Ignore,
        MessageKind::Modify,
    ];

    pub fn name(self) -> &'static str {
        match self {
            MessageKind::Find => "find",
            MessageKind::Report => "report",
            MessageKind::Test => "test",
            MessageKind::Accept => "accept",
            MessageKind::Reject => "reject",
            MessageKind::Inform => "inform",
            MessageKind::MergeReq => "merge_req",
            MessageKind::Internal => "internal",
            MessageKind::Merge => "merge",
            MessageKind::Commit => "commit",
            MessageKind::Ignore => "ignore",
            MessageKind::Modify => "modify",
        }
    }
}

impl fmt::Display for MessageKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for MessageKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        MessageKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| format!("unknown message kind `{s}`"))
    }
}

/// A cluster's best outgoing edge candidate together with the member node
/// it is attached to.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct Candidate {
    pub edge: EdgeKey,
    pub owner: NodeId,
}

/// What a root wants done at the far end of an intra-cluster relay.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Relay {
    /// A merge request from `requester`, forwarded toward the root.
    Up { requester: ClusterId, edge: EdgeKey },
    /// Root instruction: send a Merge across `edge`.
    MergeDown { edge: EdgeKey },
    /// Root instruction: send an Ignore across `edge`.
    IgnoreDown { edge: EdgeKey },
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Body {
    Find { cluster: ClusterId },
    Report { best: Option<Candidate> },
    Test { cluster: ClusterId },
    Accept,
    Reject,
    Inform { edge: EdgeKey },
    MergeReq { cluster: ClusterId, edge: EdgeKey },
    Internal { relay: Relay },
    Merge { cluster: ClusterId, edge: EdgeKey },
    Commit { cluster: ClusterId, edge: EdgeKey },
    Ignore { cluster: ClusterId, edge: EdgeKey },
    Modify { cluster: ClusterId },
}

impl Body {
    pub fn kind(&self) -> MessageKind {
        match self {
            Body::Find { .. } => MessageKind::Find,
            Body::Report { .. } => MessageKind::Report,
            Body::Test { .. } => MessageKind::Test,
            Body::Accept => MessageKind::Accept,
            Body::Reject => MessageKind::Reject,
            Body::Inform { .. } => MessageKind::Inform,
            Body::MergeReq { .. } => MessageKind::MergeReq,
            Body::Internal { .. } => MessageKind::Internal,
            Body::Merge { .. } => MessageKind::Merge,
            Body::Commit { .. } => MessageKind::Commit,
            Body::Ignore { .. } => MessageKind::Ignore,
            Body::Modify { .. } => MessageKind::Modify,
        }
    }

    /// Canonical payload text: cluster ids as integers, edges as
    /// `lo-hi:weight`, multiple fields joined by `,`, `-` when empty.
    pub fn payload(&self) -> String {
        match self {
            Body::Find { cluster } | Body::Test { cluster } | Body::Modify { cluster } => {
                cluster.to_string()
            }
            Body::Report { best: None } => "none".to_string(),
            Body::Report {
                best: Some(Candidate { edge, owner }),
            } => format!("{edge}@{owner}"),
            Body::Accept | Body::Reject => "-".to_string(),
            Body::Inform { edge } => edge.to_string(),
            Body::MergeReq { cluster, edge }
            | Body::Merge { cluster, edge }
            | Body::Commit { cluster, edge }
            | Body::Ignore { cluster, edge } => format!("{cluster},{edge}"),
            Body::Internal { relay } => match relay {
                Relay::Up { requester, edge } => format!("up,{requester},{edge}"),
                Relay::MergeDown { edge } => format!("merge,{edge}"),
                Relay::IgnoreDown { edge } => format!("ignore,{edge}"),
            },
        }
    }

    /// Inverse of [`Body::payload`] for a given kind.
    pub fn parse(kind: MessageKind, payload: &str) -> Result<Body, String> {
        let cluster = |s: &str| -> Result<ClusterId, String> {
            s.parse::<u32>()
                .map(|v| ClusterId(NodeId(v)))
                .map_err(|_| format!("bad cluster id `{s}`"))
        };
        let cluster_edge = |s: &str| -> Result<(ClusterId, EdgeKey), String> {
            let (c, e) = s
                .split_once(',')
                .ok_or_else(|| format!("expected `cluster,edge`, got `{s}`"))?;
            Ok((cluster(c)?, e.parse()?))
        };
        let none = |s: &str| -> Result<(), String> {
            if s == "-" {
                Ok(())
            } else {
                Err(format!("expected `-`, got `{s}`"))
            }
        };
        Ok(match kind {
            MessageKind::Find => Body::Find { cluster: cluster(payload)? },
            MessageKind::Test => Body::Test { cluster: cluster(payload)? },
            MessageKind::Modify => Body::Modify { cluster: cluster(payload)? },
            MessageKind::Accept => {
                none(payload)?;
                Body::Accept
            }
            MessageKind::Reject => {
                none(payload)?;
                Body::Reject
            }
            MessageKind::Report if payload == "none" => Body::Report { best: None },
            MessageKind::Report => {
                let (e, owner) = payload
                    .rsplit_once('@')
                    .ok_or_else(|| format!("expected `edge@owner`, got `{payload}`"))?;
                let owner = owner
                    .parse::<u32>()
                    .map(NodeId)
                    .map_err(|_| format!("bad owner `{owner}`"))?;
                let edge: EdgeKey = e.parse()?;
                if !edge.touches(owner) {
                    return Err(format!("owner {owner} is not an endpoint of {edge}"));
                }
                Body::Report {
                    best: Some(Candidate { edge, owner }),
                }
            }
            MessageKind::Inform => Body::Inform { edge: payload.parse()? },
            MessageKind::MergeReq => {
                let (cluster, edge) = cluster_edge(payload)?;
                Body::MergeReq { cluster, edge }
            }
            MessageKind::Merge => {
                let (cluster, edge) = cluster_edge(payload)?;
                Body::Merge { cluster, edge }
            }
            MessageKind::Commit => {
                let (cluster, edge) = cluster_edge(payload)?;
                Body::Commit { cluster, edge }
            }
            MessageKind::Ignore => {
                let (cluster, edge) = cluster_edge(payload)?;
                Body::Ignore { cluster, edge }
            }
            MessageKind::Internal => {
                let (tag, rest) = payload
                    .split_once(',')
                    .ok_or_else(|| format!("bad relay `{payload}`"))?;
                let relay = match tag {
                    "up" => {
                        let (requester, edge) = cluster_edge(rest)?;
                        Relay::Up { requester, edge }
                    }
                    "merge" => Relay::MergeDown { edge: rest.parse()? },
                    "ignore" => Relay::IgnoreDown { edge: rest.parse()? },
                    _ => return Err(format!("unknown relay tag `{tag}`")),
                };
                Body::Internal { relay }
            }
        })
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Message {
    pub src: NodeId,
    pub dst: NodeId,
    pub body: Body,
}

impl Message {
    pub fn kind(&self) -> MessageKind {
        self.body.kind()
    }
}
