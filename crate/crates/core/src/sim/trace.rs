use crate::protocol::{Body, Message, MessageKind};
use crate::topology::NodeId;
use serde::{Deserialize, Serialize};
use std::fmt;
use std::str::FromStr;

#[derive(Copy, Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TraceLevel {
    Off,
    /// Per-round counters only.
    #[default]
    Summary,
    /// Every delivered message.
    Full,
}

impl FromStr for TraceLevel {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "off" => Ok(TraceLevel::Off),
            "summary" => Ok(TraceLevel::Summary),
            "full" => Ok(TraceLevel::Full),
            _ => Err(format!("unknown trace level `{s}`")),
        }
    }
}

/// The four barrier-separated phases of a super-round.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Phase {
    MoeFinding = 1,
    MergeRequest = 2,
    MergeDecision = 3,
    Merging = 4,
}

impl Phase {
    pub const ALL: [Phase; 4] = [
        Phase::MoeFinding,
        Phase::MergeRequest,
        Phase::MergeDecision,
        Phase::Merging,
    ];

    pub fn number(self) -> u8 {
        self as u8
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.number())
    }
}

/// One delivered message, rendered as a tab-separated line:
/// `round phase kind src dst payload`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub round: usize,
    pub phase: Phase,
    pub msg: Message,
}

impl fmt::Display for TraceRecord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{}\t{}\t{}\t{}\t{}\t{}",
            self.round,
            self.phase,
            self.msg.kind(),
            self.msg.src,
            self.msg.dst,
            self.msg.body.payload()
        )
    }
}

impl FromStr for TraceRecord {
    type Err = String;

    fn from_str(line: &str) -> Result<Self, Self::Err> {
        let fields: Vec<&str> = line.split('\t').collect();
        let [round, phase, kind, src, dst, payload] = fields.as_slice() else {
            return Err(format!("expected 6 tab-separated fields, got {}", fields.len()));
        };
        let round: usize = round.parse().map_err(|_| format!("bad round `{round}`"))?;
        let phase = match *phase {
            "1" => Phase::MoeFinding,
            "2" => Phase::MergeRequest,
            "3" => Phase::MergeDecision,
            "4" => Phase::Merging,
            other => return Err(format!("bad phase `{other}`")),
        };
        let kind: MessageKind = kind.parse()?;
        let node = |s: &str| {
            s.parse::<u32>()
                .map(NodeId)
                .map_err(|_| format!("bad node id `{s}`"))
        };
        let src = node(src)?;
        let dst = node(dst)?;
        if src == dst {
            return Err("message to self".to_string());
        }
        let body = Body::parse(kind, payload)?;
        Ok(TraceRecord {
            round,
            phase,
            msg: Message { src, dst, body },
        })
    }
}

/// Parses a whole trace file, skipping blank lines and `#` comments.
pub fn parse_trace(text: &str) -> Result<Vec<TraceRecord>, String> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty() && !l.starts_with('#'))
        .map(|(i, l)| l.parse().map_err(|e| format!("line {}: {e}", i + 1)))
        .collect()
}
