use super::NodeId;
use serde::{Deserialize, Serialize};
use std::cmp::Ordering;
use std::fmt;

/// An undirected weighted edge, normalized so that `lo < hi`.
///
/// Ordering is lexicographic on `(weight, lo, hi)`. Two keys compare equal
/// only when they name the same edge with the same stored weight.
#[derive(Copy, Clone, Debug, Serialize, Deserialize)]
pub struct EdgeKey {
    pub weight: f64,
    pub lo: NodeId,
    pub hi: NodeId,
}

impl EdgeKey {
    /// Builds a key from endpoints in either order.
    ///
    /// Panics if `a == b`.
    pub fn new(a: NodeId, b: NodeId, weight: f64) -> Self {
        assert_ne!(a, b, "edge endpoints must differ");
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        Self { weight, lo, hi }
    }

    pub fn endpoints(&self) -> (NodeId, NodeId) {
        (self.lo, self.hi)
    }

    pub fn touches(&self, node: NodeId) -> bool {
        self.lo == node || self.hi == node
    }

    /// The endpoint that is not `node`. `node` must be an endpoint.
    pub fn other(&self, node: NodeId) -> NodeId {
        debug_assert!(self.touches(node));
        if self.lo == node {
            self.hi
        } else {
            self.lo
        }
    }
}

/// Total order used for every minimum-edge choice.
pub fn edge_order(a: &EdgeKey, b: &EdgeKey) -> Ordering {
    a.weight
        .total_cmp(&b.weight)
        .then(a.lo.cmp(&b.lo))
        .then(a.hi.cmp(&b.hi))
}

impl PartialEq for EdgeKey {
    fn eq(&self, other: &Self) -> bool {
        edge_order(self, other) == Ordering::Equal
    }
}

impl Eq for EdgeKey {}

impl PartialOrd for EdgeKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for EdgeKey {
    fn cmp(&self, other: &Self) -> Ordering {
        edge_order(self, other)
    }
}

impl fmt::Display for EdgeKey {
    /// Canonical `lo-hi:weight` rendering used in traces.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}:{}", self.lo, self.hi, self.weight)
    }
}

impl std::str::FromStr for EdgeKey {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let (ends, weight) = s
            .split_once(':')
            .ok_or_else(|| format!("edge `{s}` lacks `:weight`"))?;
        let (lo, hi) = ends
            .split_once('-')
            .ok_or_else(|| format!("edge `{s}` lacks `lo-hi`"))?;
        let lo: u32 = lo.parse().map_err(|_| format!("bad endpoint `{lo}`"))?;
        let hi: u32 = hi.parse().map_err(|_| format!("bad endpoint `{hi}`"))?;
        let weight: f64 = weight
            .parse()
            .map_err(|_| format!("bad weight `{weight}`"))?;
        if lo >= hi {
            return Err(format!("edge `{s}` must have lo < hi"));
        }
        if !(weight.is_finite() && weight > 0.0) {
            return Err(format!("edge `{s}` must have a positive finite weight"));
        }
        Ok(EdgeKey {
            weight,
            lo: NodeId(lo),
            hi: NodeId(hi),
        })
    }
}
