//! Line-oriented text format for communication graphs.
//!
//! ```text
//! node <id> <x> <y>
//! edge <lo> <hi> <weight>
//! ```
//!
//! Nodes come first in ascending id order, then edges in ascending edge
//! order. When reading, blank lines and `#` comments are skipped, lines may
//! come in any order as long as an edge's endpoints were declared earlier,
//! and the weight column is optional (it is recomputed from positions when
//! absent, and must match the distance when present).

use super::{CommGraph, NodeId, Position, TopologyError};
use std::fmt::Write as _;

/// Relative tolerance between a stored weight and the endpoint distance.
const WEIGHT_TOLERANCE: f64 = 1e-9;

pub fn write_dump(g: &CommGraph) -> String {
    let mut out = String::new();
    for (id, p) in g.nodes() {
        let _ = writeln!(out, "node {} {} {}", id, p.x, p.y);
    }
    for e in g.edges() {
        let _ = writeln!(out, "edge {} {} {}", e.lo, e.hi, e.weight);
    }
    out
}

pub fn parse_dump(text: &str) -> Result<CommGraph, TopologyError> {
    let mut g = CommGraph::default();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let err = |msg: String| TopologyError::Parse { line, msg };
        let fields: Vec<&str> = content.split_whitespace().collect();
        match fields.as_slice() {
            ["node", id, x, y] => {
                let id = parse_id(id).map_err(err)?;
                let x = parse_float(x).map_err(err)?;
                let y = parse_float(y).map_err(err)?;
                g.insert_node(id, Position::new(x, y))?;
            }
            ["edge", a, b] => {
                let a = parse_id(a).map_err(err)?;
                let b = parse_id(b).map_err(err)?;
                g.insert_edge(a, b)?;
            }
            ["edge", a, b, w] => {
                let a = parse_id(a).map_err(err)?;
                let b = parse_id(b).map_err(err)?;
                let w = parse_float(w).map_err(err)?;
                g.insert_edge_checked(a, b, w, WEIGHT_TOLERANCE)?;
            }
            [kind, ..] => {
                return Err(err(format!(
                    "unrecognized record `{kind}` with {} fields",
                    fields.len()
                )))
            }
            [] => unreachable!("empty lines are skipped"),
        }
    }
    Ok(g)
}

fn parse_id(s: &str) -> Result<NodeId, String> {
    s.parse::<u32>()
        .map(NodeId)
        .map_err(|_| format!("invalid node id `{s}`"))
}

fn parse_float(s: &str) -> Result<f64, String> {
    let v: f64 = s.parse().map_err(|_| format!("invalid number `{s}`"))?;
    if !v.is_finite() {
        return Err(format!("non-finite number `{s}`"));
    }
    Ok(v)
}
