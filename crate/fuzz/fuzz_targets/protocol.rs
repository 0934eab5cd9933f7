#![no_main]

//! Builds a small field from the input bytes, fails some nodes and checks
//! the repaired tree against the minimum spanning forest.

use aggtree::sim::{run_with_mode, ExecMode, Scenario, Status, TraceLevel};
use aggtree::topology::{is_connected, remove_nodes, CommGraph, NodeId, Position};
use libfuzzer_sys::fuzz_target;
use std::collections::BTreeSet;

fuzz_target!(|data: &[u8]| {
    let Some((&header, rest)) = data.split_first() else {
        return;
    };
    let count = 2 + (header as usize % 14);
    let radius = 2.0 + f64::from(header >> 4);
    if rest.len() < 2 * count {
        return;
    }
    let (coords, tail) = rest.split_at(2 * count);
    let nodes: Vec<(NodeId, Position)> = coords
        .chunks(2)
        .enumerate()
        .map(|(i, c)| {
            let p = Position::new(f64::from(c[0] % 16), f64::from(c[1] % 16));
            (NodeId(i as u32), p)
        })
        .collect();
    let Ok(graph) = CommGraph::unit_disk(nodes, radius) else {
        return;
    };
    let faulty: BTreeSet<NodeId> = tail
        .iter()
        .take(4)
        .map(|b| NodeId(u32::from(*b) % count as u32))
        .collect();
    if faulty.len() >= count {
        return;
    }
    let scenario = Scenario::new(graph, faulty)
        .expect("ids are in range")
        .with_trace_level(TraceLevel::Full);
    let a = run_with_mode(&scenario, ExecMode::Sequential).expect("run completes");
    let b = run_with_mode(&scenario, ExecMode::Parallel).expect("run completes");
    assert_eq!(a, b);
    assert_eq!(a.trace, b.trace);

    let v = &a.verdicts;
    assert!(v.every_round_acyclic && v.acyclic && v.forest_equivalent && v.progress_ok);
    let reduced = remove_nodes(scenario.graph(), scenario.faulty()).unwrap();
    if is_connected(&reduced) {
        assert_eq!(a.status, Status::Reconstructed);
        assert!(v.mst_equivalent);
    } else {
        assert_eq!(a.status, Status::Irreparable);
    }
});
