#![allow(dead_code)]

use aggtree::sim::Scenario;
use aggtree::topology::{
    generate_rgg, is_connected, oracle_mst, remove_nodes, AggregationTree, CommGraph, NodeId,
    Position, DEFAULT_SIDE,
};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

pub fn n(v: u32) -> NodeId {
    NodeId(v)
}

/// Nodes on the x axis, linked to every node within `radius`.
pub fn line(points: &[(u32, f64)], radius: f64) -> CommGraph {
    CommGraph::unit_disk(
        points.iter().map(|(id, x)| (n(*id), Position::new(*x, 0.0))),
        radius,
    )
    .unwrap()
}

/// Range that keeps an n-node field connected with high probability.
pub fn radius_for(nodes: usize) -> f64 {
    let n = nodes as f64;
    DEFAULT_SIDE * (2.5 * n.ln() / (std::f64::consts::PI * n)).sqrt()
}

/// A connected RGG plus a failure set of size `m` whose removal keeps the
/// graph connected. Failures are drawn among nodes of tree degree >= 2
/// when `internal` is set.
pub fn admissible(nodes: usize, m: usize, seed: u64, internal: bool) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    loop {
        let g = generate_rgg(nodes, radius_for(nodes), rng.gen());
        if !is_connected(&g) {
            continue;
        }
        let tree = AggregationTree::from_edges(oracle_mst(&g).unwrap());
        let pool: Vec<NodeId> = g
            .node_ids()
            .filter(|v| !internal || tree.degree(*v) >= 2)
            .collect();
        for _ in 0..32 {
            let faulty: BTreeSet<NodeId> = pool.choose_multiple(&mut rng, m).copied().collect();
            if faulty.len() == m && is_connected(&remove_nodes(&g, &faulty).unwrap()) {
                return Scenario::new(g, faulty).unwrap();
            }
        }
    }
}

/// Graph with the given positions and exactly the listed links.
pub fn explicit(points: &[(u32, f64, f64)], links: &[(u32, u32)]) -> CommGraph {
    let mut g =
        CommGraph::with_nodes(points.iter().map(|(id, x, y)| (n(*id), Position::new(*x, *y))))
            .unwrap();
    for (a, b) in links {
        g.insert_edge(n(*a), n(*b)).unwrap();
    }
    g
}

/// Live nodes on a line separated by `gaps`, each consecutive pair also
/// bridged by a faulty node at the midpoint. The original tree runs through
/// the midpoints. Live ids are `0..`, midpoint ids `100..`.
pub fn bridged_line(gaps: &[f64]) -> Scenario {
    let mut points = vec![(0, 0.0, 0.0)];
    let mut links = Vec::new();
    let mut x = 0.0;
    for (i, gap) in gaps.iter().enumerate() {
        let (a, b, mid) = (i as u32, i as u32 + 1, 100 + i as u32);
        points.push((mid, x + gap / 2.0, 0.0));
        x += gap;
        points.push((b, x, 0.0));
        links.extend([(a, mid), (mid, b), (a, b)]);
    }
    let g = explicit(&points, &links);
    let faulty: Vec<NodeId> = (0..gaps.len() as u32).map(|i| n(100 + i)).collect();
    Scenario::new(g, faulty).unwrap()
}

/// Centre 0 linked to faulty relays 1..=4, each relaying to an outer node
/// 5..=8. Every outer node's only surviving link goes to the centre.
pub fn star_of_relays() -> Scenario {
    let mut points = vec![(0, 0.0, 0.0)];
    let dirs = [(1.0, 0.0), (0.0, 1.0), (-1.0, 0.0), (0.0, -1.0)];
    for (i, (dx, dy)) in dirs.iter().enumerate() {
        points.push((1 + i as u32, *dx, *dy));
        points.push((5 + i as u32, 2.0 * dx, 2.0 * dy));
    }
    let links: Vec<(u32, u32)> = (1..=4).flat_map(|r| [(0, r), (r, r + 4), (0, r + 4)]).collect();
    Scenario::new(explicit(&points, &links), (1..=4).map(n)).unwrap()
}

/// Three clusters in a row: 2 and 4 joined by a unit link, 4 and 9 by a
/// link of length 2, each pair originally bridged by a faulty node.
pub fn three_chain() -> Scenario {
    let points = [(2, 0.0, 0.0), (1, 0.5, 0.0), (4, 1.0, 0.0), (3, 2.0, 0.0), (9, 3.0, 0.0)];
    let links = [(2, 1), (1, 4), (4, 3), (3, 9), (2, 4), (4, 9)];
    Scenario::new(explicit(&points, &links), [n(1), n(3)]).unwrap()
}
