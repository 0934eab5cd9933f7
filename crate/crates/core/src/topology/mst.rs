use super::{CommGraph, EdgeKey, TopologyError};
use crate::dsu::DisjointSet;

/// Minimum spanning forest under [`edge_order`](super::edge_order)
/// (Kruskal). Returned edges are in ascending edge order.
pub fn oracle_msf(g: &CommGraph) -> Vec<EdgeKey> {
    let mut dsu = DisjointSet::new(g.node_ids());
    let mut out = Vec::with_capacity(g.node_count().saturating_sub(1));
    for e in g.edges() {
        if dsu.union(e.lo, e.hi) == Some(true) {
            out.push(e);
        }
    }
    out
}

/// The unique minimum spanning tree of a connected graph.
pub fn oracle_mst(g: &CommGraph) -> Result<Vec<EdgeKey>, TopologyError> {
    let forest = oracle_msf(g);
    if forest.len() + 1 < g.node_count() {
        return Err(TopologyError::DisconnectedGraph);
    }
    Ok(forest)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::topology::{generate_rgg, NodeId, Position};
    use proptest::prelude::*;
    use std::collections::{BTreeMap, BTreeSet};

    fn n(v: u32) -> NodeId {
        NodeId(v)
    }

    fn graph(points: &[(f64, f64)], edges: &[(u32, u32)]) -> CommGraph {
        let mut g = CommGraph::with_nodes(
            points
                .iter()
                .enumerate()
                .map(|(i, (x, y))| (n(i as u32 + 1), Position::new(*x, *y))),
        )
        .unwrap();
        for (a, b) in edges {
            g.insert_edge(n(*a), n(*b)).unwrap();
        }
        g
    }

    #[test]
    fn triangle_drops_heaviest() {
        // 3-4-5 right triangle: weights 3, 4, 5.
        let g = graph(&[(0.0, 0.0), (3.0, 0.0), (0.0, 4.0)], &[(1, 2), (1, 3), (2, 3)]);
        let w: Vec<f64> = oracle_mst(&g).unwrap().iter().map(|e| e.weight).collect();
        assert_eq!(w, vec![3.0, 4.0]);
    }

    #[test]
    fn tree_input_is_its_own_mst() {
        let g = graph(
            &[(0.0, 0.0), (1.0, 0.0), (2.0, 1.0), (5.0, 1.0)],
            &[(1, 2), (2, 3), (3, 4)],
        );
        assert_eq!(oracle_mst(&g).unwrap().len(), 3);
        assert_eq!(
            oracle_mst(&g).unwrap().into_iter().collect::<BTreeSet<_>>(),
            g.edges().collect()
        );
    }

    #[test]
    fn unit_square_keeps_three_smallest_keys() {
        // Equal weights: keys order as (1,2) < (1,4) < (2,3) < (3,4).
        // Of the four spanning trees (drop one side), dropping 3-4 gives
        // the lexicographically smallest sorted key sequence.
        let g = graph(
            &[(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)],
            &[(1, 2), (2, 3), (3, 4), (1, 4)],
        );
        let got: Vec<_> = oracle_mst(&g).unwrap().iter().map(|e| e.endpoints()).collect();
        assert_eq!(got, vec![(n(1), n(2)), (n(1), n(4)), (n(2), n(3))]);
    }

    #[test]
    fn disconnected_is_an_error() {
        let g = graph(&[(0.0, 0.0), (1.0, 0.0), (9.0, 9.0)], &[(1, 2)]);
        assert_eq!(oracle_mst(&g), Err(TopologyError::DisconnectedGraph));
        assert_eq!(oracle_msf(&g).len(), 1);
    }

    /// Max edge on the tree path between `a` and `b`.
    fn path_max(tree: &[EdgeKey], a: NodeId, b: NodeId) -> Option<EdgeKey> {
        let mut adj: BTreeMap<NodeId, Vec<EdgeKey>> = BTreeMap::new();
        for e in tree {
            adj.entry(e.lo).or_default().push(*e);
            adj.entry(e.hi).or_default().push(*e);
        }
        let mut stack = vec![(a, None::<NodeId>, None::<EdgeKey>)];
        while let Some((u, from, best)) = stack.pop() {
            if u == b {
                return best;
            }
            for e in adj.get(&u).into_iter().flatten() {
                let v = e.other(u);
                if Some(v) != from {
                    stack.push((v, Some(u), Some(best.map_or(*e, |m: EdgeKey| m.max(*e)))));
                }
            }
        }
        None
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn cycle_optimality(n_nodes in 2usize..40, seed in any::<u64>()) {
            let g = generate_rgg(n_nodes, 35.0, seed);
            let forest = oracle_msf(&g);
            let in_tree: BTreeSet<EdgeKey> = forest.iter().copied().collect();
            prop_assert_eq!(forest.len() + g.components().len(), g.node_count());
            for e in g.edges().filter(|e| !in_tree.contains(e)) {
                let m = path_max(&forest, e.lo, e.hi);
                prop_assert!(m.is_some(), "non-tree edge must close a cycle");
                prop_assert!(m.unwrap() < e);
            }
        }
    }
}
