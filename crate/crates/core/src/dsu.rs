//! Disjoint-set forest keyed by arbitrary ordered ids.

use std::collections::BTreeMap;

#[derive(Clone, Debug)]
pub struct DisjointSet<T: Ord + Copy> {
    index: BTreeMap<T, usize>,
    parent: Vec<usize>,
    rank: Vec<u8>,
    components: usize,
}

impl<T: Ord + Copy> DisjointSet<T> {
    pub fn new(items: impl IntoIterator<Item = T>) -> Self {
        let mut index = BTreeMap::new();
        for item in items {
            let next = index.len();
            index.entry(item).or_insert(next);
        }
        let n = index.len();
        Self {
            index,
            parent: (0..n).collect(),
            rank: vec![0; n],
            components: n,
        }
    }

    pub fn contains(&self, item: T) -> bool {
        self.index.contains_key(&item)
    }

    /// Number of disjoint sets currently tracked.
    pub fn components(&self) -> usize {
        self.components
    }

    fn find_idx(&mut self, mut node: usize) -> usize {
        let mut root = node;
        while self.parent[root] != root {
            root = self.parent[root];
        }
        while self.parent[node] != root {
            let next = self.parent[node];
            self.parent[node] = root;
            node = next;
        }
        root
    }

    /// Representative index of `item`'s set, or `None` for an unknown item.
    pub fn find(&mut self, item: T) -> Option<usize> {
        let idx = *self.index.get(&item)?;
        Some(self.find_idx(idx))
    }

    /// Joins the sets of `a` and `b`. Returns `Some(true)` if they were
    /// disjoint, `Some(false)` if already joined, `None` for unknown items.
    pub fn union(&mut self, a: T, b: T) -> Option<bool> {
        let mut ra = self.find(a)?;
        let mut rb = self.find(b)?;
        if ra == rb {
            return Some(false);
        }
        if self.rank[ra] < self.rank[rb] {
            std::mem::swap(&mut ra, &mut rb);
        }
        self.parent[rb] = ra;
        if self.rank[ra] == self.rank[rb] {
            self.rank[ra] = self.rank[ra].saturating_add(1);
        }
        self.components -= 1;
        Some(true)
    }
}
