//! Minimal union-find over arbitrary keys, used for connectivity and
//! acyclicity checks throughout the crate.

use std::collections::BTreeMap;

#[derive(Debug, Clone)]
pub(crate) struct UnionFind<K: Ord + Copy> {
    parent: BTreeMap<K, K>,
    rank: BTreeMap<K, u32>,
}

impl<K: Ord + Copy> UnionFind<K> {
    pub fn new(keys: impl IntoIterator<Item = K>) -> Self {
        let parent: BTreeMap<K, K> = keys.into_iter().map(|k| (k, k)).collect();
        let rank = parent.keys().map(|&k| (k, 0)).collect();
        UnionFind { parent, rank }
    }

    pub fn find(&mut self, k: K) -> K {
        let p = self.parent[&k];
        if p == k {
            return k;
        }
        let root = self.find(p);
        self.parent.insert(k, root);
        root
    }

    /// Merges the classes of `a` and `b`; returns false if they were already
    /// in the same class.
    pub fn union(&mut self, a: K, b: K) -> bool {
        let ra = self.find(a);
        let rb = self.find(b);
        if ra == rb {
            return false;
        }
        let (hi, lo) = if self.rank[&ra] >= self.rank[&rb] {
            (ra, rb)
        } else {
            (rb, ra)
        };
        self.parent.insert(lo, hi);
        if self.rank[&ra] == self.rank[&rb] {
            *self.rank.get_mut(&hi).unwrap() += 1;
        }
        true
    }

    /// Number of distinct classes.
    pub fn class_count(&mut self) -> usize {
        let keys: Vec<K> = self.parent.keys().copied().collect();
        let mut roots: Vec<K> = keys.into_iter().map(|k| self.find(k)).collect();
        roots.sort();
        roots.dedup();
        roots.len()
    }
}
