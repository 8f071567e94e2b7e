//! (d,d)-tightness and spanning-tree decompositions.
//!
//! A multigraph splits into d edge-disjoint spanning trees exactly when
//! |E| = d|V| − d and every nonempty vertex set X induces at most d|X| − d
//! edges. [`check_tight`] decides this with a certificate, and
//! [`decompose`] extracts an explicit decomposition by matroid union over d
//! graphic matroids, returning a violating certificate on failure. The two
//! routes are independent, so one can be tested against the other.

use std::collections::{BTreeMap, BTreeSet};

use serde::Serialize;
use thiserror::Error;

use crate::multigraph::{EdgeId, GraphError, MultiGraph, VertexId};
use crate::union_find::UnionFind;

/// A multigraph together with a partition of its edges into d spanning trees
/// (tree indices are 1-based).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeDecomposition {
    graph: MultiGraph,
    d: usize,
    assignment: BTreeMap<EdgeId, usize>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DecompositionError {
    #[error("graph error: {0}")]
    Graph(#[from] GraphError),
    #[error("edge {0} has no tree assignment")]
    Unassigned(EdgeId),
    #[error("edge {edge} is assigned to tree {tree}, outside 1..={d}")]
    TreeOutOfRange { edge: EdgeId, tree: usize, d: usize },
    #[error("assignment mentions edge {0} which is not in the graph")]
    StrayAssignment(EdgeId),
    #[error("d must be at least 1")]
    ZeroTrees,
}

impl TreeDecomposition {
    /// Wraps a graph and a total tree assignment. Only structural totality is
    /// checked here; use [`verify_decomposition`] for the spanning-tree
    /// property itself.
    pub fn new(
        graph: MultiGraph,
        d: usize,
        assignment: BTreeMap<EdgeId, usize>,
    ) -> Result<Self, DecompositionError> {
        if d == 0 {
            return Err(DecompositionError::ZeroTrees);
        }
        for (&e, &t) in &assignment {
            graph.endpoints(e).map_err(|_| DecompositionError::StrayAssignment(e))?;
            if t == 0 || t > d {
                return Err(DecompositionError::TreeOutOfRange { edge: e, tree: t, d });
            }
        }
        for (e, _) in graph.edges() {
            if !assignment.contains_key(&e) {
                return Err(DecompositionError::Unassigned(e));
            }
        }
        Ok(TreeDecomposition { graph, d, assignment })
    }

    /// The one-vertex decomposition with d empty trees.
    pub fn k1(v: VertexId, d: usize) -> Self {
        TreeDecomposition {
            graph: MultiGraph::single_vertex(v),
            d,
            assignment: BTreeMap::new(),
        }
    }

    pub fn graph(&self) -> &MultiGraph {
        &self.graph
    }

    pub fn d(&self) -> usize {
        self.d
    }

    pub fn assignment(&self) -> &BTreeMap<EdgeId, usize> {
        &self.assignment
    }

    pub fn tree_of(&self, e: EdgeId) -> Option<usize> {
        self.assignment.get(&e).copied()
    }

    /// Edge ids of tree `t`, in id order.
    pub fn tree_edges(&self, t: usize) -> Vec<EdgeId> {
        self.assignment
            .iter()
            .filter_map(|(&e, &tt)| (tt == t).then_some(e))
            .collect()
    }

    /// Neighbours of `v` inside tree `t` (distinct, since a tree has no
    /// parallel edges), with the connecting edge ids.
    pub fn tree_neighbours(&self, v: VertexId, t: usize) -> Vec<(EdgeId, VertexId)> {
        self.tree_edges(t)
            .into_iter()
            .filter_map(|e| {
                let (a, b) = self.graph.endpoints(e).expect("assigned edge exists");
                if a == v {
                    Some((e, b))
                } else if b == v {
                    Some((e, a))
                } else {
                    None
                }
            })
            .collect()
    }

    pub fn degree_in_tree(&self, v: VertexId, t: usize) -> usize {
        self.tree_neighbours(v, t).len()
    }

    /// Swaps the two tree indices (d = 2 only).
    pub fn with_trees_swapped(&self) -> TreeDecomposition {
        assert_eq!(self.d, 2, "tree swap is a two-tree operation");
        let assignment = self
            .assignment
            .iter()
            .map(|(&e, &t)| (e, 3 - t))
            .collect();
        TreeDecomposition {
            graph: self.graph.clone(),
            d: self.d,
            assignment,
        }
    }

    /// Contracts a vertex pair joined by parallel edges; every yz copy is
    /// dropped from its tree and the remaining assignment is carried over.
    /// Returns the contracted decomposition and the vertex map.
    pub fn contract_parallel_pair(
        &self,
        y: VertexId,
        z: VertexId,
    ) -> Result<(TreeDecomposition, BTreeMap<VertexId, VertexId>), GraphError> {
        let (graph, map) = self.graph.contract_vertex_pair(y, z)?;
        let assignment = self
            .assignment
            .iter()
            .filter(|(e, _)| graph.endpoints(**e).is_ok())
            .map(|(&e, &t)| (e, t))
            .collect();
        Ok((
            TreeDecomposition {
                graph,
                d: self.d,
                assignment,
            },
            map,
        ))
    }

    pub(crate) fn replace_parts(
        graph: MultiGraph,
        d: usize,
        assignment: BTreeMap<EdgeId, usize>,
    ) -> Self {
        TreeDecomposition { graph, d, assignment }
    }
}

/// Why a graph is not (d,d)-tight.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Violation {
    /// |E| differs from d|V| − d.
    CountMismatch { edges: usize, required: usize },
    /// A vertex set inducing more than d|X| − d edges.
    SparsityViolation {
        witness: BTreeSet<VertexId>,
        induced: usize,
        capacity: usize,
    },
}

/// Outcome of the tightness test.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TightnessCertificate {
    Tight,
    Violating(Violation),
}

impl TightnessCertificate {
    pub fn is_tight(&self) -> bool {
        matches!(self, TightnessCertificate::Tight)
    }
}

/// Decides (d,d)-tightness. Graphs with at most 20 vertices are checked by
/// exhaustive subset enumeration; larger graphs go through the decomposition
/// attempt, whose failure set yields the witness.
pub fn check_tight(g: &MultiGraph, d: usize) -> TightnessCertificate {
    let n = g.vertex_count();
    assert!(n >= 1, "tightness is defined on nonempty graphs");
    let required = d * n - d;
    if g.edge_count() != required {
        return TightnessCertificate::Violating(Violation::CountMismatch {
            edges: g.edge_count(),
            required,
        });
    }
    if n <= 20 {
        let verts: Vec<VertexId> = g.vertices().collect();
        let masks: Vec<(u32, u32)> = g
            .edges()
            .map(|(_, (u, v))| {
                let iu = verts.binary_search(&u).unwrap() as u32;
                let iv = verts.binary_search(&v).unwrap() as u32;
                (1u32 << iu, 1u32 << iv)
            })
            .collect();
        for subset in 1u32..(1u32 << n) {
            let size = subset.count_ones() as usize;
            let induced = masks
                .iter()
                .filter(|&&(mu, mv)| subset & mu != 0 && subset & mv != 0)
                .count();
            if induced > d * size - d {
                let witness = verts
                    .iter()
                    .enumerate()
                    .filter_map(|(i, &v)| (subset & (1 << i) != 0).then_some(v))
                    .collect();
                return TightnessCertificate::Violating(Violation::SparsityViolation {
                    witness,
                    induced,
                    capacity: d * size - d,
                });
            }
        }
        TightnessCertificate::Tight
    } else {
        match decompose(g, d) {
            Ok(_) => TightnessCertificate::Tight,
            Err(v) => TightnessCertificate::Violating(v),
        }
    }
}

/// One forest of the packing under construction.
#[derive(Debug, Clone, Default)]
struct Forest {
    adj: BTreeMap<VertexId, Vec<(VertexId, EdgeId)>>,
    members: BTreeSet<EdgeId>,
}

impl Forest {
    fn insert(&mut self, e: EdgeId, u: VertexId, v: VertexId) {
        self.adj.entry(u).or_default().push((v, e));
        self.adj.entry(v).or_default().push((u, e));
        self.members.insert(e);
    }

    fn remove(&mut self, e: EdgeId, u: VertexId, v: VertexId) {
        if let Some(list) = self.adj.get_mut(&u) {
            list.retain(|&(_, f)| f != e);
        }
        if let Some(list) = self.adj.get_mut(&v) {
            list.retain(|&(_, f)| f != e);
        }
        self.members.remove(&e);
    }

    /// Edge ids on the tree path from `u` to `v`, if connected.
    fn path_edges(&self, u: VertexId, v: VertexId) -> Option<Vec<EdgeId>> {
        if u == v {
            return Some(Vec::new());
        }
        let mut parent: BTreeMap<VertexId, (VertexId, EdgeId)> = BTreeMap::new();
        let mut queue = std::collections::VecDeque::from([u]);
        let mut seen = BTreeSet::from([u]);
        while let Some(w) = queue.pop_front() {
            for &(next, e) in self.adj.get(&w).into_iter().flatten() {
                if seen.insert(next) {
                    parent.insert(next, (w, e));
                    if next == v {
                        let mut path = Vec::new();
                        let mut cur = v;
                        while cur != u {
                            let (prev, pe) = parent[&cur];
                            path.push(pe);
                            cur = prev;
                        }
                        return Some(path);
                    }
                    queue.push_back(next);
                }
            }
        }
        None
    }
}

/// Extracts a d-tree decomposition, or a violating certificate if none
/// exists. Edges are processed in id order, so the result is deterministic.
pub fn decompose(g: &MultiGraph, d: usize) -> Result<TreeDecomposition, Violation> {
    assert!(d >= 1, "d must be positive");
    let n = g.vertex_count();
    assert!(n >= 1, "decompose is defined on nonempty graphs");
    let required = d * n - d;
    if g.edge_count() != required {
        return Err(Violation::CountMismatch {
            edges: g.edge_count(),
            required,
        });
    }
    let mut forests = vec![Forest::default(); d];
    let mut home: BTreeMap<EdgeId, usize> = BTreeMap::new();
    for (e0, _) in g.edges() {
        if !augment(g, &mut forests, &mut home, e0) {
            // Blocked: the edges scanned by the failed search certify a
            // violating vertex set.
            let witness = blocking_witness(g, &forests, &home, e0);
            let induced = g.induced_edge_count(&witness).expect("witness within graph");
            let capacity = d * witness.len() - d;
            debug_assert!(induced > capacity, "blocking set must violate sparsity");
            return Err(Violation::SparsityViolation {
                witness,
                induced,
                capacity,
            });
        }
    }
    let dec = TreeDecomposition::replace_parts(
        g.clone(),
        d,
        home.into_iter().map(|(e, i)| (e, i + 1)).collect(),
    );
    debug_assert!(verify_decomposition(&dec));
    Ok(dec)
}

/// Augmenting search of the matroid union: tries to place `e0`, cascading
/// exchanges along a shortest label chain.
fn augment(
    g: &MultiGraph,
    forests: &mut [Forest],
    home: &mut BTreeMap<EdgeId, usize>,
    e0: EdgeId,
) -> bool {
    let mut label: BTreeMap<EdgeId, (EdgeId, usize)> = BTreeMap::new();
    let mut seen = BTreeSet::from([e0]);
    let mut queue = std::collections::VecDeque::from([e0]);
    while let Some(f) = queue.pop_front() {
        let (fu, fv) = g.endpoints(f).expect("edge in graph");
        for i in 0..forests.len() {
            match forests[i].path_edges(fu, fv) {
                None => {
                    // f is independent in forest i: place it and unwind.
                    let mut cur = f;
                    let mut target = i;
                    loop {
                        let (cu, cv) = g.endpoints(cur).expect("edge in graph");
                        if let Some(old) = home.insert(cur, target) {
                            debug_assert_ne!(old, target);
                        }
                        forests[target].insert(cur, cu, cv);
                        match label.get(&cur) {
                            None => break,
                            Some(&(pred, j)) => {
                                // cur sat on pred's cycle in forest j; move on.
                                forests[j].remove(cur, cu, cv);
                                cur = pred;
                                target = j;
                            }
                        }
                    }
                    return true;
                }
                Some(cycle) => {
                    for gedge in cycle {
                        if seen.insert(gedge) {
                            label.insert(gedge, (f, i));
                            queue.push_back(gedge);
                        }
                    }
                }
            }
        }
    }
    false
}

/// Vertex set spanned by the edges reachable in the failed search. Every
/// forest restricted to this set is spanning and connected on it, so the set
/// induces strictly more than d(|X| − 1) edges.
fn blocking_witness(
    g: &MultiGraph,
    forests: &[Forest],
    home: &BTreeMap<EdgeId, usize>,
    e0: EdgeId,
) -> BTreeSet<VertexId> {
    // Recompute the reachable edge set (the search is cheap and pure).
    let mut seen = BTreeSet::from([e0]);
    let mut queue = std::collections::VecDeque::from([e0]);
    while let Some(f) = queue.pop_front() {
        let (fu, fv) = g.endpoints(f).expect("edge in graph");
        for forest in forests {
            if let Some(cycle) = forest.path_edges(fu, fv) {
                for gedge in cycle {
                    if seen.insert(gedge) {
                        queue.push_back(gedge);
                    }
                }
            }
        }
    }
    let _ = home;
    let mut witness = BTreeSet::new();
    for e in seen {
        let (u, v) = g.endpoints(e).expect("edge in graph");
        witness.insert(u);
        witness.insert(v);
    }
    witness
}

/// True when every tree class of the decomposition is a spanning tree of the
/// graph.
pub fn verify_decomposition(dec: &TreeDecomposition) -> bool {
    let g = dec.graph();
    let n = g.vertex_count();
    if n == 0 {
        return false;
    }
    for t in 1..=dec.d() {
        let edges = dec.tree_edges(t);
        if edges.len() != n - 1 {
            return false;
        }
        let mut uf = UnionFind::new(g.vertices());
        for e in edges {
            let (u, v) = g.endpoints(e).expect("assigned edge exists");
            if !uf.union(u, v) {
                return false; // cycle
            }
        }
        if uf.class_count() != 1 {
            return false;
        }
    }
    true
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum EnumerationError {
    #[error("enumeration is limited to 8 vertices, got {0}")]
    TooLarge(usize),
}

/// All d-tree decompositions of `g`; with `up_to_iso` the list is reduced
/// modulo graph isomorphisms combined with permutations of the tree indices.
pub fn enumerate_decompositions(
    g: &MultiGraph,
    d: usize,
    up_to_iso: bool,
) -> Result<Vec<TreeDecomposition>, EnumerationError> {
    let n = g.vertex_count();
    if n > 8 {
        return Err(EnumerationError::TooLarge(n));
    }
    if g.edge_count() != d * n - d {
        return Ok(Vec::new());
    }
    let edge_ids: Vec<EdgeId> = g.edges().map(|(e, _)| e).collect();
    let mut found = Vec::new();
    let mut assignment: BTreeMap<EdgeId, usize> = BTreeMap::new();
    let mut forests = vec![UnionFind::new(g.vertices()); d];
    let mut counts = vec![0usize; d];
    assign_rec(
        g,
        d,
        &edge_ids,
        0,
        &mut assignment,
        &mut forests,
        &mut counts,
        &mut found,
    );
    if !up_to_iso {
        return Ok(found);
    }
    let mut seen = BTreeSet::new();
    let mut reps = Vec::new();
    for dec in found {
        let key = canonical_key(&dec);
        if seen.insert(key) {
            reps.push(dec);
        }
    }
    Ok(reps)
}

#[allow(clippy::too_many_arguments)]
fn assign_rec(
    g: &MultiGraph,
    d: usize,
    edges: &[EdgeId],
    idx: usize,
    assignment: &mut BTreeMap<EdgeId, usize>,
    forests: &mut Vec<UnionFind<VertexId>>,
    counts: &mut Vec<usize>,
    found: &mut Vec<TreeDecomposition>,
) {
    let n = g.vertex_count();
    if idx == edges.len() {
        let dec = TreeDecomposition::replace_parts(g.clone(), d, assignment.clone());
        if verify_decomposition(&dec) {
            found.push(dec);
        }
        return;
    }
    let e = edges[idx];
    let (u, v) = g.endpoints(e).expect("edge in graph");
    for t in 0..d {
        if counts[t] == n - 1 {
            continue;
        }
        let snapshot = forests[t].clone();
        if !forests[t].union(u, v) {
            forests[t] = snapshot;
            continue; // cycle in tree t
        }
        counts[t] += 1;
        assignment.insert(e, t + 1);
        assign_rec(g, d, edges, idx + 1, assignment, forests, counts, found);
        assignment.remove(&e);
        counts[t] -= 1;
        forests[t] = snapshot;
    }
}

/// Canonical form of an edge-coloured multigraph under vertex relabelling and
/// tree permutation; decompositions are isomorphic exactly when their keys
/// coincide. Exponential in |V|, guarded by the enumeration size limit.
pub(crate) fn canonical_key(dec: &TreeDecomposition) -> Vec<(usize, usize, usize)> {
    let verts: Vec<VertexId> = dec.graph().vertices().collect();
    let n = verts.len();
    let pos: BTreeMap<VertexId, usize> = verts.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let edges: Vec<(usize, usize, usize)> = dec
        .graph()
        .edges()
        .map(|(e, (u, v))| (pos[&u], pos[&v], dec.tree_of(e).unwrap()))
        .collect();
    let tree_perms = permutations(dec.d());
    let mut best: Option<Vec<(usize, usize, usize)>> = None;
    for sigma in permutations(n) {
        for tp in &tree_perms {
            let mut key: Vec<(usize, usize, usize)> = edges
                .iter()
                .map(|&(u, v, t)| {
                    let (a, b) = (sigma[u], sigma[v]);
                    (a.min(b), a.max(b), tp[t - 1] + 1)
                })
                .collect();
            key.sort_unstable();
            if best.as_ref().is_none_or(|b| key < *b) {
                best = Some(key);
            }
        }
    }
    best.unwrap_or_default()
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    let mut items: Vec<usize> = (0..n).collect();
    fn heap(k: usize, items: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if k <= 1 {
            out.push(items.clone());
            return;
        }
        for i in 0..k {
            heap(k - 1, items, out);
            if k.is_multiple_of(2) {
                items.swap(i, k - 1);
            } else {
                items.swap(0, k - 1);
            }
        }
    }
    heap(n, &mut items, &mut out);
    out
}
