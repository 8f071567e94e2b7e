//! Loop-free multigraphs with stable vertex and edge identities.
//!
//! Parallel copies of an edge are distinct objects carrying their own
//! [`EdgeId`], so a tree assignment or a construction step can reference a
//! specific copy. Graphs are immutable values: every operation that changes
//! the graph returns a new one.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::union_find::UnionFind;

/// Identity of a vertex. Dense `0..|V|` on freshly built graphs; stable
/// (never renumbered) across reductions, extensions and contractions.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct VertexId(pub usize);

/// Identity of one edge copy. Parallel copies get distinct ids.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct EdgeId(pub usize);

impl fmt::Display for VertexId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

impl fmt::Display for EdgeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum GraphError {
    #[error("vertex {0} is not in the graph")]
    UnknownVertex(VertexId),
    #[error("edge {0} is not in the graph")]
    UnknownEdge(EdgeId),
    #[error("loops are not allowed (edge {edge} at vertex {vertex})")]
    Loop { edge: EdgeId, vertex: VertexId },
    #[error("duplicate id {0}")]
    DuplicateId(usize),
    #[error("the graph has no vertices")]
    Empty,
    #[error("the vertex set argument is empty")]
    EmptySubset,
    #[error("no edge joins {0} and {1}")]
    NoSuchPair(VertexId, VertexId),
}

/// A finite loop-free multigraph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MultiGraph {
    vertices: BTreeSet<VertexId>,
    /// Endpoints stored with the smaller vertex first.
    edges: BTreeMap<EdgeId, (VertexId, VertexId)>,
}

impl MultiGraph {
    /// The one-vertex graph on the given vertex.
    pub fn single_vertex(v: VertexId) -> Self {
        MultiGraph {
            vertices: BTreeSet::from([v]),
            edges: BTreeMap::new(),
        }
    }

    /// Builds a graph on vertices `0..n` with edges numbered `0..pairs.len()`
    /// in order.
    pub fn from_edges(n: usize, pairs: &[(usize, usize)]) -> Result<Self, GraphError> {
        let vertices = (0..n).map(VertexId).collect();
        let edges = pairs
            .iter()
            .enumerate()
            .map(|(i, &(u, v))| (EdgeId(i), (VertexId(u), VertexId(v))))
            .collect();
        Self::from_parts(vertices, edges)
    }

    /// Builds a graph from explicit vertex and edge identities, validating
    /// that endpoints exist and that no edge is a loop.
    pub fn from_parts(
        vertices: BTreeSet<VertexId>,
        edges: BTreeMap<EdgeId, (VertexId, VertexId)>,
    ) -> Result<Self, GraphError> {
        let mut normalised = BTreeMap::new();
        for (id, (u, v)) in edges {
            if u == v {
                return Err(GraphError::Loop { edge: id, vertex: u });
            }
            for w in [u, v] {
                if !vertices.contains(&w) {
                    return Err(GraphError::UnknownVertex(w));
                }
            }
            normalised.insert(id, (u.min(v), u.max(v)));
        }
        Ok(MultiGraph {
            vertices,
            edges: normalised,
        })
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn has_vertex(&self, v: VertexId) -> bool {
        self.vertices.contains(&v)
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.vertices.iter().copied()
    }

    pub fn vertex_set(&self) -> &BTreeSet<VertexId> {
        &self.vertices
    }

    /// Edges with their endpoint pairs, in `EdgeId` order.
    pub fn edges(&self) -> impl Iterator<Item = (EdgeId, (VertexId, VertexId))> + '_ {
        self.edges.iter().map(|(&e, &p)| (e, p))
    }

    pub fn endpoints(&self, e: EdgeId) -> Result<(VertexId, VertexId), GraphError> {
        self.edges.get(&e).copied().ok_or(GraphError::UnknownEdge(e))
    }

    /// Smallest unused vertex id (for appending fresh vertices).
    pub fn fresh_vertex_id(&self) -> VertexId {
        VertexId(self.vertices.iter().last().map_or(0, |v| v.0 + 1))
    }

    /// Smallest unused edge id.
    pub fn fresh_edge_id(&self) -> EdgeId {
        EdgeId(self.edges.keys().last().map_or(0, |e| e.0 + 1))
    }

    /// Number of edges incident to `v`, counting parallel copies.
    pub fn degree(&self, v: VertexId) -> Result<usize, GraphError> {
        if !self.vertices.contains(&v) {
            return Err(GraphError::UnknownVertex(v));
        }
        Ok(self
            .edges
            .values()
            .filter(|&&(a, b)| a == v || b == v)
            .count())
    }

    /// Minimum vertex degree over the whole graph.
    pub fn min_degree(&self) -> Result<usize, GraphError> {
        if self.vertices.is_empty() {
            return Err(GraphError::Empty);
        }
        let mut deg: BTreeMap<VertexId, usize> = self.vertices.iter().map(|&v| (v, 0)).collect();
        for &(u, v) in self.edges.values() {
            *deg.get_mut(&u).unwrap() += 1;
            *deg.get_mut(&v).unwrap() += 1;
        }
        Ok(deg.values().copied().min().unwrap())
    }

    /// Edges incident to `v`, as `(edge, other endpoint)` in id order.
    pub fn incident_edges(&self, v: VertexId) -> Vec<(EdgeId, VertexId)> {
        self.edges
            .iter()
            .filter_map(|(&e, &(a, b))| {
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

    /// Ids of all copies joining `u` and `v`, in id order.
    pub fn edges_between(&self, u: VertexId, v: VertexId) -> Vec<EdgeId> {
        let pair = (u.min(v), u.max(v));
        self.edges
            .iter()
            .filter_map(|(&e, &p)| (p == pair).then_some(e))
            .collect()
    }

    pub fn pair_multiplicity(&self, u: VertexId, v: VertexId) -> usize {
        self.edges_between(u, v).len()
    }

    /// Number of edges, with multiplicity, having both endpoints in `x`.
    pub fn induced_edge_count(&self, x: &BTreeSet<VertexId>) -> Result<usize, GraphError> {
        if x.is_empty() {
            return Err(GraphError::EmptySubset);
        }
        for &v in x {
            if !self.vertices.contains(&v) {
                return Err(GraphError::UnknownVertex(v));
            }
        }
        Ok(self
            .edges
            .values()
            .filter(|(u, v)| x.contains(u) && x.contains(v))
            .count())
    }

    /// Equivalence classes of the relation joining two vertices when some
    /// path between them uses only vertex pairs carrying at least two
    /// parallel copies in the graph minus `excluded`.
    ///
    /// A pair that keeps a single surviving copy does not count as parallel.
    pub fn parallel_components(
        &self,
        excluded: &BTreeSet<EdgeId>,
    ) -> Result<VertexPartition, GraphError> {
        for &e in excluded {
            if !self.edges.contains_key(&e) {
                return Err(GraphError::UnknownEdge(e));
            }
        }
        let mut mult: BTreeMap<(VertexId, VertexId), usize> = BTreeMap::new();
        for (e, &pair) in &self.edges {
            if !excluded.contains(e) {
                *mult.entry(pair).or_insert(0) += 1;
            }
        }
        let mut uf = UnionFind::new(self.vertices.iter().copied());
        for (&(u, v), &m) in &mult {
            if m >= 2 {
                uf.union(u, v);
            }
        }
        Ok(VertexPartition::from_union_find(
            self.vertices.iter().copied(),
            &mut uf,
        ))
    }

    /// Identifies `y` and `z` into a fresh vertex, dropping every `yz` copy
    /// and re-attaching all other edges. Returns the new graph together with
    /// the vertex relabelling.
    pub fn contract_vertex_pair(
        &self,
        y: VertexId,
        z: VertexId,
    ) -> Result<(MultiGraph, BTreeMap<VertexId, VertexId>), GraphError> {
        for w in [y, z] {
            if !self.vertices.contains(&w) {
                return Err(GraphError::UnknownVertex(w));
            }
        }
        if y == z || self.pair_multiplicity(y, z) == 0 {
            return Err(GraphError::NoSuchPair(y, z));
        }
        let w0 = self.fresh_vertex_id();
        let map: BTreeMap<VertexId, VertexId> = self
            .vertices
            .iter()
            .map(|&v| (v, if v == y || v == z { w0 } else { v }))
            .collect();
        let vertices: BTreeSet<VertexId> = map.values().copied().collect();
        let mut edges = BTreeMap::new();
        for (&e, &(u, v)) in &self.edges {
            let (mu, mv) = (map[&u], map[&v]);
            if mu == mv {
                continue; // a yz copy
            }
            edges.insert(e, (mu.min(mv), mu.max(mv)));
        }
        let graph = MultiGraph { vertices, edges };
        Ok((graph, map))
    }

    /// True when the graph minus `excluded` is connected (vacuously true on
    /// a single vertex).
    pub fn is_connected_without(&self, excluded: &BTreeSet<EdgeId>) -> bool {
        let mut uf = UnionFind::new(self.vertices.iter().copied());
        for (e, &(u, v)) in &self.edges {
            if !excluded.contains(e) {
                uf.union(u, v);
            }
        }
        uf.class_count() <= 1
    }

    pub(crate) fn with_vertex(&self, v: VertexId) -> Result<MultiGraph, GraphError> {
        if self.vertices.contains(&v) {
            return Err(GraphError::DuplicateId(v.0));
        }
        let mut g = self.clone();
        g.vertices.insert(v);
        Ok(g)
    }

    pub(crate) fn with_edge(
        &self,
        id: EdgeId,
        u: VertexId,
        v: VertexId,
    ) -> Result<MultiGraph, GraphError> {
        if self.edges.contains_key(&id) {
            return Err(GraphError::DuplicateId(id.0));
        }
        if u == v {
            return Err(GraphError::Loop { edge: id, vertex: u });
        }
        for w in [u, v] {
            if !self.vertices.contains(&w) {
                return Err(GraphError::UnknownVertex(w));
            }
        }
        let mut g = self.clone();
        g.edges.insert(id, (u.min(v), u.max(v)));
        Ok(g)
    }

    pub(crate) fn without_edge(&self, id: EdgeId) -> Result<MultiGraph, GraphError> {
        let mut g = self.clone();
        g.edges.remove(&id).ok_or(GraphError::UnknownEdge(id))?;
        Ok(g)
    }

    /// Removes an isolated vertex.
    pub(crate) fn without_vertex(&self, v: VertexId) -> Result<MultiGraph, GraphError> {
        if !self.vertices.contains(&v) {
            return Err(GraphError::UnknownVertex(v));
        }
        if self.edges.values().any(|&(a, b)| a == v || b == v) {
            return Err(GraphError::UnknownVertex(v));
        }
        let mut g = self.clone();
        g.vertices.remove(&v);
        Ok(g)
    }
}

/// A partition of the vertex set, with class lookup.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexPartition {
    classes: Vec<BTreeSet<VertexId>>,
    class_of: BTreeMap<VertexId, usize>,
}

impl VertexPartition {
    pub(crate) fn from_union_find(
        keys: impl IntoIterator<Item = VertexId>,
        uf: &mut UnionFind<VertexId>,
    ) -> Self {
        let mut by_root: BTreeMap<VertexId, BTreeSet<VertexId>> = BTreeMap::new();
        for v in keys {
            by_root.entry(uf.find(v)).or_default().insert(v);
        }
        let classes: Vec<BTreeSet<VertexId>> = by_root.into_values().collect();
        let mut class_of = BTreeMap::new();
        for (i, class) in classes.iter().enumerate() {
            for &v in class {
                class_of.insert(v, i);
            }
        }
        VertexPartition { classes, class_of }
    }

    pub fn classes(&self) -> &[BTreeSet<VertexId>] {
        &self.classes
    }

    pub fn class_of(&self, v: VertexId) -> Option<&BTreeSet<VertexId>> {
        self.class_of.get(&v).map(|&i| &self.classes[i])
    }

    pub fn same_class(&self, u: VertexId, v: VertexId) -> bool {
        match (self.class_of.get(&u), self.class_of.get(&v)) {
            (Some(a), Some(b)) => a == b,
            _ => false,
        }
    }
}
