//! Vertex extensions and reductions on tree decompositions.
//!
//! An extension appends one vertex and, per tree, deletes a connected edge
//! set F and rewires its span to the new vertex; every tree stays a spanning
//! tree. Reductions invert this, and iterating them drives any decomposition
//! down to the one-vertex graph, yielding a construction sequence whose
//! replay reproduces the original exactly, including vertex and edge ids.

use std::collections::BTreeSet;

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::multigraph::{EdgeId, GraphError, VertexId};
use crate::sparsity::{verify_decomposition, TreeDecomposition};
use crate::union_find::UnionFind;

/// Per-tree part of an extension: the deleted edge set and the edges added
/// at the new vertex. The deleted set has one fewer element than the added
/// set, and its span equals the added neighbours.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TreeMove {
    pub tree: usize,
    /// Deleted edges with their endpoints, as they exist before the step.
    pub deleted: Vec<(EdgeId, (VertexId, VertexId))>,
    /// Edges added from the new vertex, with their ids after the step.
    pub added: Vec<(EdgeId, VertexId)>,
}

/// One d-tree extension, recorded with explicit edge ids so that replay is
/// exact and a geometric pass can reference specific parallel copies.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtensionStep {
    pub new_vertex: VertexId,
    pub per_tree: Vec<TreeMove>,
}

impl ExtensionStep {
    /// Total number of deleted edges.
    pub fn j(&self) -> usize {
        self.per_tree.iter().map(|m| m.deleted.len()).sum()
    }

    pub fn move_for_tree(&self, t: usize) -> Option<&TreeMove> {
        self.per_tree.iter().find(|m| m.tree == t)
    }

    /// Swaps the two tree indices (two-tree steps only).
    pub(crate) fn with_trees_swapped(&self) -> ExtensionStep {
        let mut per_tree: Vec<TreeMove> = self
            .per_tree
            .iter()
            .map(|m| TreeMove {
                tree: 3 - m.tree,
                deleted: m.deleted.clone(),
                added: m.added.clone(),
            })
            .collect();
        per_tree.sort_by_key(|m| m.tree);
        ExtensionStep {
            new_vertex: self.new_vertex,
            per_tree,
        }
    }
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum StepError {
    #[error("graph error: {0}")]
    Graph(#[from] GraphError),
    #[error("the new vertex {0} already exists")]
    StaleVertex(VertexId),
    #[error("step must cover each tree 1..={d} exactly once")]
    BadTreeCover { d: usize },
    #[error("tree {tree}: {added} added edges do not match {deleted} deletions")]
    BadCounts { tree: usize, added: usize, deleted: usize },
    #[error("step deletes {j} edges, allowed at most {max}")]
    TooManyDeletions { j: usize, max: usize },
    #[error("deleted edge {edge} is not in tree {tree} with the recorded endpoints")]
    MissingDeletedEdge { edge: EdgeId, tree: usize },
    #[error("tree {tree}: deleted edges do not form a tree on their span")]
    DeletedSetNotTree { tree: usize },
    #[error("tree {tree}: added neighbours must equal the span of the deleted edges")]
    NeighbourMismatch { tree: usize },
    #[error("added edge id {0} collides with an existing edge")]
    EdgeIdCollision(EdgeId),
    #[error("vertex {vertex} has degree {degree}, outside {lo}..={hi}")]
    DegreeOutOfRange {
        vertex: VertexId,
        degree: usize,
        lo: usize,
        hi: usize,
    },
    #[error("no reducible vertex (graph has a single vertex or is invalid)")]
    NoReducibleVertex,
    #[error("not a valid tree decomposition")]
    InvalidDecomposition,
    #[error("replayed sequence does not reproduce the target")]
    ReplayMismatch,
}

/// Applies one extension, returning the larger decomposition.
pub fn extend(dec: &TreeDecomposition, step: &ExtensionStep) -> Result<TreeDecomposition, StepError> {
    let d = dec.d();
    let g = dec.graph();
    if g.has_vertex(step.new_vertex) {
        return Err(StepError::StaleVertex(step.new_vertex));
    }
    let mut trees_seen: Vec<usize> = step.per_tree.iter().map(|m| m.tree).collect();
    trees_seen.sort_unstable();
    if trees_seen != (1..=d).collect::<Vec<_>>() {
        return Err(StepError::BadTreeCover { d });
    }
    let j = step.j();
    if d > 1 && j > d - 1 {
        return Err(StepError::TooManyDeletions { j, max: d - 1 });
    }

    let mut new_ids: BTreeSet<EdgeId> = BTreeSet::new();
    for mv in &step.per_tree {
        if mv.added.len() != mv.deleted.len() + 1 {
            return Err(StepError::BadCounts {
                tree: mv.tree,
                added: mv.added.len(),
                deleted: mv.deleted.len(),
            });
        }
        // Deleted edges must exist in this tree with the recorded endpoints.
        for &(e, (u, v)) in &mv.deleted {
            let ok = dec.tree_of(e) == Some(mv.tree)
                && g.endpoints(e).is_ok_and(|(a, b)| {
                    (a, b) == (u.min(v), u.max(v))
                });
            if !ok {
                return Err(StepError::MissingDeletedEdge { edge: e, tree: mv.tree });
            }
        }
        // The deleted set must be the edge set of a tree, and the added
        // neighbours exactly its span (any single old vertex when nothing
        // is deleted).
        let span: BTreeSet<VertexId> = mv
            .deleted
            .iter()
            .flat_map(|&(_, (u, v))| [u, v])
            .collect();
        if !mv.deleted.is_empty() {
            if span.len() != mv.deleted.len() + 1 {
                return Err(StepError::DeletedSetNotTree { tree: mv.tree });
            }
            let mut uf = UnionFind::new(span.iter().copied());
            for &(_, (u, v)) in &mv.deleted {
                if !uf.union(u, v) {
                    return Err(StepError::DeletedSetNotTree { tree: mv.tree });
                }
            }
            let nbrs: BTreeSet<VertexId> = mv.added.iter().map(|&(_, v)| v).collect();
            if nbrs != span {
                return Err(StepError::NeighbourMismatch { tree: mv.tree });
            }
        } else {
            let (_, nbr) = mv.added[0];
            if !g.has_vertex(nbr) {
                return Err(StepError::Graph(GraphError::UnknownVertex(nbr)));
            }
        }
        for &(id, nbr) in &mv.added {
            if !g.has_vertex(nbr) {
                return Err(StepError::Graph(GraphError::UnknownVertex(nbr)));
            }
            if g.endpoints(id).is_ok() || !new_ids.insert(id) {
                return Err(StepError::EdgeIdCollision(id));
            }
        }
    }

    let mut graph = g.with_vertex(step.new_vertex)?;
    let mut assignment = dec.assignment().clone();
    for mv in &step.per_tree {
        for &(e, _) in &mv.deleted {
            graph = graph.without_edge(e)?;
            assignment.remove(&e);
        }
        for &(id, nbr) in &mv.added {
            graph = graph.with_edge(id, step.new_vertex, nbr)?;
            assignment.insert(id, mv.tree);
        }
    }
    Ok(TreeDecomposition::replace_parts(graph, d, assignment))
}

/// Lowest-id vertex whose degree lies in `d..=2d-1`; every valid
/// decomposition on at least two vertices has one.
pub fn find_reducible_vertex(dec: &TreeDecomposition) -> Result<VertexId, StepError> {
    let g = dec.graph();
    if g.vertex_count() < 2 {
        return Err(StepError::NoReducibleVertex);
    }
    let d = dec.d();
    g.vertices()
        .find(|&v| {
            let deg = g.degree(v).expect("vertex in graph");
            d <= deg && deg < 2 * d
        })
        .ok_or(StepError::NoReducibleVertex)
}

/// Removes `v`, reconnecting each tree with a path over the former
/// neighbours in ascending vertex order. Returns the smaller decomposition
/// and the step that reinstates `v` exactly (same vertex and edge ids).
pub fn reduce(
    dec: &TreeDecomposition,
    v: VertexId,
) -> Result<(TreeDecomposition, ExtensionStep), StepError> {
    let g = dec.graph();
    let d = dec.d();
    let deg = g.degree(v)?;
    if deg < d || deg > 2 * d - 1 {
        return Err(StepError::DegreeOutOfRange {
            vertex: v,
            degree: deg,
            lo: d,
            hi: 2 * d - 1,
        });
    }
    let mut graph = g.clone();
    let mut assignment = dec.assignment().clone();
    let mut per_tree = Vec::with_capacity(d);
    let mut next_id = g.fresh_edge_id();
    for t in 1..=d {
        let mut nbrs = dec.tree_neighbours(v, t);
        if nbrs.is_empty() {
            return Err(StepError::InvalidDecomposition);
        }
        nbrs.sort_by_key(|&(_, w)| w);
        let added: Vec<(EdgeId, VertexId)> = nbrs.iter().map(|&(e, w)| (e, w)).collect();
        for &(e, _) in &added {
            graph = graph.without_edge(e)?;
            assignment.remove(&e);
        }
        let mut deleted = Vec::new();
        for pair in nbrs.windows(2) {
            let (a, b) = (pair[0].1, pair[1].1);
            let id = next_id;
            next_id = EdgeId(next_id.0 + 1);
            graph = graph.with_edge(id, a, b)?;
            assignment.insert(id, t);
            deleted.push((id, (a.min(b), a.max(b))));
        }
        per_tree.push(TreeMove {
            tree: t,
            deleted,
            added,
        });
    }
    let graph = graph.without_vertex(v)?;
    let smaller = TreeDecomposition::replace_parts(graph, d, assignment);
    let step = ExtensionStep {
        new_vertex: v,
        per_tree,
    };
    Ok((smaller, step))
}

/// A full construction from the one-vertex decomposition to `target`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConstructionSequence {
    pub d: usize,
    /// The vertex of the starting one-vertex graph.
    pub base: VertexId,
    pub steps: Vec<ExtensionStep>,
    pub target: TreeDecomposition,
}

impl ConstructionSequence {
    /// Replays all steps from the base vertex.
    pub fn replay(&self) -> Result<TreeDecomposition, StepError> {
        let mut dec = TreeDecomposition::k1(self.base, self.d);
        for step in &self.steps {
            dec = extend(&dec, step)?;
        }
        Ok(dec)
    }
}

/// Reduces `dec` to a single vertex and returns the inverted step list; the
/// sequence replays to `dec` exactly.
pub fn build_sequence(dec: &TreeDecomposition) -> Result<ConstructionSequence, StepError> {
    build_sequence_salted(dec, 0)
}

/// Like [`build_sequence`] with a rotated choice among the reducible
/// vertices, giving geometrically different (but equally valid) replays.
pub(crate) fn build_sequence_salted(
    dec: &TreeDecomposition,
    salt: u64,
) -> Result<ConstructionSequence, StepError> {
    if !verify_decomposition(dec) {
        return Err(StepError::InvalidDecomposition);
    }
    let d = dec.d();
    let mut current = dec.clone();
    let mut steps = Vec::new();
    while current.graph().vertex_count() > 1 {
        let g = current.graph();
        let candidates: Vec<VertexId> = g
            .vertices()
            .filter(|&v| {
                let deg = g.degree(v).expect("vertex in graph");
                d <= deg && deg < 2 * d
            })
            .collect();
        if candidates.is_empty() {
            return Err(StepError::NoReducibleVertex);
        }
        let v = candidates[salt as usize % candidates.len()];
        let (smaller, step) = reduce(&current, v)?;
        debug_assert!(verify_decomposition(&smaller));
        steps.push(step);
        current = smaller;
    }
    steps.reverse();
    let base = current.graph().vertices().next().expect("one vertex left");
    let seq = ConstructionSequence {
        d: dec.d(),
        base,
        steps,
        target: dec.clone(),
    };
    if seq.replay()? != *dec {
        return Err(StepError::ReplayMismatch);
    }
    Ok(seq)
}

/// Deterministic random valid decomposition on `n` vertices built by seeded
/// random extensions. Parallel copies and repeated-neighbour attachments are
/// produced with substantial probability.
pub fn random_decomposition(n: usize, d: usize, seed: u64) -> TreeDecomposition {
    random_decomposition_with(n, d, seed, true)
}

/// Like [`random_decomposition`] but works parallel copies off as it grows,
/// so the result is a simple (d,d)-tight graph once `n` is at least four
/// (smaller tree decompositions force parallel edges).
pub fn random_simple_decomposition(n: usize, d: usize, seed: u64) -> TreeDecomposition {
    random_decomposition_with(n, d, seed, false)
}

fn random_decomposition_with(n: usize, d: usize, seed: u64, allow_parallel: bool) -> TreeDecomposition {
    assert!(n >= 1 && d >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut dec = TreeDecomposition::k1(VertexId(0), d);
    for k in 1..n {
        let step = random_step(&dec, &mut rng, allow_parallel, VertexId(k));
        dec = extend(&dec, &step).expect("generated step is well-formed");
    }
    debug_assert!(verify_decomposition(&dec));
    dec
}

fn random_step(
    dec: &TreeDecomposition,
    rng: &mut ChaCha8Rng,
    allow_parallel: bool,
    new_vertex: VertexId,
) -> ExtensionStep {
    let d = dec.d();
    let g = dec.graph();
    let verts: Vec<VertexId> = g.vertices().collect();
    // In simple mode, work off existing parallel copies first: each such
    // deletion lowers the number of doubled pairs and the attachments below
    // never create new ones, so the parallels forced on tiny graphs die out.
    let doubled: Vec<(VertexId, VertexId)> = {
        let mut seen = BTreeSet::new();
        g.edges()
            .filter_map(|(_, p)| {
                (g.pair_multiplicity(p.0, p.1) >= 2 && seen.insert(p)).then_some(p)
            })
            .collect()
    };
    let forced_simple_fix = !allow_parallel && !doubled.is_empty();
    let max_j = if d == 1 { 0 } else { d - 1 };
    let j = if forced_simple_fix {
        1
    } else if g.edge_count() == 0 || max_j == 0 || rng.gen_bool(0.45) {
        0
    } else {
        rng.gen_range(1..=max_j)
    };
    // Distribute j deletions over the trees.
    let mut ks = vec![0usize; d];
    let mut forced_delete: Option<(EdgeId, (VertexId, VertexId))> = None;
    if forced_simple_fix {
        let pair = doubled[rng.gen_range(0..doubled.len())];
        let copies = g.edges_between(pair.0, pair.1);
        let e = copies[rng.gen_range(0..copies.len())];
        let t = dec.tree_of(e).expect("assignment total");
        ks[t - 1] = 1;
        forced_delete = Some((e, g.endpoints(e).expect("edge in graph")));
    } else {
        for _ in 0..j {
            loop {
                let t = rng.gen_range(0..d);
                // A tree on n vertices has n-1 edges; keep k below that.
                if ks[t] < g.vertex_count().saturating_sub(1) {
                    ks[t] += 1;
                    break;
                }
            }
        }
    }
    // Grow the deleted sets first so single attachments can avoid (or seek
    // out) their spans.
    let mut deleted_per_tree: Vec<Vec<(EdgeId, (VertexId, VertexId))>> = vec![Vec::new(); d];
    let mut spans: Vec<BTreeSet<VertexId>> = vec![BTreeSet::new(); d];
    for (t0, &k) in ks.iter().enumerate() {
        if k == 0 {
            continue;
        }
        if let Some((e, (u, v))) = forced_delete {
            deleted_per_tree[t0] = vec![(e, (u, v))];
            spans[t0] = BTreeSet::from([u, v]);
            continue;
        }
        let t = t0 + 1;
        let tree_edges = dec.tree_edges(t);
        let start = tree_edges[rng.gen_range(0..tree_edges.len())];
        let mut set: BTreeSet<EdgeId> = BTreeSet::from([start]);
        let mut span: BTreeSet<VertexId> = {
            let (u, v) = g.endpoints(start).expect("tree edge exists");
            BTreeSet::from([u, v])
        };
        while set.len() < k {
            let frontier: Vec<(EdgeId, (VertexId, VertexId))> = tree_edges
                .iter()
                .filter(|e| !set.contains(e))
                .map(|&e| (e, g.endpoints(e).expect("tree edge exists")))
                .filter(|&(_, (u, v))| span.contains(&u) || span.contains(&v))
                .collect();
            let (e, (u, v)) = frontier[rng.gen_range(0..frontier.len())];
            set.insert(e);
            span.insert(u);
            span.insert(v);
        }
        deleted_per_tree[t0] = set
            .iter()
            .map(|&e| (e, g.endpoints(e).expect("tree edge exists")))
            .collect();
        spans[t0] = span;
    }
    // Then pick the single attachments; biased towards span vertices and
    // earlier picks so doubled edges and shared anchors appear often.
    let mut singles: Vec<Option<VertexId>> = vec![None; d];
    let mut taken: BTreeSet<VertexId> = spans.iter().flatten().copied().collect();
    for (t0, &k) in ks.iter().enumerate() {
        if k != 0 {
            continue;
        }
        let pick = if allow_parallel {
            let pool: Vec<VertexId> = taken.iter().copied().collect();
            if !pool.is_empty() && rng.gen_bool(0.5) {
                pool[rng.gen_range(0..pool.len())]
            } else {
                verts[rng.gen_range(0..verts.len())]
            }
        } else {
            let free: Vec<VertexId> = verts.iter().copied().filter(|v| !taken.contains(v)).collect();
            if free.is_empty() {
                // Unavoidable on one or two old vertices.
                verts[rng.gen_range(0..verts.len())]
            } else {
                free[rng.gen_range(0..free.len())]
            }
        };
        taken.insert(pick);
        singles[t0] = Some(pick);
    }
    let mut next_id = g.fresh_edge_id();
    let mut fresh = || {
        let id = next_id;
        next_id = EdgeId(next_id.0 + 1);
        id
    };
    let per_tree = (0..d)
        .map(|t0| {
            let added = if let Some(pick) = singles[t0] {
                vec![(fresh(), pick)]
            } else {
                spans[t0].iter().map(|&w| (fresh(), w)).collect()
            };
            TreeMove {
                tree: t0 + 1,
                deleted: deleted_per_tree[t0].clone(),
                added,
            }
        })
        .collect();
    ExtensionStep {
        new_vertex,
        per_tree,
    }
}
