//! Mirror-symmetric decompositions and their reflection-symmetric
//! placements.
//!
//! A symmetric decomposition carries an involutive automorphism that
//! preserves both trees and fixes no edge; away from the one-vertex base it
//! then fixes exactly one vertex, of even degree at least four. Vertices are
//! added and removed in mirror orbits of two, giving a construction scheme
//! whose geometric replay produces placements that commute exactly with
//! reflection in the vertical axis: the mirror image of every vertex is the
//! image of its partner, as an identity of rationals rather than up to
//! tolerance.

use std::collections::{BTreeMap, BTreeSet};

use num_traits::Zero;
use thiserror::Error;

use crate::geometry::{Axis, Placement, Point, Rational};
use crate::henneberg::{extend, reduce, ExtensionStep, StepError};
use crate::multigraph::{EdgeId, GraphError, MultiGraph, VertexId, VertexPartition};
use crate::realise2d::{
    self, one_ext_engine, one_ext_engine_mirrored, one_ext_shape, one_ext_shape_swapped,
    realises, still_collinear, still_collinear_mirrored, zero_ext_candidates, EngineOutcome,
    OneExtShape, RealiseError,
};
use crate::sparsity::{verify_decomposition, TreeDecomposition};
use crate::union_find::UnionFind;
use crate::verify::{framework_colouring, FrameworkColouring};

use rand::prelude::*;
use rand_chacha::ChaCha8Rng;

/// Which clause of the symmetric-decomposition definition failed.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum SymDiagnostic {
    #[error("symmetric decompositions are two-tree objects, got d = {0}")]
    NotTwoTrees(usize),
    #[error("the underlying tree decomposition is invalid")]
    InvalidDecomposition,
    #[error("the involution is not defined on vertex {0} (or maps outside the graph)")]
    NotTotal(VertexId),
    #[error("map is not an involution at vertex {0}")]
    NotInvolution(VertexId),
    #[error("the involution must be nontrivial on more than one vertex")]
    Trivial,
    #[error("tree {tree} is not preserved: the image of {u}-{v} is missing")]
    TreeNotPreserved { tree: usize, u: VertexId, v: VertexId },
    #[error("edge {0} is fixed by the involution")]
    FixedEdge(EdgeId),
    #[error("expected exactly one fixed vertex, found {0:?}")]
    FixedVertices(Vec<VertexId>),
    #[error("fixed vertex {vertex} has degree {degree}, which must be even and at least 4")]
    FixedVertexDegree { vertex: VertexId, degree: usize },
}

#[derive(Debug, Error)]
pub enum SymmetryError {
    #[error(transparent)]
    Diagnostic(#[from] SymDiagnostic),
    #[error("graph error: {0}")]
    Graph(#[from] GraphError),
    #[error("step error: {0}")]
    Step(#[from] StepError),
    #[error("realisation error: {0}")]
    Realise(#[from] RealiseError),
    #[error("the one-vertex decomposition cannot be reduced")]
    IsBase,
    #[error("no non-fixed vertex of degree 2 or 3 exists")]
    NoReducibleOrbit,
    #[error("step halves are not mirror images of each other")]
    MirrorMismatch,
    #[error("step would join the new orbit {0} and {1}")]
    OrbitEdge(VertexId, VertexId),
    #[error("the tied neighbour pair maps to itself, contradicting the tree structure")]
    GuardViolated,
    #[error("contracting the edge orbit left the symmetric structure invalid: {0}")]
    ContractionNotSymmetric(SymDiagnostic),
    #[error("replayed symmetric sequence does not reproduce the target")]
    ReplayMismatch,
    #[error("candidate search exhausted while {0}")]
    Search(&'static str),
}

/// A two-tree decomposition with a tree-preserving involution and no fixed
/// edges. Built through [`validate_symmetric`], so every value of this type
/// satisfies the full clause list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetricDecomposition {
    dec: TreeDecomposition,
    theta: BTreeMap<VertexId, VertexId>,
    edge_theta: BTreeMap<EdgeId, EdgeId>,
    fixed: VertexId,
}

impl SymmetricDecomposition {
    /// The formal one-vertex base with the trivial involution.
    pub fn k1(v: VertexId) -> Self {
        SymmetricDecomposition {
            dec: TreeDecomposition::k1(v, 2),
            theta: BTreeMap::from([(v, v)]),
            edge_theta: BTreeMap::new(),
            fixed: v,
        }
    }

    pub fn dec(&self) -> &TreeDecomposition {
        &self.dec
    }

    pub fn graph(&self) -> &MultiGraph {
        self.dec.graph()
    }

    pub fn theta(&self) -> &BTreeMap<VertexId, VertexId> {
        &self.theta
    }

    pub fn edge_theta(&self) -> &BTreeMap<EdgeId, EdgeId> {
        &self.edge_theta
    }

    /// The unique fixed vertex (the base vertex on one vertex).
    pub fn fixed_vertex(&self) -> VertexId {
        self.fixed
    }

    pub fn apply(&self, v: VertexId) -> VertexId {
        self.theta[&v]
    }

    pub fn apply_edge(&self, e: EdgeId) -> EdgeId {
        self.edge_theta[&e]
    }
}

/// Checks every clause of the symmetric-decomposition definition and builds
/// the induced edge involution. The one-vertex graph is accepted with the
/// trivial involution.
pub fn validate_symmetric(
    dec: &TreeDecomposition,
    theta: &BTreeMap<VertexId, VertexId>,
) -> Result<SymmetricDecomposition, SymDiagnostic> {
    if dec.d() != 2 {
        return Err(SymDiagnostic::NotTwoTrees(dec.d()));
    }
    if !verify_decomposition(dec) {
        return Err(SymDiagnostic::InvalidDecomposition);
    }
    let g = dec.graph();
    for v in g.vertices() {
        let Some(&sv) = theta.get(&v) else {
            return Err(SymDiagnostic::NotTotal(v));
        };
        if !g.has_vertex(sv) {
            return Err(SymDiagnostic::NotTotal(v));
        }
        if theta.get(&sv) != Some(&v) {
            return Err(SymDiagnostic::NotInvolution(v));
        }
    }
    if theta.len() != g.vertex_count() {
        let stray = theta.keys().find(|v| !g.has_vertex(**v)).copied();
        return Err(SymDiagnostic::NotTotal(stray.unwrap_or(VertexId(0))));
    }
    if g.vertex_count() == 1 {
        let v = g.vertices().next().expect("one vertex");
        return Ok(SymmetricDecomposition {
            dec: dec.clone(),
            theta: theta.clone(),
            edge_theta: BTreeMap::new(),
            fixed: v,
        });
    }
    if g.vertices().all(|v| theta[&v] == v) {
        return Err(SymDiagnostic::Trivial);
    }
    // Build the induced edge involution tree by tree: each tree holds at
    // most one copy per vertex pair, so the image copy is determined.
    let mut edge_theta = BTreeMap::new();
    for (e, (u, v)) in g.edges() {
        let t = dec.tree_of(e).expect("assignment total");
        let (iu, iv) = (theta[&u], theta[&v]);
        let image = g
            .edges_between(iu, iv)
            .into_iter()
            .find(|&f| dec.tree_of(f) == Some(t));
        match image {
            None => return Err(SymDiagnostic::TreeNotPreserved { tree: t, u, v }),
            Some(f) if f == e => return Err(SymDiagnostic::FixedEdge(e)),
            Some(f) => {
                edge_theta.insert(e, f);
            }
        }
    }
    debug_assert!(edge_theta.iter().all(|(&e, &f)| edge_theta.get(&f) == Some(&e)));
    let fixed: Vec<VertexId> = g.vertices().filter(|&v| theta[&v] == v).collect();
    if fixed.len() != 1 {
        return Err(SymDiagnostic::FixedVertices(fixed));
    }
    let v0 = fixed[0];
    let degree = g.degree(v0).expect("vertex in graph");
    if !degree.is_multiple_of(2) || degree < 4 {
        return Err(SymDiagnostic::FixedVertexDegree { vertex: v0, degree });
    }
    Ok(SymmetricDecomposition {
        dec: dec.clone(),
        theta: theta.clone(),
        edge_theta,
        fixed: v0,
    })
}

/// One symmetric extension: two mirror-image vertex extensions applied in
/// order (`first`, then `second`).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SymmetricStep {
    pub first: ExtensionStep,
    pub second: ExtensionStep,
}

impl SymmetricStep {
    /// Edges deleted per half (0 or 1 for two trees).
    pub fn j(&self) -> usize {
        self.first.j()
    }

    /// The added orbit, in application order.
    pub fn vertices(&self) -> (VertexId, VertexId) {
        (self.first.new_vertex, self.second.new_vertex)
    }
}

/// Applies a symmetric extension, checking that the two halves are exact
/// mirror images and that the result is again a symmetric decomposition.
pub fn sym_extend(
    sd: &SymmetricDecomposition,
    step: &SymmetricStep,
) -> Result<SymmetricDecomposition, SymmetryError> {
    let (v, sv) = step.vertices();
    if v == sv {
        return Err(SymmetryError::OrbitEdge(v, sv));
    }
    if step.first.per_tree.len() != step.second.per_tree.len() {
        return Err(SymmetryError::MirrorMismatch);
    }
    for (m1, m2) in step.first.per_tree.iter().zip(&step.second.per_tree) {
        if m1.tree != m2.tree {
            return Err(SymmetryError::MirrorMismatch);
        }
        for &(_, nbr) in m1.added.iter().chain(&m2.added) {
            if nbr == v || nbr == sv {
                return Err(SymmetryError::OrbitEdge(v, sv));
            }
        }
        let mut image: Vec<VertexId> = m1
            .added
            .iter()
            .map(|&(_, nbr)| {
                sd.theta()
                    .get(&nbr)
                    .copied()
                    .ok_or(SymmetryError::Diagnostic(SymDiagnostic::NotTotal(nbr)))
            })
            .collect::<Result<_, _>>()?;
        let mut mirror: Vec<VertexId> = m2.added.iter().map(|&(_, nbr)| nbr).collect();
        image.sort_unstable();
        mirror.sort_unstable();
        if image != mirror {
            return Err(SymmetryError::MirrorMismatch);
        }
        let image_deleted: BTreeSet<EdgeId> = m1
            .deleted
            .iter()
            .map(|&(e, _)| {
                sd.edge_theta()
                    .get(&e)
                    .copied()
                    .ok_or(SymmetryError::MirrorMismatch)
            })
            .collect::<Result<_, _>>()?;
        let mirror_deleted: BTreeSet<EdgeId> = m2.deleted.iter().map(|&(e, _)| e).collect();
        if image_deleted != mirror_deleted {
            return Err(SymmetryError::MirrorMismatch);
        }
    }
    let mid = extend(sd.dec(), &step.first)?;
    let full = extend(&mid, &step.second)?;
    let mut theta = sd.theta().clone();
    theta.insert(v, sv);
    theta.insert(sv, v);
    Ok(validate_symmetric(&full, &theta)?)
}

/// Removes the lowest-id non-fixed orbit of degree 2 or 3 by two mirror
/// reductions, returning the smaller symmetric decomposition and the exact
/// inverse step.
pub fn sym_reduce(
    sd: &SymmetricDecomposition,
) -> Result<(SymmetricDecomposition, SymmetricStep), SymmetryError> {
    sym_reduce_salted(sd, 0)
}

/// Like [`sym_reduce`] with a rotated choice among the reducible orbits.
pub(crate) fn sym_reduce_salted(
    sd: &SymmetricDecomposition,
    salt: u64,
) -> Result<(SymmetricDecomposition, SymmetricStep), SymmetryError> {
    let g = sd.graph();
    if g.vertex_count() == 1 {
        return Err(SymmetryError::IsBase);
    }
    let candidates: Vec<VertexId> = g
        .vertices()
        .filter(|&v| {
            sd.apply(v) != v && {
                let deg = g.degree(v).expect("vertex in graph");
                (2..=3).contains(&deg)
            }
        })
        .collect();
    if candidates.is_empty() {
        return Err(SymmetryError::NoReducibleOrbit);
    }
    let v = candidates[salt as usize % candidates.len()];
    let sv = sd.apply(v);
    if g.degree(v)? == 3 {
        // The doubly-met tree reconnects its two neighbours; that pair can
        // never be its own mirror image, or the tree would close a cycle
        // through the orbit.
        let t = (1..=2)
            .find(|&t| sd.dec().degree_in_tree(v, t) == 2)
            .expect("degree 3 splits 2 + 1");
        let nbrs: Vec<VertexId> = sd.dec().tree_neighbours(v, t).iter().map(|&(_, w)| w).collect();
        let pair: BTreeSet<VertexId> = nbrs.iter().copied().collect();
        let image: BTreeSet<VertexId> = nbrs.iter().map(|&w| sd.apply(w)).collect();
        if pair == image {
            return Err(SymmetryError::GuardViolated);
        }
    }
    let (mid, step_v) = reduce(sd.dec(), v)?;
    let (small, step_sv) = reduce(&mid, sv)?;
    let theta: BTreeMap<VertexId, VertexId> = sd
        .theta()
        .iter()
        .filter(|(&w, _)| w != v && w != sv)
        .map(|(&w, &sw)| (w, sw))
        .collect();
    let smaller = validate_symmetric(&small, &theta)?;
    Ok((
        smaller,
        SymmetricStep {
            first: step_sv,
            second: step_v,
        },
    ))
}

/// A symmetric construction from the one-vertex base.
#[derive(Debug, Clone)]
pub struct SymSequence {
    pub base: VertexId,
    pub steps: Vec<SymmetricStep>,
    pub target: SymmetricDecomposition,
}

/// Reduces to the base and returns the inverted step list; replaying it
/// reproduces the decomposition and its involution exactly.
pub fn build_sym_sequence(sd: &SymmetricDecomposition) -> Result<SymSequence, SymmetryError> {
    build_sym_sequence_salted(sd, 0)
}

pub(crate) fn build_sym_sequence_salted(
    sd: &SymmetricDecomposition,
    salt: u64,
) -> Result<SymSequence, SymmetryError> {
    let mut current = sd.clone();
    let mut steps = Vec::new();
    while current.graph().vertex_count() > 1 {
        let (smaller, step) = sym_reduce_salted(&current, salt)?;
        steps.push(step);
        current = smaller;
    }
    steps.reverse();
    let base = current.fixed_vertex();
    let mut replay = SymmetricDecomposition::k1(base);
    for step in &steps {
        replay = sym_extend(&replay, step)?;
    }
    if replay != *sd {
        return Err(SymmetryError::ReplayMismatch);
    }
    Ok(SymSequence {
        base,
        steps,
        target: sd.clone(),
    })
}

/// Partition joining vertices to their mirror partners and through parallel
/// copies of the graph minus `excluded` (normally one edge orbit). Classes
/// are unions of mirror orbits of plain parallel classes.
pub fn sym_parallel_components(
    g: &MultiGraph,
    theta: &BTreeMap<VertexId, VertexId>,
    excluded: &BTreeSet<EdgeId>,
) -> Result<VertexPartition, GraphError> {
    let plain = g.parallel_components(excluded)?;
    let mut uf = UnionFind::new(g.vertices());
    for (&v, &sv) in theta {
        uf.union(v, sv);
    }
    for class in plain.classes() {
        let mut it = class.iter();
        if let Some(&first) = it.next() {
            for &v in it {
                uf.union(first, v);
            }
        }
    }
    Ok(VertexPartition::from_union_find(g.vertices(), &mut uf))
}

/// A placement whose reflection through the vertical axis permutes the
/// vertices exactly as the involution does.
#[derive(Debug, Clone)]
pub struct CsRealisation {
    pub placement: Placement,
    /// The mirror axis of the representation (the vertical axis).
    pub axis: Axis,
    pub colouring: FrameworkColouring,
}

/// Exact reflection equation: the partner of every vertex sits at the
/// mirror image of its point.
pub fn reflection_equation_holds(pl: &Placement, theta: &BTreeMap<VertexId, VertexId>) -> bool {
    theta.iter().all(|(&v, &sv)| {
        match (pl.point(v), pl.point(sv)) {
            (Some(p), Some(q)) => *q == p.reflect(Axis::Y),
            _ => false,
        }
    })
}

/// Builds a reflection-symmetric placement realising the decomposition, by
/// replaying the symmetric construction with the asymmetric placement rules
/// and mirroring each new orbit.
pub fn realise_cs(sd: &SymmetricDecomposition) -> Result<CsRealisation, SymmetryError> {
    let mut last = None;
    for salt in 0..8 {
        match realise_cs_salted(sd, salt) {
            Ok(res) => return Ok(res),
            Err(e @ (SymmetryError::Search(_) | SymmetryError::Realise(RealiseError::SearchExhausted(_)))) => {
                last = Some(e)
            }
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt ran"))
}

fn realise_cs_salted(sd: &SymmetricDecomposition, salt: u64) -> Result<CsRealisation, SymmetryError> {
    let seq = build_sym_sequence_salted(sd, salt)?;
    let mut placement = Placement::new();
    placement.insert(seq.base, Point::origin());
    let mut current = SymmetricDecomposition::k1(seq.base);
    for step in &seq.steps {
        let after = sym_extend(&current, step)?;
        placement = match step.j() {
            0 => place_sym_0ext(&placement, &current, step, &after)?,
            1 => place_sym_1ext(&placement, &current, step, &after)?,
            _ => return Err(SymmetryError::MirrorMismatch),
        };
        debug_assert!(realises(after.dec(), &placement));
        debug_assert!(reflection_equation_holds(&placement, after.theta()));
        current = after;
    }
    let colouring = framework_colouring(sd.graph(), &placement)
        .map_err(|_| SymmetryError::Search("colouring the finished placement"))?;
    Ok(CsRealisation {
        placement,
        axis: Axis::Y,
        colouring,
    })
}

fn place_sym_0ext(
    pl: &Placement,
    before: &SymmetricDecomposition,
    step: &SymmetricStep,
    after: &SymmetricDecomposition,
) -> Result<Placement, SymmetryError> {
    let (v, sv) = step.vertices();
    let x = step
        .first
        .move_for_tree(1)
        .ok_or(SymmetryError::MirrorMismatch)?
        .added[0]
        .1;
    let y = step
        .first
        .move_for_tree(2)
        .ok_or(SymmetryError::MirrorMismatch)?
        .added[0]
        .1;
    let px = pl.point(x).ok_or(RealiseError::MissingCoordinates(x))?;
    let py = pl.point(y).ok_or(RealiseError::MissingCoordinates(y))?;
    let _ = before;
    for cand in zero_ext_candidates(px, py) {
        if cand.x.is_zero() {
            continue; // the new vertex may not sit on the mirror axis
        }
        let mut full = pl.clone();
        full.insert(sv, cand.reflect(Axis::Y));
        full.insert(v, cand);
        if realises(after.dec(), &full) && reflection_equation_holds(&full, after.theta()) {
            return Ok(full);
        }
    }
    Err(SymmetryError::Search("placing a symmetric degree-2 orbit"))
}

fn place_sym_1ext(
    pl: &Placement,
    before: &SymmetricDecomposition,
    step: &SymmetricStep,
    after: &SymmetricDecomposition,
) -> Result<Placement, SymmetryError> {
    let (v, sv) = step.vertices();
    let doubled_tree = step
        .first
        .per_tree
        .iter()
        .find(|m| m.deleted.len() == 1)
        .map(|m| m.tree)
        .ok_or(SymmetryError::MirrorMismatch)?;
    let mirrored = doubled_tree == 1;
    let shape = if mirrored {
        one_ext_shape_swapped(&step.first)?
    } else {
        one_ext_shape(&step.first)?
    };
    let excluded: BTreeSet<EdgeId> =
        BTreeSet::from([shape.deleted, before.apply_edge(shape.deleted)]);
    let mut current = pl.clone();
    for _ in 0..40 {
        let classes = sym_parallel_components(before.graph(), before.theta(), &excluded)?;
        let accept = |base: &Placement, vp: &Point| -> Option<Placement> {
            if vp.x.is_zero() {
                return None;
            }
            let mut cand = base.clone();
            cand.insert(sv, vp.reflect(Axis::Y));
            cand.insert(v, vp.clone());
            (realises(after.dec(), &cand) && reflection_equation_holds(&cand, after.theta()))
                .then_some(cand)
        };
        let outcome = if mirrored {
            one_ext_engine_mirrored(&current, before.dec(), &shape, &classes, &accept)?
        } else {
            one_ext_engine(&current, before.dec(), &shape, &classes, &accept)?
        };
        match outcome {
            EngineOutcome::Placed { placement, .. } => return Ok(placement),
            EngineOutcome::NeedsContraction { y, z } => {
                current = match sym_rebuild_after_contraction(
                    before, &shape, &excluded, y, z, mirrored,
                ) {
                    Ok(rebuilt) => rebuilt,
                    Err(SymmetryError::Search(_)) => {
                        sym_escape_collinearity(before, &shape, &current, y, z, mirrored)?
                    }
                    Err(other) => return Err(other),
                };
            }
        }
    }
    Err(SymmetryError::Search("resolving symmetric collinear contractions"))
}

fn sym_still_collinear(pl: &Placement, shape: &OneExtShape, mirrored: bool) -> bool {
    if mirrored {
        still_collinear_mirrored(pl, shape)
    } else {
        still_collinear(pl, shape)
    }
}

/// Contracts both mirror copies of the tied pair, realises the smaller
/// symmetric decomposition recursively, and splits the merged vertices back
/// apart with mirror-image diagonal offsets applied to whole parallel
/// blocks.
fn sym_rebuild_after_contraction(
    before: &SymmetricDecomposition,
    shape: &OneExtShape,
    excluded: &BTreeSet<EdgeId>,
    y: VertexId,
    z: VertexId,
    mirrored: bool,
) -> Result<Placement, SymmetryError> {
    let theta = before.theta();
    let (sy, sz) = (theta[&y], theta[&z]);
    let (dec1, map1) = before.dec().contract_parallel_pair(y, z)?;
    let (dec2, map2) = dec1.contract_parallel_pair(map1[&sy], map1[&sz])?;
    let project = |w: VertexId| map2[&map1[&w]];
    let mut theta_o = BTreeMap::new();
    for w in before.graph().vertices() {
        theta_o.insert(project(w), project(theta[&w]));
    }
    let sd_o = validate_symmetric(&dec2, &theta_o)
        .map_err(SymmetryError::ContractionNotSymmetric)?;
    let sub = realise_cs(&sd_o)?;
    // The upper endpoint's plain parallel block moves out along the
    // diagonal; its mirror block moves along the mirrored diagonal. A block
    // meeting its own mirror image leaves no symmetric direction, so bail
    // out to the sideways escape.
    let plain = before.graph().parallel_components(excluded)?;
    let block: BTreeSet<VertexId> = plain
        .class_of(y)
        .cloned()
        .unwrap_or_else(|| BTreeSet::from([y]));
    let mirror_block: BTreeSet<VertexId> = block.iter().map(|&w| theta[&w]).collect();
    if block.intersection(&mirror_block).next().is_some() {
        return Err(SymmetryError::Search(
            "splitting a mirror-closed block after contraction",
        ));
    }
    let mut eps = crate::geometry::rat_int(1);
    for _ in 0..64 {
        let mut cand = Placement::new();
        for w in before.graph().vertices() {
            let base = sub
                .placement
                .point(project(w))
                .ok_or(RealiseError::MissingCoordinates(w))?
                .clone();
            let p = if block.contains(&w) {
                base.offset(&eps, &eps)
            } else if mirror_block.contains(&w) {
                base.offset(&-eps.clone(), &eps)
            } else {
                base
            };
            cand.insert(w, p);
        }
        if realises(before.dec(), &cand)
            && reflection_equation_holds(&cand, theta)
            && !sym_still_collinear(&cand, shape, mirrored)
        {
            return Ok(cand);
        }
        eps /= crate::geometry::rat_int(2);
    }
    Err(SymmetryError::Search("rebuilding after a symmetric contraction"))
}

/// Mirror-symmetric sideways nudge of the anchor's parallel block and its
/// reflection, clearing the collinearity without touching any tie.
fn sym_escape_collinearity(
    before: &SymmetricDecomposition,
    shape: &OneExtShape,
    pl: &Placement,
    y: VertexId,
    z: VertexId,
    mirrored: bool,
) -> Result<Placement, SymmetryError> {
    let theta = before.theta();
    let plain = before.graph().parallel_components(&BTreeSet::new())?;
    let block: BTreeSet<VertexId> = plain
        .class_of(shape.x)
        .cloned()
        .unwrap_or_else(|| BTreeSet::from([shape.x]));
    let mirror_block: BTreeSet<VertexId> = block.iter().map(|&w| theta[&w]).collect();
    if block.intersection(&mirror_block).next().is_some() {
        return Err(SymmetryError::Search(
            "escaping a collinear anchor in a mirror-closed block",
        ));
    }
    for w in [y, z, theta[&y], theta[&z]] {
        if block.contains(&w) || mirror_block.contains(&w) {
            return Err(SymmetryError::Search(
                "escaping a collinear anchor chained to the tied orbit",
            ));
        }
    }
    let bound = realise2d::safe_epsilon(pl, before.graph(), &BTreeSet::new())?;
    let mut eps = crate::geometry::dyadic_floor_pow2(&bound.min(crate::geometry::rat_int(1)))
        / crate::geometry::rat_int(2);
    for _ in 0..64 {
        let shifted = pl.translate_class(&block, &eps, &Rational::zero());
        let cand = shifted.translate_class(&mirror_block, &-eps.clone(), &Rational::zero());
        if realises(before.dec(), &cand)
            && reflection_equation_holds(&cand, theta)
            && !sym_still_collinear(&cand, shape, mirrored)
        {
            return Ok(cand);
        }
        eps /= crate::geometry::rat_int(2);
    }
    Err(SymmetryError::Search("escaping a symmetric collinear anchor"))
}

/// Deterministic random symmetric decomposition on `2·n_orbits + 1`
/// vertices, built by seeded random symmetric extensions.
pub fn random_symmetric_decomposition(n_orbits: usize, seed: u64) -> SymmetricDecomposition {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut sd = SymmetricDecomposition::k1(VertexId(0));
    for k in 0..n_orbits {
        let step = random_symmetric_step(&sd, &mut rng, VertexId(2 * k + 1), VertexId(2 * k + 2));
        sd = sym_extend(&sd, &step).expect("generated symmetric step is well-formed");
    }
    sd
}

fn random_symmetric_step(
    sd: &SymmetricDecomposition,
    rng: &mut ChaCha8Rng,
    v: VertexId,
    sv: VertexId,
) -> SymmetricStep {
    use crate::henneberg::TreeMove;
    let g = sd.graph();
    let verts: Vec<VertexId> = g.vertices().collect();
    let mut next = g.fresh_edge_id();
    let mut fresh = || {
        let id = next;
        next = EdgeId(next.0 + 1);
        id
    };
    let zero_ext = g.edge_count() == 0 || rng.gen_bool(0.5);
    if zero_ext {
        let a = verts[rng.gen_range(0..verts.len())];
        let b = if rng.gen_bool(0.4) {
            a
        } else {
            verts[rng.gen_range(0..verts.len())]
        };
        let first = ExtensionStep {
            new_vertex: v,
            per_tree: vec![
                TreeMove { tree: 1, deleted: vec![], added: vec![(fresh(), a)] },
                TreeMove { tree: 2, deleted: vec![], added: vec![(fresh(), b)] },
            ],
        };
        let second = ExtensionStep {
            new_vertex: sv,
            per_tree: vec![
                TreeMove { tree: 1, deleted: vec![], added: vec![(fresh(), sd.apply(a))] },
                TreeMove { tree: 2, deleted: vec![], added: vec![(fresh(), sd.apply(b))] },
            ],
        };
        return SymmetricStep { first, second };
    }
    let edges: Vec<EdgeId> = g.edges().map(|(e, _)| e).collect();
    let e = edges[rng.gen_range(0..edges.len())];
    let (p, q) = g.endpoints(e).expect("edge in graph");
    let t = sd.dec().tree_of(e).expect("assignment total");
    let other = 3 - t;
    let se = sd.apply_edge(e);
    let (sp, sq) = g.endpoints(se).expect("edge in graph");
    let x = if rng.gen_bool(0.35) {
        if rng.gen_bool(0.5) {
            p
        } else {
            q
        }
    } else {
        verts[rng.gen_range(0..verts.len())]
    };
    let make = |vertex: VertexId,
                del: (EdgeId, (VertexId, VertexId)),
                aa: VertexId,
                bb: VertexId,
                anchor: VertexId,
                ids: [EdgeId; 3]| {
        let mut per_tree = vec![
            TreeMove {
                tree: t,
                deleted: vec![del],
                added: vec![(ids[0], aa), (ids[1], bb)],
            },
            TreeMove { tree: other, deleted: vec![], added: vec![(ids[2], anchor)] },
        ];
        per_tree.sort_by_key(|m| m.tree);
        ExtensionStep {
            new_vertex: vertex,
            per_tree,
        }
    };
    let first = make(v, (e, (p, q)), p, q, x, [fresh(), fresh(), fresh()]);
    let second = make(
        sv,
        (se, (sp, sq)),
        sd.apply(p),
        sd.apply(q),
        sd.apply(x),
        [fresh(), fresh(), fresh()],
    );
    SymmetricStep { first, second }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::verify::is_realisation_of;
    use num_traits::Signed;

    fn three_vertex() -> SymmetricDecomposition {
        let (dec, theta) = fixtures::three_vertex_symmetric();
        validate_symmetric(&dec, &theta).expect("fixture is symmetric")
    }

    #[test]
    fn validate_three_vertex_example() {
        let sd = three_vertex();
        assert_eq!(sd.fixed_vertex(), VertexId(0));
        assert_eq!(sd.apply(VertexId(1)), VertexId(2));
        assert_eq!(sd.apply_edge(EdgeId(0)), EdgeId(2));
        assert_eq!(sd.apply_edge(EdgeId(1)), EdgeId(3));
    }

    #[test]
    fn identity_involution_rejected() {
        let (dec, _) = fixtures::three_vertex_symmetric();
        let id = dec.graph().vertices().map(|v| (v, v)).collect();
        assert_eq!(validate_symmetric(&dec, &id), Err(SymDiagnostic::Trivial));
    }

    #[test]
    fn fixed_edges_rejected() {
        // A doubled pair swapped by the involution: both trees are
        // preserved, but each copy maps to itself.
        let g = MultiGraph::from_edges(2, &[(0, 1), (0, 1)]).unwrap();
        let dec = TreeDecomposition::new(
            g,
            2,
            BTreeMap::from([(EdgeId(0), 1), (EdgeId(1), 2)]),
        )
        .unwrap();
        let swap = BTreeMap::from([(VertexId(0), VertexId(1)), (VertexId(1), VertexId(0))]);
        assert_eq!(
            validate_symmetric(&dec, &swap),
            Err(SymDiagnostic::FixedEdge(EdgeId(0)))
        );
    }

    #[test]
    fn broken_tree_preservation_detected() {
        // The wheel's half-turn is an automorphism fixing no edge, but it
        // does not preserve the centre decomposition's trees.
        let dec = fixtures::w5_centre_decomposition();
        let theta = BTreeMap::from([
            (VertexId(0), VertexId(0)),
            (VertexId(1), VertexId(4)),
            (VertexId(4), VertexId(1)),
            (VertexId(2), VertexId(3)),
            (VertexId(3), VertexId(2)),
        ]);
        assert!(matches!(
            validate_symmetric(&dec, &theta),
            Err(SymDiagnostic::TreeNotPreserved { .. })
        ));
    }

    #[test]
    fn extend_base_to_three_vertex() {
        use crate::henneberg::TreeMove;
        let base = SymmetricDecomposition::k1(VertexId(0));
        let step = SymmetricStep {
            first: ExtensionStep {
                new_vertex: VertexId(1),
                per_tree: vec![
                    TreeMove { tree: 1, deleted: vec![], added: vec![(EdgeId(0), VertexId(0))] },
                    TreeMove { tree: 2, deleted: vec![], added: vec![(EdgeId(1), VertexId(0))] },
                ],
            },
            second: ExtensionStep {
                new_vertex: VertexId(2),
                per_tree: vec![
                    TreeMove { tree: 1, deleted: vec![], added: vec![(EdgeId(2), VertexId(0))] },
                    TreeMove { tree: 2, deleted: vec![], added: vec![(EdgeId(3), VertexId(0))] },
                ],
            },
        };
        let sd = sym_extend(&base, &step).unwrap();
        assert_eq!(sd.dec(), three_vertex().dec());
        assert_eq!(sd.theta(), three_vertex().theta());
    }

    #[test]
    fn orbit_edges_rejected() {
        use crate::henneberg::TreeMove;
        let sd = three_vertex();
        // Second half tries to join the new vertex to its partner.
        let step = SymmetricStep {
            first: ExtensionStep {
                new_vertex: VertexId(3),
                per_tree: vec![
                    TreeMove { tree: 1, deleted: vec![], added: vec![(EdgeId(4), VertexId(1))] },
                    TreeMove { tree: 2, deleted: vec![], added: vec![(EdgeId(5), VertexId(1))] },
                ],
            },
            second: ExtensionStep {
                new_vertex: VertexId(4),
                per_tree: vec![
                    TreeMove { tree: 1, deleted: vec![], added: vec![(EdgeId(6), VertexId(3))] },
                    TreeMove { tree: 2, deleted: vec![], added: vec![(EdgeId(7), VertexId(2))] },
                ],
            },
        };
        assert!(matches!(
            sym_extend(&sd, &step),
            Err(SymmetryError::OrbitEdge(_, _))
        ));
    }

    #[test]
    fn reduce_three_vertex_to_base() {
        let sd = three_vertex();
        let (base, step) = sym_reduce(&sd).unwrap();
        assert_eq!(base.graph().vertex_count(), 1);
        assert_eq!(step.j(), 0);
        let back = sym_extend(&base, &step).unwrap();
        assert_eq!(&back, &sd);
    }

    #[test]
    fn reduce_extend_roundtrip_generated() {
        for seed in 0..100 {
            let sd = random_symmetric_decomposition(2 + (seed as usize % 5), seed);
            let (smaller, step) = sym_reduce(&sd).unwrap();
            let back = sym_extend(&smaller, &step).unwrap();
            assert_eq!(back, sd, "seed {seed}");
        }
    }

    #[test]
    fn guard_configurations_never_materialise() {
        // Every degree-3 non-fixed vertex resolves to a neighbour pair that
        // differs from its mirror image, so the reduction guard is evaluated
        // but never fires.
        let mut checked = 0;
        for seed in 0..60 {
            let sd = random_symmetric_decomposition(4, seed);
            for v in sd.graph().vertices() {
                if sd.apply(v) == v || sd.graph().degree(v).unwrap() != 3 {
                    continue;
                }
                let t = (1..=2)
                    .find(|&t| sd.dec().degree_in_tree(v, t) == 2)
                    .unwrap();
                let nbrs: BTreeSet<VertexId> = sd
                    .dec()
                    .tree_neighbours(v, t)
                    .iter()
                    .map(|&(_, w)| w)
                    .collect();
                let image: BTreeSet<VertexId> = nbrs.iter().map(|&w| sd.apply(w)).collect();
                assert_ne!(nbrs, image, "seed {seed}");
                checked += 1;
            }
        }
        assert!(checked > 20, "the guard must actually be exercised");
    }

    #[test]
    fn sequences_replay() {
        let base = SymmetricDecomposition::k1(VertexId(0));
        assert_eq!(build_sym_sequence(&base).unwrap().steps.len(), 0);
        assert_eq!(build_sym_sequence(&three_vertex()).unwrap().steps.len(), 1);
        let sd = random_symmetric_decomposition(10, 3);
        assert_eq!(sd.graph().vertex_count(), 21);
        let seq = build_sym_sequence(&sd).unwrap();
        assert_eq!(seq.steps.len(), 10);
    }

    #[test]
    fn sym_classes_examples() {
        let sd = three_vertex();
        // Exclude one edge orbit: the remaining copies are single, so the
        // classes are exactly the mirror orbits.
        let excluded = BTreeSet::from([EdgeId(0), EdgeId(2)]);
        let classes = sym_parallel_components(sd.graph(), sd.theta(), &excluded).unwrap();
        assert!(classes.same_class(VertexId(1), VertexId(2)));
        assert!(!classes.same_class(VertexId(0), VertexId(1)));

        // With nothing excluded the doubled pairs pull the hub in too.
        let all = sym_parallel_components(sd.graph(), sd.theta(), &BTreeSet::new()).unwrap();
        assert_eq!(all.classes().len(), 1);
    }

    #[test]
    fn generator_contract() {
        assert_eq!(
            random_symmetric_decomposition(0, 0),
            SymmetricDecomposition::k1(VertexId(0))
        );
        let sd = random_symmetric_decomposition(1, 0);
        let v0 = sd.fixed_vertex();
        let deg = sd.graph().degree(v0).unwrap();
        assert!(deg % 2 == 0 && deg >= 4);
        let sd = random_symmetric_decomposition(10, 3);
        assert_eq!(sd, random_symmetric_decomposition(10, 3));
    }

    #[test]
    fn realise_cs_three_vertex_shape() {
        let res = realise_cs(&three_vertex()).unwrap();
        let p0 = res.placement.point(VertexId(0)).unwrap();
        assert_eq!(*p0, Point::origin());
        let p1 = res.placement.point(VertexId(1)).unwrap();
        let p2 = res.placement.point(VertexId(2)).unwrap();
        assert_eq!(*p1, p2.reflect(Axis::Y));
        // Both orbit vertices tie with the hub.
        assert_eq!(p1.x.clone().abs(), p1.y.clone().abs());
        assert!(!p1.x.is_zero());
    }

    #[test]
    fn realise_cs_generated_instances() {
        let mut mirrored_seen = false;
        let mut canonical_seen = false;
        for seed in 0..25 {
            let sd = random_symmetric_decomposition(1 + (seed as usize % 6), seed);
            let seq = build_sym_sequence(&sd).unwrap();
            for step in &seq.steps {
                if step.j() == 1 {
                    match step.first.per_tree.iter().find(|m| m.deleted.len() == 1) {
                        Some(m) if m.tree == 1 => mirrored_seen = true,
                        Some(_) => canonical_seen = true,
                        None => {}
                    }
                }
            }
            let res = realise_cs(&sd).unwrap();
            assert!(reflection_equation_holds(&res.placement, sd.theta()), "seed {seed}");
            let report = is_realisation_of(sd.dec(), &res.placement);
            assert!(report.isostatic, "seed {seed}: {:?}", report.failures);
            let fixed = res.placement.point(sd.fixed_vertex()).unwrap();
            assert!(fixed.x.is_zero(), "fixed vertex sits on the axis");
        }
        assert!(mirrored_seen && canonical_seen, "both orientations exercised");
    }

    #[test]
    fn fixed_vertex_property() {
        for seed in 0..40 {
            let sd = random_symmetric_decomposition(1 + (seed as usize % 8), seed);
            let fixed: Vec<VertexId> = sd
                .graph()
                .vertices()
                .filter(|&v| sd.apply(v) == v)
                .collect();
            assert_eq!(fixed.len(), 1, "seed {seed}");
            let deg = sd.graph().degree(fixed[0]).unwrap();
            assert!(deg % 2 == 0 && deg >= 4, "seed {seed}");
        }
    }

    #[test]
    fn sym_classes_are_unions_of_orbits() {
        for seed in 0..20 {
            let sd = random_symmetric_decomposition(4, seed);
            let classes =
                sym_parallel_components(sd.graph(), sd.theta(), &BTreeSet::new()).unwrap();
            let plain = sd.graph().parallel_components(&BTreeSet::new()).unwrap();
            for class in classes.classes() {
                // Closed under the involution.
                for &v in class {
                    assert!(class.contains(&sd.apply(v)), "seed {seed}");
                }
                // A union of plain classes.
                for &v in class {
                    assert!(
                        plain.class_of(v).unwrap().is_subset(class),
                        "seed {seed}"
                    );
                }
            }
        }
    }
}

