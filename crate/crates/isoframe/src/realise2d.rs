//! Geometric replay of two-tree construction sequences.
//!
//! A decomposition is realised by placing the one-vertex base at the origin
//! and replaying its construction sequence. A degree-2 vertex is placed near
//! the intersection of a horizontal and a vertical line through its anchors
//! (or on a slope ±1 line when it attaches by a double edge); a degree-3
//! vertex follows a case split on the position of the pivot point `o` — the
//! intersection of the horizontal through the tree-1 anchor with the tie
//! line of the replaced pair — with blocks of parallel-tied vertices shifted
//! rigidly to re-break ties the right way. One collinear configuration has
//! no direct placement; there the tied pair is contracted, the smaller
//! decomposition realised recursively, and the placement rebuilt.
//!
//! Everything is exact rational arithmetic. Offsets are powers of two picked
//! under a computed safety bound and every candidate is accepted only after
//! an exact re-check that the partial placement still induces the prescribed
//! trees, so the output is certified step by step rather than trusted.

use std::collections::BTreeSet;

use num_traits::{Signed, Zero};
use thiserror::Error;

use crate::geometry::{dyadic_floor_pow2, dyadic_round, rat, rat_int, Axis, Placement, Point, Rational};
use crate::henneberg::{extend, ConstructionSequence, ExtensionStep, StepError};
use crate::multigraph::{EdgeId, GraphError, MultiGraph, VertexId, VertexPartition};
use crate::sparsity::TreeDecomposition;
use crate::verify::{framework_colouring, monochrome_trees_ok, FrameworkColouring};

/// Geometric branch taken while placing one degree-3 extension.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum PlacementBranch {
    /// Replaced pair survives nowhere else: the new vertex sits on its
    /// carrier line.
    FreeLine,
    /// Pivot at or below the lower tie endpoint.
    PivotLow,
    /// Pivot strictly between the tie endpoints with the anchor to its
    /// right.
    PivotMid,
    /// Pivot at most the upper tie endpoint, anchor to its left.
    PivotHigh,
    /// Pivot beyond the upper tie endpoint, anchor to its left.
    PivotAbove,
    /// Anchor collinear with the tied pair, beyond the upper endpoint.
    CollinearDirect,
    /// Anchor collinear strictly between the tied pair: contract and
    /// realise recursively.
    CollinearContract,
    /// Doubled attachment whose replaced pair keeps no other copy.
    DoubleFree,
    /// Doubled attachment whose replaced pair keeps its tree-1 copy.
    DoubleShift,
}

impl PlacementBranch {
    pub const ALL: [PlacementBranch; 9] = [
        PlacementBranch::FreeLine,
        PlacementBranch::PivotLow,
        PlacementBranch::PivotMid,
        PlacementBranch::PivotHigh,
        PlacementBranch::PivotAbove,
        PlacementBranch::CollinearDirect,
        PlacementBranch::CollinearContract,
        PlacementBranch::DoubleFree,
        PlacementBranch::DoubleShift,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            PlacementBranch::FreeLine => "free-line",
            PlacementBranch::PivotLow => "pivot-low",
            PlacementBranch::PivotMid => "pivot-mid",
            PlacementBranch::PivotHigh => "pivot-high",
            PlacementBranch::PivotAbove => "pivot-above",
            PlacementBranch::CollinearDirect => "collinear-direct",
            PlacementBranch::CollinearContract => "collinear-contract",
            PlacementBranch::DoubleFree => "double-free",
            PlacementBranch::DoubleShift => "double-shift",
        }
    }
}

#[derive(Debug, Error)]
pub enum RealiseError {
    #[error("graph error: {0}")]
    Graph(#[from] GraphError),
    #[error("step error: {0}")]
    Step(#[from] StepError),
    #[error("geometric realisation needs two trees, got {0}")]
    UnsupportedDimension(usize),
    #[error("vertex {0} has no coordinates")]
    MissingCoordinates(VertexId),
    #[error("placement is not injective")]
    DegeneratePlacement,
    #[error("input placement does not realise the decomposition before the step")]
    PlacementMismatch,
    #[error("step is not a {0}-extension")]
    WrongStepKind(usize),
    #[error("candidate search exhausted while {0}")]
    SearchExhausted(&'static str),
}

/// A certified placement together with the sequence it replayed, its induced
/// colouring and the geometric branches exercised along the way.
#[derive(Debug, Clone)]
pub struct RealisationResult {
    pub placement: Placement,
    pub colouring: FrameworkColouring,
    pub sequence: ConstructionSequence,
    pub branches: BTreeSet<PlacementBranch>,
}

/// Outcome of one degree-3 placement.
#[derive(Debug, Clone)]
pub struct PlacedStep {
    pub placement: Placement,
    pub branches: Vec<PlacementBranch>,
}

/// Exact per-step acceptance test: the placement induces the prescribed
/// trees of `dec` (up to permutations within parallel classes).
pub(crate) fn realises(dec: &TreeDecomposition, pl: &Placement) -> bool {
    match framework_colouring(dec.graph(), pl) {
        Ok(col) => monochrome_trees_ok(dec, &col),
        Err(_) => false,
    }
}

/// Realises a two-tree decomposition in the plane.
///
/// The construction sequence is replayed geometrically; in the rare event
/// that a replay runs into a configuration none of its candidate ladders can
/// resolve, the whole construction is retried with a rotated reduction
/// order. Every accepted placement was validated exactly, so the retries
/// trade nothing but time.
pub fn realise(dec: &TreeDecomposition) -> Result<RealisationResult, RealiseError> {
    let mut last = None;
    for salt in 0..8 {
        match realise_salted(dec, salt) {
            Ok(res) => return Ok(res),
            Err(e @ RealiseError::SearchExhausted(_)) => last = Some(e),
            Err(e) => return Err(e),
        }
    }
    Err(last.expect("at least one attempt ran"))
}

fn realise_salted(dec: &TreeDecomposition, salt: u64) -> Result<RealisationResult, RealiseError> {
    if dec.d() != 2 {
        return Err(RealiseError::UnsupportedDimension(dec.d()));
    }
    let sequence = crate::henneberg::build_sequence_salted(dec, salt)?;
    let mut placement = Placement::new();
    placement.insert(sequence.base, Point::origin());
    let mut current = TreeDecomposition::k1(sequence.base, 2);
    let mut branches = BTreeSet::new();
    for step in &sequence.steps {
        match step.j() {
            0 => {
                placement = place_0_extension(&placement, &current, step)?;
            }
            1 => {
                let placed = place_1_extension(&placement, &current, step)?;
                branches.extend(placed.branches.iter().copied());
                placement = placed.placement;
            }
            j => {
                debug_assert!(false, "two-tree steps delete at most one edge, got {j}");
                return Err(RealiseError::WrongStepKind(1));
            }
        }
        current = extend(&current, step)?;
        debug_assert!(realises(&current, &placement));
    }
    let colouring =
        framework_colouring(dec.graph(), &placement).map_err(|_| RealiseError::PlacementMismatch)?;
    Ok(RealisationResult {
        placement,
        colouring,
        sequence,
        branches,
    })
}

/// Reflects a placement through a coordinate axis. Framework colours of all
/// pairs are invariant under this map.
pub fn reflect(pl: &Placement, axis: Axis) -> Placement {
    pl.reflect(axis)
}

/// Largest shift bound for rigid translations of a single parallel class of
/// `g − excluded`: any translation of one class by a vector of maximum norm
/// below the bound keeps every strict colour strict and the placement
/// injective. Exactly tied pairs across classes are the caller's concern
/// (they are the ties a move is usually meant to break).
pub fn safe_epsilon(
    pl: &Placement,
    g: &MultiGraph,
    excluded: &BTreeSet<EdgeId>,
) -> Result<Rational, RealiseError> {
    if !pl.is_injective() {
        return Err(RealiseError::DegeneratePlacement);
    }
    let classes = g.parallel_components(excluded)?;
    let verts: Vec<VertexId> = g.vertices().collect();
    for &v in &verts {
        if pl.point(v).is_none() {
            return Err(RealiseError::MissingCoordinates(v));
        }
    }
    let mut best: Option<Rational> = None;
    let consider = |value: Rational, best: &mut Option<Rational>| {
        if value.is_positive() && best.as_ref().is_none_or(|b| value < *b) {
            *best = Some(value);
        }
    };
    for i in 0..verts.len() {
        for j in (i + 1)..verts.len() {
            let (u, w) = (verts[i], verts[j]);
            if classes.same_class(u, w) {
                continue;
            }
            let pu = pl.point(u).expect("checked above");
            let pw = pl.point(w).expect("checked above");
            consider(pu.linf_distance(pw), &mut best);
            let joined = g
                .edges_between(u, w)
                .into_iter()
                .any(|e| !excluded.contains(&e));
            if joined {
                let (dx, dy) = pu.delta(pw);
                let slack = (dx.abs() - dy.abs()).abs();
                if slack.is_positive() {
                    consider(slack, &mut best);
                }
            }
        }
    }
    Ok(best.map(|b| b / rat_int(2)).unwrap_or_else(|| rat_int(1)))
}

/// Deterministic candidate points for a degree-2 attachment with tree-1
/// anchor at `xp` and tree-2 anchor at `yp` (the doubled attachment when the
/// anchors coincide).
pub(crate) fn zero_ext_candidates(xp: &Point, yp: &Point) -> Vec<Point> {
    let mut out = Vec::new();
    if xp == yp {
        let mut t = rat_int(1);
        for _ in 0..64 {
            out.push(xp.offset(&t, &t));
            t /= rat_int(2);
        }
    } else {
        let corner = Point::new(yp.x.clone(), xp.y.clone());
        out.push(corner.clone());
        // Nudge direction: dominate the coordinate whose anchor gap might
        // vanish, so both colour inequalities become strict.
        let (dx, dy) = if xp.y == yp.y {
            (rat(1, 2), rat_int(1))
        } else {
            (rat_int(1), rat(1, 2))
        };
        let mut t = rat_int(1);
        for _ in 0..64 {
            out.push(corner.offset(&(&t * &dx), &(&t * &dy)));
            t /= rat_int(2);
        }
    }
    out
}

/// Places a degree-2 extension, leaving all old coordinates unchanged.
pub fn place_0_extension(
    pl: &Placement,
    dec_before: &TreeDecomposition,
    step: &ExtensionStep,
) -> Result<Placement, RealiseError> {
    if step.j() != 0 {
        return Err(RealiseError::WrongStepKind(0));
    }
    if dec_before.d() != 2 {
        return Err(RealiseError::UnsupportedDimension(dec_before.d()));
    }
    if !realises(dec_before, pl) {
        return Err(RealiseError::PlacementMismatch);
    }
    let dec_after = extend(dec_before, step)?;
    let x = step.move_for_tree(1).ok_or(RealiseError::WrongStepKind(0))?.added[0].1;
    let y = step.move_for_tree(2).ok_or(RealiseError::WrongStepKind(0))?.added[0].1;
    let xp = pl.point(x).ok_or(RealiseError::MissingCoordinates(x))?;
    let yp = pl.point(y).ok_or(RealiseError::MissingCoordinates(y))?;
    for candidate in zero_ext_candidates(xp, yp) {
        let mut cand = pl.clone();
        cand.insert(step.new_vertex, candidate);
        if realises(&dec_after, &cand) {
            return Ok(cand);
        }
    }
    Err(RealiseError::SearchExhausted("placing a degree-2 vertex"))
}

/// The combinatorial shape of a degree-3 extension in canonical orientation
/// (tree 2 carries the replaced edge).
#[derive(Debug, Clone, Copy)]
pub(crate) struct OneExtShape {
    pub v: VertexId,
    /// Tree-1 anchor.
    pub x: VertexId,
    /// Endpoints of the replaced tree-2 edge.
    pub pair: (VertexId, VertexId),
    /// Id of the replaced edge.
    pub deleted: EdgeId,
}

pub(crate) fn one_ext_shape(step: &ExtensionStep) -> Result<OneExtShape, RealiseError> {
    let t1 = step.move_for_tree(1).ok_or(RealiseError::WrongStepKind(1))?;
    let t2 = step.move_for_tree(2).ok_or(RealiseError::WrongStepKind(1))?;
    if !(t1.deleted.is_empty() && t2.deleted.len() == 1 && t1.added.len() == 1 && t2.added.len() == 2) {
        return Err(RealiseError::WrongStepKind(1));
    }
    let (deleted, pair) = t2.deleted[0];
    Ok(OneExtShape {
        v: step.new_vertex,
        x: t1.added[0].1,
        pair,
        deleted,
    })
}

/// Shape of a degree-3 extension whose replaced edge sits in tree 1 (the
/// mirrored orientation).
pub(crate) fn one_ext_shape_swapped(step: &ExtensionStep) -> Result<OneExtShape, RealiseError> {
    let t1 = step.move_for_tree(1).ok_or(RealiseError::WrongStepKind(1))?;
    let t2 = step.move_for_tree(2).ok_or(RealiseError::WrongStepKind(1))?;
    if !(t2.deleted.is_empty() && t1.deleted.len() == 1 && t2.added.len() == 1 && t1.added.len() == 2) {
        return Err(RealiseError::WrongStepKind(1));
    }
    let (deleted, pair) = t1.deleted[0];
    Ok(OneExtShape {
        v: step.new_vertex,
        x: t2.added[0].1,
        pair,
        deleted,
    })
}

/// How a normalised degree-3 configuration is handled.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Dispatch {
    Branch(PlacementBranch),
    Contract,
}

/// Case split for the tied configuration, on the working (normalised) frame.
/// `m` is the tie gap, `c` the pivot height above the lower endpoint.
fn classify_tied(m: &Rational, c: &Rational, xp: &Point, o: &Point) -> Dispatch {
    if !c.is_positive() {
        Dispatch::Branch(PlacementBranch::PivotLow)
    } else if xp.x > o.x {
        Dispatch::Branch(PlacementBranch::PivotMid)
    } else if xp.x < o.x {
        if c <= m {
            Dispatch::Branch(PlacementBranch::PivotHigh)
        } else {
            Dispatch::Branch(PlacementBranch::PivotAbove)
        }
    } else if c > m {
        Dispatch::Branch(PlacementBranch::CollinearDirect)
    } else {
        // 0 < c < m; c == m would put the anchor on the upper endpoint.
        Dispatch::Contract
    }
}

/// Working data for one canonical degree-3 placement attempt.
pub(crate) struct OneExtFrame {
    /// Normalised placement (axis reflections applied).
    pub work: Placement,
    pub y: VertexId,
    pub z: VertexId,
}

/// Names the replaced pair so the anchor coincides with `z` when it can, and
/// reflects the placement so `p(z)` dominates from below.
pub(crate) fn normalise_one_ext(
    pl: &Placement,
    shape: &OneExtShape,
) -> Result<OneExtFrame, RealiseError> {
    let (a, b) = shape.pair;
    let (y, z) = if shape.x == a {
        (b, a)
    } else if shape.x == b {
        (a, b)
    } else {
        (a.max(b), a.min(b))
    };
    let mut work = pl.clone();
    let need = |pl: &Placement, v: VertexId| -> Result<Point, RealiseError> {
        pl.point(v).cloned().ok_or(RealiseError::MissingCoordinates(v))
    };
    let (py, pz) = (need(&work, y)?, need(&work, z)?);
    if py.y == pz.y {
        return Err(RealiseError::PlacementMismatch);
    }
    if py.y < pz.y {
        work = work.reflect(Axis::X);
    }
    let (py, pz) = (need(&work, y)?, need(&work, z)?);
    if py.x < pz.x {
        work = work.reflect(Axis::Y);
    }
    Ok(OneExtFrame { work, y, z })
}

/// Dyadic (epsilon, delta) ladder under a safety bound, alternating which of
/// the two offsets dominates.
fn offset_ladder(bound: &Rational, attempts: usize) -> Vec<(Rational, Rational)> {
    let base = dyadic_floor_pow2(&bound.clone().min(rat_int(1)));
    let mut out = Vec::with_capacity(2 * attempts);
    let mut eps = base / rat_int(2);
    for _ in 0..attempts {
        let half = &eps / rat_int(2);
        out.push((eps.clone(), half.clone()));
        out.push((half.clone(), eps.clone()));
        eps = half;
    }
    out
}

const SLOPE_DENOMS: [i64; 10] = [2, 3, 4, 5, 7, 9, 11, 13, 17, 19];
const SNAP_BITS: [u32; 10] = [0, 2, 4, 8, 12, 16, 24, 32, 48, 64];

fn snap_candidates(q: &Point) -> Vec<Point> {
    let mut out: Vec<Point> = SNAP_BITS
        .iter()
        .map(|&bits| Point::new(dyadic_round(&q.x, bits), dyadic_round(&q.y, bits)))
        .collect();
    out.push(q.clone());
    out
}

/// Solves `p + s·d1 = q + t·d2` for the intersection point.
fn line_intersection(
    p: &Point,
    d1: (&Rational, &Rational),
    q: &Point,
    d2: (&Rational, &Rational),
) -> Option<Point> {
    let det = d2.0 * d1.1 - d2.1 * d1.0;
    if det.is_zero() {
        return None;
    }
    let (ex, ey) = (&q.x - &p.x, &q.y - &p.y);
    // Cramer on [d1 | −d2] (s,t) = e.
    let s = (d2.0 * &ey - d2.1 * &ex) / &det;
    Some(Point::new(&p.x + &(&s * d1.0), &p.y + &(&s * d1.1)))
}

pub(crate) enum EngineOutcome {
    Placed {
        placement: Placement,
        branch: PlacementBranch,
    },
    NeedsContraction {
        y: VertexId,
        z: VertexId,
    },
}

/// Acceptance hook: builds the full candidate placement from the shifted
/// base and the new vertex position, returning it only if it passes the
/// caller's exact checks.
pub(crate) type AcceptFn<'a> = dyn Fn(&Placement, &Point) -> Option<Placement> + 'a;

/// Canonical degree-3 placement engine: normalises the frame, classifies the
/// configuration and walks a deterministic candidate ladder for the selected
/// branch. Class shifts use the supplied partition (parallel classes of the
/// graph minus the replaced edge, or their symmetric closure).
pub(crate) fn one_ext_engine(
    pl: &Placement,
    dec_before: &TreeDecomposition,
    shape: &OneExtShape,
    classes: &VertexPartition,
    accept: &AcceptFn,
) -> Result<EngineOutcome, RealiseError> {
    let g = dec_before.graph();
    let frame = normalise_one_ext(pl, shape)?;
    let (y, z) = (frame.y, frame.z);
    let work = frame.work;
    let point = |v: VertexId| -> Result<Point, RealiseError> {
        work.point(v).cloned().ok_or(RealiseError::MissingCoordinates(v))
    };
    let (py, pz, px) = (point(y)?, point(z)?, point(shape.x)?);
    let excluded = BTreeSet::from([shape.deleted]);

    if shape.x != z {
        if g.pair_multiplicity(y, z) == 1 {
            // Replaced pair survives nowhere: the carrier line through the
            // pair stays available.
            let (ldx, ldy) = pz.delta(&py);
            let anchor_on_line = {
                let (ax, ay) = px.delta(&pz);
                &ldx * &ay - &ldy * &ax == Rational::zero()
            };
            if anchor_on_line {
                // Every slope line through the anchor meets the carrier line
                // at the anchor itself; sit just beside the anchor instead,
                // inside the steep cones of both endpoints.
                let mut h = rat_int(1);
                for _ in 0..64 {
                    for sign in [1i64, -1] {
                        let cand = px.offset(&(&h * rat_int(sign)), &Rational::zero());
                        if let Some(done) = accept(&work, &cand) {
                            return Ok(EngineOutcome::Placed {
                                placement: done,
                                branch: PlacementBranch::FreeLine,
                            });
                        }
                    }
                    h /= rat_int(2);
                }
                return Err(RealiseError::SearchExhausted("placing beside a collinear anchor"));
            }
            for denom in SLOPE_DENOMS {
                let a = rat(1, denom);
                let one = rat_int(1);
                let Some(q) = line_intersection(&px, (&one, &a), &py, (&ldx, &ldy)) else {
                    continue;
                };
                for cand in snap_candidates(&q) {
                    if let Some(done) = accept(&work, &cand) {
                        return Ok(EngineOutcome::Placed {
                            placement: done,
                            branch: PlacementBranch::FreeLine,
                        });
                    }
                }
            }
            return Err(RealiseError::SearchExhausted("placing on the carrier line"));
        }
        // Tied pair: y − z = (m, m) with m > 0 in the working frame.
        let (m, m2) = py.delta(&pz);
        if m != m2 || !m.is_positive() {
            return Err(RealiseError::PlacementMismatch);
        }
        let c = &px.y - &pz.y;
        let o = pz.offset(&c, &c);
        let branch = match classify_tied(&m, &c, &px, &o) {
            Dispatch::Contract => return Ok(EngineOutcome::NeedsContraction { y, z }),
            Dispatch::Branch(b) => b,
        };
        let (shift_vertex, shift_sign) = match branch {
            PlacementBranch::PivotLow | PlacementBranch::PivotMid => (z, 1),
            _ => (y, -1),
        };
        let class = classes
            .class_of(shift_vertex)
            .cloned()
            .unwrap_or_else(|| BTreeSet::from([shift_vertex]));
        let bound = safe_epsilon(&work, g, &excluded)?;
        for (eps, delta) in offset_ladder(&bound, 40) {
            // Each pivot position tolerates a small jitter along its free
            // direction (the colour constraints are open there); that keeps
            // the search alive when the nominal point is occupied or barred,
            // e.g. by a caller's mirror-axis constraint.
            let half = &delta / rat_int(2);
            let jittered = |p: Point, horizontal: bool| -> Vec<Point> {
                let (a, b) = if horizontal {
                    (p.offset(&half, &Rational::zero()), p.offset(&-half.clone(), &Rational::zero()))
                } else {
                    (p.offset(&Rational::zero(), &half), p.offset(&Rational::zero(), &-half.clone()))
                };
                vec![p, a, b]
            };
            let candidates: Vec<Point> = match branch {
                PlacementBranch::PivotLow => jittered(o.offset(&delta, &Rational::zero()), false),
                PlacementBranch::PivotMid => jittered(pz.offset(&Rational::zero(), &-delta.clone()), true),
                PlacementBranch::PivotHigh => jittered(py.offset(&Rational::zero(), &delta), true),
                PlacementBranch::PivotAbove => jittered(o.offset(&Rational::zero(), &delta), true),
                PlacementBranch::CollinearDirect => {
                    jittered(Point::new(py.x.clone(), px.y.clone()), true)
                }
                _ => unreachable!("shifted branches only"),
            };
            let shift = &eps * rat_int(shift_sign);
            let base = work.translate_class(&class, &Rational::zero(), &shift);
            for candidate_v in candidates {
                if let Some(done) = accept(&base, &candidate_v) {
                    return Ok(EngineOutcome::Placed {
                        placement: done,
                        branch,
                    });
                }
            }
        }
        return Err(RealiseError::SearchExhausted("re-breaking a tied pair"));
    }

    // Doubled attachment: x == z, so the new vertex ties to the anchor.
    if g.pair_multiplicity(shape.x, y) == 1 {
        // The replaced pair vanishes; any slope-1 position for the new
        // vertex with a steep-enough view of y works.
        let one = rat_int(1);
        for denom in SLOPE_DENOMS {
            let a = rat(1, denom);
            let Some(q) = line_intersection(&px, (&one, &one), &py, (&a, &one)) else {
                continue;
            };
            // Snap along the tie line through the anchor so the doubled
            // attachment keeps its exact tie.
            let lambda = &q.x - &px.x;
            let mut lambdas: Vec<Rational> = SNAP_BITS
                .iter()
                .map(|&bits| dyadic_round(&lambda, bits))
                .collect();
            lambdas.push(lambda);
            for l in lambdas {
                let cand = px.offset(&l, &l);
                if let Some(done) = accept(&work, &cand) {
                    return Ok(EngineOutcome::Placed {
                        placement: done,
                        branch: PlacementBranch::DoubleFree,
                    });
                }
            }
        }
        return Err(RealiseError::SearchExhausted("placing a doubled attachment"));
    }
    // The pair keeps its tree-1 copy: put the new vertex on the old upper
    // endpoint (or further out on the tie line when that point is barred,
    // e.g. by a caller's mirror-axis constraint) and lower that endpoint's
    // block.
    let (m, m2) = py.delta(&pz);
    if m != m2 || !m.is_positive() {
        return Err(RealiseError::PlacementMismatch);
    }
    let class = classes
        .class_of(y)
        .cloned()
        .unwrap_or_else(|| BTreeSet::from([y]));
    let bound = safe_epsilon(&work, g, &excluded)?;
    for (eps, _) in offset_ladder(&bound, 40) {
        let base = work.translate_class(&class, &Rational::zero(), &-eps.clone());
        if let Some(done) = accept(&base, &py) {
            return Ok(EngineOutcome::Placed {
                placement: done,
                branch: PlacementBranch::DoubleShift,
            });
        }
        let lambda = &m + &eps * rat_int(2);
        let outer = px.offset(&lambda, &lambda);
        if let Some(done) = accept(&base, &outer) {
            return Ok(EngineOutcome::Placed {
                placement: done,
                branch: PlacementBranch::DoubleShift,
            });
        }
    }
    Err(RealiseError::SearchExhausted("lowering a tied block"))
}

/// Degree-3 placement engine for the mirrored orientation: the replaced
/// edge and the doubled attachment sit in tree 1, the single anchor in tree
/// 2. Offsets for the new vertex swap their roles relative to the canonical
/// engine while block shifts stay vertical (so a mirror-symmetric caller
/// keeps its symmetry) with their signs flipped, re-breaking the surviving
/// tree-2 copy towards the steep colour.
pub(crate) fn one_ext_engine_mirrored(
    pl: &Placement,
    dec_before: &TreeDecomposition,
    shape: &OneExtShape,
    classes: &VertexPartition,
    accept: &AcceptFn,
) -> Result<EngineOutcome, RealiseError> {
    let g = dec_before.graph();
    let frame = normalise_one_ext_mirrored(pl, shape)?;
    let (y, z) = (frame.y, frame.z);
    let work = frame.work;
    let point = |v: VertexId| -> Result<Point, RealiseError> {
        work.point(v).cloned().ok_or(RealiseError::MissingCoordinates(v))
    };
    let (py, pz, px) = (point(y)?, point(z)?, point(shape.x)?);
    let excluded = BTreeSet::from([shape.deleted]);

    if shape.x != z {
        if g.pair_multiplicity(y, z) == 1 {
            // Flat carrier line through the pair; the anchor needs a steep
            // view instead.
            let (ldx, ldy) = pz.delta(&py);
            let anchor_on_line = {
                let (ax, ay) = px.delta(&pz);
                &ldx * &ay - &ldy * &ax == Rational::zero()
            };
            if anchor_on_line {
                let mut h = rat_int(1);
                for _ in 0..64 {
                    for sign in [1i64, -1] {
                        let cand = px.offset(&Rational::zero(), &(&h * rat_int(sign)));
                        if let Some(done) = accept(&work, &cand) {
                            return Ok(EngineOutcome::Placed {
                                placement: done,
                                branch: PlacementBranch::FreeLine,
                            });
                        }
                    }
                    h /= rat_int(2);
                }
                return Err(RealiseError::SearchExhausted("placing beside a collinear anchor"));
            }
            for denom in SLOPE_DENOMS {
                let a = rat(1, denom);
                let one = rat_int(1);
                let Some(q) = line_intersection(&px, (&a, &one), &py, (&ldx, &ldy)) else {
                    continue;
                };
                for cand in snap_candidates(&q) {
                    if let Some(done) = accept(&work, &cand) {
                        return Ok(EngineOutcome::Placed {
                            placement: done,
                            branch: PlacementBranch::FreeLine,
                        });
                    }
                }
            }
            return Err(RealiseError::SearchExhausted("placing on the carrier line"));
        }
        let (m, m2) = py.delta(&pz);
        if m != m2 || !m.is_positive() {
            return Err(RealiseError::PlacementMismatch);
        }
        let c = &px.x - &pz.x;
        let o = pz.offset(&c, &c);
        let branch = match classify_tied_mirrored(&m, &c, &px, &o) {
            Dispatch::Contract => return Ok(EngineOutcome::NeedsContraction { y, z }),
            Dispatch::Branch(b) => b,
        };
        let (shift_vertex, shift_sign) = match branch {
            PlacementBranch::PivotLow | PlacementBranch::PivotMid => (z, -1),
            _ => (y, 1),
        };
        let class = classes
            .class_of(shift_vertex)
            .cloned()
            .unwrap_or_else(|| BTreeSet::from([shift_vertex]));
        let bound = safe_epsilon(&work, g, &excluded)?;
        for (eps, delta) in offset_ladder(&bound, 40) {
            let half = &delta / rat_int(2);
            let jittered = |p: Point, vertical: bool| -> Vec<Point> {
                let (a, b) = if vertical {
                    (p.offset(&Rational::zero(), &half), p.offset(&Rational::zero(), &-half.clone()))
                } else {
                    (p.offset(&half, &Rational::zero()), p.offset(&-half.clone(), &Rational::zero()))
                };
                vec![p, a, b]
            };
            let candidates: Vec<Point> = match branch {
                PlacementBranch::PivotLow => jittered(o.offset(&-delta.clone(), &Rational::zero()), true),
                PlacementBranch::PivotMid => jittered(pz.offset(&-delta.clone(), &Rational::zero()), true),
                PlacementBranch::PivotHigh => jittered(py.offset(&delta, &Rational::zero()), true),
                PlacementBranch::PivotAbove => jittered(o.offset(&delta, &Rational::zero()), true),
                PlacementBranch::CollinearDirect => {
                    jittered(Point::new(px.x.clone(), py.y.clone()), false)
                }
                _ => unreachable!("shifted branches only"),
            };
            let shift = &eps * rat_int(shift_sign);
            let base = work.translate_class(&class, &Rational::zero(), &shift);
            for candidate_v in candidates {
                if let Some(done) = accept(&base, &candidate_v) {
                    return Ok(EngineOutcome::Placed {
                        placement: done,
                        branch,
                    });
                }
            }
        }
        return Err(RealiseError::SearchExhausted("re-breaking a tied pair"));
    }

    // Doubled attachment along the tie line.
    if g.pair_multiplicity(shape.x, y) == 1 {
        let one = rat_int(1);
        for denom in SLOPE_DENOMS {
            let b = rat(1, denom);
            let Some(q) = line_intersection(&px, (&one, &one), &py, (&one, &b)) else {
                continue;
            };
            let lambda = &q.x - &px.x;
            let mut lambdas: Vec<Rational> = SNAP_BITS
                .iter()
                .map(|&bits| dyadic_round(&lambda, bits))
                .collect();
            lambdas.push(lambda);
            for l in lambdas {
                let cand = px.offset(&l, &l);
                if let Some(done) = accept(&work, &cand) {
                    return Ok(EngineOutcome::Placed {
                        placement: done,
                        branch: PlacementBranch::DoubleFree,
                    });
                }
            }
        }
        return Err(RealiseError::SearchExhausted("placing a doubled attachment"));
    }
    // The pair keeps its tree-2 copy: raise the upper block and put the new
    // vertex further out on the anchor's tie line.
    let (m, m2) = py.delta(&pz);
    if m != m2 || !m.is_positive() {
        return Err(RealiseError::PlacementMismatch);
    }
    let class = classes
        .class_of(y)
        .cloned()
        .unwrap_or_else(|| BTreeSet::from([y]));
    let bound = safe_epsilon(&work, g, &excluded)?;
    for (eps, _) in offset_ladder(&bound, 40) {
        let lambda = &m + &eps * rat_int(2);
        let cand = px.offset(&lambda, &lambda);
        let base = work.translate_class(&class, &Rational::zero(), &eps);
        if let Some(done) = accept(&base, &cand) {
            return Ok(EngineOutcome::Placed {
                placement: done,
                branch: PlacementBranch::DoubleShift,
            });
        }
    }
    Err(RealiseError::SearchExhausted("raising a tied block"))
}

/// Mirrored case split: the pivot is the intersection of the vertical line
/// through the anchor with the tie line; guards compare heights.
fn classify_tied_mirrored(m: &Rational, c: &Rational, xp: &Point, o: &Point) -> Dispatch {
    if !c.is_positive() {
        Dispatch::Branch(PlacementBranch::PivotLow)
    } else if xp.y > o.y {
        Dispatch::Branch(PlacementBranch::PivotMid)
    } else if xp.y < o.y {
        if c <= m {
            Dispatch::Branch(PlacementBranch::PivotHigh)
        } else {
            Dispatch::Branch(PlacementBranch::PivotAbove)
        }
    } else if c > m {
        Dispatch::Branch(PlacementBranch::CollinearDirect)
    } else {
        Dispatch::Contract
    }
}

/// Frame normalisation for the mirrored orientation; the pair carries a flat
/// edge, so the horizontal gap is the one that cannot vanish.
pub(crate) fn normalise_one_ext_mirrored(
    pl: &Placement,
    shape: &OneExtShape,
) -> Result<OneExtFrame, RealiseError> {
    let (a, b) = shape.pair;
    let (y, z) = if shape.x == a {
        (b, a)
    } else if shape.x == b {
        (a, b)
    } else {
        (a.max(b), a.min(b))
    };
    let mut work = pl.clone();
    let need = |pl: &Placement, v: VertexId| -> Result<Point, RealiseError> {
        pl.point(v).cloned().ok_or(RealiseError::MissingCoordinates(v))
    };
    let (py, pz) = (need(&work, y)?, need(&work, z)?);
    if py.x == pz.x {
        return Err(RealiseError::PlacementMismatch);
    }
    if py.x < pz.x {
        work = work.reflect(Axis::Y);
    }
    let (py, pz) = (need(&work, y)?, need(&work, z)?);
    if py.y < pz.y {
        work = work.reflect(Axis::X);
    }
    Ok(OneExtFrame { work, y, z })
}

/// Whether the mirrored configuration would dispatch to the contraction
/// case.
pub(crate) fn still_collinear_mirrored(pl: &Placement, shape: &OneExtShape) -> bool {
    let Ok(frame) = normalise_one_ext_mirrored(pl, shape) else {
        return true;
    };
    let (Some(py), Some(pz), Some(px)) = (
        frame.work.point(frame.y),
        frame.work.point(frame.z),
        frame.work.point(shape.x),
    ) else {
        return true;
    };
    let (m, m2) = py.delta(pz);
    if m != m2 || !m.is_positive() {
        return true;
    }
    let c = &px.x - &pz.x;
    let o = pz.offset(&c, &c);
    classify_tied_mirrored(&m, &c, px, &o) == Dispatch::Contract
}

/// Places a degree-3 extension. The orientation with the replaced edge in
/// tree 1 is handled by transposing coordinates, running the canonical
/// engine, and transposing back.
pub fn place_1_extension(
    pl: &Placement,
    dec_before: &TreeDecomposition,
    step: &ExtensionStep,
) -> Result<PlacedStep, RealiseError> {
    if dec_before.d() != 2 {
        return Err(RealiseError::UnsupportedDimension(dec_before.d()));
    }
    if step.j() != 1 {
        return Err(RealiseError::WrongStepKind(1));
    }
    let doubled_tree = step
        .per_tree
        .iter()
        .find(|m| m.deleted.len() == 1)
        .map(|m| m.tree)
        .ok_or(RealiseError::WrongStepKind(1))?;
    if doubled_tree == 1 {
        let placed = place_1_canonical(
            &pl.transpose(),
            &dec_before.with_trees_swapped(),
            &step.with_trees_swapped(),
        )?;
        return Ok(PlacedStep {
            placement: placed.placement.transpose(),
            branches: placed.branches,
        });
    }
    place_1_canonical(pl, dec_before, step)
}

fn place_1_canonical(
    pl: &Placement,
    dec_before: &TreeDecomposition,
    step: &ExtensionStep,
) -> Result<PlacedStep, RealiseError> {
    if !realises(dec_before, pl) {
        return Err(RealiseError::PlacementMismatch);
    }
    let shape = one_ext_shape(step)?;
    let dec_after = extend(dec_before, step)?;
    let mut branches = Vec::new();
    let mut current = pl.clone();
    for _ in 0..40 {
        let classes = dec_before
            .graph()
            .parallel_components(&BTreeSet::from([shape.deleted]))?;
        let accept = |base: &Placement, vp: &Point| -> Option<Placement> {
            let mut cand = base.clone();
            cand.insert(shape.v, vp.clone());
            realises(&dec_after, &cand).then_some(cand)
        };
        match one_ext_engine(&current, dec_before, &shape, &classes, &accept)? {
            EngineOutcome::Placed { placement, branch } => {
                branches.push(branch);
                return Ok(PlacedStep {
                    placement,
                    branches,
                });
            }
            EngineOutcome::NeedsContraction { y, z } => {
                branches.push(PlacementBranch::CollinearContract);
                current = match rebuild_after_contraction(dec_before, &shape, y, z, &mut branches) {
                    Ok(rebuilt) => rebuilt,
                    // The split vertex can carry single edges to a common
                    // neighbour on both sides; no small diagonal offset then
                    // re-breaks that neighbour's tie and the rebuild runs
                    // dry. Nudging the anchor block sideways instead leaves
                    // a realisation and clears the collinearity.
                    Err(RealiseError::SearchExhausted(_)) => {
                        escape_collinearity(dec_before, &shape, &current, y, z)?
                    }
                    Err(other) => return Err(other),
                };
            }
        }
    }
    Err(RealiseError::SearchExhausted("resolving collinear contractions"))
}

/// Contracts a tied pair, realises the smaller decomposition recursively
/// and splits the merged vertex back apart: one endpoint keeps the merged
/// position and the other's parallel block moves out along a diagonal, far
/// less than any slack. The replaced pair is contracted first; if its split
/// cannot re-break every tie (the merged vertex may have kept single edges
/// to a common neighbour on both sides), the other tied pairs are tried,
/// in both split orders and both diagonal orientations. Accepts only
/// rebuilds that realise the pre-step decomposition and whose re-dispatch
/// avoids contracting again, so the outer loop terminates.
fn rebuild_after_contraction(
    dec_before: &TreeDecomposition,
    shape: &OneExtShape,
    y: VertexId,
    z: VertexId,
    branches: &mut Vec<PlacementBranch>,
) -> Result<Placement, RealiseError> {
    let g = dec_before.graph();
    let mut pairs: Vec<(VertexId, VertexId)> = vec![(y, z)];
    for (_, (u, w)) in g.edges() {
        if (u, w) != (y.min(z), y.max(z)) && g.pair_multiplicity(u, w) >= 2 && !pairs.contains(&(u, w))
        {
            pairs.push((u, w));
        }
    }
    for (a, b) in pairs {
        let Ok((dec_o, map)) = dec_before.contract_parallel_pair(a, b) else {
            continue;
        };
        let Ok(sub) = realise(&dec_o) else {
            continue;
        };
        let copies: BTreeSet<EdgeId> = g.edges_between(a, b).into_iter().collect();
        let classes = g.parallel_components(&copies)?;
        for (keep, moved) in [(a, b), (b, a)] {
            let block = classes
                .class_of(moved)
                .cloned()
                .unwrap_or_else(|| BTreeSet::from([moved]));
            if block.contains(&keep) {
                continue; // chained through another route: a split cannot separate them
            }
            for sigma in [1i64, -1] {
                let mut eps = rat_int(1);
                for _ in 0..48 {
                    let mut cand = Placement::new();
                    for w in g.vertices() {
                        let base = sub
                            .placement
                            .point(map[&w])
                            .ok_or(RealiseError::MissingCoordinates(w))?
                            .clone();
                        let p = if block.contains(&w) {
                            cand_offset(&base, &eps, sigma)
                        } else {
                            base
                        };
                        cand.insert(w, p);
                    }
                    if realises(dec_before, &cand) && !still_collinear(&cand, shape) {
                        branches.extend(sub.branches.iter().copied());
                        return Ok(cand);
                    }
                    eps /= rat_int(2);
                }
            }
        }
    }
    Err(RealiseError::SearchExhausted("rebuilding after a contraction"))
}

fn cand_offset(base: &Point, eps: &Rational, sigma: i64) -> Point {
    base.offset(eps, &(eps * rat_int(sigma)))
}

/// Whether the configuration would dispatch to the contraction case again.
pub(crate) fn still_collinear(pl: &Placement, shape: &OneExtShape) -> bool {
    let Ok(frame) = normalise_one_ext(pl, shape) else {
        return true;
    };
    let (Some(py), Some(pz), Some(px)) = (
        frame.work.point(frame.y),
        frame.work.point(frame.z),
        frame.work.point(shape.x),
    ) else {
        return true;
    };
    let (m, m2) = py.delta(pz);
    if m != m2 || !m.is_positive() {
        return true;
    }
    let c = &px.y - &pz.y;
    let o = pz.offset(&c, &c);
    classify_tied(&m, &c, px, &o) == Dispatch::Contract
}

/// Sideways nudge of the anchor's parallel block (with respect to the whole
/// graph, so ties are untouched and the placement stays a realisation),
/// taking the anchor off the carrier line of the tied pair.
fn escape_collinearity(
    dec_before: &TreeDecomposition,
    shape: &OneExtShape,
    pl: &Placement,
    y: VertexId,
    z: VertexId,
) -> Result<Placement, RealiseError> {
    let g = dec_before.graph();
    let classes = g.parallel_components(&BTreeSet::new())?;
    let block = classes
        .class_of(shape.x)
        .cloned()
        .unwrap_or_else(|| BTreeSet::from([shape.x]));
    if block.contains(&y) || block.contains(&z) {
        return Err(RealiseError::SearchExhausted(
            "escaping a collinear anchor chained to the tied pair",
        ));
    }
    let bound = safe_epsilon(pl, g, &BTreeSet::new())?;
    let mut eps = dyadic_floor_pow2(&bound.min(rat_int(1))) / rat_int(2);
    for _ in 0..64 {
        let cand = pl.translate_class(&block, &eps, &Rational::zero());
        if realises(dec_before, &cand) && !still_collinear(&cand, shape) {
            return Ok(cand);
        }
        eps /= rat_int(2);
    }
    Err(RealiseError::SearchExhausted("escaping a collinear anchor"))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use std::collections::BTreeMap;
    use crate::henneberg::{random_decomposition, TreeMove};
    use crate::verify::is_realisation_of;
    use rand::prelude::*;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn realise_k1_is_origin() {
        let res = realise(&TreeDecomposition::k1(VertexId(0), 2)).unwrap();
        assert_eq!(res.placement.point(VertexId(0)), Some(&Point::origin()));
    }

    #[test]
    fn realise_double_edge_lands_on_tie_line() {
        let g = MultiGraph::from_edges(2, &[(0, 1), (0, 1)]).unwrap();
        let dec = crate::sparsity::decompose(&g, 2).unwrap();
        let res = realise(&dec).unwrap();
        let p0 = res.placement.point(VertexId(0)).unwrap();
        let p1 = res.placement.point(VertexId(1)).unwrap();
        let (dx, dy) = p1.delta(p0);
        assert_eq!(dx.abs(), dy.abs());
        assert!(!dx.is_zero());
        assert!(is_realisation_of(&dec, &res.placement).isostatic);
    }

    #[test]
    fn realise_both_wheel_decompositions() {
        for dec in [
            fixtures::w5_left_decomposition(),
            fixtures::w5_centre_decomposition(),
        ] {
            let res = realise(&dec).unwrap();
            let report = is_realisation_of(&dec, &res.placement);
            assert!(report.isostatic, "failures: {:?}", report.failures);
        }
    }

    #[test]
    fn zero_extension_hits_the_corner_when_free() {
        // Double edge placed on the diagonal, then a degree-2 vertex with
        // distinct anchors: the corner point itself is available.
        let g = MultiGraph::from_edges(2, &[(0, 1), (0, 1)]).unwrap();
        let dec = crate::sparsity::decompose(&g, 2).unwrap();
        let res = realise(&dec).unwrap();
        let step = ExtensionStep {
            new_vertex: VertexId(2),
            per_tree: vec![
                TreeMove { tree: 1, deleted: vec![], added: vec![(EdgeId(2), VertexId(0))] },
                TreeMove { tree: 2, deleted: vec![], added: vec![(EdgeId(3), VertexId(1))] },
            ],
        };
        let placed = place_0_extension(&res.placement, &dec, &step).unwrap();
        let p0 = placed.point(VertexId(0)).unwrap().clone();
        let p1 = placed.point(VertexId(1)).unwrap().clone();
        let pv = placed.point(VertexId(2)).unwrap().clone();
        assert_eq!(pv, Point::new(p1.x, p0.y));
    }

    #[test]
    fn zero_extension_avoids_collisions() {
        // Place a third vertex exactly on the corner first, forcing the
        // nudged candidates.
        let dec = fixtures::w5_left_decomposition();
        let pl = fixtures::w5_left_placement();
        // x = vertex 1 at (-1,-1), y = vertex 2 at (1,-1): corner (1,-1) is
        // y itself, so the exact corner collides and must be rejected.
        let step = ExtensionStep {
            new_vertex: VertexId(5),
            per_tree: vec![
                TreeMove { tree: 1, deleted: vec![], added: vec![(EdgeId(8), VertexId(1))] },
                TreeMove { tree: 2, deleted: vec![], added: vec![(EdgeId(9), VertexId(2))] },
            ],
        };
        let placed = place_0_extension(&pl, &dec, &step).unwrap();
        let after = extend(&dec, &step).unwrap();
        assert!(realises(&after, &placed));
        assert!(placed.is_injective());
    }

    #[test]
    fn branch_corpus_hits_every_branch() {
        let mut seen = BTreeSet::new();
        for fx in fixtures::branch_corpus() {
            assert!(
                realises(&fx.dec, &fx.placement),
                "fixture {} placement must realise its decomposition",
                fx.name
            );
            let placed = place_1_extension(&fx.placement, &fx.dec, &fx.step).unwrap();
            assert!(
                placed.branches.contains(&fx.expected),
                "fixture {} expected {:?}, saw {:?}",
                fx.name,
                fx.expected,
                placed.branches
            );
            let after = extend(&fx.dec, &fx.step).unwrap();
            assert!(realises(&after, &placed.placement), "fixture {}", fx.name);
            seen.extend(placed.branches);
        }
        for b in PlacementBranch::ALL {
            assert!(seen.contains(&b), "branch {:?} not exercised", b);
        }
    }

    #[test]
    fn pivot_low_placement_shape() {
        let fx = fixtures::branch_corpus().remove(0);
        assert_eq!(fx.expected, PlacementBranch::PivotLow);
        let placed = place_1_extension(&fx.placement, &fx.dec, &fx.step).unwrap();
        let v = placed.placement.point(VertexId(3)).unwrap();
        // Pivot is (-1,-1); the new vertex sits just right of it and the
        // lower tie endpoint block moved straight up.
        assert_eq!(v.y, rat_int(-1));
        assert!(v.x > rat_int(-1));
        let z = placed.placement.point(VertexId(0)).unwrap();
        assert_eq!(z.x, rat_int(0));
        assert!(z.y.is_positive());
    }

    #[test]
    fn double_shift_reuses_the_upper_point() {
        let corpus = fixtures::branch_corpus();
        let fx = corpus.last().unwrap();
        assert_eq!(fx.expected, PlacementBranch::DoubleShift);
        let placed = place_1_extension(&fx.placement, &fx.dec, &fx.step).unwrap();
        let v = placed.placement.point(VertexId(2)).unwrap();
        assert_eq!(v, &Point::from_ints(3, 3));
        let y = placed.placement.point(VertexId(1)).unwrap();
        assert_eq!(y.x, rat_int(3));
        assert!(y.y < rat_int(3));
    }

    #[test]
    fn transposed_orientation_is_handled() {
        // Same scenario as pivot-low but with the replaced edge in tree 1.
        let fx = fixtures::branch_corpus().remove(0);
        let dec = fx.dec.with_trees_swapped();
        let placement = fx.placement.transpose();
        let step = fx.step.with_trees_swapped();
        assert!(realises(&dec, &placement));
        let placed = place_1_extension(&placement, &dec, &step).unwrap();
        assert_eq!(placed.branches, vec![PlacementBranch::PivotLow]);
        let after = extend(&dec, &step).unwrap();
        assert!(realises(&after, &placed.placement));
    }

    #[test]
    fn safe_epsilon_examples() {
        let g = MultiGraph::from_edges(2, &[(0, 1)]).unwrap();
        let mut pl = Placement::new();
        pl.insert(VertexId(0), Point::from_ints(0, 0));
        pl.insert(VertexId(1), Point::from_ints(3, 1));
        assert_eq!(safe_epsilon(&pl, &g, &BTreeSet::new()).unwrap(), rat_int(1));

        // A doubled pair forms a single class: nothing constrains the bound.
        let g = MultiGraph::from_edges(2, &[(0, 1), (0, 1)]).unwrap();
        let mut pl = Placement::new();
        pl.insert(VertexId(0), Point::from_ints(0, 0));
        pl.insert(VertexId(1), Point::from_ints(1, 1));
        assert_eq!(safe_epsilon(&pl, &g, &BTreeSet::new()).unwrap(), rat_int(1));

        // Injectivity alone bounds the shift by half the separation.
        let g = MultiGraph::from_parts(
            [VertexId(0), VertexId(1)].into(),
            BTreeMap::new(),
        )
        .unwrap();
        let mut pl = Placement::new();
        pl.insert(VertexId(0), Point::from_ints(0, 0));
        pl.insert(VertexId(1), Point::from_ints(0, 1));
        assert_eq!(safe_epsilon(&pl, &g, &BTreeSet::new()).unwrap(), rat(1, 2));
    }

    #[test]
    fn safe_epsilon_shifts_are_sound() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        for seed in 0..30 {
            let dec = random_decomposition(7, 2, seed);
            let res = realise(&dec).unwrap();
            let g = dec.graph();
            let eps = safe_epsilon(&res.placement, g, &BTreeSet::new()).unwrap();
            let classes = g.parallel_components(&BTreeSet::new()).unwrap();
            let col =
                framework_colouring(g, &res.placement).expect("realisation is well-positioned");
            for class in classes.classes() {
                // A random shift strictly below the bound.
                let num = rng.gen_range(1..16i64);
                let dx = &eps * rat(num, 16) * rat_int(if rng.gen_bool(0.5) { 1 } else { -1 });
                let num = rng.gen_range(0..16i64);
                let dy = &eps * rat(num, 16) * rat_int(if rng.gen_bool(0.5) { 1 } else { -1 });
                let moved = res.placement.translate_class(class, &dx, &dy);
                let col2 = framework_colouring(g, &moved)
                    .expect("class shifts below the bound stay well-positioned");
                assert_eq!(col, col2, "seed {seed}");
            }
        }
    }

    #[test]
    fn reflection_preserves_colours() {
        let dec = fixtures::w5_left_decomposition();
        let pl = fixtures::w5_left_placement();
        let col = framework_colouring(dec.graph(), &pl).unwrap();
        for axis in [Axis::X, Axis::Y] {
            let refl = reflect(&pl, axis);
            let col2 = framework_colouring(dec.graph(), &refl).unwrap();
            assert_eq!(col, col2);
        }
        assert_eq!(reflect(&reflect(&pl, Axis::X), Axis::X), pl);
    }

    #[test]
    fn end_to_end_random_realisations() {
        for seed in 0..25 {
            let n = 2 + (seed as usize * 7) % 20;
            let dec = random_decomposition(n, 2, seed);
            let res = realise(&dec).unwrap();
            let report = is_realisation_of(&dec, &res.placement);
            assert!(
                report.isostatic,
                "seed {seed} n {n}: {:?}",
                report.failures
            );
        }
    }

    #[test]
    fn parallel_ties_are_exact() {
        for seed in 100..120 {
            let dec = random_decomposition(12, 2, seed);
            let res = realise(&dec).unwrap();
            for (_, (u, v)) in dec.graph().edges() {
                if dec.graph().pair_multiplicity(u, v) == 2 {
                    let (dx, dy) = res
                        .placement
                        .point(u)
                        .unwrap()
                        .delta(res.placement.point(v).unwrap());
                    assert_eq!(dx.abs(), dy.abs(), "seed {seed}");
                }
            }
        }
    }
}
