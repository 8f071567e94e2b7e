//! Shared example data: the five-vertex wheel with its two tree
//! decompositions and reference placements, a minimal mirror-symmetric
//! decomposition, and a directed corpus of one-extension configurations that
//! steers the placement engine into each of its geometric branches.
//!
//! Used by the test suites and handy for demos; not part of the core API
//! surface proper.

use std::collections::BTreeMap;

use crate::geometry::{rat, Placement, Point};
use crate::henneberg::{ExtensionStep, TreeMove};
use crate::multigraph::{EdgeId, MultiGraph, VertexId};
use crate::realise2d::PlacementBranch;
use crate::sparsity::TreeDecomposition;

/// The wheel on five vertices: hub 0, rim cycle 1-2-4-3-1, four spokes.
pub fn w5_graph() -> MultiGraph {
    MultiGraph::from_edges(
        5,
        &[
            (1, 2), // e0
            (3, 4), // e1
            (0, 1), // e2
            (0, 4), // e3
            (1, 3), // e4
            (2, 4), // e5
            (0, 2), // e6
            (0, 3), // e7
        ],
    )
    .expect("wheel is well-formed")
}

fn w5_dec(tree1: [usize; 4]) -> TreeDecomposition {
    let assignment: BTreeMap<EdgeId, usize> = (0..8)
        .map(|i| (EdgeId(i), if tree1.contains(&i) { 1 } else { 2 }))
        .collect();
    TreeDecomposition::new(w5_graph(), 2, assignment).expect("valid assignment")
}

/// Wheel decomposition in which the hub meets both trees twice.
pub fn w5_left_decomposition() -> TreeDecomposition {
    w5_dec([0, 1, 2, 3])
}

/// Wheel decomposition in which tree 1 holds three spokes.
pub fn w5_centre_decomposition() -> TreeDecomposition {
    w5_dec([0, 2, 3, 7])
}

/// A placement realising [`w5_left_decomposition`].
pub fn w5_left_placement() -> Placement {
    let mut pl = Placement::new();
    pl.insert(VertexId(0), Point::new(rat(1, 5), rat(-1, 10)));
    pl.insert(VertexId(1), Point::from_ints(-1, -1));
    pl.insert(VertexId(2), Point::from_ints(1, -1));
    pl.insert(VertexId(3), Point::new(rat(-1, 1), rat(6, 5)));
    pl.insert(VertexId(4), Point::new(rat(1, 1), rat(3, 5)));
    pl
}

/// A placement realising [`w5_centre_decomposition`].
pub fn w5_centre_placement() -> Placement {
    let mut pl = Placement::new();
    pl.insert(VertexId(0), Point::new(rat(1, 1), rat(1, 2)));
    pl.insert(VertexId(1), Point::from_ints(-1, -1));
    pl.insert(VertexId(2), Point::new(rat(1, 5), rat(-1, 1)));
    pl.insert(VertexId(3), Point::from_ints(-1, 1));
    pl.insert(VertexId(4), Point::new(rat(-7, 10), rat(1, 5)));
    pl
}

/// The degenerate wheel placement whose spokes all have slope ±1, hence not
/// well-positioned.
pub fn w5_right_placement() -> Placement {
    let mut pl = Placement::new();
    pl.insert(VertexId(0), Point::from_ints(0, 0));
    pl.insert(VertexId(1), Point::from_ints(-1, -1));
    pl.insert(VertexId(2), Point::from_ints(1, -1));
    pl.insert(VertexId(3), Point::from_ints(-1, 1));
    pl.insert(VertexId(4), Point::from_ints(1, 1));
    pl
}

/// Smallest nontrivial mirror-symmetric decomposition: a fixed hub 0 doubly
/// joined to the swapped pair {1, 2}. Returns the decomposition and the
/// vertex involution.
pub fn three_vertex_symmetric() -> (TreeDecomposition, BTreeMap<VertexId, VertexId>) {
    let g = MultiGraph::from_edges(3, &[(0, 1), (0, 1), (0, 2), (0, 2)]).unwrap();
    let assignment = BTreeMap::from([
        (EdgeId(0), 1),
        (EdgeId(1), 2),
        (EdgeId(2), 1),
        (EdgeId(3), 2),
    ]);
    let dec = TreeDecomposition::new(g, 2, assignment).unwrap();
    let theta = BTreeMap::from([
        (VertexId(0), VertexId(0)),
        (VertexId(1), VertexId(2)),
        (VertexId(2), VertexId(1)),
    ]);
    (dec, theta)
}

/// One directed one-extension scenario: a realised decomposition, the step to
/// apply, and the placement branch it must exercise.
pub struct BranchFixture {
    pub name: &'static str,
    pub dec: TreeDecomposition,
    pub placement: Placement,
    pub step: ExtensionStep,
    pub expected: PlacementBranch,
}

fn dec_of(n: usize, edges: &[(usize, usize, usize)]) -> TreeDecomposition {
    let pairs: Vec<(usize, usize)> = edges.iter().map(|&(u, v, _)| (u, v)).collect();
    let g = MultiGraph::from_edges(n, &pairs).unwrap();
    let assignment = edges
        .iter()
        .enumerate()
        .map(|(i, &(_, _, t))| (EdgeId(i), t))
        .collect();
    TreeDecomposition::new(g, 2, assignment).unwrap()
}

fn pl_of(points: &[(i64, i64, i64, i64)]) -> Placement {
    let mut pl = Placement::new();
    for (v, &(xn, xd, yn, yd)) in points.iter().enumerate() {
        pl.insert(VertexId(v), Point::new(rat(xn, xd), rat(yn, yd)));
    }
    pl
}

/// Step attaching `v` to `x` in tree 1 and replacing the tree-2 edge `del`
/// (endpoints `a`, `b`) by edges to both of its endpoints.
fn one_ext_step(v: usize, x: usize, del: usize, a: usize, b: usize, next_edge: usize) -> ExtensionStep {
    ExtensionStep {
        new_vertex: VertexId(v),
        per_tree: vec![
            TreeMove {
                tree: 1,
                deleted: vec![],
                added: vec![(EdgeId(next_edge), VertexId(x))],
            },
            TreeMove {
                tree: 2,
                deleted: vec![(EdgeId(del), (VertexId(a), VertexId(b)))],
                added: vec![
                    (EdgeId(next_edge + 1), VertexId(a)),
                    (EdgeId(next_edge + 2), VertexId(b)),
                ],
            },
        ],
    }
}

/// Hand-placed configurations covering every branch of the one-extension
/// placement rules: the free-line case, the four pivot positions for a
/// doubled pair, both collinear sub-cases, and the two doubled-attachment
/// cases.
pub fn branch_corpus() -> Vec<BranchFixture> {
    let mut out = Vec::new();

    // Doubled pair {0,1}; anchor x = 2 adjacent to both endpoints.
    let tie_base = |x: (i64, i64, i64, i64)| {
        (
            dec_of(3, &[(0, 1, 1), (0, 1, 2), (0, 2, 1), (1, 2, 2)]),
            pl_of(&[(0, 1, 0, 1), (3, 1, 3, 1), x]),
            one_ext_step(3, 2, 1, 0, 1, 4),
        )
    };

    let (dec, placement, step) = tie_base((4, 1, -1, 1));
    out.push(BranchFixture {
        name: "pivot-low",
        dec,
        placement,
        step,
        expected: PlacementBranch::PivotLow,
    });

    let (dec, placement, step) = tie_base((4, 1, 1, 1));
    out.push(BranchFixture {
        name: "pivot-mid",
        dec,
        placement,
        step,
        expected: PlacementBranch::PivotMid,
    });

    // Doubled pair {0,1} with the anchor x = 2 hanging off a bridge vertex 3.
    let bridge = |x: (i64, i64, i64, i64), w: (i64, i64, i64, i64)| {
        (
            dec_of(
                4,
                &[(0, 1, 1), (0, 1, 2), (0, 3, 1), (2, 3, 1), (1, 3, 2), (2, 3, 2)],
            ),
            pl_of(&[(0, 1, 0, 1), (3, 1, 3, 1), x, w]),
            one_ext_step(4, 2, 1, 0, 1, 6),
        )
    };

    let (dec, placement, step) = bridge((-1, 1, 2, 1), (1, 1, 0, 1));
    out.push(BranchFixture {
        name: "pivot-high",
        dec,
        placement,
        step,
        expected: PlacementBranch::PivotHigh,
    });

    // Doubled pair {0,1}; x = 2 sits on the tie line strictly between the
    // endpoints, hanging off the doubled bridge {2,3}; vertex 4 keeps both
    // trees spanning without joining 0 and 1 to any common neighbour, so the
    // contraction rebuild goes through.
    out.push(BranchFixture {
        name: "collinear-contract",
        dec: dec_of(
            5,
            &[
                (0, 1, 1),
                (0, 1, 2),
                (0, 3, 1),
                (2, 3, 1),
                (3, 4, 1),
                (1, 4, 2),
                (4, 2, 2),
                (2, 3, 2),
            ],
        ),
        placement: pl_of(&[
            (0, 1, 0, 1),
            (3, 1, 3, 1),
            (1, 1, 1, 1),
            (3, 1, -1, 1),
            (-5, 1, -6, 1),
        ]),
        step: one_ext_step(5, 2, 1, 0, 1, 8),
        expected: PlacementBranch::CollinearContract,
    });

    // Doubled pair {0,1}; x = 2 tied to y's side, helper 3 keeps trees whole.
    out.push(BranchFixture {
        name: "pivot-above",
        dec: dec_of(
            4,
            &[(0, 1, 1), (0, 1, 2), (1, 2, 1), (0, 2, 2), (0, 3, 1), (1, 3, 2)],
        ),
        placement: pl_of(&[(0, 1, 0, 1), (3, 1, 3, 1), (1, 2, 5, 1), (4, 1, -2, 1)]),
        step: one_ext_step(4, 2, 1, 0, 1, 6),
        expected: PlacementBranch::PivotAbove,
    });

    // Doubled pairs {0,1} and {1,2}; x = 2 sits on the tie line beyond y.
    out.push(BranchFixture {
        name: "collinear-direct",
        dec: dec_of(
            4,
            &[(0, 1, 1), (0, 1, 2), (1, 2, 1), (1, 2, 2), (0, 3, 1), (1, 3, 2)],
        ),
        placement: pl_of(&[(0, 1, 0, 1), (3, 1, 3, 1), (5, 1, 5, 1), (4, 1, -2, 1)]),
        step: one_ext_step(4, 2, 1, 0, 1, 6),
        expected: PlacementBranch::CollinearDirect,
    });

    // Single copy of {0,1} in tree 2 inside a simple K4.
    out.push(BranchFixture {
        name: "free-line",
        dec: dec_of(
            4,
            &[(0, 2, 1), (0, 3, 1), (1, 3, 1), (0, 1, 2), (1, 2, 2), (2, 3, 2)],
        ),
        placement: pl_of(&[(0, 1, 0, 1), (3, 2, 4, 1), (4, 1, 1, 1), (8, 1, 6, 1)]),
        step: one_ext_step(4, 2, 3, 0, 1, 6),
        expected: PlacementBranch::FreeLine,
    });

    // New vertex doubly joined to 0; the replaced pair {0,2} has no tree-1
    // copy.
    out.push(BranchFixture {
        name: "double-free",
        dec: dec_of(3, &[(0, 1, 1), (0, 1, 2), (1, 2, 1), (0, 2, 2)]),
        placement: pl_of(&[(0, 1, 0, 1), (3, 1, 3, 1), (1, 1, 4, 1)]),
        step: one_ext_step(3, 0, 3, 0, 2, 4),
        expected: PlacementBranch::DoubleFree,
    });

    // New vertex doubly joined to 0; the replaced pair {0,1} keeps its
    // tree-1 copy.
    out.push(BranchFixture {
        name: "double-shift",
        dec: dec_of(2, &[(0, 1, 1), (0, 1, 2)]),
        placement: pl_of(&[(0, 1, 0, 1), (3, 1, 3, 1)]),
        step: one_ext_step(2, 0, 1, 0, 1, 2),
        expected: PlacementBranch::DoubleShift,
    });

    out
}
