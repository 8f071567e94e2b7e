//! Spanning-tree decompositions of loop-free multigraphs and certified
//! isostatic placements in the plane with the maximum norm.
//!
//! The crate is organised around one pipeline:
//!
//! * [`multigraph`] — the loop-free multigraph representation with stable
//!   edge identities for parallel copies.
//! * [`sparsity`] — (d,d)-tightness certificates and extraction of
//!   edge-disjoint spanning-tree decompositions via matroid union.
//! * [`henneberg`] — vertex extensions/reductions on tree decompositions and
//!   construction sequences down to the one-vertex graph.
//! * [`realise2d`] — geometric replay of a construction sequence in exact
//!   rational arithmetic, producing a placement whose induced edge colouring
//!   recovers the prescribed trees.
//! * [`verify`] — the independent checker: framework colourings,
//!   well-positionedness, monochrome spanning trees and the exact kernel
//!   dimension of the rigidity matrix.
//! * [`symmetry`] — mirror-symmetric decompositions and their reflection
//!   symmetric placements.
//! * [`io`] — the JSON formats shared with the command line tool.

pub mod fixtures;
pub mod geometry;
pub mod henneberg;
pub mod io;
pub mod multigraph;
pub mod realise2d;
pub mod sparsity;
pub mod symmetry;
mod union_find;
pub mod verify;

pub use geometry::{Axis, Placement, Point, Rational};
pub use multigraph::{EdgeId, MultiGraph, VertexId};
pub use sparsity::TreeDecomposition;
