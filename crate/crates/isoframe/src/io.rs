//! JSON formats shared with the command line tool.
//!
//! Graphs travel as `{"vertices": [...], "edges": [{"id", "u", "v",
//! "tree"?}, ...], "symmetry"?: {...}}` with 1-based tree indices;
//! placements as maps from vertex id to a pair of exact `"num/den"`
//! rationals; construction sequences as step lists carrying the added and
//! deleted endpoint pairs per tree. Rationals never pass through floating
//! point, so writing and re-reading a placement is bit-exact.

use std::collections::{BTreeMap, BTreeSet};

use num_bigint::BigInt;
use num_traits::One;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Placement, Point, Rational};
use crate::henneberg::{extend, ConstructionSequence, ExtensionStep, StepError, TreeMove};
use crate::multigraph::{EdgeId, GraphError, MultiGraph, VertexId};
use crate::sparsity::{DecompositionError, TreeDecomposition};
use crate::symmetry::{validate_symmetric, CsRealisation, SymDiagnostic, SymmetricDecomposition};
use crate::verify::VerificationReport;

#[derive(Debug, Error)]
pub enum IoError {
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
    #[error("graph: {0}")]
    Graph(#[from] GraphError),
    #[error("decomposition: {0}")]
    Decomposition(#[from] DecompositionError),
    #[error("symmetry: {0}")]
    Symmetry(#[from] SymDiagnostic),
    #[error("step: {0}")]
    Step(#[from] StepError),
    #[error("edge {0} carries no tree field")]
    MissingTree(usize),
    #[error("no symmetry block in the input")]
    MissingSymmetry,
    #[error("cannot parse rational {0:?}")]
    BadRational(String),
    #[error("vertex key {0:?} is not an integer")]
    BadVertexKey(String),
    #[error("placement misses vertex {0}")]
    MissingVertex(VertexId),
    #[error("step for vertex {vertex}: no tree-{tree} edge joins {u} and {v}")]
    UnknownDeletedEdge { vertex: usize, tree: usize, u: usize, v: usize },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EdgeJson {
    pub id: usize,
    pub u: usize,
    pub v: usize,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub tree: Option<usize>,
}

/// The shared graph format; `tree` and `symmetry` are optional.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct GraphJson {
    pub vertices: Vec<usize>,
    pub edges: Vec<EdgeJson>,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub symmetry: Option<BTreeMap<String, usize>>,
}

impl GraphJson {
    pub fn from_graph(g: &MultiGraph) -> Self {
        GraphJson {
            vertices: g.vertices().map(|v| v.0).collect(),
            edges: g
                .edges()
                .map(|(e, (u, v))| EdgeJson {
                    id: e.0,
                    u: u.0,
                    v: v.0,
                    tree: None,
                })
                .collect(),
            symmetry: None,
        }
    }

    pub fn from_decomposition(dec: &TreeDecomposition) -> Self {
        let mut json = Self::from_graph(dec.graph());
        for edge in &mut json.edges {
            edge.tree = dec.tree_of(EdgeId(edge.id));
        }
        json
    }

    pub fn from_symmetric(sd: &SymmetricDecomposition) -> Self {
        let mut json = Self::from_decomposition(sd.dec());
        json.symmetry = Some(
            sd.theta()
                .iter()
                .map(|(v, sv)| (v.0.to_string(), sv.0))
                .collect(),
        );
        json
    }

    pub fn to_graph(&self) -> Result<MultiGraph, IoError> {
        let vertices: BTreeSet<VertexId> = self.vertices.iter().map(|&v| VertexId(v)).collect();
        let edges: BTreeMap<EdgeId, (VertexId, VertexId)> = self
            .edges
            .iter()
            .map(|e| (EdgeId(e.id), (VertexId(e.u), VertexId(e.v))))
            .collect();
        Ok(MultiGraph::from_parts(vertices, edges)?)
    }

    /// Requires every edge to carry its tree index.
    pub fn to_decomposition(&self, d: usize) -> Result<TreeDecomposition, IoError> {
        let graph = self.to_graph()?;
        let mut assignment = BTreeMap::new();
        for edge in &self.edges {
            let tree = edge.tree.ok_or(IoError::MissingTree(edge.id))?;
            assignment.insert(EdgeId(edge.id), tree);
        }
        Ok(TreeDecomposition::new(graph, d, assignment)?)
    }

    /// Requires tree fields and the symmetry block.
    pub fn to_symmetric(&self) -> Result<SymmetricDecomposition, IoError> {
        let dec = self.to_decomposition(2)?;
        let block = self.symmetry.as_ref().ok_or(IoError::MissingSymmetry)?;
        let mut theta = BTreeMap::new();
        for (key, &image) in block {
            let v: usize = key
                .parse()
                .map_err(|_| IoError::BadVertexKey(key.clone()))?;
            theta.insert(VertexId(v), VertexId(image));
        }
        Ok(validate_symmetric(&dec, &theta)?)
    }
}

/// Formats a rational as `num/den` with a positive denominator.
pub fn format_rational(r: &Rational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

pub fn parse_rational(s: &str) -> Result<Rational, IoError> {
    let err = || IoError::BadRational(s.to_string());
    match s.split_once('/') {
        Some((num, den)) => {
            let n: BigInt = num.parse().map_err(|_| err())?;
            let d: BigInt = den.parse().map_err(|_| err())?;
            if d == BigInt::from(0) {
                return Err(err());
            }
            Ok(Rational::new(n, d))
        }
        None => {
            let n: BigInt = s.parse().map_err(|_| err())?;
            Ok(Rational::from_integer(n))
        }
    }
}

pub fn placement_to_json(pl: &Placement) -> serde_json::Value {
    let map: BTreeMap<String, [String; 2]> = pl
        .iter()
        .map(|(v, p)| {
            (
                v.0.to_string(),
                [format_rational(&p.x), format_rational(&p.y)],
            )
        })
        .collect();
    serde_json::to_value(map).expect("string map serialises")
}

pub fn placement_from_json(value: &serde_json::Value) -> Result<Placement, IoError> {
    // Accept either the bare map or the symmetric wrapper.
    let map_value = value.get("placement").unwrap_or(value);
    let map: BTreeMap<String, [String; 2]> = serde_json::from_value(map_value.clone())?;
    let mut pl = Placement::new();
    for (key, [x, y]) in map {
        let v: usize = key
            .parse()
            .map_err(|_| IoError::BadVertexKey(key.clone()))?;
        pl.insert(VertexId(v), Point::new(parse_rational(&x)?, parse_rational(&y)?));
    }
    Ok(pl)
}

pub fn cs_realisation_to_json(cs: &CsRealisation) -> serde_json::Value {
    serde_json::json!({
        "axis": "y",
        "placement": placement_to_json(&cs.placement),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct TreeMoveJson {
    pub tree: usize,
    pub deleted: Vec<[usize; 2]>,
    pub added: Vec<[usize; 2]>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StepJson {
    pub vertex: usize,
    pub trees: Vec<TreeMoveJson>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SequenceJson {
    pub d: usize,
    pub base: usize,
    pub steps: Vec<StepJson>,
}

pub fn sequence_to_json(seq: &ConstructionSequence) -> SequenceJson {
    SequenceJson {
        d: seq.d,
        base: seq.base.0,
        steps: seq
            .steps
            .iter()
            .map(|step| StepJson {
                vertex: step.new_vertex.0,
                trees: step
                    .per_tree
                    .iter()
                    .map(|m| TreeMoveJson {
                        tree: m.tree,
                        deleted: m.deleted.iter().map(|&(_, (u, v))| [u.0, v.0]).collect(),
                        added: m
                            .added
                            .iter()
                            .map(|&(_, nbr)| [step.new_vertex.0, nbr.0])
                            .collect(),
                    })
                    .collect(),
            })
            .collect(),
    }
}

/// Rebuilds a construction sequence from its serialised form. Edge ids are
/// assigned afresh in reading order (deleted copies are resolved through
/// their tree, where a pair has at most one copy), so the replayed target
/// matches the exported one up to edge relabelling.
pub fn sequence_from_json(json: &SequenceJson) -> Result<ConstructionSequence, IoError> {
    let base = VertexId(json.base);
    let mut current = TreeDecomposition::k1(base, json.d);
    let mut steps = Vec::new();
    for step_json in &json.steps {
        let mut next_edge = current.graph().fresh_edge_id();
        let mut fresh = || {
            let id = next_edge;
            next_edge = EdgeId(next_edge.0 + 1);
            id
        };
        let mut per_tree = Vec::new();
        for m in &step_json.trees {
            let mut deleted = Vec::new();
            for &[u, v] in &m.deleted {
                let (u, v) = (VertexId(u), VertexId(v));
                let copy = current
                    .graph()
                    .edges_between(u, v)
                    .into_iter()
                    .find(|&e| current.tree_of(e) == Some(m.tree))
                    .ok_or(IoError::UnknownDeletedEdge {
                        vertex: step_json.vertex,
                        tree: m.tree,
                        u: u.0,
                        v: v.0,
                    })?;
                deleted.push((copy, (u.min(v), u.max(v))));
            }
            let added = m
                .added
                .iter()
                .map(|&[_, nbr]| (fresh(), VertexId(nbr)))
                .collect();
            per_tree.push(TreeMove {
                tree: m.tree,
                deleted,
                added,
            });
        }
        per_tree.sort_by_key(|m| m.tree);
        let step = ExtensionStep {
            new_vertex: VertexId(step_json.vertex),
            per_tree,
        };
        current = extend(&current, &step)?;
        steps.push(step);
    }
    Ok(ConstructionSequence {
        d: json.d,
        base,
        steps,
        target: current,
    })
}

pub fn report_to_json(report: &VerificationReport) -> serde_json::Value {
    let colours = report.colouring.as_ref().map(|col| {
        col.colours()
            .iter()
            .map(|(e, c)| (e.0.to_string(), *c))
            .collect::<BTreeMap<String, usize>>()
    });
    serde_json::json!({
        "well_positioned": report.well_positioned,
        "trees_ok": report.trees_ok,
        "monochrome_spanning": report.monochrome_spanning,
        "kernel_dim": report.kernel_dim,
        "isostatic": report.isostatic,
        "colours": colours,
        "failures": report.failures,
    })
}

/// One rational as a float string with twelve significant digits, for
/// presentation-only outputs.
pub fn rational_to_decimal(r: &Rational) -> f64 {
    let digits = 15usize;
    let shift = BigInt::from(10u32).pow(digits as u32);
    let scaled = (r * Rational::from_integer(shift.clone())).round();
    let one = Rational::one();
    let _ = one;
    let num: f64 = scaled.numer().to_string().parse().unwrap_or(f64::NAN);
    let den: f64 = shift.to_string().parse().unwrap_or(f64::NAN);
    num / den
}
