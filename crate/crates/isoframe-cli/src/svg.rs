//! Deterministic SVG rendering of realised decompositions: tree-1 edges
//! solid, tree-2 edges dashed, parallel copies as separated arcs, vertices
//! labelled, and a dotted mirror axis for symmetric inputs.

use std::collections::BTreeMap;
use std::fmt::Write;

use isoframe::io::rational_to_decimal;
use isoframe::multigraph::VertexId;
use isoframe::{Placement, TreeDecomposition};

const SIZE: f64 = 480.0;
const MARGIN: f64 = 40.0;

/// Formats with twelve significant digits and trimmed zeros, so output
/// bytes are a pure function of the input.
fn fmt(v: f64) -> String {
    if v == 0.0 {
        return "0".to_string();
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (12 - 1 - magnitude).clamp(0, 17) as usize;
    let mut s = format!("{v:.decimals$}");
    if s.contains('.') {
        while s.ends_with('0') {
            s.pop();
        }
        if s.ends_with('.') {
            s.pop();
        }
    }
    if s == "-0" {
        s = "0".to_string();
    }
    s
}

struct Frame {
    min_x: f64,
    min_y: f64,
    scale: f64,
}

impl Frame {
    fn to_screen(&self, x: f64, y: f64) -> (f64, f64) {
        (
            MARGIN + (x - self.min_x) * self.scale,
            // Flip: world y grows upwards, screen y downwards.
            SIZE - MARGIN - (y - self.min_y) * self.scale,
        )
    }
}

/// Renders the placement; `axis` draws the dotted vertical mirror line at
/// world x = 0.
pub fn render(dec: &TreeDecomposition, pl: &Placement, axis: bool) -> String {
    let points: BTreeMap<VertexId, (f64, f64)> = pl
        .iter()
        .map(|(v, p)| (v, (rational_to_decimal(&p.x), rational_to_decimal(&p.y))))
        .collect();
    let xs: Vec<f64> = points.values().map(|&(x, _)| x).collect();
    let ys: Vec<f64> = points.values().map(|&(_, y)| y).collect();
    let fold = |acc: (f64, f64), v: &f64| (acc.0.min(*v), acc.1.max(*v));
    let (mut min_x, mut max_x) = xs.iter().fold((f64::MAX, f64::MIN), fold);
    let (min_y, max_y) = ys.iter().fold((f64::MAX, f64::MIN), fold);
    if axis {
        min_x = min_x.min(0.0);
        max_x = max_x.max(0.0);
    }
    let span = (max_x - min_x).max(max_y - min_y).max(1e-9);
    let frame = Frame {
        min_x,
        min_y,
        scale: (SIZE - 2.0 * MARGIN) / span,
    };

    let mut out = String::new();
    writeln!(
        out,
        "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{SIZE}\" height=\"{SIZE}\" viewBox=\"0 0 {SIZE} {SIZE}\">"
    )
    .unwrap();
    if axis {
        let (ax, _) = frame.to_screen(0.0, 0.0);
        writeln!(
            out,
            "  <line class=\"axis\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#888\" stroke-dasharray=\"2 4\"/>",
            fmt(ax),
            fmt(MARGIN * 0.5),
            fmt(ax),
            fmt(SIZE - MARGIN * 0.5)
        )
        .unwrap();
    }
    // Group parallel copies so they can be fanned out as arcs.
    let mut by_pair: BTreeMap<(VertexId, VertexId), Vec<(usize, usize)>> = BTreeMap::new();
    for (e, pair) in dec.graph().edges() {
        let tree = dec.tree_of(e).unwrap_or(1);
        by_pair.entry(pair).or_default().push((e.0, tree));
    }
    for ((u, v), copies) in by_pair {
        let (x1, y1) = {
            let &(x, y) = points.get(&u).expect("placed");
            frame.to_screen(x, y)
        };
        let (x2, y2) = {
            let &(x, y) = points.get(&v).expect("placed");
            frame.to_screen(x, y)
        };
        let n = copies.len();
        for (i, (eid, tree)) in copies.iter().enumerate() {
            let dash = if *tree == 2 {
                " stroke-dasharray=\"6 4\""
            } else {
                ""
            };
            if n == 1 {
                writeln!(
                    out,
                    "  <line class=\"t{tree}\" id=\"e{eid}\" x1=\"{}\" y1=\"{}\" x2=\"{}\" y2=\"{}\" stroke=\"#000\" stroke-width=\"1.5\"{dash}/>",
                    fmt(x1), fmt(y1), fmt(x2), fmt(y2)
                )
                .unwrap();
            } else {
                // Separate the copies by bowing them to either side.
                let (mx, my) = ((x1 + x2) / 2.0, (y1 + y2) / 2.0);
                let (dx, dy) = (x2 - x1, y2 - y1);
                let len = (dx * dx + dy * dy).sqrt().max(1e-9);
                let offset = 12.0 * (i as f64 - (n as f64 - 1.0) / 2.0);
                let (cx, cy) = (mx - dy / len * offset, my + dx / len * offset);
                writeln!(
                    out,
                    "  <path class=\"t{tree}\" id=\"e{eid}\" d=\"M {} {} Q {} {} {} {}\" fill=\"none\" stroke=\"#000\" stroke-width=\"1.5\"{dash}/>",
                    fmt(x1), fmt(y1), fmt(cx), fmt(cy), fmt(x2), fmt(y2)
                )
                .unwrap();
            }
        }
    }
    for (v, &(x, y)) in &points {
        let (sx, sy) = frame.to_screen(x, y);
        writeln!(
            out,
            "  <circle cx=\"{}\" cy=\"{}\" r=\"4\" fill=\"#000\"/>",
            fmt(sx),
            fmt(sy)
        )
        .unwrap();
        writeln!(
            out,
            "  <text x=\"{}\" y=\"{}\" font-size=\"12\" font-family=\"sans-serif\">v{}</text>",
            fmt(sx + 7.0),
            fmt(sy - 7.0),
            v.0
        )
        .unwrap();
    }
    out.push_str("</svg>\n");
    out
}
