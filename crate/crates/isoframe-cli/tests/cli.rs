//! End-to-end tests driving the compiled binary.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use isoframe::fixtures;
use isoframe::io::{placement_to_json, GraphJson, SequenceJson};
use isoframe::symmetry::validate_symmetric;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_isoframe"))
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("isoframe-cli-{}-{name}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write_json(path: &Path, value: &impl serde::Serialize) {
    std::fs::write(path, serde_json::to_string_pretty(value).unwrap()).unwrap();
}

fn run(cmd: &mut Command) -> Output {
    cmd.output().expect("binary runs")
}

fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).to_string()
}

#[test]
fn check_tight_on_the_wheel() {
    let dir = scratch("tight");
    let graph = dir.join("w5.json");
    write_json(&graph, &GraphJson::from_graph(&fixtures::w5_graph()));
    let out = run(bin().args(["check-tight", "--d", "2", graph.to_str().unwrap()]));
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("\"verdict\":\"tight\""));
}

#[test]
fn check_tight_rejects_k5() {
    let dir = scratch("k5");
    let mut pairs = Vec::new();
    for u in 0..5usize {
        for v in (u + 1)..5 {
            pairs.push((u, v));
        }
    }
    let k5 = isoframe::MultiGraph::from_edges(5, &pairs).unwrap();
    let graph = dir.join("k5.json");
    write_json(&graph, &GraphJson::from_graph(&k5));
    let out = run(bin().args(["check-tight", graph.to_str().unwrap()]));
    assert_eq!(out.status.code(), Some(1));
    assert!(stdout(&out).contains("violating"));
}

#[test]
fn decompose_sequence_realise_verify() {
    let dir = scratch("pipeline-w5");
    let graph = dir.join("w5.json");
    write_json(&graph, &GraphJson::from_graph(&fixtures::w5_graph()));

    let dec_path = dir.join("w5.dec.json");
    let out = run(bin().args([
        "decompose",
        graph.to_str().unwrap(),
        "-o",
        dec_path.to_str().unwrap(),
    ]));
    assert_eq!(out.status.code(), Some(0));
    let dec_json: GraphJson =
        serde_json::from_str(&std::fs::read_to_string(&dec_path).unwrap()).unwrap();
    let dec = dec_json.to_decomposition(2).unwrap();
    assert!(isoframe::sparsity::verify_decomposition(&dec));

    let seq_path = dir.join("w5.seq.json");
    let out = run(bin().args([
        "sequence",
        dec_path.to_str().unwrap(),
        "-o",
        seq_path.to_str().unwrap(),
    ]));
    assert_eq!(out.status.code(), Some(0));
    let seq: SequenceJson =
        serde_json::from_str(&std::fs::read_to_string(&seq_path).unwrap()).unwrap();
    assert_eq!(seq.steps.len(), 4);

    let place_path = dir.join("w5.placement.json");
    let out = run(bin().args([
        "realise",
        dec_path.to_str().unwrap(),
        "-o",
        place_path.to_str().unwrap(),
    ]));
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("\"isostatic\":true"));

    let out = run(bin().args([
        "verify",
        dec_path.to_str().unwrap(),
        place_path.to_str().unwrap(),
    ]));
    assert_eq!(out.status.code(), Some(0));

    // Batch mode over the same pair.
    let out = run(bin().args(["verify", "--batch", dir.to_str().unwrap()]));
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("w5: ok"));
}

#[test]
fn verify_names_the_ill_positioned_edge() {
    let dir = scratch("badplace");
    let dec_path = dir.join("w5.dec.json");
    write_json(
        &dec_path,
        &GraphJson::from_decomposition(&fixtures::w5_left_decomposition()),
    );
    let place_path = dir.join("bad.json");
    std::fs::write(
        &place_path,
        serde_json::to_string(&placement_to_json(&fixtures::w5_right_placement())).unwrap(),
    )
    .unwrap();
    let out = run(bin().args([
        "verify",
        dec_path.to_str().unwrap(),
        place_path.to_str().unwrap(),
    ]));
    assert_eq!(out.status.code(), Some(1));
    let text = stdout(&out);
    assert!(text.contains("\"well_positioned\":false"));
    assert!(text.contains("ill-positioned"), "diagnostic names the failure: {text}");
}

#[test]
fn realise_sym_emits_axis() {
    let dir = scratch("sym");
    let (dec, theta) = fixtures::three_vertex_symmetric();
    let sd = validate_symmetric(&dec, &theta).unwrap();
    let input = dir.join("sym.json");
    write_json(&input, &GraphJson::from_symmetric(&sd));
    let place = dir.join("sym.placement.json");
    let out = run(bin().args([
        "realise-sym",
        input.to_str().unwrap(),
        "-o",
        place.to_str().unwrap(),
    ]));
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout(&out).contains("\"reflection_exact\":true"));
    let value: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&place).unwrap()).unwrap();
    assert_eq!(value["axis"], "y");
    // The emitted placement satisfies the exact reflection equation.
    let pl = isoframe::io::placement_from_json(&value).unwrap();
    assert!(isoframe::symmetry::reflection_equation_holds(&pl, sd.theta()));
}

#[test]
fn render_is_deterministic_and_counts_match() {
    let dir = scratch("render");
    let dec = fixtures::w5_left_decomposition();
    let dec_path = dir.join("w5.dec.json");
    write_json(&dec_path, &GraphJson::from_decomposition(&dec));
    let place_path = dir.join("w5.placement.json");
    std::fs::write(
        &place_path,
        serde_json::to_string(&placement_to_json(&fixtures::w5_left_placement())).unwrap(),
    )
    .unwrap();
    let svg1 = dir.join("a.svg");
    let svg2 = dir.join("b.svg");
    for target in [&svg1, &svg2] {
        let out = run(bin().args([
            "render",
            dec_path.to_str().unwrap(),
            place_path.to_str().unwrap(),
            "-o",
            target.to_str().unwrap(),
        ]));
        assert_eq!(out.status.code(), Some(0));
    }
    let a = std::fs::read(&svg1).unwrap();
    let b = std::fs::read(&svg2).unwrap();
    assert_eq!(a, b, "same input must give identical bytes");
    let text = String::from_utf8(a).unwrap();
    assert_eq!(text.matches("<circle").count(), 5);
    assert_eq!(text.matches("class=\"t1\"").count(), 4);
    assert_eq!(text.matches("class=\"t2\"").count(), 4);
    assert_eq!(text.matches("stroke-dasharray=\"6 4\"").count(), 4);
}

#[test]
fn render_draws_parallel_copies_as_arcs() {
    let dir = scratch("double");
    let g = isoframe::MultiGraph::from_edges(2, &[(0, 1), (0, 1)]).unwrap();
    let dec = isoframe::sparsity::decompose(&g, 2).unwrap();
    let res = isoframe::realise2d::realise(&dec).unwrap();
    let dec_path = dir.join("d.dec.json");
    write_json(&dec_path, &GraphJson::from_decomposition(&dec));
    let place_path = dir.join("d.placement.json");
    std::fs::write(
        &place_path,
        serde_json::to_string(&placement_to_json(&res.placement)).unwrap(),
    )
    .unwrap();
    let svg = dir.join("d.svg");
    let out = run(bin().args([
        "render",
        dec_path.to_str().unwrap(),
        place_path.to_str().unwrap(),
        "-o",
        svg.to_str().unwrap(),
    ]));
    assert_eq!(out.status.code(), Some(0));
    let text = std::fs::read_to_string(&svg).unwrap();
    assert_eq!(text.matches("<path").count(), 2, "two distinct curved strokes");
}

#[test]
fn render_refuses_bad_placements_without_force() {
    let dir = scratch("force");
    let dec_path = dir.join("w5.dec.json");
    write_json(
        &dec_path,
        &GraphJson::from_decomposition(&fixtures::w5_left_decomposition()),
    );
    let place_path = dir.join("bad.json");
    std::fs::write(
        &place_path,
        serde_json::to_string(&placement_to_json(&fixtures::w5_right_placement())).unwrap(),
    )
    .unwrap();
    let svg = dir.join("out.svg");
    let out = run(bin().args([
        "render",
        dec_path.to_str().unwrap(),
        place_path.to_str().unwrap(),
        "-o",
        svg.to_str().unwrap(),
    ]));
    assert_eq!(out.status.code(), Some(1));
    assert!(!svg.exists());
    let out = run(bin().args([
        "render",
        dec_path.to_str().unwrap(),
        place_path.to_str().unwrap(),
        "-o",
        svg.to_str().unwrap(),
        "--force",
    ]));
    assert_eq!(out.status.code(), Some(0));
    assert!(svg.exists());
}

#[test]
fn generator_outputs_are_usable() {
    let dir = scratch("gen");
    let g_path = dir.join("g.json");
    let out = run(bin().args([
        "gen",
        "--n",
        "8",
        "--seed",
        "1",
        "-o",
        g_path.to_str().unwrap(),
    ]));
    assert_eq!(out.status.code(), Some(0));
    let json: GraphJson = serde_json::from_str(&std::fs::read_to_string(&g_path).unwrap()).unwrap();
    assert!(isoframe::sparsity::verify_decomposition(
        &json.to_decomposition(2).unwrap()
    ));

    let s_path = dir.join("s.json");
    let out = run(bin().args([
        "gen",
        "--orbits",
        "3",
        "--seed",
        "2",
        "-o",
        s_path.to_str().unwrap(),
    ]));
    assert_eq!(out.status.code(), Some(0));
    let json: GraphJson = serde_json::from_str(&std::fs::read_to_string(&s_path).unwrap()).unwrap();
    assert!(json.to_symmetric().is_ok());
}

#[test]
fn seeded_pipeline_runs_clean() {
    // gen -> decompose -> sequence -> realise -> verify for 100 seeds.
    let dir = scratch("pipe100");
    for seed in 0..100u64 {
        let g = dir.join("g.json");
        let d = dir.join("d.json");
        let q = dir.join("q.json");
        let p = dir.join("p.json");
        let out = run(bin().args([
            "gen",
            "--n",
            "6",
            "--seed",
            &seed.to_string(),
            "-o",
            g.to_str().unwrap(),
        ]));
        assert_eq!(out.status.code(), Some(0), "gen seed {seed}");
        let out = run(bin().args(["decompose", g.to_str().unwrap(), "-o", d.to_str().unwrap()]));
        assert_eq!(out.status.code(), Some(0), "decompose seed {seed}");
        let out = run(bin().args(["sequence", d.to_str().unwrap(), "-o", q.to_str().unwrap()]));
        assert_eq!(out.status.code(), Some(0), "sequence seed {seed}");
        let out = run(bin().args(["realise", d.to_str().unwrap(), "-o", p.to_str().unwrap()]));
        assert_eq!(out.status.code(), Some(0), "realise seed {seed}");
        let out = run(bin().args(["verify", d.to_str().unwrap(), p.to_str().unwrap()]));
        assert_eq!(out.status.code(), Some(0), "verify seed {seed}");
    }
}
