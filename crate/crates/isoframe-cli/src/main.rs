//! Command line interface: tightness checks, tree decompositions,
//! construction sequences, certified placements (plain and mirror
//! symmetric), independent verification, figure rendering and a seeded
//! generator.
//!
//! Exit codes: 0 on success, 1 on a domain failure (with a JSON diagnostic
//! on standard output), 2 on usage or i/o errors.

mod svg;

use std::io::Read;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use isoframe::henneberg::{build_sequence, random_decomposition};
use isoframe::io::{
    cs_realisation_to_json, placement_from_json, placement_to_json, report_to_json,
    sequence_to_json, GraphJson,
};
use isoframe::realise2d::realise;
use isoframe::sparsity::{check_tight, decompose, TightnessCertificate};
use isoframe::symmetry::{random_symmetric_decomposition, realise_cs, reflection_equation_holds};
use isoframe::verify::is_realisation_of;

#[derive(Parser)]
#[command(name = "isoframe", version, about = "Spanning-tree decompositions and certified isostatic placements in the max-norm plane")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Decide whether a multigraph packs into d edge-disjoint spanning trees.
    CheckTight {
        /// Graph JSON file, or - for standard input.
        input: String,
        #[arg(long, default_value_t = 2)]
        d: usize,
    },
    /// Extract a d-tree decomposition (or report the violating vertex set).
    Decompose {
        input: String,
        #[arg(long, default_value_t = 2)]
        d: usize,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Export the vertex-by-vertex construction sequence of a decomposition.
    Sequence {
        input: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Compute a certified placement of a two-tree decomposition.
    Realise {
        input: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Independently verify that a placement realises a decomposition.
    Verify {
        /// Decomposition JSON (ignored with --batch).
        dec: Option<String>,
        /// Placement JSON.
        placement: Option<String>,
        /// Verify every `<stem>.dec.json` / `<stem>.placement.json` pair in
        /// a directory.
        #[arg(long)]
        batch: Option<PathBuf>,
    },
    /// Compute a mirror-symmetric placement of a symmetric decomposition.
    RealiseSym {
        input: String,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
    /// Render a realised decomposition as an SVG figure.
    Render {
        dec: String,
        placement: String,
        #[arg(short, long)]
        output: PathBuf,
        /// Render even if the placement fails verification.
        #[arg(long)]
        force: bool,
    },
    /// Generate a random decomposition (or a symmetric one with --orbits).
    Gen {
        #[arg(long, default_value_t = 8)]
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 2)]
        d: usize,
        /// Build a mirror-symmetric decomposition on 2*orbits+1 vertices.
        #[arg(long)]
        orbits: Option<usize>,
        #[arg(short, long)]
        output: Option<PathBuf>,
    },
}

enum Failure {
    /// Domain outcome: diagnostic JSON on stdout, exit 1.
    Domain(serde_json::Value),
    /// Usage or i/o problem: message on stderr, exit 2.
    Io(String),
}

impl<E: std::fmt::Display> From<E> for Failure {
    fn from(e: E) -> Self {
        Failure::Io(e.to_string())
    }
}

fn read_input(path: &str) -> Result<String, Failure> {
    if path == "-" {
        let mut buf = String::new();
        std::io::stdin().read_to_string(&mut buf)?;
        Ok(buf)
    } else {
        Ok(std::fs::read_to_string(path)?)
    }
}

fn read_graph_json(path: &str) -> Result<GraphJson, Failure> {
    Ok(serde_json::from_str(&read_input(path)?)?)
}

fn emit(out: &Option<PathBuf>, text: &str) -> Result<(), Failure> {
    match out {
        Some(path) => std::fs::write(path, text)?,
        None => println!("{text}"),
    }
    Ok(())
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::CheckTight { input, d } => {
            let g = read_graph_json(&input)?.to_graph()?;
            match check_tight(&g, d) {
                TightnessCertificate::Tight => {
                    println!("{}", serde_json::json!({"verdict": "tight"}));
                    Ok(())
                }
                TightnessCertificate::Violating(v) => Err(Failure::Domain(
                    serde_json::json!({"verdict": "violating", "violation": v}),
                )),
            }
        }
        Command::Decompose { input, d, output } => {
            let g = read_graph_json(&input)?.to_graph()?;
            match decompose(&g, d) {
                Ok(dec) => {
                    let json = GraphJson::from_decomposition(&dec);
                    emit(&output, &serde_json::to_string_pretty(&json)?)
                }
                Err(v) => Err(Failure::Domain(
                    serde_json::json!({"verdict": "violating", "violation": v}),
                )),
            }
        }
        Command::Sequence { input, output } => {
            let dec = read_graph_json(&input)?.to_decomposition(2)?;
            match build_sequence(&dec) {
                Ok(seq) => emit(&output, &serde_json::to_string_pretty(&sequence_to_json(&seq))?),
                Err(e) => Err(Failure::Domain(serde_json::json!({"error": e.to_string()}))),
            }
        }
        Command::Realise { input, output } => {
            let dec = read_graph_json(&input)?.to_decomposition(2)?;
            let res = realise(&dec)
                .map_err(|e| Failure::Domain(serde_json::json!({"error": e.to_string()})))?;
            let report = is_realisation_of(&dec, &res.placement);
            emit(&output, &serde_json::to_string_pretty(&placement_to_json(&res.placement))?)?;
            if output.is_some() {
                println!("{}", report_to_json(&report));
            }
            if report.isostatic {
                Ok(())
            } else {
                Err(Failure::Domain(report_to_json(&report)))
            }
        }
        Command::Verify { dec, placement, batch } => {
            if let Some(dir) = batch {
                return verify_batch(&dir);
            }
            let (dec, placement) = match (dec, placement) {
                (Some(d), Some(p)) => (d, p),
                _ => return Err(Failure::Io("verify needs DEC and PLACEMENT (or --batch)".into())),
            };
            let dec = read_graph_json(&dec)?.to_decomposition(2)?;
            let pl = placement_from_json(&serde_json::from_str(&read_input(&placement)?)?)?;
            let report = is_realisation_of(&dec, &pl);
            println!("{}", report_to_json(&report));
            if report.isostatic {
                Ok(())
            } else {
                Err(Failure::Domain(serde_json::Value::Null))
            }
        }
        Command::RealiseSym { input, output } => {
            let sd = read_graph_json(&input)?.to_symmetric()?;
            let res = realise_cs(&sd)
                .map_err(|e| Failure::Domain(serde_json::json!({"error": e.to_string()})))?;
            let report = is_realisation_of(sd.dec(), &res.placement);
            let mirror_exact = reflection_equation_holds(&res.placement, sd.theta());
            emit(&output, &serde_json::to_string_pretty(&cs_realisation_to_json(&res))?)?;
            if output.is_some() {
                println!(
                    "{}",
                    serde_json::json!({"report": report_to_json(&report), "reflection_exact": mirror_exact})
                );
            }
            if report.isostatic && mirror_exact {
                Ok(())
            } else {
                Err(Failure::Domain(report_to_json(&report)))
            }
        }
        Command::Render { dec, placement, output, force } => {
            let json = read_graph_json(&dec)?;
            let dec = json.to_decomposition(2)?;
            let pl = placement_from_json(&serde_json::from_str(&read_input(&placement)?)?)?;
            let report = is_realisation_of(&dec, &pl);
            if !report.isostatic && !force {
                return Err(Failure::Domain(report_to_json(&report)));
            }
            let axis = json.symmetry.is_some();
            std::fs::write(&output, svg::render(&dec, &pl, axis))?;
            Ok(())
        }
        Command::Gen { n, seed, d, orbits, output } => {
            let json = match orbits {
                Some(k) => GraphJson::from_symmetric(&random_symmetric_decomposition(k, seed)),
                None => GraphJson::from_decomposition(&random_decomposition(n, d, seed)),
            };
            emit(&output, &serde_json::to_string_pretty(&json)?)
        }
    }
}

/// Verifies every `<stem>.dec.json` / `<stem>.placement.json` pair found in
/// the directory, fanning the pure checks out over the available cores.
fn verify_batch(dir: &Path) -> Result<(), Failure> {
    let mut stems = Vec::new();
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        let name = path.file_name().and_then(|s| s.to_str()).unwrap_or("");
        if let Some(stem) = name.strip_suffix(".dec.json") {
            if dir.join(format!("{stem}.placement.json")).exists() {
                stems.push(stem.to_string());
            }
        }
    }
    stems.sort();
    let results: Vec<(String, Result<bool, String>)> = std::thread::scope(|scope| {
        let handles: Vec<_> = stems
            .iter()
            .map(|stem| {
                let stem = stem.clone();
                let dir = dir.to_path_buf();
                scope.spawn(move || {
                    let work = |stem: &str| -> Result<bool, String> {
                        let dec_text = std::fs::read_to_string(dir.join(format!("{stem}.dec.json")))
                            .map_err(|e| e.to_string())?;
                        let dec: GraphJson =
                            serde_json::from_str(&dec_text).map_err(|e| e.to_string())?;
                        let dec = dec.to_decomposition(2).map_err(|e| e.to_string())?;
                        let pl_text =
                            std::fs::read_to_string(dir.join(format!("{stem}.placement.json")))
                                .map_err(|e| e.to_string())?;
                        let pl = placement_from_json(
                            &serde_json::from_str(&pl_text).map_err(|e| e.to_string())?,
                        )
                        .map_err(|e| e.to_string())?;
                        Ok(is_realisation_of(&dec, &pl).isostatic)
                    };
                    let outcome = work(&stem);
                    (stem, outcome)
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().expect("verifier thread")).collect()
    });
    let mut all_ok = true;
    for (stem, outcome) in &results {
        match outcome {
            Ok(true) => println!("{stem}: ok"),
            Ok(false) => {
                println!("{stem}: FAILED");
                all_ok = false;
            }
            Err(e) => {
                println!("{stem}: error {e}");
                all_ok = false;
            }
        }
    }
    if all_ok {
        Ok(())
    } else {
        Err(Failure::Domain(serde_json::json!({"batch": "failures"})))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(Failure::Domain(value)) => {
            if !value.is_null() {
                println!("{value}");
            }
            ExitCode::from(1)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
