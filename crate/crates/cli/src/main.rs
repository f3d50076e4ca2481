use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{Context, Result};
use clap::{Parser, Subcommand};
use mdim::embed::{is_outerplanar, outerplanar_embed};
use mdim::gen::{gen_instance, Family};
use mdim::graph::DistanceMatrix;
use mdim::harness::{render_report, run_all, HarnessConfig};
use mdim::outerplanar::Instance;
use mdim::reductions::{one_negative_transform, CnfFormula};
use mdim::resolve::{is_resolving_dm, normalize_landmarks, requirement1_dm, requirement2_dm, Req2Context};
use mdim::solver::{solver_by_name, NAMES};
use mdim::{Graph, MdimError};
use serde_json::{json, Value};

/// Post-hoc verification needs the full distance matrix; skip it above this.
const VERIFY_LIMIT: usize = 5000;

const EXIT_USAGE: u8 = 1;
const EXIT_INPUT: u8 = 2;
const EXIT_DISCREPANCY: u8 = 3;

#[derive(Parser)]
#[command(name = "mdim", version, about = "Metric dimension solvers for outerplanar graphs and trees")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Compute a metric basis.
    Solve {
        file: PathBuf,
        #[arg(long, default_value = "auto", value_parser = clap::builder::PossibleValuesParser::new(NAMES))]
        algo: String,
    },
    /// Check a landmark set: resolving, neighbour and face conditions.
    Verify {
        file: PathBuf,
        /// Comma-separated vertex ids.
        #[arg(value_delimiter = ',', num_args = 0..)]
        landmarks: Vec<usize>,
    },
    /// Detailed report of both conditions, with per-face configurations.
    CheckReqs {
        file: PathBuf,
        #[arg(value_delimiter = ',', num_args = 0..)]
        landmarks: Vec<usize>,
    },
    /// Print a generated instance as an edge list.
    Gen {
        family: Family,
        n: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Apply the one-negative transform to a DIMACS formula.
    Reduce { file: PathBuf },
    /// Run the oracle and property suites.
    CrossValidate {
        #[arg(long, default_value_t = 8)]
        n_max: usize,
        #[arg(long, default_value_t = 500)]
        trials: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Where failing instances are written.
        #[arg(long, default_value = "fixtures")]
        fixtures: PathBuf,
        #[arg(long, hide = true)]
        inject_fault: bool,
    },
    /// Time solvers over generated instances; CSV on stdout.
    Bench {
        #[arg(long, value_delimiter = ',', default_values = ["tree", "outerplanar"])]
        families: Vec<Family>,
        #[arg(long, value_delimiter = ',', default_values = ["10", "20", "30"])]
        sizes: Vec<usize>,
        #[arg(long, default_value_t = 3)]
        seeds: u64,
        #[arg(long, value_delimiter = ',', default_values = ["auto"])]
        algos: Vec<String>,
    },
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load_graph(path: &Path) -> Result<Graph> {
    Ok(Graph::parse_edge_list(&read(path)?)?)
}

/// Writes to stdout, ignoring a closed pipe.
fn emit(text: &str) {
    let _ = std::io::stdout().lock().write_all(text.as_bytes());
}

fn print_json(v: &Value) {
    emit(&format!("{}\n", serde_json::to_string_pretty(v).expect("json values serialize")));
}

fn error_kind(e: &MdimError) -> &'static str {
    match e {
        MdimError::InvalidVertex { .. } => "InvalidVertex",
        MdimError::SelfLoop(_) => "SelfLoop",
        MdimError::ParallelEdge(..) => "ParallelEdge",
        MdimError::Parse { .. } => "Parse",
        MdimError::DisconnectedInput => "DisconnectedInput",
        MdimError::NotOuterplanar(_) => "NotOuterplanar",
        MdimError::NotATree => "NotATree",
        MdimError::TooSmall { .. } => "TooSmall",
        MdimError::TooLarge(_) => "TooLarge",
        MdimError::AmbiguousRepresentative { .. } => "AmbiguousRepresentative",
        MdimError::IllDefined { .. } => "IllDefined",
        MdimError::InvalidFormula(_) => "InvalidFormula",
        MdimError::UnknownAlgorithm(_) => "UnknownAlgorithm",
        MdimError::InternalInconsistency(_) => "InternalInconsistency",
    }
}

fn report_error(e: &anyhow::Error) -> u8 {
    let (kind, code) = match e.downcast_ref::<MdimError>() {
        Some(MdimError::InternalInconsistency(_)) => ("InternalInconsistency", EXIT_DISCREPANCY),
        Some(MdimError::UnknownAlgorithm(_)) => ("UnknownAlgorithm", EXIT_USAGE),
        Some(m) => (error_kind(m), EXIT_INPUT),
        None => ("Io", EXIT_INPUT),
    };
    print_json(&json!({ "schema": 1, "error": { "kind": kind, "message": format!("{e:#}") } }));
    code
}

fn trace_enabled() -> bool {
    std::env::var("MDIM_TRACE").is_ok_and(|v| v == "1")
}

fn solve(file: &Path, algo: &str) -> Result<u8> {
    let g = load_graph(file)?;
    let solver = solver_by_name(algo)?;
    let start = Instant::now();
    let sol = solver.solve(&g)?;
    let elapsed_ms = start.elapsed().as_secs_f64() * 1000.0;
    let mut warning = sol.warning.clone();
    let verified = if g.n() <= VERIFY_LIMIT {
        is_resolving_dm(&DistanceMatrix::new(&g), &sol.landmarks).resolved
    } else {
        warning.get_or_insert_with(|| format!("not verified: more than {VERIFY_LIMIT} vertices"));
        false
    };
    if trace_enabled() && sol.algorithm == "outerplanar" && g.n() >= 3 {
        let inst = Instance::new(&g)?;
        let dump = json!({ "dual_tree": inst.tree, "trace": sol.trace });
        eprintln!("{}", serde_json::to_string(&dump)?);
    }
    let mut out = json!({
        "schema": 1,
        "metric_dimension": sol.landmarks.len(),
        "landmarks": sol.landmarks,
        "algorithm": sol.algorithm,
        "verified": verified,
        "elapsed_ms": elapsed_ms,
    });
    if let Some(w) = warning {
        out["warning"] = json!(w);
    }
    print_json(&out);
    let discrepancy = !verified && g.n() <= VERIFY_LIMIT;
    Ok(if discrepancy { EXIT_DISCREPANCY } else { 0 })
}

fn verify(file: &Path, landmarks: &[usize], detailed: bool) -> Result<u8> {
    let g = load_graph(file)?;
    let l = normalize_landmarks(&g, landmarks)?;
    let dm = DistanceMatrix::new(&g);
    let res = is_resolving_dm(&dm, &l);
    let r1 = requirement1_dm(&dm, &g, &l);
    let mut out = json!({ "schema": 1, "landmarks": l, "resolving": res.resolved, "witness": res.witness });
    if detailed {
        out["req1"] = json!(r1);
    } else {
        out["req1"] = json!(r1.satisfied);
    }
    if g.is_connected() && g.n() >= 3 && is_outerplanar(&g) {
        let emb = outerplanar_embed(&g)?;
        let r2 = requirement2_dm(&Req2Context::new(&g, &dm, &emb), &l)?;
        if detailed {
            out["req2"] = json!(r2);
            let inst = Instance::new(&g)?;
            let mut confs = Vec::new();
            for node in 0..inst.tree.len() {
                if !l.is_empty() {
                    confs.push(json!(inst.construct_conf(node, &l)?));
                }
            }
            out["configurations"] = json!(confs);
        } else {
            out["req2"] = json!(r2.satisfied);
        }
    }
    print_json(&out);
    Ok(0)
}

fn reduce(file: &Path) -> Result<u8> {
    let f = CnfFormula::parse_dimacs(&read(file)?)?;
    emit(&one_negative_transform(&f)?.to_dimacs());
    Ok(0)
}

fn cross_validate(cfg: HarnessConfig, fixtures: &Path) -> Result<u8> {
    let results = run_all(&cfg);
    emit(&render_report(&cfg, &results));
    let mut failed = false;
    for r in &results {
        failed |= !r.passed();
        for f in &r.fixtures {
            std::fs::create_dir_all(fixtures).with_context(|| format!("cannot create {}", fixtures.display()))?;
            std::fs::write(fixtures.join(format!("{}.txt", f.name)), f.graph.to_edge_list())?;
        }
    }
    Ok(if failed { EXIT_DISCREPANCY } else { 0 })
}

fn bench(families: &[Family], sizes: &[usize], seeds: u64, algos: &[String]) -> Result<u8> {
    let solvers = algos.iter().map(|a| solver_by_name(a)).collect::<mdim::Result<Vec<_>>>()?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    writeln!(out, "family,n,seed,algo,k,elapsed_ms")?;
    for &family in families {
        for &n in sizes {
            for seed in 0..seeds {
                let g = gen_instance(family, n, seed);
                for s in &solvers {
                    let start = Instant::now();
                    match s.solve(&g) {
                        Ok(sol) => {
                            let ms = start.elapsed().as_secs_f64() * 1000.0;
                            writeln!(out, "{family},{n},{seed},{},{},{ms:.3}", sol.algorithm, sol.landmarks.len())?;
                        }
                        Err(e) => eprintln!("{family},{n},{seed},{}: {e}", s.name()),
                    }
                }
            }
        }
    }
    Ok(0)
}

fn run(cli: Cli) -> Result<u8> {
    match cli.cmd {
        Cmd::Solve { file, algo } => solve(&file, &algo),
        Cmd::Verify { file, landmarks } => verify(&file, &landmarks, false),
        Cmd::CheckReqs { file, landmarks } => verify(&file, &landmarks, true),
        Cmd::Gen { family, n, seed } => {
            emit(&gen_instance(family, n, seed).to_edge_list());
            Ok(0)
        }
        Cmd::Reduce { file } => reduce(&file),
        Cmd::CrossValidate { n_max, trials, seed, fixtures, inject_fault } => {
            cross_validate(HarnessConfig { n_max, trials, seed, inject_fault }, &fixtures)
        }
        Cmd::Bench { families, sizes, seeds, algos } => bench(&families, &sizes, seeds, &algos),
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(code) => ExitCode::from(code),
        Err(e) => ExitCode::from(report_error(&e)),
    }
}
