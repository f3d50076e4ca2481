use std::path::Path;
use std::process::{Command, Output};

use mdim::gen::{gen_instance, Family};
use mdim::resolve::is_resolving;
use mdim::Graph;
use serde_json::Value;

fn mdim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mdim")).args(args).output().unwrap()
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let p = dir.join(name);
    std::fs::write(&p, text).unwrap();
    p.to_str().unwrap().to_string()
}

fn json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).unwrap_or_else(|e| panic!("{e}: {}", String::from_utf8_lossy(&out.stdout)))
}

fn graph_file(dir: &Path, name: &str, g: &Graph) -> String {
    write(dir, name, &g.to_edge_list())
}

#[test]
fn solve_examples() {
    let dir = tempfile::tempdir().unwrap();
    let c6 = graph_file(dir.path(), "c6", &gen_instance(Family::Cycle, 6, 0));
    let out = mdim(&["solve", &c6, "--algo", "outerplanar"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json(&out);
    assert_eq!(v["schema"], 1);
    assert_eq!(v["metric_dimension"], 2);
    assert_eq!(v["algorithm"], "outerplanar");
    assert_eq!(v["verified"], true);
    assert!(v["elapsed_ms"].is_number());

    let p5 = graph_file(dir.path(), "p5", &gen_instance(Family::Path, 5, 0));
    let v = json(&mdim(&["solve", &p5]));
    assert_eq!((v["algorithm"].as_str(), v["metric_dimension"].as_u64()), (Some("tree"), Some(1)));

    let k4 = graph_file(dir.path(), "k4", &gen_instance(Family::Complete, 4, 0));
    let out = mdim(&["solve", &k4, "--algo", "outerplanar"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["error"]["kind"], "NotOuterplanar");
}

#[test]
fn auto_falls_back_to_greedy_with_warning() {
    let dir = tempfile::tempdir().unwrap();
    let k22 = graph_file(dir.path(), "k22", &gen_instance(Family::Complete, 22, 0));
    let v = json(&mdim(&["solve", &k22]));
    assert_eq!(v["algorithm"], "greedy");
    assert!(v["warning"].is_string());
    assert_eq!(v["verified"], true);
}

#[test]
fn verified_results_resolve() {
    let dir = tempfile::tempdir().unwrap();
    for seed in 0..12 {
        let family = [Family::Tree, Family::Outerplanar, Family::Cycle][seed as usize % 3];
        let g = gen_instance(family, 4 + seed as usize, seed);
        let f = graph_file(dir.path(), &format!("g{seed}"), &g);
        for algo in ["auto", "brute", "outerplanar", "greedy", "tree"] {
            let out = mdim(&["solve", &f, "--algo", algo]);
            let v = json(&out);
            if v.get("error").is_some() {
                assert_eq!(algo, "tree", "{v}");
                continue;
            }
            let l: Vec<usize> = v["landmarks"].as_array().unwrap().iter().map(|x| x.as_u64().unwrap() as usize).collect();
            assert_eq!(v["verified"], true);
            assert!(is_resolving(&g, &l).resolved, "{algo} seed {seed}");
        }
    }
}

#[test]
fn verify_examples() {
    let dir = tempfile::tempdir().unwrap();
    let c4 = graph_file(dir.path(), "c4", &gen_instance(Family::Cycle, 4, 0));
    let v = json(&mdim(&["verify", &c4, "0,2"]));
    assert_eq!((v["resolving"].clone(), v["req1"].clone(), v["req2"].clone()), (false.into(), true.into(), false.into()));
    assert_eq!(v["witness"], serde_json::json!([1, 3]));
    let v = json(&mdim(&["verify", &c4, "0,1"]));
    assert_eq!(v["resolving"], true);
    let p3 = graph_file(dir.path(), "p3", &gen_instance(Family::Path, 3, 0));
    assert_eq!(json(&mdim(&["verify", &p3, "0"]))["resolving"], true);
    let k5 = graph_file(dir.path(), "k5", &gen_instance(Family::Complete, 5, 0));
    let v = json(&mdim(&["verify", &k5, "0,1,2,3"]));
    assert_eq!(v["resolving"], true);
    assert!(v.get("req2").is_none());
    let out = mdim(&["verify", &c4, "0,7"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["error"]["kind"], "InvalidVertex");
}

#[test]
fn check_reqs_reports_witnesses_and_configurations() {
    let dir = tempfile::tempdir().unwrap();
    let c4 = graph_file(dir.path(), "c4", &gen_instance(Family::Cycle, 4, 0));
    let v = json(&mdim(&["check-reqs", &c4, "0,2"]));
    assert_eq!(v["req1"]["satisfied"], true);
    assert_eq!(v["req2"]["satisfied"], false);
    assert_eq!(v["req2"]["witness"]["pair"], serde_json::json!([1, 3]));
    assert_eq!(v["configurations"][0]["kind"], "II");
}

#[test]
fn gen_prints_edge_lists() {
    let out = mdim(&["gen", "cycle", "6"]);
    assert_eq!(String::from_utf8(out.stdout).unwrap(), gen_instance(Family::Cycle, 6, 0).to_edge_list());
    let a = mdim(&["gen", "outerplanar", "10", "--seed", "4"]).stdout;
    let b = mdim(&["gen", "outerplanar", "10", "--seed", "4"]).stdout;
    assert_eq!(a, b);
    let g = Graph::parse_edge_list(std::str::from_utf8(&a).unwrap()).unwrap();
    assert!(mdim::embed::is_outerplanar(&g));
}

#[test]
fn reduce_splits_positive_clause() {
    let dir = tempfile::tempdir().unwrap();
    let f = write(dir.path(), "f.cnf", "c example\np cnf 3 4\n1 2 3 0\n1 -3 0\n-1 2 0\n-2 3 0\n");
    let out = mdim(&["reduce", &f]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(String::from_utf8(out.stdout).unwrap(), "p cnf 4 5\n1 4 0\n-4 2 3 0\n1 -3 0\n-1 2 0\n-2 3 0\n");
    let bad = write(dir.path(), "bad.cnf", "p cnf 2 1\n1 2 0\n");
    let out = mdim(&["reduce", &bad]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["error"]["kind"], "InvalidFormula");
}

#[test]
fn cross_validate_is_deterministic_and_catches_faults() {
    let dir = tempfile::tempdir().unwrap();
    let fx = dir.path().join("fx");
    let args = ["cross-validate", "--n-max", "6", "--trials", "25", "--seed", "3", "--fixtures", fx.to_str().unwrap()];
    let a = mdim(&args);
    let b = mdim(&args);
    assert_eq!(a.status.code(), Some(0), "{}", String::from_utf8_lossy(&a.stdout));
    assert_eq!(a.stdout, b.stdout);
    assert!(!fx.exists());

    let mut faulty = args.to_vec();
    faulty.push("--inject-fault");
    let out = mdim(&faulty);
    assert_eq!(out.status.code(), Some(3));
    assert!(String::from_utf8(out.stdout).unwrap().contains("overall: FAIL"));
    assert!(std::fs::read_dir(&fx).unwrap().count() > 0);
}

#[test]
fn bench_emits_csv() {
    let out = mdim(&["bench", "--families", "cycle,tree", "--sizes", "6,8", "--seeds", "2", "--algos", "brute,greedy"]);
    assert_eq!(out.status.code(), Some(0));
    let text = String::from_utf8(out.stdout).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines[0], "family,n,seed,algo,k,elapsed_ms");
    assert_eq!(lines.len(), 1 + 2 * 2 * 2 * 2);
    assert!(lines[1].starts_with("cycle,6,0,brute,2,"));
}

#[test]
fn trace_dump_on_request() {
    let dir = tempfile::tempdir().unwrap();
    let g = graph_file(dir.path(), "g", &gen_instance(Family::Outerplanar, 7, 3));
    let out = Command::new(env!("CARGO_BIN_EXE_mdim")).args(["solve", &g]).env("MDIM_TRACE", "1").output().unwrap();
    let dump: Value = serde_json::from_slice(out.stderr.trim_ascii()).unwrap();
    assert!(dump["dual_tree"]["nodes"].is_array());
    assert!(!dump["trace"].as_array().unwrap().is_empty());
    let quiet = mdim(&["solve", &g]);
    assert!(quiet.stderr.is_empty());
}

#[test]
fn usage_and_input_errors() {
    assert_eq!(mdim(&["solve"]).status.code(), Some(1));
    assert_eq!(mdim(&["frobnicate"]).status.code(), Some(1));
    assert_eq!(mdim(&["solve", "x", "--algo", "magic"]).status.code(), Some(1));
    assert_eq!(mdim(&["--help"]).status.code(), Some(0));
    let out = mdim(&["solve", "/nonexistent/graph.txt"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(json(&out)["error"]["message"].as_str().unwrap().contains("cannot read"));
    let dir = tempfile::tempdir().unwrap();
    let bad = write(dir.path(), "bad", "3 2\n0 1\n");
    assert_eq!(json(&mdim(&["solve", &bad]))["error"]["kind"], "Parse");
    let split = write(dir.path(), "split", "4 2\n0 1\n2 3\n");
    let out = mdim(&["solve", &split]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(json(&out)["error"]["kind"], "DisconnectedInput");
}
