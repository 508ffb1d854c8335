use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests").join(name)
}

fn wlgt(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_wlgt")).args(args).output().expect("binary runs")
}

fn json_stdout(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("stdout is JSON")
}

fn error_code(out: &Output) -> String {
    let v: Value = serde_json::from_slice(&out.stderr).expect("stderr is JSON");
    v["error"]["code"].as_str().expect("code").to_string()
}

fn graph_arg(name: &str) -> String {
    data(&format!("data/{name}")).display().to_string()
}

#[test]
fn refine_path_has_two_stable_colors() {
    let out = wlgt(&["refine", "--graph", &graph_arg("p3.json"), "--k", "1", "--s", "1", "--variant", "kwl"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_stdout(&out);
    let last = v["histograms"].as_array().unwrap().last().unwrap().as_array().unwrap().len();
    assert_eq!(last, 2);
}

#[test]
fn refine_cycle_has_one_stable_color() {
    let out = wlgt(&["refine", "--graph", &graph_arg("c6.json")]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_stdout(&out);
    assert_eq!(v["histograms"], serde_json::json!([[6]]));
    assert!(out.stderr.is_empty());
}

#[test]
fn refine_cycle_pairs_matches_golden() {
    let out = wlgt(&["refine", "--graph", &graph_arg("c6.json"), "--k", "2"]);
    assert_eq!(out.status.code(), Some(0));
    let golden = std::fs::read(data("golden/c6_k2_kwl.json")).unwrap();
    assert_eq!(out.stdout, golden);
    // Diagonal, edge and non-edge pairs of a 6-cycle.
    let v = json_stdout(&out);
    assert_eq!(v["histograms"], serde_json::json!([[6, 12, 18]]));
}

#[test]
fn refine_writes_to_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("report.json");
    let out = wlgt(&["refine", "--graph", &graph_arg("p3.json"), "--out", path.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty());
    let written: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(written["k"], 1);
}

#[test]
fn missing_file_is_a_usage_error() {
    let out = wlgt(&["refine", "--graph", "/definitely/not/here.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_code(&out), "FILE_NOT_FOUND");
    assert!(out.stdout.is_empty());
}

#[test]
fn bad_arguments_report_usage_json() {
    let out = wlgt(&["refine", "--graph", &graph_arg("p3.json"), "--variant", "nope"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_code(&out), "USAGE");
    let out = wlgt(&["refine", "--graph", &graph_arg("p3.json"), "--k", "2", "--s", "1"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_code(&out), "VARIANT_SPACE_MISMATCH");
}

#[test]
fn iteration_cap_is_a_resource_limit() {
    let out = wlgt(&["refine", "--graph", &graph_arg("p3.json"), "--max-iter", "0"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(error_code(&out), "ITERATION_CAP");
}

fn verdict(args: &[&str]) -> Value {
    let out = wlgt(args);
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    json_stdout(&out)
}

#[test]
fn distinguish_builtin_pairs() {
    let v = verdict(&["distinguish", "--pair", "c6_vs_2c3", "--k", "1"]);
    assert_eq!(v, serde_json::json!({"distinguished": false, "at_iteration": null}));
    let v = verdict(&["distinguish", "--pair", "c6_vs_2c3", "--k", "2", "--variant", "delta"]);
    assert_eq!(v["distinguished"], true);
    let v = verdict(&["distinguish", "--pair", "k33_vs_prism", "--k", "2", "--variant", "delta"]);
    assert_eq!(v["distinguished"], true);
}

#[test]
fn distinguish_reads_two_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = wlgt(&["pair", "--name", "c6_vs_2c3"]);
    let pair = json_stdout(&out);
    let (a, b) = (dir.path().join("a.json"), dir.path().join("b.json"));
    std::fs::write(&a, pair["g1"].to_string()).unwrap();
    std::fs::write(&b, pair["g2"].to_string()).unwrap();
    let v = verdict(&[
        "distinguish",
        "--g1",
        a.to_str().unwrap(),
        "--g2",
        b.to_str().unwrap(),
        "--k",
        "2",
        "--s",
        "1",
        "--variant",
        "ks-local",
    ]);
    assert_eq!(v["distinguished"], true);
}

#[test]
fn unknown_pair_exits_two() {
    let out = wlgt(&["pair", "--name", "unknown"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(error_code(&out), "UNKNOWN_PAIR");
}

#[test]
fn verify_identifying_on_path_passes() {
    for extra in [&[][..], &["--normalized"][..]] {
        let mut args = vec!["verify-identifying", "--graph"];
        let g = graph_arg("p3.json");
        args.push(&g);
        args.extend_from_slice(extra);
        let out = wlgt(&args);
        assert_eq!(out.status.code(), Some(0));
        let v = json_stdout(&out);
        assert_eq!(v["pass"], true);
        assert_eq!(v["node"]["pass"], true);
        assert_eq!(v["adjacency"]["pass"], true);
        assert!(v["margin"].as_f64().unwrap() > 0.0);
        assert_eq!(v["rows_failed"], serde_json::json!([]));
    }
}

#[test]
fn simulate_path_is_exact_at_every_layer() {
    let out = wlgt(&["simulate", "--graph", &graph_arg("p3.json"), "--k", "1", "--layers", "3"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_stdout(&out);
    assert_eq!(v["partition_equal_per_layer"], serde_json::json!([true, true, true, true]));
    assert!(v["max_attention_error"].as_f64().unwrap() < 1e-6);
}

#[test]
fn simulate_fails_verification_with_tiny_temperature() {
    let out = wlgt(&["simulate", "--graph", &graph_arg("c6.json"), "--k", "1", "--layers", "1", "--b", "0.01"]);
    assert_eq!(out.status.code(), Some(1));
    let v = json_stdout(&out);
    assert!(v["max_attention_error"].as_f64().unwrap() > 1e-6);
}

#[test]
fn simulate_pair_agrees_with_refinement() {
    let out = wlgt(&["simulate", "--pair", "k33_vs_prism", "--k", "2", "--variant", "delta"]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_stdout(&out);
    assert_eq!(v["wl"], v["transformer"]);
    assert_eq!(v["transformer"]["distinguished"], true);
}

#[test]
fn bench_rows_and_controls() {
    let out = wlgt(&[
        "bench",
        "--suite",
        "builtin",
        "--variants",
        "1wl,delta:2",
        "--pairs",
        "c6_vs_2c3,k33_vs_prism",
        "--no-timing",
    ]);
    assert_eq!(out.status.code(), Some(0));
    let v = json_stdout(&out);
    let rows = v["rows"].as_array().unwrap();
    assert_eq!(rows.len(), 2 * 3 * 2);
    let row = |pair: &str, variant: &str| {
        rows.iter().find(|r| r["pair"] == pair && r["variant"] == variant).expect("row present").clone()
    };
    assert_eq!(row("c6_vs_2c3", "1wl")["distinguished"], false);
    assert_eq!(row("c6_vs_2c3", "delta:2")["distinguished"], true);
    for r in rows.iter().filter(|r| r["category"] == "control") {
        assert_eq!(r["distinguished"], false, "{r}");
    }
}

#[test]
fn bench_csv_is_deterministic_across_thread_counts() {
    let base = [
        "bench",
        "--variants",
        "1wl,kwl:2,ks-local:2:1",
        "--pairs",
        "c6_vs_2c3,k33_vs_prism",
        "--format",
        "csv",
        "--no-timing",
    ];
    let one = wlgt(&[&base[..], &["--threads", "1"]].concat());
    let many = wlgt(&[&base[..], &["--threads", "4"]].concat());
    assert_eq!(one.status.code(), Some(0));
    assert_eq!(one.stdout, many.stdout);
    let text = String::from_utf8(one.stdout).unwrap();
    assert_eq!(text.lines().next().unwrap(), "pair,variant,k,s,distinguished,at_iteration,wall_time_ms");
    assert_eq!(text.lines().count(), 1 + 2 * 3 * 3);
}

#[test]
fn bench_rejects_unknown_names() {
    let out = wlgt(&["bench", "--variants", "bogus:2"]);
    assert_eq!(out.status.code(), Some(2));
    let out = wlgt(&["bench", "--pairs", "nope"]);
    assert_eq!(error_code(&out), "UNKNOWN_PAIR");
}

#[test]
fn outputs_are_byte_identical_across_runs() {
    for args in [
        vec!["pe", "--graph", "GRAPH", "--kind", "lpe", "--seed", "3"],
        vec!["pe", "--graph", "GRAPH", "--kind", "spe", "--dim", "4"],
        vec!["tokens", "--graph", "GRAPH", "--k", "2", "--s", "1", "--dim", "6"],
        vec!["tokens", "--graph", "GRAPH", "--pe", "raw-targets", "--atp", "edges", "--k", "2"],
    ] {
        let g = graph_arg("c6.json");
        let args: Vec<&str> = args.iter().map(|&a| if a == "GRAPH" { g.as_str() } else { a }).collect();
        let first = wlgt(&args);
        let second = wlgt(&args);
        assert_eq!(first.status.code(), Some(0), "{}", String::from_utf8_lossy(&first.stderr));
        assert_eq!(first.stdout, second.stdout);
    }
}

#[test]
fn pe_and_tokens_shapes() {
    let g = graph_arg("c6.json");
    let v = json_stdout(&wlgt(&["pe", "--graph", &g, "--dim", "5"]));
    assert_eq!(v["rows"].as_array().unwrap().len(), 6);
    assert_eq!(v["rows"][0].as_array().unwrap().len(), 5);
    let v = json_stdout(&wlgt(&["tokens", "--graph", &g, "--k", "2", "--s", "1", "--dim", "7"]));
    // Pairs with at most one component: 6 diagonal + 2 * 6 edges.
    assert_eq!(v["rows"].as_array().unwrap().len(), 18);
    assert_eq!(v["rows"][0].as_array().unwrap().len(), 7);
}

#[test]
fn seed_changes_encodings() {
    let g = graph_arg("c6.json");
    let a = wlgt(&["pe", "--graph", &g, "--seed", "0"]);
    let b = wlgt(&["pe", "--graph", &g, "--seed", "1"]);
    assert_ne!(a.stdout, b.stdout);
}
