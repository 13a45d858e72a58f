use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bin() -> Command {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_contrastive-vc"));
    cmd.env_remove("CONTRASTIVE_VC_THREADS");
    cmd
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("spawn")
}

fn stdout_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stdout).expect("JSON on stdout")
}

fn stderr_json(out: &Output) -> Value {
    serde_json::from_slice(&out.stderr).expect("JSON on stderr")
}

fn write(dir: &Path, name: &str, text: &str) -> PathBuf {
    let path = dir.join(name);
    fs::write(&path, text).unwrap();
    path
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn construct_reports_verified_labelings() {
    let out = run(&["construct", "--family", "lp", "--n", "4", "--d", "2", "--p", "2", "--verify"]);
    assert!(out.status.success());
    let doc = stdout_json(&out);
    assert_eq!(doc["result"]["queries"], 2);
    assert_eq!(doc["result"]["labelings_verified"], 4);
    assert_eq!(doc["manifest"]["subcommand"], "construct");
    assert_eq!(doc["manifest"]["seed"], 0);
    assert_eq!(doc["manifest"]["config"]["family"], "lp");
    assert!(doc["manifest"]["duration_seconds"].is_f64());
}

#[test]
fn arbitrary_crossover_is_n_squared() {
    let doc = stdout_json(&run(&["bounds", "--setting", "arbitrary", "--n", "10"]));
    assert_eq!(doc["result"]["vc_upper_crossover"], 100);
}

#[test]
fn missing_file_is_a_validation_error() {
    let out = run(&["realize", "--input", "/nonexistent/qs.json"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(out.stdout.is_empty());
    let err = stderr_json(&out);
    assert_eq!(err["error"]["kind"], "not_found");
    assert!(err["error"]["message"].as_str().unwrap().contains("file not found"));
}

#[test]
fn bad_arguments_give_a_json_error() {
    let out = run(&["bounds", "--setting", "lp", "--n", "5"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"]["kind"], "usage");

    let out = run(&["no-such-command"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"]["kind"], "usage");

    let out = run(&["bounds", "--setting", "arbitrary", "--n", "5", "--eps", "0.7"]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"]["kind"], "domain");
}

#[test]
fn realize_embeds_input_digest() {
    let dir = tempfile::tempdir().unwrap();
    let text = r#"{"n": 4, "kind": "triplet", "class": {"variant": "lp", "p": 2, "d": 1},
        "queries": [[0, 1, 2], [1, 2, 3]], "labels": [0, 1]}"#;
    let input = write(dir.path(), "qs.json", text);
    let doc = stdout_json(&run(&["realize", "--input", s(&input)]));
    assert_eq!(doc["result"]["verdict"]["status"], "SAT");
    let digest = &doc["manifest"]["inputs"][0];
    assert_eq!(digest["bytes"], text.len());
    assert_eq!(digest["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn reports_are_not_inputs() {
    let dir = tempfile::tempdir().unwrap();
    let input = write(
        dir.path(),
        "qs.json",
        r#"{"n": 4, "kind": "triplet", "class": {"variant": "arbitrary"}, "queries": [[0, 1, 2]], "labels": [1]}"#,
    );
    let report = dir.path().join("report.json");
    let out = run(&["--out", s(&report), "realize", "--input", s(&input)]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    for cmd in [["realize", "--input"], ["shatter", "--input"], ["jl-check", "--points"]] {
        let mut args = vec![cmd[0], cmd[1], s(&report)];
        if cmd[0] == "jl-check" {
            args.extend(["--beta", "0.5"]);
        }
        let out = run(&args);
        assert_eq!(out.status.code(), Some(2), "{cmd:?}");
        assert_eq!(stderr_json(&out)["error"]["kind"], "report_not_input");
    }

    let config = write(
        dir.path(),
        "sim.json",
        r#"{"n": 8, "ground_truth_dim": 2, "model_dim": 2, "m_train": [20], "m_test": 200,
            "seeds": [0], "steps": 20, "restarts": 1}"#,
    );
    let csv = dir.path().join("out.csv");
    assert!(run(&["simulate", "--config", s(&config), "--out", s(&csv)]).status.success());
    let out = run(&["simulate", "--config", s(&csv)]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"]["kind"], "report_not_input");
}

#[test]
fn strict_flags_unknown_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    // a comparison cycle: no embedding exists, and the numeric search cannot prove it
    let input = write(
        dir.path(),
        "cycle.json",
        r#"{"n": 4, "kind": "triplet", "class": {"variant": "lp", "p": 2, "d": 2},
            "queries": [[0, 1, 2], [0, 2, 3], [0, 1, 3]], "labels": [0, 0, 1]}"#,
    );
    let args = ["realize", "--input", s(&input), "--restarts", "2", "--iterations", "200"];
    let lax = run(&args);
    assert_eq!(lax.status.code(), Some(0));
    assert_eq!(stdout_json(&lax)["result"]["verdict"]["status"], "UNKNOWN");
    let mut strict = vec!["--strict"];
    strict.extend(args);
    let out = run(&strict);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stdout_json(&out)["result"]["verdict"]["status"], "UNKNOWN");

    // shattering a numeric class requires a policy for undecided labelings
    let out = run(&["shatter", "--input", s(&input)]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(stderr_json(&out)["error"]["kind"], "unsupported_combination");
    let out = run(&["shatter", "--input", s(&input), "--on-unknown", "abort", "--restarts", "2", "--iterations", "200"]);
    assert_eq!(out.status.code(), Some(3));
    assert_eq!(stderr_json(&out)["error"]["kind"], "aborted_on_unknown");
}

#[test]
fn thread_env_overrides_flag() {
    let out = bin()
        .args(["--threads", "1", "bounds", "--setting", "tree", "--n", "6"])
        .env("CONTRASTIVE_VC_THREADS", "3")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(stdout_json(&out)["manifest"]["threads"], 3);

    let out = bin()
        .args(["bounds", "--setting", "tree", "--n", "6"])
        .env("CONTRASTIVE_VC_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn simulate_writes_csv_with_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let config = write(
        dir.path(),
        "sim.json",
        r#"{"n": 8, "ground_truth_dim": 2, "model_dim": 2, "m_train": [20, 40], "m_test": 200,
            "seeds": [3, 4], "steps": 20, "restarts": 1}"#,
    );
    let out = run(&["simulate", "--config", s(&config)]);
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    let manifest: Value =
        serde_json::from_str(lines.next().unwrap().strip_prefix("# manifest: ").unwrap()).unwrap();
    assert_eq!(manifest["subcommand"], "simulate");
    assert_eq!(manifest["config"]["sweep"]["steps"], 20);
    assert_eq!(
        lines.next().unwrap(),
        "seed,n,d_model,p,k,m_train,train_err,test_err,gap,predicted_eps,ratio"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 4);
    assert!(rows[0].starts_with("3,8,2,2,1,20,"));
    assert!(rows[3].starts_with("4,8,2,2,1,40,"));
}

#[test]
fn wendel_and_jl_report_their_checks() {
    let doc = stdout_json(&run(&["wendel", "--dim", "2", "--m", "3", "--trials", "5000", "--seed", "4"]));
    assert_eq!(doc["result"]["bound"]["exact"], "3/4");
    assert_eq!(doc["result"]["within_half_width"], true);
    let doc = stdout_json(&run(&["wendel", "--dim", "3", "--m", "5", "--trials", "5000", "--layout", "collinear"]));
    assert_eq!(doc["result"]["below_bound"], true);

    let dir = tempfile::tempdir().unwrap();
    let points = write(
        dir.path(),
        "pts.json",
        r#"{"points": [[0, 0, 0, 1], [1, 0, 0, 0], [0, 2, 0, 0], [0, 0, 3, 1], [1, 1, 1, 1]]}"#,
    );
    let doc = stdout_json(&run(&["jl-check", "--points", s(&points), "--beta", "0.5", "--seed", "2"]));
    assert_eq!(doc["result"]["d1"], 97);
    assert_eq!(doc["result"]["log_base"], "e");
    assert_eq!(doc["manifest"]["seed"], 2);

    let ragged = write(dir.path(), "ragged.json", r#"{"points": [[0, 1], [2]]}"#);
    let out = run(&["jl-check", "--points", s(&ragged), "--beta", "0.5"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn vcdim_finds_a_shattered_set() {
    let doc = stdout_json(&run(&["vcdim", "--n", "4", "--class", "arbitrary", "--budget", "1", "--max-queries", "6"]));
    assert!(doc["result"]["lower_bound"].as_u64().unwrap() >= 3);
    let out = run(&["vcdim", "--n", "4", "--class", "lp", "--d", "1"]);
    assert_eq!(out.status.code(), Some(2));
}
