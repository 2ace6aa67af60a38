//! End-to-end CLI tests driven through the compiled binary, including the
//! byte-determinism acceptance criterion.

use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_ibnet"))
}

fn run_in(dir: &Path, args: &[&str]) -> Output {
    bin().current_dir(dir).args(args).output().expect("binary runs")
}

fn tempdir(tag: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("ibnet-cli-test-{tag}-{}", std::process::id()));
    let _ = std::fs::remove_dir_all(&dir);
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

fn write(dir: &Path, name: &str, content: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, content).unwrap();
    path
}

fn json_payload(output: &Output) -> serde_json::Value {
    assert!(
        !output.stdout.is_empty(),
        "no stdout; stderr: {}",
        String::from_utf8_lossy(&output.stderr)
    );
    let value: serde_json::Value = serde_json::from_slice(&output.stdout).expect("valid JSON");
    value["payload"].clone()
}

#[test]
fn gen_profile_round_trip_matches_fixture() {
    let dir = tempdir("roundtrip");
    let out = run_in(&dir, &["gen", "--fixture", "two_triangle_bridge", "--out", "ttb"]);
    assert!(out.status.success());
    let profile = run_in(
        &dir,
        &["profile", "--graph", "ttb.edges.tsv", "--partition", "ttb.partition.tsv"],
    );
    assert_eq!(profile.status.code(), Some(0));
    let payload = json_payload(&profile);
    assert_eq!(payload["n"], 6);
    assert_eq!(payload["interior"], serde_json::json!([0, 1, 4, 5]));
    assert_eq!(payload["boundary"], serde_json::json!([2, 3]));
    let counts: Vec<u64> =
        payload["strata"].as_array().unwrap().iter().map(|s| s["arc_count"].as_u64().unwrap()).collect();
    assert_eq!(counts, vec![2, 4, 1]);

    // Re-generating writes byte-identical files.
    let before = std::fs::read(dir.join("ttb.edges.tsv")).unwrap();
    assert!(run_in(&dir, &["gen", "--fixture", "two_triangle_bridge", "--out", "ttb"])
        .status
        .success());
    let after = std::fs::read(dir.join("ttb.edges.tsv")).unwrap();
    assert_eq!(before, after);
}

#[test]
fn profile_with_constant_attribute_exits_two() {
    let dir = tempdir("constattr");
    run_in(&dir, &["gen", "--fixture", "two_triangle_bridge", "--out", "g"]);
    write(&dir, "const.tsv", "0\t1\n1\t1\n2\t1\n3\t1\n4\t1\n5\t1\n");
    let out = run_in(
        &dir,
        &[
            "profile",
            "--graph",
            "g.edges.tsv",
            "--partition",
            "g.partition.tsv",
            "--attribute",
            "const.tsv",
        ],
    );
    assert_eq!(out.status.code(), Some(2), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let payload = json_payload(&out);
    let reasons: Vec<&str> = payload["profile"]
        .as_array()
        .unwrap()
        .iter()
        .filter_map(|e| e["coefficient"]["reason"].as_str())
        .collect();
    assert!(reasons.contains(&"zero_variance"));
}

#[test]
fn parse_errors_exit_one() {
    let dir = tempdir("parse-errors");
    let graph = write(&dir, "bad.tsv", "0\t1\t-1\n");
    let partition = write(&dir, "p.tsv", "0\t0\n1\t0\n");
    let out = run_in(
        &dir,
        &[
            "profile",
            "--graph",
            graph.to_str().unwrap(),
            "--partition",
            partition.to_str().unwrap(),
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    let stderr = String::from_utf8_lossy(&out.stderr);
    assert!(stderr.contains("negative weight"), "stderr: {stderr}");

    // Duplicate node in the partition.
    let graph = write(&dir, "ok.tsv", "0\t1\n1\t0\n");
    let partition = write(&dir, "dup.tsv", "0\t0\n0\t1\n1\t0\n");
    let out = run_in(
        &dir,
        &[
            "profile",
            "--graph",
            graph.to_str().unwrap(),
            "--partition",
            partition.to_str().unwrap(),
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("duplicate"));

    // Missing node in the partition (no default directive).
    let partition = write(&dir, "missing.tsv", "0\t0\n");
    let out = run_in(
        &dir,
        &[
            "profile",
            "--graph",
            graph.to_str().unwrap(),
            "--partition",
            partition.to_str().unwrap(),
        ],
    );
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("node 1 missing"));
}

#[test]
fn string_labels_are_mapped_in_first_appearance_order() {
    let dir = tempdir("labels");
    write(&dir, "g.tsv", "# a comment line\n%undirected\n0\t1\n\n1\t2\n2\t3\n");
    write(&dir, "p.tsv", "# roles\n0\tleft\n1\tleft\n2\tright\n3\tright\n");
    let out = run_in(&dir, &["profile", "--graph", "g.tsv", "--partition", "p.tsv"]);
    let payload = json_payload(&out);
    assert_eq!(
        payload["label_mapping"],
        serde_json::json!([{"label": "left", "id": 0}, {"label": "right", "id": 1}])
    );
}

#[test]
fn categorical_attribute_profile_echoes_labels() {
    let dir = tempdir("categorical");
    run_in(&dir, &["gen", "--fixture", "k22", "--out", "k"]);
    write(&dir, "attr.tsv", "0\tA\n1\tA\n2\tB\n3\tB\n");
    let out = run_in(
        &dir,
        &[
            "profile",
            "--graph",
            "k.edges.tsv",
            "--partition",
            "k.partition.tsv",
            "--attribute-categorical",
            "attr.tsv",
        ],
    );
    // Empty II/IB strata make the report partially undefined: exit 2.
    assert_eq!(out.status.code(), Some(2));
    let payload = json_payload(&out);
    assert_eq!(payload["attribute_kind"], "categorical");
    assert_eq!(
        payload["attribute_labels"],
        serde_json::json!([{"label": "A", "id": 0}, {"label": "B", "id": 1}])
    );
    let bb = payload["profile"]
        .as_array()
        .unwrap()
        .iter()
        .find(|e| e["stratum"] == "BB")
        .unwrap();
    assert!((bb["coefficient"]["value"].as_f64().unwrap() + 1.0).abs() < 1e-12);
}

#[test]
fn attribute_default_directive_fills_missing_nodes() {
    let dir = tempdir("default");
    run_in(&dir, &["gen", "--fixture", "two_triangle_bridge", "--out", "g"]);
    write(&dir, "attr.tsv", "%default=0\n2\t5\n3\t5\n");
    let out = run_in(
        &dir,
        &[
            "collapse",
            "--graph",
            "g.edges.tsv",
            "--partition",
            "g.partition.tsv",
            "--attribute",
            "attr.tsv",
        ],
    );
    // The II stratum of this attribute has zero variance, so the report
    // carries an undefined correlation: exit code 2.
    assert_eq!(out.status.code(), Some(2), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let payload = json_payload(&out);
    // Hand-derived values for x = (0,0,5,5,0,0) on the bridge.
    let cov_in = payload["cov_in"].as_f64().unwrap();
    assert!((cov_in + 25.0 / 9.0).abs() < 1e-12);
    assert!(payload["decomp_residual"].as_f64().unwrap() < 1e-12);
}

#[test]
fn sis_below_threshold_exits_zero_and_writes_trajectory() {
    let dir = tempdir("sis");
    run_in(&dir, &["gen", "--fixture", "dir_cycle(4)", "--out", "c"]);
    write(&dir, "c.partition.tsv", "0\t0\n1\t0\n2\t1\n3\t1\n");
    let out = run_in(
        &dir,
        &[
            "sis",
            "--graph",
            "c.edges.tsv",
            "--partition",
            "c.partition.tsv",
            "--beta",
            "0.5",
            "--delta",
            "1",
            "--integrate",
            "2.0",
            "--out",
            "sis.json",
        ],
    );
    assert_eq!(out.status.code(), Some(0), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    let report: serde_json::Value =
        serde_json::from_slice(&std::fs::read(dir.join("sis.json")).unwrap()).unwrap();
    assert!(report["payload"]["equilibrium"]["threshold_margin"].as_f64().unwrap() <= 0.0);
    let x: Vec<f64> = report["payload"]["equilibrium"]["x_star"]
        .as_array()
        .unwrap()
        .iter()
        .map(|v| v.as_f64().unwrap())
        .collect();
    assert!(x.iter().all(|&v| v == 0.0));
    let csv = std::fs::read_to_string(dir.join("sis.trajectory.csv")).unwrap();
    assert!(csv.starts_with("time,x0,x1,x2,x3"));
}

#[test]
fn signcheck_reports_conditions() {
    let dir = tempdir("signcheck");
    run_in(&dir, &["gen", "--fixture", "two_triangle_bridge_directed", "--out", "g"]);
    write(&dir, "attr.tsv", "0\t0\n1\t0\n2\t5\n3\t3\n4\t1\n5\t1\n");
    let out = run_in(
        &dir,
        &[
            "signcheck",
            "--graph",
            "g.edges.tsv",
            "--partition",
            "g.partition.tsv",
            "--attribute",
            "attr.tsv",
        ],
    );
    assert_eq!(out.status.code(), Some(0));
    let payload = json_payload(&out);
    assert_eq!(payload["verdict"], "predicted_negative");
    assert!(payload["observed"]["value"].as_f64().unwrap() < 0.0);
}

#[test]
fn corollary_pair_generates_two_attributes() {
    let dir = tempdir("corollary");
    let out = run_in(&dir, &["gen", "--fixture", "corollary_pair", "--out", "cp"]);
    assert!(out.status.success());
    assert!(dir.join("cp.attribute-a.tsv").exists());
    assert!(dir.join("cp.attribute-b.tsv").exists());
}

/// Acceptance criterion: every command with fixed seeds produces
/// byte-identical reports across consecutive runs.
#[test]
fn criterion_11_byte_determinism() {
    let dir = tempdir("determinism");
    run_in(&dir, &["gen", "--fixture", "amplified(0.4,0.004,30-30,7)", "--out", "amp"]);
    let gen_a = std::fs::read(dir.join("amp.edges.tsv")).unwrap();
    run_in(&dir, &["gen", "--fixture", "amplified(0.4,0.004,30-30,7)", "--out", "amp"]);
    let gen_b = std::fs::read(dir.join("amp.edges.tsv")).unwrap();
    assert_eq!(gen_a, gen_b, "gen output differs across runs");

    let profile_args = [
        "profile",
        "--graph",
        "amp.edges.tsv",
        "--partition",
        "amp.partition.tsv",
    ];
    let first = run_in(&dir, &profile_args);
    let second = run_in(&dir, &profile_args);
    assert_eq!(first.stdout, second.stdout, "profile reports differ");

    let chain_args = [
        "chain",
        "--graph",
        "amp.edges.tsv",
        "--partition",
        "amp.partition.tsv",
        "--beta",
        "0.4",
        "--delta",
        "1",
    ];
    let first = run_in(&dir, &chain_args);
    let second = run_in(&dir, &chain_args);
    assert_eq!(first.stdout, second.stdout, "chain reports differ");

    // Sweeps must not depend on worker scheduling either.
    let sweep = |jobs: &str| {
        run_in(
            &dir,
            &[
                "sweep",
                "--sbm",
                "sizes=10,10",
                "p=0.5",
                "q=0.05",
                "seed=3",
                "--q-list",
                "0.02,0.2",
                "--beta",
                "0.5",
                "--delta",
                "1",
                "--replicates",
                "2",
                "--jobs",
                jobs,
            ],
        )
    };
    let serial = sweep("1");
    let parallel = sweep("4");
    assert_eq!(serial.status.code(), Some(0));
    // The jobs count is echoed in the payload; compare everything else.
    let canon = |out: &Output| {
        String::from_utf8(out.stdout.clone()).unwrap().replace("\"jobs\":4", "\"jobs\":1")
    };
    assert_eq!(canon(&serial), canon(&parallel), "sweep reports depend on scheduling");
    let again = sweep("4");
    assert_eq!(parallel.stdout, again.stdout, "sweep reports differ across runs");

    println!("criterion 11 [PASS] byte-identical reports across consecutive runs");
}
