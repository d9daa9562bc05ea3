use std::fs;
use std::process::{Command, Output};

use serde_json::Value;

fn pancake(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_pancake"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(out: &Output) -> Value {
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("valid JSON")
}

#[test]
fn classify_negative_with_certificate() {
    let v = json(&pancake(&[
        "classify",
        "--n",
        "8",
        "--m",
        "6",
        "--k",
        "4",
        "--certificate",
    ]));
    assert_eq!(v["verdict"], "not_generates");
    assert_eq!(v["rule"], "c5_coprime_indices");
    assert_eq!(v["certificate"]["type"], "block_partition");
    assert_eq!(v["certificate_verified"], true);
}

#[test]
fn classify_positive_with_witness() {
    let v = json(&pancake(&[
        "classify",
        "--n",
        "7",
        "--m",
        "6",
        "--k",
        "4",
        "--witness",
    ]));
    assert_eq!(v["verdict"], "generates");
    assert_eq!(v["witness"]["kind"], "three_cycle");
    let names: Vec<&str> = v["witness"]["elements"]
        .as_array()
        .unwrap()
        .iter()
        .map(|e| e["name"].as_str().unwrap())
        .collect();
    assert!(names.contains(&"sigma"));
}

#[test]
fn oracle_reports_order() {
    let v = json(&pancake(&["oracle", "--n", "7", "--m", "4", "--k", "2"]));
    assert_eq!(v["order"], "5040");
    assert_eq!(v["generates"], true);
    let v = json(&pancake(&["oracle", "--n", "8", "--m", "6", "--k", "4"]));
    assert_eq!(v["generates"], false);
}

#[test]
fn scan_writes_csv_and_counts() {
    let dir = tempfile::tempdir().unwrap();
    let triples = dir.path().join("triples.csv");
    let counts = dir.path().join("fcounts.csv");
    let out = pancake(&[
        "scan",
        "--n-min",
        "4",
        "--n-max",
        "8",
        "--oracle",
        "on",
        "--out",
        triples.to_str().unwrap(),
        "--fcounts",
        counts.to_str().unwrap(),
    ]);
    let v = json(&out);
    assert_eq!(v["disagreements"].as_array().unwrap().len(), 0);
    let csv = fs::read_to_string(&triples).unwrap();
    let rows: usize = (4..=8).map(|n: usize| (n - 2) * (n - 3) / 2).sum();
    assert_eq!(csv.lines().count(), rows + 1);
    assert!(csv.lines().next().unwrap().starts_with("n,m,k"));
    let f = fs::read_to_string(&counts).unwrap();
    assert!(f.lines().any(|l| l.starts_with("7,8,")));
    assert!(f.lines().any(|l| l.starts_with("8,5,")));
}

#[test]
fn metrics_and_plot() {
    let dir = tempfile::tempdir().unwrap();
    let metrics = dir.path().join("m.csv");
    let out = pancake(&[
        "metrics",
        "--n",
        "7",
        "--m",
        "6",
        "--k",
        "5",
        "--hamiltonian",
        "--out",
        metrics.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let csv = fs::read_to_string(&metrics).unwrap();
    let row = csv.lines().nth(1).unwrap();
    assert!(row.starts_with("7,6,5,5040,15,8,"), "{row}");
    assert!(row.ends_with(",yes"), "{row}");

    let counts = dir.path().join("fcounts.csv");
    let triples = dir.path().join("t.csv");
    let out = pancake(&[
        "scan",
        "--n-min",
        "4",
        "--n-max",
        "24",
        "--out",
        triples.to_str().unwrap(),
        "--fcounts",
        counts.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let svg = dir.path().join("fn.svg");
    let out = pancake(&[
        "plot",
        "--in",
        counts.to_str().unwrap(),
        "--out",
        svg.to_str().unwrap(),
    ]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = fs::read_to_string(&svg).unwrap();
    assert!(text.starts_with("<svg") && text.trim_end().ends_with("</svg>"));
}

#[test]
fn conjectures_report() {
    let v = json(&pancake(&[
        "conjectures",
        "--n-max",
        "16",
        "--which",
        "2,3,4,5",
    ]));
    assert_eq!(v["shift_by_4"].as_array().unwrap().len(), 0);
    assert_eq!(v["shift_by_2"].as_array().unwrap().len(), 0);
    assert_eq!(v["index_sum"].as_array().unwrap().len(), 0);
    assert_eq!(v["fk_max"].as_array().unwrap().len(), 4);
}

#[test]
fn invalid_arguments_exit_2() {
    assert_eq!(
        pancake(&["classify", "--n", "5", "--m", "5", "--k", "2"])
            .status
            .code(),
        Some(2)
    );
    assert_eq!(pancake(&["classify", "--n", "x"]).status.code(), Some(2));
    assert_eq!(
        pancake(&["conjectures", "--n-max", "20", "--which", "9"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn resource_guard_exits_4() {
    let out = pancake(&["metrics", "--n", "12", "--m", "11", "--k", "10"]);
    assert_eq!(out.status.code(), Some(4));
    let out = pancake(&["oracle", "--n", "200", "--m", "199", "--k", "2"]);
    assert_eq!(out.status.code(), Some(4));
}
