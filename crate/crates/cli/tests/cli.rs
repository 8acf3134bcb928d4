use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn data(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("tests/data")
        .join(name)
        .display()
        .to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lipfree"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn json(args: &[&str]) -> Value {
    let out = run(args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    serde_json::from_slice(&out.stdout).expect("JSON report")
}

fn code(args: &[&str]) -> i32 {
    run(args).status.code().unwrap()
}

#[test]
fn validate_verdicts() {
    let r = json(&["validate", "-i", &data("u4.json")]);
    assert_eq!(r["results"]["metric"]["valid"], true);
    assert_eq!(r["results"]["ultrametric"]["holds"], true);
    assert_eq!(r["results"]["four_point"]["holds"], true);
    assert_eq!(r["input"]["sha256"].as_str().unwrap().len(), 64);

    let r = json(&["validate", "-i", &data("c4.json")]);
    assert_eq!(r["results"]["four_point"]["holds"], false);
    assert!(r["results"]["four_point"]["witness"].is_object());

    let r = json(&["validate", "-i", &data("u4_tree.json")]);
    assert_eq!(r["input"]["format"], "dendrogram");
    assert_eq!(r["results"]["ultrametric"]["holds"], true);

    let out = run(&["validate", "-i", &data("broken.json")]);
    assert_eq!(out.status.code(), Some(1));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["results"]["metric"]["witnesses"][0]["kind"], "triangle");

    assert_eq!(code(&["validate", "-i", &data("malformed.json")]), 2);
    assert_eq!(code(&["validate", "-i", &data("missing.json")]), 2);
    assert_eq!(code(&["validate"]), 2);
}

#[test]
fn norms() {
    let value = |file: &str, masses: &str| {
        json(&["norm", "-i", &data(file), "--masses", masses])["results"]["value"]
            .as_f64()
            .unwrap()
    };
    assert_eq!(value("u4.json", "a:1,b:-1"), 1.0);
    assert_eq!(value("u4.json", "a:1"), 4.0);
    assert_eq!(value("l3.json", "1:1,3:1"), 4.0);
    assert_eq!(value("u4_tree.json", "a:1,c:-1"), 2.0);
    assert_eq!(
        code(&["norm", "-i", &data("u4.json"), "--masses", "z:1"]),
        2
    );
    assert_eq!(
        code(&["norm", "-i", &data("broken.json"), "--masses", "1:1"]),
        1
    );
}

#[test]
fn separators() {
    let r = json(&["separate", "-i", &data("u4.json"), "a", "b"]);
    assert_eq!(r["results"]["kind"], "ultrametric");
    assert_eq!(r["results"]["lip_bound"], 2.0);
    assert_eq!(r["results"]["holds"], true);

    let r = json(&["separate", "-i", &data("l3.json"), "1", "3"]);
    assert_eq!(r["results"]["kind"], "proper");
    assert!(r["results"]["lip_bound"].as_f64().unwrap() <= 4.0);
    assert_eq!(r["results"]["iterations"], 1);

    let r = json(&["separate", "-i", &data("u4.json"), "a", "c", "--proper"]);
    assert_eq!(r["results"]["kind"], "proper");
    assert_eq!(r["results"]["holds"], true);

    assert_eq!(code(&["separate", "-i", &data("u4.json"), "a", "a"]), 2);
    assert_eq!(
        code(&["separate", "-i", &data("l3.json"), "1", "3", "--ultra"]),
        1
    );
    assert_eq!(
        code(&[
            "separate",
            "-i",
            &data("l3.json"),
            "1",
            "3",
            "--ultra",
            "--proper"
        ]),
        2
    );
}

fn csv_rows(args: &[&str]) -> Vec<Vec<String>> {
    let out = run(args);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let mut reader = csv::Reader::from_reader(out.stdout.as_slice());
    assert_eq!(
        reader.headers().unwrap().iter().collect::<Vec<_>>(),
        ["r", "n", "err", "bound", "supported"]
    );
    reader
        .records()
        .map(|r| r.unwrap().iter().map(String::from).collect())
        .collect()
}

#[test]
fn projections() {
    let u4 = data("u4.json");
    let rows = csv_rows(&[
        "project",
        "-i",
        &u4,
        "--masses",
        "b:1",
        "--schedule",
        "1:4,0.5:4",
    ]);
    assert_eq!(rows[0][2], "1.0");
    assert_eq!(rows[1][2], "0.0");

    let rows = csv_rows(&["project", "-i", &u4, "--masses", ""]);
    assert_eq!(rows.len(), 8);
    assert!(rows.iter().all(|r| r[2] == "0.0"));

    assert_eq!(
        code(&["project", "-i", &data("l3.json"), "--masses", "1:1"]),
        1
    );
    assert_eq!(code(&["project", "-i", &u4, "--schedule", "1:-1"]), 2);
}

#[test]
fn embeddings() {
    let l3 = data("l3.json");
    let r = json(&[
        "embed",
        "-i",
        &l3,
        "--epsilon",
        "0.5",
        "--function",
        "1:1,3:3",
    ]);
    let f = &r["results"]["functions"][0]["report"];
    assert_eq!(f["sup_norm"], 1.0);
    assert_eq!(f["lip"], 1.0);
    assert_eq!(f["lower_slack"], 0.0);
    assert_eq!(r["results"]["all_hold"], true);

    let r = json(&[
        "embed",
        "-i",
        &l3,
        "--epsilon",
        "0.5",
        "--random",
        "10",
        "--seed",
        "3",
    ]);
    assert_eq!(r["results"]["functions"].as_array().unwrap().len(), 10);
    assert_eq!(r["results"]["all_hold"], true);
    assert_eq!(r["command"]["seed"], 3);

    assert_eq!(
        code(&["embed", "-i", &l3, "--epsilon", "1.5", "--random", "1"]),
        2
    );
    assert_eq!(code(&["embed", "-i", &l3, "--epsilon", "0.5"]), 2);
    assert_eq!(
        code(&["embed", "-i", &l3, "--epsilon", "0.5", "--function", "1:1"]),
        0
    );
}

#[test]
fn output_file_matches_stdout() {
    let dir = std::env::temp_dir().join(format!("lipfree-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("report.json");
    let args = ["norm", "-i", &data("l3.json"), "--masses", "1:1,3:1"];
    let stdout = run(&args).stdout;
    let mut with_output = args.to_vec();
    let p = path.display().to_string();
    with_output.extend(["--output", &p]);
    assert_eq!(code(&with_output), 0);
    assert_eq!(std::fs::read(&path).unwrap(), stdout);
    std::fs::remove_dir_all(&dir).unwrap();
}
