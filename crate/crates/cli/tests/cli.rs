use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn sample(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("../../data/sample")
        .join(name)
}

fn spreadlab(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_spreadlab"))
        .args(args)
        .env("SPREADLAB_LOG", "error")
        .output()
        .unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn market_args(cmd: &str, out: &Path) -> Vec<String> {
    [
        cmd,
        "--books",
        s(&sample("books.jsonl")),
        "--trades",
        s(&sample("trades.csv")),
        "--markets",
        s(&sample("markets.csv")),
        "--out",
        s(out),
    ]
    .map(String::from)
    .to_vec()
}

fn run(args: &[String]) -> Output {
    spreadlab(&args.iter().map(String::as_str).collect::<Vec<_>>())
}

#[test]
fn calibrate_writes_tables_and_manifest() {
    let tmp = tempfile::tempdir().unwrap();
    let mut args = market_args("calibrate", tmp.path());
    args.extend(["--spreads".into(), "5,10,15,20,30,40,50".into()]);
    let out = run(&args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let stdout = String::from_utf8(out.stdout).unwrap();
    assert_eq!(
        stdout.lines().filter(|l| l.contains("maxSpread")).count(),
        4,
        "{stdout}"
    );

    let cal = std::fs::read_to_string(tmp.path().join("calibration.csv")).unwrap();
    assert_eq!(cal.lines().count(), 1 + 4 * 7);
    let brackets = std::fs::read_to_string(tmp.path().join("brackets.csv")).unwrap();
    assert!(brackets.starts_with("market,original_bps,revised_bps,rationale\n"));
    assert!(brackets.contains("UMA-USD,40,40,TICK_CONSTRAINED"));

    let manifest: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(tmp.path().join("manifest.json")).unwrap())
            .unwrap();
    let files: Vec<&str> = manifest["files"]
        .as_array()
        .unwrap()
        .iter()
        .map(|f| f["file"].as_str().unwrap())
        .collect();
    let mut sorted = files.clone();
    sorted.sort();
    assert_eq!(files, sorted);
    assert!(files.contains(&"calibration.csv"));
}

#[test]
fn json_output_matches_csv() {
    let tmp = tempfile::tempdir().unwrap();
    let csv_dir = tmp.path().join("csv");
    let json_dir = tmp.path().join("json");
    assert!(run(&market_args("reconstruct", &csv_dir)).status.success());
    let mut args = market_args("reconstruct", &json_dir);
    args.extend(["--format".into(), "json".into()]);
    assert!(run(&args).status.success());

    let mut rdr = csv::Reader::from_path(csv_dir.join("depth_required.csv")).unwrap();
    let headers = rdr.headers().unwrap().clone();
    let rows: Vec<csv::StringRecord> = rdr.records().map(Result::unwrap).collect();
    let json: Vec<serde_json::Map<String, serde_json::Value>> = serde_json::from_str(
        &std::fs::read_to_string(json_dir.join("depth_required.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(rows.len(), json.len());
    for (row, obj) in rows.iter().zip(&json) {
        for (h, v) in headers.iter().zip(row.iter()) {
            let j = match &obj[h] {
                serde_json::Value::String(s) => s.clone(),
                other => other.to_string(),
            };
            assert_eq!(j, v, "{h}");
        }
    }
}

#[test]
fn events_writes_recovery_table() {
    let tmp = tempfile::tempdir().unwrap();
    let mut args = market_args("events", tmp.path());
    args.extend(["--events".into(), s(&sample("events.toml")).into()]);
    let out = run(&args);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let rec = std::fs::read_to_string(tmp.path().join("recovery.csv")).unwrap();
    assert_eq!(rec.lines().count(), 5);
    assert!(rec
        .lines()
        .any(|l| l.starts_with("BTC-USD,") && l.ends_with(",recovered")));
}

#[test]
fn config_file_supplies_flags() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = tmp.path().join("run.toml");
    std::fs::write(
        &cfg,
        format!(
            "books = {:?}\ntrades = {:?}\nmarkets = {:?}\nmarket = [\"BTC-USD\"]\nout = \"result\"\nformat = \"json\"\n",
            sample("books.jsonl"),
            sample("trades.csv"),
            sample("markets.csv"),
        ),
    )
    .unwrap();
    let out = spreadlab(&["--config", s(&cfg), "calibrate"]);
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let brackets: serde_json::Value = serde_json::from_str(
        &std::fs::read_to_string(tmp.path().join("result/brackets.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(brackets.as_array().unwrap().len(), 1);
    assert_eq!(brackets[0]["market"], "BTC-USD");
}

#[test]
fn rewards_dmm_and_tiers() {
    let tmp = tempfile::tempdir().unwrap();
    let out = spreadlab(&[
        "rewards",
        "dmm",
        "--daily-liquidity",
        "5000000",
        "--penalty",
        "0.1",
        "--out",
        s(tmp.path()),
    ]);
    assert!(out.status.success());
    assert!(String::from_utf8_lossy(&out.stdout).contains("stake 28000"));
    let out = spreadlab(&[
        "rewards",
        "tiers",
        "--fees",
        s(&sample("fees.csv")),
        "--out",
        s(tmp.path()),
    ]);
    assert!(out.status.success());
    let tiers = std::fs::read_to_string(tmp.path().join("tiers.csv")).unwrap();
    assert!(tiers.contains("Tier 1,7,555494.785212"));
}

#[test]
fn missing_input_exits_2_with_path() {
    let tmp = tempfile::tempdir().unwrap();
    let out = spreadlab(&[
        "calibrate",
        "--books",
        "/nonexistent/books.jsonl",
        "--out",
        s(tmp.path()),
    ]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("/nonexistent/books.jsonl"));
}

#[test]
fn usage_errors_exit_64() {
    assert_eq!(
        spreadlab(&["calibrate", "--no-such-flag"]).status.code(),
        Some(64)
    );
    assert_eq!(spreadlab(&["frobnicate"]).status.code(), Some(64));
    let bad_range = spreadlab(&["metrics", "--from", "2023-05-25", "--to", "2023-05-24"]);
    assert_eq!(bad_range.status.code(), Some(64));
    assert_eq!(spreadlab(&["--help"]).status.code(), Some(0));
}

#[test]
fn validation_errors_exit_1() {
    let tmp = tempfile::tempdir().unwrap();
    let mut args = market_args("calibrate", tmp.path());
    args.extend(["--spreads".into(), "10,5".into()]);
    assert_eq!(run(&args).status.code(), Some(1));
}
