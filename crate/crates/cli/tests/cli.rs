use std::path::Path;
use std::process::{Command, Output};

use eqlines_cli::cache::Cache;
use eqlines_cli::reproduce::paper_hypothesis;
use eqlines_core::pipeline::{build_catalog, prepare};

fn eqlines(cache: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_eqlines"))
        .args(args)
        .env("EQLINES_CACHE_DIR", cache)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(eqlines(dir.path(), &["no-such-command"]).status.code(), Some(1));
    assert_eq!(eqlines(dir.path(), &["classes"]).status.code(), Some(1));
    assert_eq!(eqlines(dir.path(), &["tp-enum", "--degree", "2"]).status.code(), Some(1));
    assert_eq!(eqlines(dir.path(), &["nonexist", "(x+5"]).status.code(), Some(1));
    assert_eq!(eqlines(dir.path(), &["--help"]).status.code(), Some(0));
}

#[test]
fn classes_command() {
    let dir = tempfile::tempdir().unwrap();
    let o = eqlines(dir.path(), &["classes", "--n", "8", "--e", "5", "--budget", "3000"]);
    let cs: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert!(cs["classes"].as_array().unwrap().len() <= 8);
    assert_eq!(o.status.code(), Some(if cs["complete"].as_bool().unwrap() { 0 } else { 2 }));

    // n = 2 has a single class, below the bound of 2, so the search reports incomplete.
    let o = eqlines(dir.path(), &["classes", "--n", "2", "--e", "4", "--budget", "50"]);
    let cs: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(cs["classes"].as_array().unwrap().len(), 1);
    assert_eq!(o.status.code(), Some(2));

    let manifests = std::fs::read_to_string(dir.path().join("manifests.jsonl")).unwrap();
    assert_eq!(manifests.lines().count(), 2);
}

#[test]
fn class_cache_replays_and_detects_tampering() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["classes", "--n", "7", "--e", "3", "--budget", "2000"];
    let first = eqlines(dir.path(), &args);
    let second = eqlines(dir.path(), &args);
    assert_eq!(first.status.code(), Some(0));
    assert_eq!(stdout(&first), stdout(&second));
    let path = dir.path().join("classes-n7-e3.json");
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::write(&path, text.replacen("\"budget\": 2000", "\"budget\": 2001", 1)).unwrap();
    assert_eq!(eqlines(dir.path(), &args).status.code(), Some(3));
}

#[test]
fn tp_enum_spec_file_and_flags() {
    let dir = tempfile::tempdir().unwrap();
    let spec = dir.path().join("spec.json");
    std::fs::write(&spec, r#"{"degree": 2, "trace": 6, "parity": {"2": 1}, "interval": ["0", "25"]}"#).unwrap();
    let o = eqlines(dir.path(), &["tp-enum", "--spec", spec.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    // Raw totally positive output; x^2-6x+5 and x^2-6x+9 are reducible.
    let lines: Vec<String> = stdout(&o).lines().map(str::to_owned).collect();
    assert_eq!(lines.len(), 5);
    assert_eq!(lines[0], r#"["1","-6","1"]"#);
    assert_eq!(lines[4], r#"["9","-6","1"]"#);

    let boxes = dir.path().join("boxes.json");
    std::fs::write(
        &boxes,
        r#"{"degree": 3, "trace": 28, "fixed": {"2": 243}, "boxes": [["-5", "9"], ["9", "11"], ["11", "13"]]}"#,
    )
    .unwrap();
    let o = eqlines(dir.path(), &["tp-enum", "--spec", boxes.to_str().unwrap()]);
    assert_eq!(stdout(&o).lines().count(), 9);

    let o = eqlines(dir.path(), &["tp-enum", "--degree", "1", "--trace", "3", "--hi", "25"]);
    assert_eq!(stdout(&o), "[\"-3\",\"1\"]\n");
}

#[test]
fn skip_slow_without_cache_is_incomplete() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(eqlines(dir.path(), &["tables", "--skip-slow"]).status.code(), Some(2));
    assert_eq!(eqlines(dir.path(), &["reproduce-paper", "--skip-slow"]).status.code(), Some(2));
}

#[test]
fn tampered_catalog_exits_three() {
    let dir = tempfile::tempdir().unwrap();
    let budget = prepare(&paper_hypothesis()).unwrap();
    let small = build_catalog(&budget, Some(3)).unwrap();
    let cache = Cache::new(dir.path());
    let name = Cache::catalog_name(&budget);
    cache.write(&name, serde_json::to_string_pretty(&small).unwrap().as_bytes()).unwrap();
    // Intact but truncated catalog: the tables differ from the expected lists.
    let o = eqlines(dir.path(), &["tables", "--skip-slow"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).starts_with("table,d,k,polynomial\n"));
    let path = dir.path().join(&name);
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::write(&path, text.replacen("\"x-3\"", "\"x-4\"", 1).replacen("\"-3\"", "\"-4\"", 1)).unwrap();
    let o = eqlines(dir.path(), &["pipeline", "--skip-slow"]);
    assert_eq!(o.status.code(), Some(3));
    assert!(String::from_utf8_lossy(&o.stderr).contains("digest"));
}

#[test]
fn pipeline_rejects_unsupported_hypotheses() {
    let dir = tempfile::tempdir().unwrap();
    let o = eqlines(dir.path(), &["pipeline", "--lines", "75", "--dim", "19", "--lambda-min", "-5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("unsupported"));
}

#[test]
fn config_file_precedence() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("cfg.toml");
    let alt = dir.path().join("alt");
    std::fs::write(&cfg, format!("cache_dir = {:?}\nbudget = 1500\n", alt.display().to_string())).unwrap();
    let o = eqlines(dir.path(), &["--config", cfg.to_str().unwrap(), "classes", "--n", "5", "--e", "3"]);
    assert!(o.status.success() || o.status.code() == Some(2));
    let cs: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(cs["budget"], 1500);
    assert!(alt.join("classes-n5-e3.json").exists());
    // a flag beats the file
    let o =
        eqlines(dir.path(), &["--config", cfg.to_str().unwrap(), "classes", "--n", "5", "--e", "3", "--budget", "900"]);
    let cs: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(cs["budget"], 900);
    std::fs::write(&cfg, "unknown = 1\n").unwrap();
    assert_eq!(eqlines(dir.path(), &["--config", cfg.to_str().unwrap(), "classes", "--n", "5"]).status.code(), Some(1));
}

#[test]
fn nonexist_cubic_spectrum() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("verdict.json");
    let o = eqlines(
        dir.path(),
        &["nonexist", "(x+5)^33*(x-9)^12*(x-11)^4*(x-13)", "--depth", "1", "-o", out.to_str().unwrap()],
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["conclusion"], "nonexistent");
    assert_eq!(v["enumerated_count"], 9);
    assert_eq!(v["rows"][0], serde_json::json!(["83/126", "2/7", "0", "1/18"]));
    assert_eq!(v["column_sum_violation"]["sum"], "2075/63");
    assert!(dir.path().join("classes-n49-e5.json").exists());
}

#[test]
fn verify_congruences_small() {
    let dir = tempfile::tempdir().unwrap();
    let o = eqlines(dir.path(), &["verify-congruences", "--samples", "30", "--jobs", "1"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let outcomes: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(outcomes.as_array().unwrap().len(), 8);
}
