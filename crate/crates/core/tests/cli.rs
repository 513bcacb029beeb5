use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn fathorse(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fathorse"))
        .args(args)
        .env("FATHORSE_THREADS", "2")
        .output()
        .expect("binary runs")
}

fn write_config(dir: &Path, json: &str) -> String {
    let path = dir.join("config.json");
    fs::write(&path, json).unwrap();
    path.to_str().unwrap().to_owned()
}

#[test]
fn infeasible_construction_exits_2_and_writes_nothing() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"c": 2.0, "p": 2.0}"#);
    let out = dir.path().join("out");
    let o = fathorse(&["run", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("ζ(p) < a/b"));
    assert!(!out.exists());
}

#[test]
fn unknown_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"c": 1.8, "colour": "red"}"#);
    let o = fathorse(&[
        "run",
        "--config",
        &cfg,
        "--out",
        dir.path().join("o").to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));
}

#[test]
fn missing_config_exits_3() {
    let o = fathorse(&["run", "--config", "/nonexistent/fathorse.json"]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn unwritable_output_exits_3() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"n_max": 2}"#);
    let blocker = dir.path().join("file");
    fs::write(&blocker, "x").unwrap();
    let o = fathorse(&[
        "run",
        "--config",
        &cfg,
        "--only",
        "cones",
        "--out",
        blocker.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(3));
}

#[test]
fn zero_depth_cones_table() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"n_max": 0}"#);
    let out = dir.path().join("out");
    let o = fathorse(&[
        "run",
        "--config",
        &cfg,
        "--only",
        "cones",
        "--out",
        out.to_str().unwrap(),
    ]);
    assert_eq!(
        o.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&o.stdout)
    );
    let csv = fs::read_to_string(out.join("cones.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("k,a,n,total,bound,ratio"));
    let rows: Vec<&str> = lines.collect();
    // one row per (k, a) pair of the default lists
    assert_eq!(rows.len(), 3 * 5);
    for row in rows {
        let fields: Vec<&str> = row.split(',').collect();
        assert_eq!(fields[2], "0");
        assert_eq!(fields[3].parse::<f64>().unwrap(), 2.0);
    }
    assert!(!out.join("fatcantor.csv").exists());
    assert!(out.join("figures/cones.svg").exists());
}

#[test]
fn csv_format() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"level_max": 4}"#);
    let out = dir.path().join("out");
    let o = fathorse(&[
        "run",
        "--config",
        &cfg,
        "--only",
        "fatcantor",
        "--out",
        out.to_str().unwrap(),
    ]);
    // the level-20 limit criterion fails by design of the series tail
    assert_eq!(o.status.code(), Some(1));
    let csv = fs::read_to_string(out.join("fatcantor.csv")).unwrap();
    assert!(!csv.contains('\r'));
    assert!(csv.ends_with('\n'));
    assert_eq!(csv.lines().count(), 1 + 5);
    let second = csv.lines().nth(1).unwrap();
    let measure = second.split(',').nth(1).unwrap();
    let mantissa = measure.split('e').next().unwrap();
    assert_eq!(
        mantissa.chars().filter(|c| c.is_ascii_digit()).count(),
        17,
        "{measure}"
    );

    let report: serde_json::Value =
        serde_json::from_str(&fs::read_to_string(out.join("report.json")).unwrap()).unwrap();
    for c in report["criteria"].as_array().unwrap() {
        for key in ["id", "value", "bound", "pass"] {
            assert!(c.get(key).is_some(), "{c}");
        }
    }
    assert!(report["parameters"].get("output_dir").is_none());
}

#[test]
fn render_empty_dataset() {
    let dir = tempfile::tempdir().unwrap();
    let input = dir.path().join("empty.json");
    fs::write(&input, "{}").unwrap();
    let o = fathorse(&[
        "render",
        "--input",
        input.to_str().unwrap(),
        "--kind",
        "cones",
    ]);
    assert_eq!(o.status.code(), Some(0));
    let svg = String::from_utf8(o.stdout).unwrap();
    assert!(svg.starts_with("<?xml"));
    assert!(svg.contains(r#"class="axis""#));
    assert!(!svg.contains(r#"class="region""#));
}

#[test]
fn render_reproduces_run_figure() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), r#"{"N": 2}"#);
    let out = dir.path().join("out");
    fathorse(&[
        "run",
        "--config",
        &cfg,
        "--only",
        "horseshoe",
        "--out",
        out.to_str().unwrap(),
    ]);
    for kind in ["partition", "image", "horseshoe"] {
        let data = out.join(format!("data/{kind}.json"));
        let o = fathorse(&["render", "--input", data.to_str().unwrap(), "--kind", kind]);
        assert_eq!(o.status.code(), Some(0));
        let svg = fs::read_to_string(out.join(format!("figures/{kind}.svg"))).unwrap();
        assert_eq!(String::from_utf8(o.stdout).unwrap(), svg, "{kind}");
    }
    let partition = fs::read_to_string(out.join("figures/partition.svg")).unwrap();
    assert_eq!(partition.matches(r#"class="region""#).count(), 4);
}

#[test]
fn render_missing_input_exits_3() {
    let o = fathorse(&[
        "render",
        "--input",
        "/nonexistent/data.json",
        "--kind",
        "image",
    ]);
    assert_eq!(o.status.code(), Some(3));
}
