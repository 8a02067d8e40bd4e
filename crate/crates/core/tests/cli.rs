use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn neglag(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_neglag"))
        .args(args)
        .env_remove("NEGLAG_PRECISION")
        .output()
        .expect("binary runs")
}

fn stdout(out: &Output) -> String {
    assert!(out.status.success(), "stderr: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn schema(name: &str) -> Value {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../schemas")
        .join(name);
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Checks required keys, absence of extra keys, and JSON types against an
/// object schema.
fn conforms(value: &Value, schema: &Value) {
    let obj = value.as_object().expect("object");
    let props = schema["properties"].as_object().unwrap();
    for key in schema["required"].as_array().unwrap() {
        assert!(obj.contains_key(key.as_str().unwrap()), "missing {key}");
    }
    for (key, v) in obj {
        let spec = props.get(key).unwrap_or_else(|| panic!("unexpected key {key}"));
        let types: Vec<&str> = match &spec["type"] {
            Value::String(s) => vec![s.as_str()],
            Value::Array(a) => a.iter().map(|t| t.as_str().unwrap()).collect(),
            _ => continue,
        };
        let ok = types.iter().any(|t| match *t {
            "number" => v.is_number(),
            "integer" => v.is_u64() || v.is_i64(),
            "boolean" => v.is_boolean(),
            "null" => v.is_null(),
            "object" => v.is_object(),
            _ => false,
        });
        assert!(ok, "{key} = {v} is not {types:?}");
    }
}

#[test]
fn betas_matches_schema_and_values() {
    let text = stdout(&neglag(&["betas", "--A", "0.799999975"]));
    let v: Value = serde_json::from_str(&text).unwrap();
    conforms(&v, &schema("betas.schema.json"));
    assert!((v["beta1"].as_f64().unwrap() - 0.3056).abs() < 1e-4);
    assert!((v["beta2"].as_f64().unwrap() - 2.0944).abs() < 1e-4);
    let one: Value = serde_json::from_str(&stdout(&neglag(&["betas", "--A", "1"]))).unwrap();
    assert_eq!((one["beta1"].as_f64(), one["beta2"].as_f64()), (Some(1.0), Some(1.0)));
}

#[test]
fn contour_csv_with_footer() {
    let dir = tempfile::tempdir().unwrap();
    let mut lengths = Vec::new();
    for r in ["0", "0.5", "1"] {
        let path = dir.path().join(format!("gamma_{r}.csv"));
        stdout(&neglag(&[
            "contour",
            "--A",
            "0.99",
            "--r",
            r,
            "--out",
            path.to_str().unwrap(),
        ]));
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("re,im,arclength"));
        assert!(text.lines().any(|l| l == "# winding=-1"));
        let rows: Vec<Vec<f64>> = text
            .lines()
            .skip(1)
            .filter(|l| !l.starts_with('#'))
            .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
            .collect();
        assert_eq!(rows.first().unwrap()[..2], rows.last().unwrap()[..2]);
        lengths.push(rows.last().unwrap()[2]);
    }
    // nested curves shrink with r
    assert!(lengths[0] > lengths[1] && lengths[1] > lengths[2], "{lengths:?}");
}

#[test]
fn zeros_table() {
    let text = stdout(&neglag(&["zeros", "--n", "40", "--alpha", "-32.4"]));
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("re,im,residual"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|x| x.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 40);
    let positive = rows.iter().filter(|r| r[1] == 0.0 && r[0] > 0.0).count();
    assert_eq!(positive, 8);
    assert!(rows.iter().all(|r| r[2] < 1e-50));
}

#[test]
fn verify_reports_conform() {
    let report_schema = schema("comparison_report.schema.json");
    let text = stdout(&neglag(&["verify", "--n", "40", "--alpha", "-32.4", "--delta", "0.15"]));
    let v: Value = serde_json::from_str(&text).unwrap();
    conforms(&v, &report_schema);
    assert_eq!(v["interval_count"], 8);
    assert_eq!(v["loop_count"], 32);
    assert_eq!(v["outlier_count"], 0);

    let text = stdout(&neglag(&["verify", "--n", "40", "--alpha", "-32", "--delta-sweep"]));
    let sweep: Value = serde_json::from_str(&text).unwrap();
    let entries = sweep.as_array().unwrap();
    assert_eq!(entries.len(), 3);
    for e in entries {
        conforms(&e["report"], &report_schema);
        assert!(e["report"]["r_hat"].is_null());
        assert_eq!(e["report"]["origin_multiplicity"], 32);
    }
}

#[test]
fn verify_is_deterministic() {
    let args = ["verify", "--n", "30", "--alpha", "-24.3"];
    assert_eq!(stdout(&neglag(&args)), stdout(&neglag(&args)));
}

#[test]
fn asymptotic_tables() {
    let text = stdout(&neglag(&[
        "asymp", "--n", "60", "--alpha", "-48.3", "--regime", "outer", "--points", "4",
    ]));
    assert!(text.starts_with("point,exact,predicted,rel_error\n"));
    let err: f64 = text
        .lines()
        .nth(1)
        .unwrap()
        .rsplit(',')
        .next()
        .unwrap()
        .parse()
        .unwrap();
    assert!(err < 1e-2);
    let text = stdout(&neglag(&[
        "asymp",
        "--n",
        "80",
        "--alpha",
        "-64.8",
        "--regime",
        "oscillatory",
        "--grid",
        "10",
    ]));
    assert_eq!(text.lines().count(), 11);
    let text = stdout(&neglag(&[
        "asymp", "--n", "40", "--alpha", "-32.3", "--regime", "nth-root", "--points", "4,3+2i",
    ]));
    assert_eq!(text.lines().count(), 3);
}

#[test]
fn study_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let json = dir.path().join("study.json");
    let csv = dir.path().join("study.csv");
    let out = neglag(&[
        "study",
        "--A",
        "0.8",
        "--r",
        "inf",
        "--n",
        "20,40",
        "--json",
        json.to_str().unwrap(),
        "--csv",
        csv.to_str().unwrap(),
    ]);
    stdout(&out);
    let v: Value = serde_json::from_str(&std::fs::read_to_string(&json).unwrap()).unwrap();
    let report_schema = schema("comparison_report.schema.json");
    for r in v.as_array().unwrap() {
        conforms(r, &report_schema);
    }
    let text = std::fs::read_to_string(&csv).unwrap();
    assert!(text.starts_with("n,alpha,r_hat,max_deviation,ks_interval,ks_loop,mass_error\n20,-16,inf,"));
}

#[test]
fn exit_codes() {
    assert_eq!(neglag(&["betas", "--A", "1.5"]).status.code(), Some(2));
    assert_eq!(neglag(&["zeros", "--n", "10", "--alpha", "abc"]).status.code(), Some(2));
    assert_eq!(neglag(&["zeros", "--n", "10", "--alpha", "-12"]).status.code(), Some(2));
    let out = neglag(&[
        "asymp", "--n", "40", "--alpha", "-32.4", "--regime", "outer", "--points", "1",
    ]);
    assert_eq!(out.status.code(), Some(5));
    let out = Command::new(env!("CARGO_BIN_EXE_neglag"))
        .args(["zeros", "--n", "10", "--alpha", "-5.5"])
        .env("NEGLAG_PRECISION", "10")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}
