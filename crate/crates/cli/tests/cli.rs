//! Runs the `bellsim` binary: output schemas, golden key sets, exit codes
//! and command examples.

use std::collections::BTreeSet;
use std::f64::consts::FRAC_PI_2;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn bellsim(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bellsim")).args(args).output().expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = bellsim(args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn json(args: &[&str]) -> Value {
    serde_json::from_str(&ok(args)).unwrap()
}

fn schema_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("schema")
}

fn load(path: PathBuf) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

fn assert_valid(doc: &Value) {
    let schema = load(schema_dir().join("result-document.schema.json"));
    let validator = jsonschema::validator_for(&schema).expect("schema compiles");
    let errors: Vec<String> = validator.iter_errors(doc).map(|e| format!("{} at {}", e, e.instance_path)).collect();
    assert!(errors.is_empty(), "{errors:#?}");
}

/// Every key path in a document, with array positions collapsed to `[]`.
fn key_paths(value: &Value, prefix: &str, out: &mut BTreeSet<String>) {
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                let path = format!("{prefix}/{k}");
                out.insert(path.clone());
                key_paths(v, &path, out);
            }
        }
        Value::Array(items) => {
            for item in items {
                key_paths(item, &format!("{prefix}[]"), out);
            }
        }
        _ => {}
    }
}

/// Compares the key set of `doc` with `tests/golden/<name>.keys`.
/// Set `BELLSIM_UPDATE_GOLDEN=1` to rewrite the file.
fn assert_golden_keys(name: &str, doc: &Value) {
    let mut paths = BTreeSet::new();
    key_paths(doc, "", &mut paths);
    let actual: String = paths.into_iter().map(|p| p + "\n").collect();
    let file = Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(format!("{name}.keys"));
    if std::env::var_os("BELLSIM_UPDATE_GOLDEN").is_some() {
        std::fs::write(&file, &actual).unwrap();
    }
    let expected = std::fs::read_to_string(&file).unwrap_or_default();
    assert_eq!(actual, expected, "key set of `{name}` changed; update the schema and {}", file.display());
}

fn csv_rows(text: &str) -> Vec<Vec<String>> {
    text.lines().map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn field(rows: &[Vec<String>], row: usize, name: &str) -> String {
    let col = rows[0].iter().position(|h| h == name).unwrap();
    rows[row][col].clone()
}

#[test]
fn sweep_table_matches_its_schema() {
    let table = load(schema_dir().join("sweep.table.json"));
    let names: Vec<&str> = table["fields"].as_array().unwrap().iter().map(|f| f["name"].as_str().unwrap()).collect();
    let text = ok(&["sweep", "--n", "2000", "--angles", "0:180:90"]);
    assert!(!text.contains('\r'));
    assert!(text.ends_with('\n'));
    let rows = csv_rows(&text);
    assert_eq!(rows[0], names);
    assert_eq!(rows[0].join(","), "model,kind,theta_deg,mean,stderr,n,im_mean");
    assert_eq!(rows.len(), 1 + 3 * 3);
    for (i, row) in rows.iter().enumerate().skip(1) {
        assert_eq!(row.len(), names.len());
        let model = field(&rows, i, "model");
        assert_eq!(field(&rows, i, "im_mean").is_empty(), model != "algebraic", "{row:?}");
        let mean = field(&rows, i, "mean");
        assert_eq!(mean.split('e').next().unwrap().trim_start_matches('-').len(), 18, "{mean}");
    }
}

#[test]
fn json_documents_match_schema_and_golden_keys() {
    let dir = tempfile::tempdir().unwrap();
    let audit_path = dir.path().join("audit.json");
    ok(&["audit", "--n", "10000", "--out", audit_path.to_str().unwrap()]);
    let docs = [
        ("chsh", json(&["chsh", "--n", "2000"])),
        ("chsh-algebraic", json(&["chsh", "--n", "2000", "--model", "algebraic", "--kind", "photon"])),
        ("locality-fixed", json(&["locality", "--n", "2000", "--angles", "0,30", "--logs", "2"])),
        ("locality-chsh", json(&["locality", "--n", "2000", "--model", "algebraic", "--logs", "1"])),
        ("audit", load(audit_path)),
    ];
    for (name, doc) in &docs {
        assert_valid(doc);
        assert_golden_keys(name, doc);
    }
    let timed = json(&["chsh", "--n", "1000", "--timing"]);
    assert_valid(&timed);
    assert!(timed["wall_clock_seconds"].as_f64().unwrap() >= 0.0);
}

#[test]
fn documents_print_seventeen_significant_digits() {
    let text = ok(&["chsh", "--n", "1000"]);
    let line = text.lines().find(|l| l.contains("\"s_value\"")).unwrap();
    let number = line.split(':').nth(1).unwrap().trim().trim_end_matches(',');
    let mantissa = number.split('e').next().unwrap().trim_start_matches('-');
    assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17, "{number}");
}

#[test]
fn config_echo_reproduces_the_run() {
    let dir = tempfile::tempdir().unwrap();
    let first = ok(&["locality", "--n", "3000", "--seed", "9", "--angles", "0,0,45,45", "--schedule-L", "2"]);
    let doc: Value = serde_json::from_str(&first).unwrap();
    let config = dir.path().join("config.json");
    std::fs::write(&config, doc["config"].to_string()).unwrap();
    let second = ok(&["locality", "--config", config.to_str().unwrap()]);
    assert_eq!(first, second);
    // flags override the file
    let third: Value = serde_json::from_str(&ok(&["locality", "--config", config.to_str().unwrap(), "--n", "1000"])).unwrap();
    assert_eq!(third["config"]["n"], 1000);
    assert_eq!(third["config"]["seed"], 9);
}

#[test]
fn exit_codes() {
    assert_eq!(bellsim(&["--help"]).status.code(), Some(0));
    assert_eq!(bellsim(&["--version"]).status.code(), Some(0));
    assert_eq!(bellsim(&["sweep", "--model", "nope"]).status.code(), Some(1));
    assert_eq!(bellsim(&["sweep", "--angles", "0:10:-1"]).status.code(), Some(1));
    assert_eq!(bellsim(&["chsh", "--angles", "0,1"]).status.code(), Some(1));
    assert_eq!(bellsim(&["chsh", "--model", "qm,algebraic"]).status.code(), Some(1));
    assert_eq!(bellsim(&["audit", "--n", "100"]).status.code(), Some(1));
    assert_eq!(bellsim(&["sweep", "--n", "0"]).status.code(), Some(1));
    assert_eq!(bellsim(&["chsh", "--config", "/nonexistent/config.json"]).status.code(), Some(2));
    assert_eq!(bellsim(&["sweep", "--n", "10", "--out", "/nonexistent/dir/out.csv"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.json");
    std::fs::write(&bad, r#"{"n": 10, "colour": 1}"#).unwrap();
    assert_eq!(bellsim(&["chsh", "--config", bad.to_str().unwrap()]).status.code(), Some(1));
    std::fs::write(&bad, r#"{"command": "sweep"}"#).unwrap();
    assert_eq!(bellsim(&["chsh", "--config", bad.to_str().unwrap()]).status.code(), Some(1));
}

#[test]
fn invalid_schedules_name_the_ordering_problem() {
    let out = bellsim(&["locality", "--schedule-times", "0.5,0.5,0.4,0.9"]);
    assert_eq!(out.status.code(), Some(1));
    let msg = String::from_utf8_lossy(&out.stderr);
    assert!(msg.contains("station A measures at t=0.4"), "{msg}");
    let out = bellsim(&["locality", "--schedule-times", "-0.1,0.5,0.9,0.9"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("after emission"));
}

#[test]
fn sweep_examples() {
    let rows = csv_rows(&ok(&["sweep", "--model", "qm", "--n", "100000", "--angles", "0:180:15"]));
    assert_eq!(rows.len(), 14);
    assert_eq!(field(&rows, 1, "mean").parse::<f64>().unwrap(), -1.0);
    assert_eq!(field(&rows, 13, "mean").parse::<f64>().unwrap(), 1.0);

    // Im z = -λ·(a×b) with λ uniform: variance sin²θ/3.
    let n = 100_000.0f64;
    let rows = csv_rows(&ok(&["sweep", "--model", "algebraic", "--n", "100000"]));
    for i in 1..rows.len() {
        let theta = field(&rows, i, "theta_deg").parse::<f64>().unwrap().to_radians();
        let im = field(&rows, i, "im_mean").parse::<f64>().unwrap();
        let sigma = theta.sin().abs() / (3.0 * n).sqrt();
        assert!(im.abs() <= 4.0 * sigma + 1e-15, "θ={theta}: {im}");
    }

    let rows = csv_rows(&ok(&["sweep", "--model", "qm", "--kind", "photon", "--n", "100000", "--angles", "45"]));
    let mean = field(&rows, 1, "mean").parse::<f64>().unwrap();
    let stderr = field(&rows, 1, "stderr").parse::<f64>().unwrap();
    assert!(mean.abs() <= 4.0 * stderr);
}

#[test]
fn sweep_plot_is_written() {
    let dir = tempfile::tempdir().unwrap();
    let (csv, svg) = (dir.path().join("s.csv"), dir.path().join("s.svg"));
    ok(&["sweep", "--n", "1000", "--out", csv.to_str().unwrap(), "--plot", svg.to_str().unwrap()]);
    let svg = std::fs::read_to_string(svg).unwrap();
    assert!(svg.starts_with("<svg") && svg.trim_end().ends_with("</svg>"));
    assert_eq!(svg.matches("<circle").count(), 3 * 13);
    assert!(std::fs::read_to_string(csv).unwrap().starts_with("model,"));
}

#[test]
fn chsh_examples() {
    let tsirelson = 2.0 * 2f64.sqrt();
    let qm = json(&["chsh", "--model", "qm", "--n", "200000"]);
    let s = qm["chsh"]["s_value"].as_f64().unwrap();
    let err = qm["chsh"]["s_stderr"].as_f64().unwrap();
    assert!(s < -2.0 && (s + tsirelson).abs() <= 4.0 * err, "{s}");
    assert_eq!(qm["chsh"]["exceeds_local_bound"], true);

    let lhv = json(&["chsh", "--model", "lhv-sign", "--n", "200000"]);
    let abs = lhv["chsh"]["abs_s"].as_f64().unwrap();
    assert!((abs - 2.0).abs() <= 4.0 * lhv["chsh"]["s_stderr"].as_f64().unwrap());

    let alg = json(&["chsh", "--model", "algebraic", "--n", "20000"]);
    assert!((alg["chsh"]["abs_s"].as_f64().unwrap() - tsirelson).abs() < 1e-12);
}

#[test]
fn audit_examples() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("audit.json");
    let table = ok(&["audit", "--n", "10000", "--out", path.to_str().unwrap()]);
    assert_eq!(table.lines().filter(|l| l.ends_with("clean")).count(), 3, "{table}");
    let doc = load(path);
    let audits = doc["audits"].as_array().unwrap();
    let by_model = |m: &str| audits.iter().find(|a| a["model"] == m).unwrap();
    assert_eq!(by_model("algebraic")["codomain"], "complex scalar");
    assert_eq!(by_model("qm")["matched_setting"]["exact"], true);
    assert_eq!(by_model("qm")["matched_setting"]["exceptions"], 0);
    for a in audits {
        assert_eq!(a["locality_compliant"], true);
        assert_eq!(a["causality"]["ledger_clean"], true);
    }
}

#[test]
fn locality_examples() {
    let doc = json(&["locality", "--model", "qm", "--angles", "30,30", "--n", "5000"]);
    assert_eq!(doc["causality"]["schedule_spacelike"], true);
    assert_eq!(doc["estimates"][0]["mean"], -1.0);

    let timelike = ["locality", "--schedule-L", "0.1", "--schedule-times", "0.1,0.1,0.2,0.7", "--n", "1000"];
    let doc = json(&timelike);
    assert_eq!(doc["causality"]["schedule_spacelike"], false);
    assert_eq!(doc["causality"]["spacelike_trials"], 0);
    let mut strict = timelike.to_vec();
    strict.push("--require-spacelike");
    let out = bellsim(&strict);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("not spacelike"));

    let doc = json(&["locality", "--model", "negative-control", "--angles", "0,45", "--n", "2000"]);
    assert_eq!(doc["causality"]["ledger_clean"], false);
    assert_eq!(doc["causality"]["clean_trials"], 0);
    assert!(doc["causality"]["inputs_read"]["station_b"].as_array().unwrap().contains(&Value::from("setting_a")));
    let mean = doc["estimates"][0]["mean"].as_f64().unwrap();
    assert!((mean + (FRAC_PI_2 / 2.0).cos()).abs() <= 4.0 * doc["estimates"][0]["stderr"].as_f64().unwrap());
}
