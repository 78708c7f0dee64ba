use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn tandem(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tandem"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn write_config(dir: &TempDir, name: &str, body: &str) -> String {
    let path = dir.path().join(name);
    std::fs::write(&path, body).unwrap();
    path.to_str().unwrap().to_owned()
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

/// CSV data rows (header and `name: value` summary lines excluded).
fn data_rows(text: &str) -> Vec<Vec<String>> {
    text.lines()
        .skip(1)
        .filter(|l| !l.contains(": ") || l.contains(','))
        .map(|l| l.split(',').map(str::to_owned).collect())
        .collect()
}

fn summary<'a>(text: &'a str, name: &str) -> Option<&'a str> {
    text.lines()
        .find_map(|l| l.strip_prefix(name).and_then(|r| r.strip_prefix(": ")))
}

#[test]
fn default_sweep_passes_the_check() {
    let out = tandem(&["sweep", "--check", "--mc-samples", "20000"]);
    assert_eq!(
        out.status.code(),
        Some(0),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );
    let text = stdout(&out);
    assert!(text.starts_with(
        "k,thresholds,C_discrete,lambda_star,C_system,pe_exact,pfa,pmd,pe_mc,mc_stderr\n"
    ));
    let ks: Vec<String> = data_rows(&text).iter().map(|r| r[0].clone()).collect();
    assert_eq!(ks, ["2", "4", "8", "16"]);
    assert_eq!(summary(&text, "chernoff_monotone"), Some("true"));
    assert_eq!(summary(&text, "pe_monotone"), Some("true"));
}

#[test]
fn out_of_range_prior_is_a_config_error() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "bad.json", r#"{"prior1": 1.2}"#);
    let out = tandem(&["sweep", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("prior1"));
}

#[test]
fn single_k_gives_one_row_and_vacuous_flags() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(&dir, "one.json", r#"{"k_list": [2], "mc_samples": 0}"#);
    let out = tandem(&["sweep", "--check", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert_eq!(data_rows(&text).len(), 1);
    assert_eq!(summary(&text, "chernoff_monotone"), Some("true"));
    assert_eq!(summary(&text, "pe_monotone"), Some("true"));
}

#[test]
fn non_monotone_sweep_fails_the_check() {
    // Node 1 carries nothing, so refinement cannot change anything.
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "flat.json",
        r#"{"node1": {"family": "gaussian_equal_variance", "params0": [0.0, 1.0], "params1": [0.0, 1.0]},
            "k_list": [2, 4], "mc_samples": 0}"#,
    );
    assert_eq!(tandem(&["sweep", "--config", &cfg]).status.code(), Some(0));
    let out = tandem(&["sweep", "--check", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(2));
    assert_eq!(summary(&stdout(&out), "chernoff_monotone"), Some("false"));
}

#[test]
fn chernoff_of_a_non_learnable_model_is_zero() {
    let dir = TempDir::new().unwrap();
    let cfg = write_config(
        &dir,
        "nl.json",
        r#"{"node1": {"family": "gaussian_equal_variance", "params0": [0.5, 2.0], "params1": [0.5, 2.0]},
            "node2": {"family": "gaussian_general", "params0": [1.0, 1.0], "params1": [1.0, 1.0]}}"#,
    );
    let out = tandem(&["chernoff", "--config", &cfg]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    let rows = data_rows(&text);
    assert_eq!(rows.len(), 4);
    for row in rows {
        assert_eq!(row[2].parse::<f64>().unwrap(), 0.0, "C_discrete");
        assert_eq!(row[6].parse::<f64>().unwrap(), 0.0, "C_system");
    }
    assert_eq!(
        summary(&text, "C_node1").unwrap().parse::<f64>().unwrap(),
        0.0
    );
}

#[test]
fn exponent_table_has_n_max_rows() {
    let out = tandem(&["exponent", "--k", "3", "--n-max", "12"]);
    assert_eq!(out.status.code(), Some(0));
    let text = stdout(&out);
    assert!(text.starts_with("n,pe,exponent\n"));
    let rows = data_rows(&text);
    let ns: Vec<usize> = rows.iter().map(|r| r[0].parse().unwrap()).collect();
    assert_eq!(ns, (1..=12).collect::<Vec<_>>());
    let pe: Vec<f64> = rows.iter().map(|r| r[1].parse().unwrap()).collect();
    assert!(pe.windows(2).all(|w| w[1] < w[0]));
}

#[test]
fn json_output_is_versioned() {
    let dir = TempDir::new().unwrap();
    let path = dir.path().join("sweep.json");
    let out = tandem(&[
        "sweep",
        "--format",
        "json",
        "--mc-samples",
        "0",
        "--output",
        path.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(0));
    let doc: serde_json::Value =
        serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(doc["schema"], 1);
    assert_eq!(doc["rows"].as_array().unwrap().len(), 4);
    assert_eq!(doc["rows"][0]["k"], 2);
    assert!(doc["rows"][0]["pe_mc"].is_null());
    assert_eq!(doc["pe_monotone"], true);
}

fn run_to_file(dir: &Path, name: &str, args: &[&str]) -> Vec<u8> {
    let path = dir.join(name);
    let mut full: Vec<&str> = args.to_vec();
    full.extend(["--output", path.to_str().unwrap()]);
    assert_eq!(tandem(&full).status.code(), Some(0));
    std::fs::read(path).unwrap()
}

#[test]
fn output_is_byte_identical_across_runs() {
    let dir = TempDir::new().unwrap();
    let args = ["sweep", "--seed", "77", "--mc-samples", "50000"];
    let a = run_to_file(dir.path(), "a.csv", &args);
    let b = run_to_file(dir.path(), "b.csv", &args);
    assert_eq!(a, b);

    let single = Command::new(env!("CARGO_BIN_EXE_tandem"))
        .args(args)
        .env("TANDEM_THREADS", "1")
        .output()
        .unwrap();
    assert_eq!(single.stdout, a, "thread count changed the output");
}

#[test]
fn simulate_requires_samples() {
    assert_eq!(
        tandem(&["simulate", "--mc-samples", "0"]).status.code(),
        Some(1)
    );
    let out = tandem(&["simulate", "--mc-samples", "10000"]);
    assert_eq!(out.status.code(), Some(0));
    assert_eq!(data_rows(&stdout(&out)).len(), 4);
}

#[test]
fn selftest_passes() {
    let out = tandem(&["selftest"]);
    assert_eq!(out.status.code(), Some(0), "{}", stdout(&out));
    assert!(!stdout(&out).contains("FAIL"));
}

#[test]
fn unknown_subcommand_prints_usage_and_exits_1() {
    let out = tandem(&["frobnicate"]);
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn bad_thread_variable_is_an_error() {
    let out = Command::new(env!("CARGO_BIN_EXE_tandem"))
        .arg("sweep")
        .env("TANDEM_THREADS", "zero")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}
