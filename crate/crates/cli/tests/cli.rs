use std::path::Path;
use std::process::{Command, Output};

fn apml(args: &[&str], cache: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_apml"))
        .args(args)
        .env("APML_CACHE_DIR", cache)
        .output()
        .expect("run apml")
}

fn json(path: &Path) -> serde_json::Value {
    serde_json::from_slice(&std::fs::read(path).unwrap()).unwrap()
}

#[test]
fn no_arguments_prints_usage() {
    let dir = tempfile::tempdir().unwrap();
    let out = apml(&[], dir.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

#[test]
fn constants_json() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().join("out");
    let out = apml(&["constants", "--json", "--out-dir", o.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let rows = v.as_array().unwrap();
    let get = |n: &str| rows.iter().find(|r| r["name"] == n).unwrap_or_else(|| panic!("{n} missing")).clone();
    for n in ["C2", "C3", "C5", "C6", "C8", "Z_prod", "Z_res"] {
        let r = get(n);
        assert!(r["tail_bound"].as_f64().unwrap() <= 1e-10, "{n}");
    }
    assert!((get("C8")["value"].as_f64().unwrap() - 2.5955016704944315).abs() < 1e-12);
    assert!((get("C3")["value"].as_f64().unwrap() - 0.3739558136192023).abs() < 1e-12);
    let m = json(&o.join("manifest.json"));
    assert_eq!(m["command"], "constants");
    assert_eq!(m["config"]["command"], "constants");
    assert!(m["digests"].as_object().unwrap().keys().any(|k| k.ends_with("constants.json")));
}

#[test]
fn reruns_are_byte_identical_across_workers() {
    let dir = tempfile::tempdir().unwrap();
    let mut payloads = Vec::new();
    for w in ["1", "4", "1"] {
        let o = dir.path().join(format!("out{}", payloads.len()));
        let out = apml(
            &["moments", "--x", "20000", "--Q", "60", "--csv", "--workers", w, "--out-dir", o.to_str().unwrap()],
            dir.path(),
        );
        assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
        let digests = json(&o.join("manifest.json"))["digests"].clone();
        assert_eq!(digests.as_object().unwrap().len(), 2);
        payloads.push((std::fs::read(o.join("moments.json")).unwrap(), std::fs::read(o.join("moments.csv")).unwrap()));
    }
    assert!(payloads.windows(2).all(|w| w[0] == w[1]));
    let csv = String::from_utf8(payloads[0].1.clone()).unwrap();
    assert!(csv.starts_with("q,phi,sumE2,sumE3\n1,1,"));
    assert_eq!(csv.lines().count(), 61);
}

#[test]
fn corrupt_cache_is_regenerated() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().join("out");
    let args = ["sieve", "--x", "1000", "--out-dir", o.to_str().unwrap()];
    assert_eq!(apml(&args, dir.path()).status.code(), Some(0));
    let cache = dir.path().join("primes-1000.apml");
    let mut bytes = std::fs::read(&cache).unwrap();
    bytes[0] = b'X';
    std::fs::write(&cache, bytes).unwrap();
    let out = apml(&args, dir.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(String::from_utf8_lossy(&out.stderr).contains("regenerated"));
    assert_eq!(&std::fs::read(&cache).unwrap()[..5], b"APML1");
    assert_eq!(json(&o.join("sieve.json"))["count"], 168);
}

#[test]
fn usage_errors_exit_2() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.json");
    std::fs::write(&cfg, r#"{"command": "moments", "x": 1000, "Q": 20, "colour": "red"}"#).unwrap();
    assert_eq!(apml(&["--config", cfg.to_str().unwrap()], dir.path()).status.code(), Some(2));
    assert_eq!(apml(&["moments", "--x", "1000"], dir.path()).status.code(), Some(2));
    assert_eq!(apml(&["integral", "--which", "nope", "--X", "10"], dir.path()).status.code(), Some(2));
    let o = dir.path().join("empty");
    assert_eq!(apml(&["report", "--out-dir", o.to_str().unwrap()], dir.path()).status.code(), Some(2));
}

#[test]
fn config_file_drives_a_run() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().join("out");
    let cfg = dir.path().join("run.json");
    let body = format!(r#"{{"command": "lattice", "sum": "psi1_plain", "X_grid": [50, 200], "out_dir": {:?}}}"#, o);
    std::fs::write(&cfg, body).unwrap();
    let out = apml(&["--config", cfg.to_str().unwrap(), "--csv"], dir.path());
    assert_eq!(out.status.code(), Some(0), "{}", String::from_utf8_lossy(&out.stderr));
    let csv = std::fs::read_to_string(o.join("lattice.csv")).unwrap();
    assert!(csv.starts_with("sum_id,X,value\npsi1_plain,50.0,"));
    assert_eq!(json(&o.join("manifest.json"))["config"]["output"], "csv");
}

#[test]
fn verify_exit_codes_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().join("ok");
    let out = apml(&["verify", "--suite", "constants", "--out-dir", o.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v = json(&o.join("verify.json"));
    assert_eq!(v["pass"], true);
    assert_eq!(apml(&["report", "--out-dir", o.to_str().unwrap()], dir.path()).status.code(), Some(0));
    assert!(std::fs::read_to_string(o.join("report.md")).unwrap().contains("Overall: PASS"));

    let bad = dir.path().join("bad");
    let cfg = dir.path().join("strict.json");
    std::fs::write(&cfg, r#"{"thresholds": {"z_abs": -1.0}}"#).unwrap();
    let args = ["verify", "--suite", "constants", "--config", cfg.to_str().unwrap(), "--out-dir", bad.to_str().unwrap()];
    let out = apml(&args, dir.path());
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stdout).contains("FAIL"));
    assert_eq!(apml(&["report", "--out-dir", bad.to_str().unwrap()], dir.path()).status.code(), Some(1));
}

#[test]
fn verify_local_lists_identities() {
    let dir = tempfile::tempdir().unwrap();
    let o = dir.path().join("out");
    let out = apml(&["verify", "--suite", "local", "--json", "--out-dir", o.to_str().unwrap()], dir.path());
    assert_eq!(out.status.code(), Some(0));
    let v: serde_json::Value = serde_json::from_slice(&out.stdout).unwrap();
    let detail = v["suites"][0]["checks"][0]["detail"].as_str().unwrap().to_string();
    assert!(detail.contains("9592 primes"), "{detail}");
    assert_eq!(detail.matches("9592/9592").count() + detail.matches("28776/28776").count() + detail.matches("19184/19184").count(), 7);
}
