#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

pub const BIN: &str = env!("CARGO_BIN_EXE_hfsmlab");

/// Kernel tables shared by every test run in this process tree.
pub fn cache_dir() -> PathBuf {
    let dir = std::env::temp_dir().join("hfsmlab-test-cache");
    std::fs::create_dir_all(&dir).unwrap();
    dir
}

pub fn hfsmlab(out: &Path, args: &[&str]) -> Output {
    Command::new(BIN)
        .arg("--out")
        .arg(out)
        .args(args)
        .env("HFSMLAB_CACHE", cache_dir())
        .output()
        .expect("binary runs")
}

/// Runs a command and panics with its stderr unless it exits 0.
pub fn ok(out: &Path, args: &[&str]) -> String {
    let o = hfsmlab(out, args);
    assert!(o.status.success(), "{args:?}: {}", String::from_utf8_lossy(&o.stderr));
    String::from_utf8(o.stdout).unwrap()
}

pub fn read_json(path: &Path) -> Value {
    serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap()
}

/// Reports of a command artifact, keyed by law.
pub fn reports(path: &Path) -> BTreeMap<String, Value> {
    read_json(path)["reports"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| (r["law"].as_str().unwrap().to_string(), r.clone()))
        .collect()
}

/// Every file of a directory with its bytes.
pub fn snapshot(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    std::fs::read_dir(dir)
        .unwrap()
        .map(|e| {
            let e = e.unwrap();
            (e.file_name().to_string_lossy().into_owned(), std::fs::read(e.path()).unwrap())
        })
        .collect()
}

/// Small configuration shared by the reproducibility runs.
pub const SMALL: &[&str] = &[
    "--dt", "2^-10", "--j-high", "8", "--truncation", "2000", "--kernel-half-width", "32",
    "--rho-tilde", "2", "--seed", "7",
];

/// Runs every command at `threads` into `out`; exits with status 3 are kept
/// since a failed law is still an artifact.
pub fn full_pipeline(out: &Path, threads: &str, n_paths: &str) {
    let with = |extra: &[&str]| -> Vec<String> {
        let mut v: Vec<String> = vec!["--threads".into(), threads.into()];
        v.extend(SMALL.iter().map(|s| s.to_string()));
        v.extend(extra.iter().map(|s| s.to_string()));
        v
    };
    let steps: [&[&str]; 6] = [
        &["--n-paths", n_paths, "--csv-paths", "2", "simulate"],
        &["--n-lo", "2", "--n-hi", "10", "modulus"],
        &["--wj-j-hi", "6", "--limsup-j-hi", "8", "lowerbound"],
        &["--n-draws", "4", "--j-max", "8", "--binomial-j-max", "10", "coeffs"],
        &["validate"],
        &["kernel-table"],
    ];
    for step in steps {
        let args = with(step);
        let args: Vec<&str> = args.iter().map(|s| s.as_str()).collect();
        let o = hfsmlab(out, &args);
        assert!(
            o.status.success() || o.status.code() == Some(3),
            "{args:?}: {}",
            String::from_utf8_lossy(&o.stderr)
        );
    }
}
