#![allow(dead_code)]

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;

pub struct Output {
    pub code: i32,
    pub stdout: String,
    pub stderr: String,
}

pub fn sgt_with_env(args: &[&str], env: &[(&str, &str)]) -> Output {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_sgt"));
    cmd.args(args).env_remove("SGT_OUT").env_remove("SGT_THREADS");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("spawn sgt");
    Output {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8_lossy(&out.stdout).into_owned(),
        stderr: String::from_utf8_lossy(&out.stderr).into_owned(),
    }
}

pub fn sgt(args: &[&str]) -> Output {
    sgt_with_env(args, &[])
}

/// Runs `sgt` and panics with its stderr unless it exits 0.
pub fn sgt_ok(args: &[&str]) {
    let out = sgt(args);
    assert_eq!(out.code, 0, "sgt {args:?} failed:\n{}", out.stderr);
}

pub fn toy_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/toy")
}

/// Every file below `dir` keyed by relative path.
pub fn tree(dir: &Path) -> BTreeMap<String, Vec<u8>> {
    fn walk(root: &Path, dir: &Path, out: &mut BTreeMap<String, Vec<u8>>) {
        for entry in std::fs::read_dir(dir).unwrap() {
            let path = entry.unwrap().path();
            if path.is_dir() {
                walk(root, &path, out);
            } else {
                let rel = path.strip_prefix(root).unwrap().to_string_lossy().replace('\\', "/");
                out.insert(rel, std::fs::read(&path).unwrap());
            }
        }
    }
    let mut out = BTreeMap::new();
    walk(dir, dir, &mut out);
    out
}

/// Manifest without its wall-clock field.
pub fn manifest_without_time(dir: &Path) -> serde_json::Value {
    let text = std::fs::read_to_string(dir.join("manifest.json")).unwrap();
    let mut v: serde_json::Value = serde_json::from_str(&text).unwrap();
    let t = v.as_object_mut().unwrap().remove("wall_time_seconds").expect("wall time recorded");
    assert!(t.as_f64().unwrap() >= 0.0);
    v
}

/// Two run directories agree byte for byte on every output, and on the
/// manifest apart from wall time. Returns the number of compared files.
pub fn assert_same_run(a: &Path, b: &Path) -> usize {
    let (mut ta, mut tb) = (tree(a), tree(b));
    assert!(ta.remove("manifest.json").is_some() && tb.remove("manifest.json").is_some());
    assert_eq!(ta.keys().collect::<Vec<_>>(), tb.keys().collect::<Vec<_>>());
    for (k, v) in &ta {
        assert!(v == &tb[k], "{k} differs between {} and {}", a.display(), b.display());
    }
    assert_eq!(manifest_without_time(a), manifest_without_time(b));
    ta.len()
}

pub fn read_tsv(path: &Path) -> Vec<BTreeMap<String, String>> {
    let text = std::fs::read_to_string(path).unwrap_or_else(|e| panic!("{}: {e}", path.display()));
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split('\t').collect();
    lines
        .map(|l| header.iter().map(|h| h.to_string()).zip(l.split('\t').map(String::from)).collect())
        .collect()
}

pub fn num(row: &BTreeMap<String, String>, col: &str) -> f64 {
    row[col].parse().unwrap_or_else(|_| panic!("column {col} = {:?}", row[col]))
}

pub fn path_str(p: &Path) -> &str {
    p.to_str().unwrap()
}
