#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

pub fn golden_dir() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden")
}

/// Runs `lfa` with `cwd` as working directory so report paths stay relative.
pub fn lfa(cwd: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lfa"))
        .current_dir(cwd)
        .args(args)
        .output()
        .expect("spawn lfa")
}

pub fn lfa_ok(cwd: &Path, args: &[&str]) -> String {
    let out = lfa(cwd, args);
    assert!(
        out.status.success(),
        "lfa {args:?} failed ({:?}):\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

/// The small synth -> init -> lfa -> baselines -> coherence -> bias pipeline.
/// Outputs land in `cwd/out/<step>`.
pub fn run_pipeline(cwd: &Path, threads: usize) {
    fs::copy(golden_dir().join("pipeline.toml"), cwd.join("pipeline.toml")).unwrap();
    let t = threads.to_string();
    let g = |step: &str, rest: &[&str]| {
        let mut args = vec!["--config", "pipeline.toml", "--threads", &t, "--out"];
        let out = format!("out/{step}");
        args.push(&out);
        args.extend_from_slice(rest);
        lfa_ok(cwd, &args);
    };
    g("data", &["synth"]);
    g("seeds", &["init-groups", "--dataset", "out/data"]);
    g(
        "lfa",
        &["lfa-run", "--dataset", "out/data", "--seeds", "out/seeds/seeds.csv"],
    );
    g("kmeans", &["baseline", "kmeans", "--dataset", "out/data"]);
    g(
        "nns",
        &[
            "baseline",
            "nns",
            "--dataset",
            "out/data",
            "--seeds",
            "out/seeds/seeds.csv",
        ],
    );
    g(
        "coherence",
        &[
            "coherence",
            "--dataset",
            "out/data",
            "--attributes",
            "out/data/attributes.csv",
            "--groups",
            "lfa=out/lfa/groups.csv",
            "--groups",
            "kmeans=out/kmeans/kmeans_groups.csv",
            "--groups",
            "nns=out/nns/nns_groups.csv",
        ],
    );
    g(
        "bias",
        &["bias-report", "--dataset", "out/data", "--groups", "out/lfa/groups.csv"],
    );
}

/// Every file under `root`, relative path to bytes, sorted by path.
pub fn snapshot(root: &Path) -> Vec<(String, Vec<u8>)> {
    fn walk(root: &Path, dir: &Path, out: &mut Vec<(String, Vec<u8>)>) {
        for e in fs::read_dir(dir).unwrap() {
            let p = e.unwrap().path();
            if p.is_dir() {
                walk(root, &p, out);
            } else {
                let rel = p.strip_prefix(root).unwrap().to_string_lossy().replace('\\', "/");
                out.push((rel, fs::read(&p).unwrap()));
            }
        }
    }
    let mut out = Vec::new();
    walk(root, root, &mut out);
    out.sort();
    out
}
