mod common;

use std::fs;

use common::{golden_dir, lfa, lfa_ok, run_pipeline, snapshot};

/// Files compared byte for byte against `tests/golden`. Set `LFA_BLESS=1`
/// to rewrite them after an intended output change.
const GOLDEN: &[&str] = &[
    "seeds/seeds.csv",
    "lfa/groups.csv",
    "lfa/lfa_report.json",
    "lfa/directions.json",
    "coherence/coherence_report.json",
    "bias/bias_table.csv",
];

#[test]
fn pipeline_matches_golden_outputs() {
    let tmp = tempfile::tempdir().unwrap();
    run_pipeline(tmp.path(), 2);
    let bless = std::env::var_os("LFA_BLESS").is_some();
    for name in GOLDEN {
        let got = fs::read(tmp.path().join("out").join(name)).unwrap();
        let golden = golden_dir().join(name.replace('/', "__"));
        if bless {
            fs::write(&golden, &got).unwrap();
            continue;
        }
        let want = fs::read(&golden).unwrap_or_else(|_| panic!("missing golden {}", golden.display()));
        assert!(
            got == want,
            "{name} differs from its golden copy:\n{}",
            String::from_utf8_lossy(&got)
        );
    }
}

#[test]
fn outputs_do_not_depend_on_thread_count_or_repetition() {
    let (a, b, c) = (
        tempfile::tempdir().unwrap(),
        tempfile::tempdir().unwrap(),
        tempfile::tempdir().unwrap(),
    );
    run_pipeline(a.path(), 1);
    run_pipeline(b.path(), 8);
    run_pipeline(c.path(), 8);
    let sa = snapshot(&a.path().join("out"));
    assert!(sa.len() > 15);
    assert_eq!(sa, snapshot(&b.path().join("out")), "1 vs 8 threads");
    assert_eq!(sa, snapshot(&c.path().join("out")), "repeated 8-thread run");
}

#[test]
fn truncated_embeddings_exit_with_validation_code() {
    let tmp = tempfile::tempdir().unwrap();
    run_pipeline(tmp.path(), 1);
    let file = tmp.path().join("out/data/embeddings.lfae");
    let bytes = fs::read(&file).unwrap();
    fs::write(&file, &bytes[..bytes.len() - 7]).unwrap();
    let out = lfa(tmp.path(), &["validate", "--dataset", "out/data"]);
    assert_eq!(out.status.code(), Some(2));
    let err = String::from_utf8_lossy(&out.stderr);
    let expected = format!("expected {} bytes", bytes.len());
    assert!(err.contains(&expected), "{err}");
    assert!(err.contains(&format!("found {}", bytes.len() - 7)), "{err}");
}

#[test]
fn validate_accepts_synth_output_and_group_files() {
    let tmp = tempfile::tempdir().unwrap();
    run_pipeline(tmp.path(), 1);
    let stdout = lfa_ok(
        tmp.path(),
        &[
            "validate",
            "--dataset",
            "out/data",
            "--attributes",
            "out/data/attributes.csv",
            "--groups",
            "out/lfa/groups.csv",
            "--groups",
            "out/kmeans/kmeans_groups.csv",
        ],
    );
    assert!(stdout.contains("dataset ok"));
    assert_eq!(stdout.matches("groups ok").count(), 2);
}

#[test]
fn randomized_commands_require_a_seed() {
    let tmp = tempfile::tempdir().unwrap();
    run_pipeline(tmp.path(), 1);
    let out = lfa(
        tmp.path(),
        &["--out", "x", "baseline", "kmeans", "--dataset", "out/data", "--k", "4"],
    );
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("seed"));
}

#[test]
fn traverse_writes_a_loadable_dataset() {
    let tmp = tempfile::tempdir().unwrap();
    run_pipeline(tmp.path(), 1);
    lfa_ok(
        tmp.path(),
        &[
            "--out",
            "out/trav",
            "traverse",
            "--dataset",
            "out/data",
            "--directions",
            "out/lfa/directions.json",
            "--direction",
            "g0000",
            "--target",
            "img000000",
            "--target",
            "img000003",
            "--strengths=-0.5,0,0.5,1",
        ],
    );
    let stdout = lfa_ok(tmp.path(), &["validate", "--dataset", "out/trav"]);
    assert!(stdout.contains("8 rows"), "{stdout}");
    let ids = fs::read_to_string(tmp.path().join("out/trav/ids.csv")).unwrap();
    assert!(ids.contains("img000000@-0.5,"), "{ids}");
}

#[test]
fn consensus_merges_annotator_files() {
    let tmp = tempfile::tempdir().unwrap();
    let dir = tmp.path();
    fs::write(
        dir.join("schema.json"),
        r#"{"attributes":[{"name":"hat","classes":["no","yes"]}]}"#,
    )
    .unwrap();
    fs::write(dir.join("a.json"), r#"{"i1":{"hat":"yes"},"i2":{"hat":"no"}}"#).unwrap();
    fs::write(dir.join("b.json"), r#"{"i1":{"hat":"yes"},"i2":{"hat":"yes"}}"#).unwrap();
    fs::write(dir.join("c.json"), r#"{"i1":{"hat":"no"},"i2":{}}"#).unwrap();
    lfa_ok(
        dir,
        &[
            "--out",
            "o",
            "consensus",
            "--schema",
            "schema.json",
            "--annotator",
            "a.json",
            "--annotator",
            "b.json",
            "--annotator",
            "c.json",
        ],
    );
    let csv = fs::read_to_string(dir.join("o/consensus.csv")).unwrap();
    assert_eq!(csv, "image_id,hat,hat_agreement\ni1,yes,0.666667\ni2,unknown,\n");
}
