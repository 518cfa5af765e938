//! The `marginalia` binary: exit codes, messages and config handling.

mod common;

use std::path::Path;
use std::process::{Command, Output};

use common::{mini_corpus, snapshot};

fn marginalia(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_marginalia"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8_lossy(&o.stderr).into_owned()
}

#[test]
fn run_on_the_mini_corpus_succeeds_and_ignores_thread_count() {
    let corpus = mini_corpus();
    let dets = corpus.join("detections.jsonl");
    let truth = corpus.join("truth.jsonl");
    let a = tempfile::tempdir().unwrap();
    let b = tempfile::tempdir().unwrap();
    for (out, jobs) in [(a.path(), "1"), (b.path(), "4")] {
        let o = marginalia(&[
            "--corpus", s(&corpus), "--out", s(out), "--jobs", jobs,
            "run", "--detections", s(&dets), "--truth", s(&truth),
        ]);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    assert_eq!(snapshot(a.path()), snapshot(b.path()));
}

#[test]
fn config_file_with_flag_override() {
    let out = tempfile::tempdir().unwrap();
    let cfg = out.path().join("marginalia.toml");
    std::fs::write(
        &cfg,
        format!(
            "seed = 5\n[paths]\ncorpus = {:?}\nout = {:?}\n[split]\nratio = 0.5\n",
            s(&mini_corpus()),
            s(out.path())
        ),
    )
    .unwrap();
    for args in [vec!["ingest"], vec!["split", "--ratio", "0.7"]] {
        let mut full = vec!["--config", s(&cfg)];
        full.extend(args);
        let o = marginalia(&full);
        assert!(o.status.success(), "{}", stderr(&o));
    }
    let text = std::fs::read_to_string(out.path().join("manifest.jsonl")).unwrap();
    let header: serde_json::Value = serde_json::from_str(text.lines().next().unwrap()).unwrap();
    assert_eq!(header["kind"], "header");
    assert_eq!(header["config"]["seed"], 5);
    assert_eq!(header["config"]["split"]["ratio"], 0.7);
    // 6 pages at 0.7: four train, two test
    assert_eq!(text.matches("\"split\":\"train\"").count(), 4);
}

#[test]
fn unknown_config_key_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "sede = 3\n").unwrap();
    let o = marginalia(&["--config", s(&cfg), "--out", s(dir.path()), "ingest"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("sede"), "{}", stderr(&o));
}

#[test]
fn invalid_parameter_is_an_input_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = marginalia(&["--corpus", s(&mini_corpus()), "--out", s(dir.path()), "split", "--ratio", "1.5"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).starts_with("error:"), "{}", stderr(&o));
}

#[test]
fn empty_corpus_exits_one() {
    let corpus = tempfile::tempdir().unwrap();
    let out = tempfile::tempdir().unwrap();
    let o = marginalia(&["--corpus", s(corpus.path()), "--out", s(out.path()), "ingest"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("no LabelMe"), "{}", stderr(&o));
}

#[test]
fn corrupt_json_exits_one_naming_the_file() {
    let corpus = tempfile::tempdir().unwrap();
    let out = tempfile::tempdir().unwrap();
    std::fs::write(corpus.path().join("page_9.json"), "[1, 2").unwrap();
    let o = marginalia(&["--corpus", s(corpus.path()), "--out", s(out.path()), "ingest"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("page_9.json"), "{}", stderr(&o));
}

#[test]
fn missing_prior_stage_exits_one_naming_it() {
    let out = tempfile::tempdir().unwrap();
    let o = marginalia(&["--out", s(out.path()), "proposals"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stderr(&o).contains("run the `augment` stage first"), "{}", stderr(&o));
}

#[test]
fn make_corpus_reproduces_the_bundled_one() {
    let dir = tempfile::tempdir().unwrap();
    let target = dir.path().join("c");
    let o = marginalia(&["make-corpus", s(&target)]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert_eq!(snapshot(&target), snapshot(&mini_corpus()));
}
