//! End-to-end runs of the `erseg` binary.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use erseg::scorer::{FileScorer, ScoreRecord};
use erseg::segmenter::segment_corpus;
use erseg::{SegmentationConfig, SegmentedText, DEFAULT_MARKER};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::Value;

const BIN: &str = env!("CARGO_BIN_EXE_erseg");
const STUB: &str = env!("CARGO_BIN_EXE_erseg-stub-sidecar");

fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(name)
}

fn erseg(args: &[&str]) -> Output {
    Command::new(BIN)
        .args(args)
        .env("SOURCE_DATE_EPOCH", "1700000000")
        .env_remove("ERSEG_SIDECAR_TIMEOUT_SECS")
        .output()
        .expect("erseg runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    serde_json::from_slice(&o.stdout).unwrap()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn read_texts(path: &Path) -> Vec<SegmentedText> {
    fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| SegmentedText::parse(l, DEFAULT_MARKER).unwrap())
        .collect()
}

/// Random score file covering every line of `corpus`.
fn write_scores(corpus: &Path, out: &Path, seed: u64) -> Vec<ScoreRecord> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let records: Vec<ScoreRecord> = read_texts(corpus)
        .into_iter()
        .enumerate()
        .map(|(i, t)| ScoreRecord {
            id: (i + 1).to_string(),
            scores: (0..t.words.len())
                .map(|_| rng.gen_range(0.0..1.0))
                .collect(),
            tokens: t.words,
        })
        .collect();
    let body: String = records
        .iter()
        .map(|r| serde_json::to_string(r).unwrap() + "\n")
        .collect();
    fs::write(out, body).unwrap();
    records
}

#[test]
fn stats_text_and_json() {
    let en = fixture("en.txt");
    let raw = fs::read_to_string(&en).unwrap();
    let breaks = raw.matches(DEFAULT_MARKER).count() as u64;

    let o = erseg(&["--format", "json", "stats", s(&en)]);
    let v = json(&o);
    assert_eq!(v["n_sentences"], 80);
    assert_eq!(v["n_breaks"].as_u64().unwrap(), breaks);

    let o = erseg(&["stats", s(&en)]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(text.starts_with("sentences"));
    assert!(text.contains(&format!("breaks{:>32}", breaks)), "{text}");
}

#[test]
fn stats_report_writes_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let report = dir.path().join("stats.json");
    let o = erseg(&["stats", s(&fixture("es.txt")), "--report", s(&report)]);
    assert!(o.status.success());
    let manifest: Value = serde_json::from_str(
        &fs::read_to_string(dir.path().join("stats.json.manifest.json")).unwrap(),
    )
    .unwrap();
    assert_eq!(manifest["command"], "stats");
    assert_eq!(manifest["timestamp"], "2023-11-14T22:13:20Z");
    assert_eq!(manifest["inputs"][0]["sha256"].as_str().unwrap().len(), 64);
}

#[test]
fn usage_and_io_errors_exit_2() {
    assert_eq!(
        erseg(&["stats", "/nonexistent/corpus.txt"]).status.code(),
        Some(2)
    );
    assert_eq!(erseg(&["frobnicate"]).status.code(), Some(2));
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o.txt");
    let o = erseg(&[
        "segment",
        s(&fixture("en.txt")),
        "--scorer",
        "bogus:x",
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
    let o = erseg(&[
        "segment",
        s(&fixture("en.txt")),
        "--scorer",
        "file:x",
        "--min-words",
        "6",
        "--max-words",
        "3",
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn segment_with_file_scorer_is_deterministic_and_matches_library() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = fixture("eu.txt");
    let scores = dir.path().join("scores.jsonl");
    let records = write_scores(&corpus, &scores, 7);
    let spec = format!("file:{}", s(&scores));

    let run = |out: &Path, jobs: &str| {
        let o = erseg(&[
            "--jobs",
            jobs,
            "segment",
            s(&corpus),
            "--scorer",
            &spec,
            "--min-words",
            "3",
            "--max-words",
            "8",
            "--beam",
            "6",
            "--out",
            s(out),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        fs::read(out).unwrap()
    };
    let a = run(&dir.path().join("a.txt"), "1");
    let b = run(&dir.path().join("b.txt"), "4");
    assert_eq!(a, b);

    let sentences: Vec<_> = read_texts(&corpus)
        .iter()
        .map(SegmentedText::to_sentence)
        .collect();
    let scorer = FileScorer::new(records.into_iter().map(|r| (r.id.clone(), r)).collect());
    let config = SegmentationConfig::window(3, 8).with_beam(6);
    let expected: String = segment_corpus(&sentences, &scorer, &config, 1)
        .unwrap()
        .to_segmented(&sentences)
        .iter()
        .map(|t| t.to_line(DEFAULT_MARKER) + "\n")
        .collect();
    assert_eq!(String::from_utf8(a).unwrap(), expected);

    let manifest: Value =
        serde_json::from_str(&fs::read_to_string(dir.path().join("a.txt.manifest.json")).unwrap())
            .unwrap();
    assert_eq!(manifest["command"], "segment");
    assert_eq!(manifest["inputs"].as_array().unwrap().len(), 2);
    assert_eq!(manifest["config"]["segmentation"]["beam_width"], 6);
}

#[test]
fn segment_with_tree_scorer() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = dir.path().join("c.txt");
    let trees = dir.path().join("t.txt");
    fs::write(&corpus, "the dog ran\nthe cat sat on the mat\n( yes )\n").unwrap();
    fs::write(
        &trees,
        "(S (NP (DT the) (NN dog)) (VP (VBD ran)))\n\
         (S (NP (DT the) (NN cat)) (VP (VBD sat) (PP (IN on) (NP (DT the) (NN mat)))))\n\
         (FRAG (-LRB- -LRB-) (UH yes) (-RRB- -RRB-))\n",
    )
    .unwrap();
    let out = dir.path().join("seg.txt");
    let o = erseg(&[
        "segment",
        s(&corpus),
        "--scorer",
        &format!("tree:{}", s(&trees)),
        "--min-words",
        "1",
        "--max-words",
        "3",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let lines = fs::read_to_string(&out).unwrap();
    let lines: Vec<&str> = lines.lines().collect();
    // Gaps (0.5, 1.0, 1.0): ends [2,3] and [3] both average 1.0 and the
    // smaller end list wins.
    assert_eq!(lines[0], "the dog <seg> ran");
    // Gaps (0.5, 1.0, 0.75, 0.75, 0.5, 1.0): [2,3,6] ties [2,4,6].
    assert_eq!(lines[1], "the cat <seg> sat <seg> on the mat");
    // Flat tree, every gap 1.0.
    assert_eq!(lines[2], "( <seg> yes <seg> )");
}

#[test]
fn segment_with_subprocess_scorer() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = fixture("en.txt");
    let out = dir.path().join("seg.txt");
    let o = erseg(&[
        "--format",
        "json",
        "segment",
        s(&corpus),
        "--scorer",
        &format!("subprocess:{STUB} --reverse 5"),
        "--min-words",
        "2",
        "--max-words",
        "6",
        "--out",
        s(&out),
    ]);
    let v = json(&o);
    assert_eq!(v["sentences"], 80);
    assert_eq!(v["failed"], 0);
    let hyps = read_texts(&out);
    let refs = read_texts(&corpus);
    for (h, r) in hyps.iter().zip(&refs) {
        assert_eq!(h.words, r.words);
        assert!(h.segment_lengths().iter().all(|&n| n <= 6));
    }
}

#[test]
fn subprocess_failures_leave_sentences_unsegmented() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = fixture("en.txt");
    let out = dir.path().join("seg.txt");
    let o = erseg(&[
        "--format",
        "json",
        "segment",
        s(&corpus),
        "--scorer",
        &format!("subprocess:{STUB} --fail-id 3"),
        "--min-words",
        "2",
        "--max-words",
        "6",
        "--out",
        s(&out),
    ]);
    let v = json(&o);
    assert_eq!(v["failed"], 1);
    let hyps = read_texts(&out);
    assert!(!hyps[2].has_breaks());
}

#[test]
fn sidecar_timeout_from_environment() {
    let dir = tempfile::tempdir().unwrap();
    let o = Command::new(BIN)
        .args([
            "segment",
            s(&fixture("en.txt")),
            "--scorer",
            &format!("subprocess:{STUB} --no-ready --hang"),
            "--out",
            s(&dir.path().join("o.txt")),
        ])
        .env("ERSEG_SIDECAR_TIMEOUT_SECS", "1")
        .output()
        .unwrap();
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("handshake"));
}

#[test]
fn evaluate_identity() {
    let en = fixture("en.txt");
    let o = erseg(&["evaluate", s(&en), s(&en)]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split_whitespace().collect();
    assert_eq!(header, ["Sigma", "BLEU", "BLEU-br", "F1", "P", "R"]);
    let values: Vec<&str> = lines.next().unwrap().split_whitespace().collect();
    assert_eq!(values, ["100.00"; 6]);

    let v = json(&erseg(&[
        "--format",
        "json",
        "evaluate",
        s(&en),
        s(&en),
        "--metrics",
        "f1",
    ]));
    assert_eq!(v["f1"], 100.0);
    assert_eq!(v["sigma"], 100.0);
    assert_eq!(v["text_preserved_pct"], 100.0);
}

#[test]
fn evaluate_metric_subset_and_report() {
    let dir = tempfile::tempdir().unwrap();
    let refs = dir.path().join("ref.txt");
    let hyps = dir.path().join("hyp.txt");
    fs::write(&refs, "a b c <seg> d e f\ng h <seg> i j\n").unwrap();
    fs::write(&hyps, "a b <seg> c d e f\ng h <seg> i j\n").unwrap();
    let report = dir.path().join("eval.json");
    let o = erseg(&[
        "evaluate",
        s(&hyps),
        s(&refs),
        "--metrics",
        "f1",
        "--report",
        s(&report),
    ]);
    assert!(o.status.success());
    let text = stdout(&o);
    assert!(
        text.starts_with("       F1        P        R\n    50.00    50.00    50.00\n"),
        "{text}"
    );
    let v: Value = serde_json::from_str(&fs::read_to_string(&report).unwrap()).unwrap();
    assert_eq!(v["precision"], 50.0);
    assert!(dir.path().join("eval.json.manifest.json").exists());
}

#[test]
fn evaluate_length_mismatch_is_a_metric_error() {
    let dir = tempfile::tempdir().unwrap();
    let a = dir.path().join("a.txt");
    let b = dir.path().join("b.txt");
    fs::write(&a, "a b <seg> c\n").unwrap();
    fs::write(&b, "a b <seg> c\nd e\n").unwrap();
    assert_eq!(erseg(&["evaluate", s(&a), s(&b)]).status.code(), Some(1));
}

#[test]
fn validate_reports_alterations() {
    let dir = tempfile::tempdir().unwrap();
    let src = dir.path().join("src.txt");
    let hyp = dir.path().join("hyp.txt");
    fs::write(&src, "the dog ran home\nit was late\n").unwrap();
    fs::write(&hyp, "the dog <seg> ran home\nit is late\n").unwrap();
    let o = erseg(&["validate", s(&hyp), s(&src)]);
    assert_eq!(o.status.code(), Some(1));
    let text = stdout(&o);
    assert!(
        text.starts_with("1 of 2 hypotheses preserve their source (50.00%)"),
        "{text}"
    );
    assert!(text.contains("line 2: altered"));
    assert!(text.contains("-was +is"), "{text}");

    fs::write(&hyp, "the dog <seg> ran home\nit was <seg> late\n").unwrap();
    assert_eq!(
        erseg(&["validate", s(&hyp), s(&src)]).status.code(),
        Some(0)
    );
}

#[test]
fn partition_splits_and_is_reproducible() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = fixture("es.txt");
    let run = |sub: &str, seed: &str| {
        let out = dir.path().join(sub);
        let o = erseg(&[
            "partition",
            s(&corpus),
            "--dev",
            "10",
            "--test",
            "15",
            "--seed",
            seed,
            "--out-dir",
            s(&out),
        ]);
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        assert_eq!(stdout(&o), "train 55\ndev 10\ntest 15\n");
        out
    };
    let a = run("a", "42");
    let b = run("b", "42");
    let c = run("c", "43");
    for split in ["train.txt", "dev.txt", "test.txt"] {
        assert_eq!(
            fs::read(a.join(split)).unwrap(),
            fs::read(b.join(split)).unwrap()
        );
    }
    assert_ne!(
        fs::read(a.join("test.txt")).unwrap(),
        fs::read(c.join("test.txt")).unwrap()
    );
    assert!(a.join("train.txt.manifest.json").exists());

    let mut all: Vec<String> = ["train.txt", "dev.txt", "test.txt"]
        .iter()
        .flat_map(|f| {
            fs::read_to_string(a.join(f))
                .unwrap()
                .lines()
                .map(str::to_owned)
                .collect::<Vec<_>>()
        })
        .collect();
    let mut original: Vec<String> = fs::read_to_string(&corpus)
        .unwrap()
        .lines()
        .map(str::to_owned)
        .collect();
    all.sort();
    original.sort();
    assert_eq!(all, original);

    let o = erseg(&[
        "partition",
        s(&corpus),
        "--dev",
        "50",
        "--test",
        "50",
        "--out-dir",
        s(&dir.path().join("x")),
    ]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn grid_search_prints_matrix() {
    let dir = tempfile::tempdir().unwrap();
    let corpus = fixture("en.txt");
    let scores = dir.path().join("scores.jsonl");
    write_scores(&corpus, &scores, 3);
    let out = dir.path().join("grid.json");
    let o = erseg(&[
        "grid-search",
        s(&corpus),
        "--scorer",
        &format!("file:{}", s(&scores)),
        "--min-range",
        "2-4",
        "--max-range",
        "3-5",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    let rows: Vec<&str> = text.lines().collect();
    assert_eq!(
        rows[0].split_whitespace().collect::<Vec<_>>(),
        ["min\\max", "3", "4", "5"]
    );
    assert_eq!(rows[3].split_whitespace().next(), Some("4"));
    assert_eq!(rows[3].split_whitespace().nth(1), Some("-"));
    assert!(rows[4].starts_with("best: "));
    let v: Value = serde_json::from_str(&fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(v["cells"].as_array().unwrap().len(), 8);
    assert!(dir.path().join("grid.json.manifest.json").exists());
}
