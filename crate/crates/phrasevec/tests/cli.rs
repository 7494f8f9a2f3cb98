use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use phrasevec::formats::checkpoint::{write_checkpoint, CheckpointManifest};
use phrasevec::manifest::sha256_hex;
use phrasevec_core::linalg::Matrix;
use phrasevec_core::model::Model;

fn run(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phrasevec"))
        .current_dir(dir)
        .args(args)
        .output()
        .unwrap()
}

fn ok(dir: &Path, args: &[&str]) -> String {
    let out = run(dir, args);
    assert!(out.status.success(), "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    String::from_utf8(out.stdout).unwrap()
}

fn read(dir: &Path, name: &str) -> String {
    fs::read_to_string(dir.join(name)).unwrap()
}

/// The value in the first result row whose first field is `key`.
fn field<'a>(block: &'a str, key: &str) -> &'a str {
    block
        .lines()
        .find_map(|l| l.strip_prefix(key).and_then(|r| r.strip_prefix('\t')))
        .unwrap_or_else(|| panic!("no {key} in {block}"))
}

#[test]
fn toy_corpus_golden_vocab_and_cooc() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("toy.txt"), "The cat sat. The cat ran!\n").unwrap();
    let block = ok(d, &["vocab", "toy.txt", "--out", "v.tsv", "--min-count", "1", "--context-size", "4"]);
    assert_eq!(field(&block, "tokens"), "8");
    // Equal counts fall back to byte order: "!" < "." < "ran" < "sat".
    assert_eq!(read(d, "v.tsv"), "#words=6 context=4\ncat\t2\nthe\t2\n!\t1\n.\t1\nran\t1\nsat\t1\n");

    ok(d, &["cooc", "toy.txt", "--vocab", "v.tsv", "--out", "c.tsv", "--window", "1"]);
    // ids: cat 0, the 1, ! 2, . 3, ran 4, sat 5; contexts are ids 0..4.
    // Sequence: the cat sat . the cat ran !
    let want = "#rows=6 cols=4 window=1\n0 1 2\n1 0 2\n1 3 1\n3 1 1\n4 0 1\n4 2 1\n5 0 1\n5 3 1\n";
    assert_eq!(read(d, "c.tsv"), want);
    assert!(d.join("c.tsv.run.json").exists());
}

#[test]
fn window_one_on_three_tokens() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("aba.txt"), "a b a").unwrap();
    ok(d, &["vocab", "aba.txt", "--out", "v.tsv", "--min-count", "1"]);
    let block = ok(d, &["cooc", "aba.txt", "--vocab", "v.tsv", "--out", "c.tsv", "--window", "1"]);
    assert_eq!(read(d, "c.tsv"), "#rows=2 cols=2 window=1\n0 1 2\n1 0 2\n");
    assert_eq!(field(&block, "total"), "4");
}

#[test]
fn missing_input_fails_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("real.txt"), "a b c").unwrap();
    let out = run(d, &["vocab", "real.txt", "missing.txt", "--out", "v.tsv", "--min-count", "1"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("missing.txt"));
    assert_eq!(fs::read_dir(d).unwrap().count(), 1);
}

#[test]
fn empty_vocabulary_file_is_rejected() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("toy.txt"), "a b").unwrap();
    fs::write(d.join("v.tsv"), "").unwrap();
    let out = run(d, &["cooc", "toy.txt", "--vocab", "v.tsv", "--out", "c.tsv"]);
    assert!(!out.status.success());
    assert!(!d.join("c.tsv").exists());
}

#[test]
fn unknown_subcommand_prints_usage() {
    let out = run(Path::new("."), &["frobnicate"]);
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("Usage"));
}

fn toy_pipeline(d: &Path) {
    ok(d, &["--seed", "4", "synth", "--out-dir", "corpus", "--tokens", "3000", "--phrases", "6", "--filler-words", "10"]);
    let mut docs: Vec<String> = fs::read_dir(d.join("corpus"))
        .unwrap()
        .map(|e| format!("corpus/{}", e.unwrap().file_name().to_string_lossy()))
        .filter(|p| p.contains("/doc-"))
        .collect();
    docs.sort();
    let mut args = vec!["vocab"];
    args.extend(docs.iter().map(String::as_str));
    args.extend(["--out", "v.tsv", "--min-count", "1"]);
    ok(d, &args);
    args[0] = "cooc";
    args.truncate(args.len() - 4);
    args.extend(["--vocab", "v.tsv", "--out", "c.tsv", "--window", "2"]);
    ok(d, &args);
}

const TRAIN: [&str; 12] = [
    "train", "--cooc", "c.tsv", "--vocab", "v.tsv", "--phrases", "corpus/phrases.txt", "--dim", "4",
    "--phrase-min-count", "1", "--deterministic",
];

#[test]
fn train_modes_and_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    toy_pipeline(d);

    let mut args = TRAIN.to_vec();
    args.extend(["--out", "joint", "--epochs", "2"]);
    let block = ok(d, &args);
    assert_eq!(field(&block, "mode"), "joint");
    assert_eq!(field(&block, "epochs"), "2");
    for f in ["joint.ckpt", "joint.ckpt.manifest", "joint.vec", "joint.log.tsv", "joint.ckpt.run.json"] {
        assert!(d.join(f).exists(), "{f}");
    }
    let log = read(d, "joint.log.tsv");
    assert_eq!(log.lines().next(), Some("epoch\trec_loss\trank_loss\tseconds"));
    assert_eq!(log.lines().count(), 3);
    let manifest: serde_json::Value = serde_json::from_str(&read(d, "joint.ckpt.run.json")).unwrap();
    assert_eq!(manifest["subcommand"], "train");
    assert_eq!(manifest["config"]["epochs"], "2");

    let mut args = TRAIN.to_vec();
    args.extend(["--out", "ae", "--epochs", "2", "--lambda", "0"]);
    assert_eq!(field(&ok(d, &args), "mode"), "autoencoder");

    let mut args = TRAIN.to_vec();
    args.extend(["--out", "init", "--epochs", "0"]);
    let block = ok(d, &args);
    assert_eq!(field(&block, "epochs"), "0");
    assert_eq!(read(d, "init.log.tsv").lines().count(), 1);
    assert!(d.join("init.ckpt").exists());

    // The same run twice gives the same bytes.
    let mut args = TRAIN.to_vec();
    args.extend(["--out", "joint2", "--epochs", "2"]);
    ok(d, &args);
    assert_eq!(fs::read(d.join("joint.ckpt")).unwrap(), fs::read(d.join("joint2.ckpt")).unwrap());

    let block = ok(d, &["svd", "--cooc", "c.tsv", "--vocab", "v.tsv", "--dim", "3", "--out", "s.vec"]);
    assert_eq!(field(&block, "excluded_words"), "0");
    assert!(read(d, "s.vec").ends_with('\n'));
}

#[test]
fn eval_phrase_matches_hand_recall() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // Scores against the mean of (a, b) = (0.5, 0.5): c 1, a 0.5, b 0.5, d 0.
    // Pool for K=1 is 2 words: c, a. Recall@1 = 1/2, Recall@2 = 1.
    fs::write(d.join("e.vec"), "4 2\na 1 0\nb 0 1\nc 1 1\nd 0 0\n").unwrap();
    fs::write(d.join("p.txt"), "a b\nc\nzz a\n").unwrap();
    let block = ok(d, &["eval-phrase", "--embeddings", "e.vec", "--phrases", "p.txt", "--k", "1,2", "--by-length", "bl.tsv"]);
    assert_eq!(field(&block, "evaluated"), "2");
    assert_eq!(field(&block, "skipped"), "1");
    assert_eq!(field(&block, "recall@1"), "0.75");
    assert_eq!(field(&block, "recall@2"), "1");
    assert_eq!(read(d, "bl.tsv"), "length\tphrases\trecall@1\trecall@2\n1\t1\t1\t1\n2\t1\t0.5\t1\n");
}

#[test]
fn nn_golden_ranking() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("e.vec"), "4 2\nnorth 0 1\neast 1 0\nnortheast 1 1\nsouth 0 -2\n").unwrap();
    let block = ok(d, &["nn", "--embeddings", "e.vec", "--query", "north", "--k", "3"]);
    let want = "rank\tword\tscore\n1\tnorth\t1\n2\tnortheast\t0.7071067811865475\n3\teast\t0\n";
    assert_eq!(block, want);
    let block = ok(d, &["nn", "--embeddings", "e.vec", "--query", "north", "--k", "3", "--metric", "dot"]);
    assert_eq!(block, "rank\tword\tscore\n1\tnorth\t1\n2\tnortheast\t1\n3\teast\t0\n");
}

#[test]
fn phrase_query_modes_disagree_on_contrasting_toy() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    // "a b" always sits between x and y: its words point one way, its
    // contexts the other.
    fs::write(d.join("doc.txt"), "x a b y . ".repeat(5)).unwrap();
    fs::write(d.join("v.tsv"), "#words=5 context=4\n.\t5\na\t5\nb\t5\nx\t5\ny\t5\n").unwrap();
    let ckpt = Model::new(Matrix::identity(4), Matrix::identity(4)).unwrap();
    fs::write(d.join("m.ckpt"), write_checkpoint(&ckpt)).unwrap();
    let sidecar = CheckpointManifest {
        vocab: "v.tsv".into(),
        vocab_sha256: sha256_hex(&fs::read(d.join("v.tsv")).unwrap()),
        dim: 4,
        contexts: 4,
    };
    fs::write(d.join("m.ckpt.manifest"), sidecar.to_text()).unwrap();
    // Dimensions follow the contexts ".", "a", "b", "x".
    fs::write(d.join("e.vec"), "5 4\n. 1 0 0 0\na 0 1 0 0\nb 0 0 1 0\nx 0 0 0 1\ny 1 0 0 0\n").unwrap();
    fs::write(d.join("coll.txt"), "a b\nx y\n").unwrap();

    let base = ["nn", "--embeddings", "e.vec", "--query", "a b", "--k", "1", "--collection", "coll.txt"];
    let avg = ok(d, &base);
    assert_eq!(avg.lines().last().unwrap().split('\t').nth(1), Some("a b"));
    let mut args = base.to_vec();
    args.extend(["--mode", "encode-counts", "--model", "m.ckpt", "--corpus", "doc.txt", "--window", "1"]);
    let enc = ok(d, &args);
    assert_eq!(field(&enc, "occurrences"), "5");
    assert_eq!(enc.lines().last().unwrap().split('\t').nth(1), Some("x y"));

    let mut args = base.to_vec();
    args[4] = "q r";
    args.extend(["--mode", "encode-counts", "--model", "m.ckpt", "--corpus", "doc.txt"]);
    assert!(!run(d, &args).status.success());
}

#[test]
fn infer_and_split_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    toy_pipeline(d);
    let mut args = TRAIN.to_vec();
    args.extend(["--out", "m", "--epochs", "1"]);
    ok(d, &args);
    let phrase = read(d, "corpus/phrases.txt").lines().next().unwrap().split('\t').next().unwrap().to_string();
    let mut docs: Vec<String> = fs::read_dir(d.join("corpus"))
        .unwrap()
        .map(|e| format!("corpus/{}", e.unwrap().file_name().to_string_lossy()))
        .filter(|p| p.contains("/doc-"))
        .collect();
    docs.sort();
    let mut args = vec!["infer", "--model", "m.ckpt", "--phrase", &phrase, "--window", "2", "--out", "i.vec", "--corpus"];
    args.extend(docs.iter().map(String::as_str));
    let block = ok(d, &args);
    assert!(field(&block, "occurrences").parse::<u64>().unwrap() > 0);
    assert!(read(d, "i.vec").starts_with("1 4\n"));

    let block = ok(d, &[
        "split", "--phrases", "corpus/phrases.txt", "--vocab", "v.tsv", "--n-valid", "1", "--n-test", "2",
        "--phrase-min-count", "1", "--out", "sp",
    ]);
    assert_eq!(field(&block, "train"), "3");
    let total: usize = ["sp.train.txt", "sp.valid.txt", "sp.test.txt"].iter().map(|f| read(d, f).lines().count()).sum();
    assert_eq!(total, 6);
}

#[test]
fn config_file_feeds_defaults_and_flags_win() {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    fs::write(d.join("toy.txt"), "a a a b b c").unwrap();
    fs::write(d.join("run.conf"), "# desk settings\nmin-count = 2\ncontext-size = 1\n").unwrap();
    ok(d, &["--config", "run.conf", "vocab", "toy.txt", "--out", "v.tsv"]);
    assert_eq!(read(d, "v.tsv"), "#words=2 context=1\na\t3\nb\t2\n");
    ok(d, &["--config", "run.conf", "vocab", "toy.txt", "--out", "v.tsv", "--min-count", "1"]);
    assert_eq!(read(d, "v.tsv"), "#words=3 context=1\na\t3\nb\t2\nc\t1\n");
    fs::write(d.join("bad.conf"), "min-cnt = 2\n").unwrap();
    assert!(!run(d, &["--config", "bad.conf", "vocab", "toy.txt", "--out", "w.tsv"]).status.success());
}
