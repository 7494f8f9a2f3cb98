use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use phrasevec_core::corpus::Vocabulary;
use phrasevec_core::phrases::{load_phrases, split_phrases, ChunkCollector, DropReason, LoadReport};

use super::{load_cooc, load_vocab, suffixed, Run};
use crate::corpus_io::{check_inputs, count_cooc, count_vocabulary, read_document, Input};
use crate::formats::cooc::write_cooc;
use crate::formats::vocab::write_vocab;
use crate::synth::{generate, SynthConfig};

#[derive(Debug, Args)]
pub struct VocabArgs {
    /// Corpus files, one document each (default: standard input).
    pub files: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
    /// Minimum occurrences for a word to be kept [default: 100].
    #[arg(long)]
    pub min_count: Option<u64>,
    /// Number of most frequent words used as contexts [default: 10000].
    #[arg(long)]
    pub context_size: Option<usize>,
}

pub(super) fn vocab(run: &mut Run, a: &VocabArgs) -> Result<()> {
    let min_count = run.settings.resolve("min-count", a.min_count, 100)?;
    let context_size = run.settings.resolve("context-size", a.context_size, 10_000)?;
    let inputs = Input::from_paths(&a.files);
    check_inputs(&inputs)?;
    let (counter, digests) = count_vocabulary(&inputs, run.threads)?;
    run.inputs.extend(digests);
    let (tokens, distinct) = (counter.total(), counter.distinct());
    let vocab = counter.finish(min_count, context_size)?;
    run.write(&a.out, write_vocab(&vocab))?;
    run.row(&[&"tokens", &tokens]);
    run.row(&[&"distinct", &distinct]);
    run.row(&[&"words", &vocab.len()]);
    run.row(&[&"contexts", &vocab.context_size()]);
    Ok(())
}

#[derive(Debug, Args)]
pub struct CoocArgs {
    /// Corpus files, one document each (default: standard input).
    pub files: Vec<PathBuf>,
    #[arg(long)]
    pub vocab: PathBuf,
    #[arg(long)]
    pub out: PathBuf,
    /// Symmetric window half-width [default: 10].
    #[arg(long)]
    pub window: Option<usize>,
}

pub(super) fn cooc(run: &mut Run, a: &CoocArgs) -> Result<()> {
    let window = run.settings.resolve("window", a.window, 10)?;
    let vocab = load_vocab(run, &a.vocab)?;
    let inputs = Input::from_paths(&a.files);
    check_inputs(&inputs)?;
    let (counter, digests) = count_cooc(&inputs, &vocab, window, run.threads)?;
    run.inputs.extend(digests);
    let m = counter.finish();
    run.write(&a.out, write_cooc(&m))?;
    let empty: Vec<u32> = m.empty_rows().collect();
    run.row(&[&"rows", &m.n_words()]);
    run.row(&[&"cols", &m.n_contexts()]);
    run.row(&[&"window", &m.window()]);
    run.row(&[&"nonzeros", &m.nnz()]);
    run.row(&[&"total", &m.grand_total()]);
    run.row(&[&"empty_rows", &empty.len()]);
    for w in empty {
        run.row(&[&"empty_row", &vocab.word(w)]);
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct SplitArgs {
    #[arg(long)]
    pub phrases: PathBuf,
    #[arg(long)]
    pub vocab: PathBuf,
    /// Drop phrases whose words have no co-occurrence counts.
    #[arg(long)]
    pub cooc: Option<PathBuf>,
    /// [default: 1000]
    #[arg(long)]
    pub n_valid: Option<usize>,
    /// [default: 5000]
    #[arg(long)]
    pub n_test: Option<usize>,
    /// [default: 10]
    #[arg(long)]
    pub phrase_min_count: Option<u64>,
    /// Output prefix: writes PREFIX.train.txt, .valid.txt, .test.txt, .seed
    #[arg(long)]
    pub out: PathBuf,
}

pub(super) fn split(run: &mut Run, a: &SplitArgs) -> Result<()> {
    let n_valid = run.settings.resolve("n-valid", a.n_valid, 1000)?;
    let n_test = run.settings.resolve("n-test", a.n_test, 5000)?;
    let min = run.settings.resolve("phrase-min-count", a.phrase_min_count, 10)?;
    let vocab = load_vocab(run, &a.vocab)?;
    let cooc = a.cooc.as_ref().map(|p| load_cooc(run, p, &vocab)).transpose()?;
    let text = run.read_text(&a.phrases)?;
    let (set, report) = load_phrases(&text, &vocab, |w| cooc.as_ref().is_none_or(|m| !m.is_empty_row(w)), min)?;
    let (train, valid, test) = split_phrases(&set, n_valid, n_test, run.seed)?;
    run.write(&suffixed(&a.out, ".train.txt"), train.to_text(&vocab))?;
    run.write(&suffixed(&a.out, ".valid.txt"), valid.to_text(&vocab))?;
    run.write(&suffixed(&a.out, ".test.txt"), test.to_text(&vocab))?;
    run.write(&suffixed(&a.out, ".seed"), format!("seed={}\n", run.seed))?;
    report_drops(run, &report);
    run.row(&[&"train", &train.len()]);
    run.row(&[&"valid", &valid.len()]);
    run.row(&[&"test", &test.len()]);
    Ok(())
}

pub(super) fn report_drops(run: &mut Run, report: &LoadReport) {
    run.row(&[&"phrase_lines", &report.lines]);
    run.row(&[&"dropped", &report.dropped.len()]);
    run.row(&[&"below_min_count", &report.below_threshold]);
    for (line, reason) in &report.dropped {
        let why = match reason {
            DropReason::OutOfVocabulary(w) => format!("out_of_vocabulary\t{w}"),
            DropReason::EmptyRow(w) => format!("no_counts\t{w}"),
            DropReason::TooLong(n) => format!("too_long\t{n}"),
        };
        run.row(&[&"dropped_line", line, &why]);
    }
}

#[derive(Debug, Args)]
pub struct ChunksArgs {
    /// Corpus files, one document each (default: standard input).
    pub files: Vec<PathBuf>,
    #[arg(long)]
    pub vocab: PathBuf,
    /// Longest n-gram, 2..=8 [default: 3].
    #[arg(long)]
    pub max_len: Option<usize>,
    /// Keep n-grams seen at least this often [default: 10].
    #[arg(long)]
    pub phrase_min_count: Option<u64>,
    #[arg(long)]
    pub out: PathBuf,
}

pub(super) fn chunks(run: &mut Run, a: &ChunksArgs) -> Result<()> {
    let max_len = run.settings.resolve("max-len", a.max_len, 3)?;
    let min = run.settings.resolve("phrase-min-count", a.phrase_min_count, 10)?;
    let vocab = load_vocab(run, &a.vocab)?;
    let inputs = Input::from_paths(&a.files);
    check_inputs(&inputs)?;
    let mut collector = ChunkCollector::new(max_len)?;
    for input in &inputs {
        let d = read_document(input, |t| {
            collector.push(&vocab, &t);
            Ok(())
        })?;
        collector.end_document();
        run.inputs.push(d);
    }
    let kept: Vec<(Vec<u32>, u64)> = collector.finish().into_iter().filter(|(_, n)| *n >= min).collect();
    run.write(&a.out, phrase_lines(&vocab, &kept))?;
    run.row(&[&"phrases", &kept.len()]);
    Ok(())
}

fn phrase_lines(vocab: &Vocabulary, phrases: &[(Vec<u32>, u64)]) -> String {
    let mut out = String::new();
    for (ids, n) in phrases {
        let words: Vec<&str> = ids.iter().map(|&w| vocab.word(w)).collect();
        out.push_str(&format!("{}\t{n}\n", words.join(" ")));
    }
    out
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Directory for the corpus files and phrases.txt.
    #[arg(long)]
    pub out_dir: PathBuf,
    #[arg(long, default_value_t = 100_000)]
    pub tokens: usize,
    #[arg(long, default_value_t = 50)]
    pub phrases: usize,
    #[arg(long, default_value_t = 50)]
    pub filler_words: usize,
    #[arg(long, default_value_t = 2)]
    pub min_len: usize,
    #[arg(long, default_value_t = 4)]
    pub max_len: usize,
    /// Random filler words on each side of a planted phrase.
    #[arg(long, default_value_t = 3)]
    pub padding: usize,
    #[arg(long, default_value_t = 200)]
    pub sentences_per_document: usize,
}

pub(super) fn synth(run: &mut Run, a: &SynthArgs) -> Result<()> {
    if !(1..=a.max_len).contains(&a.min_len) || a.max_len > 8 {
        bail!("need 1 <= min-len <= max-len <= 8");
    }
    if a.filler_words < 2 || a.phrases == 0 || a.sentences_per_document == 0 {
        bail!("need at least 2 filler words, 1 phrase and 1 sentence per document");
    }
    let cfg = SynthConfig {
        phrases: a.phrases,
        filler_words: a.filler_words,
        min_phrase_len: a.min_len,
        max_phrase_len: a.max_len,
        tokens: a.tokens,
        padding: a.padding,
        sentences_per_document: a.sentences_per_document,
        seed: run.seed,
    };
    for (k, v) in [
        ("tokens", a.tokens),
        ("phrases", a.phrases),
        ("filler-words", a.filler_words),
        ("min-len", a.min_len),
        ("max-len", a.max_len),
        ("padding", a.padding),
        ("sentences-per-document", a.sentences_per_document),
    ] {
        run.settings.record(k, v);
    }
    let corpus = generate(&cfg);
    std::fs::create_dir_all(&a.out_dir).with_context(|| format!("creating {}", a.out_dir.display()))?;
    let width = corpus.documents.len().to_string().len();
    for (i, doc) in corpus.documents.iter().enumerate() {
        let mut text = doc.clone();
        text.push('\n');
        run.write(&a.out_dir.join(format!("doc-{:0width$}.txt", i + 1)), text)?;
    }
    run.primary = None;
    run.write(&a.out_dir.join("phrases.txt"), corpus.phrase_list())?;
    run.row(&[&"documents", &corpus.documents.len()]);
    run.row(&[&"tokens", &corpus.token_count()]);
    run.row(&[&"phrases", &corpus.phrases.len()]);
    Ok(())
}
