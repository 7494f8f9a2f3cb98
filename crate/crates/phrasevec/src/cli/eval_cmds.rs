use std::fmt::Write as _;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use clap::Args;
use phrasevec_core::corpus::tokenize;
use phrasevec_core::eval::{
    eval_analogy as run_analogy, eval_phrase_retrieval, eval_similarity, nearest_phrases, nearest_words, Metric,
    PhraseCollection, PhraseQuery,
};

use super::model_cmds::corpus_phrase_counts;
use super::{load_embeddings, load_model, parse_list, Run};
use crate::formats::datasets::{read_analogy, read_phrase_tokens, read_similarity};
use crate::formats::format_f64;

#[derive(Debug, Args)]
pub struct EvalSimArgs {
    #[arg(long)]
    pub embeddings: PathBuf,
    /// word1<TAB>word2<TAB>score lines.
    #[arg(long)]
    pub dataset: PathBuf,
}

pub(super) fn eval_sim(run: &mut Run, a: &EvalSimArgs) -> Result<()> {
    let emb = load_embeddings(run, &a.embeddings)?;
    let text = run.read_text(&a.dataset)?;
    let pairs = read_similarity(text.as_bytes()).with_context(|| format!("{}", a.dataset.display()))?;
    let r = eval_similarity(&emb, &pairs)?;
    run.row(&[&"rho", &format_f64(r.rho)]);
    run.row(&[&"covered", &r.covered]);
    run.row(&[&"total", &r.total]);
    run.row(&[&"coverage", &format_f64(r.coverage())]);
    Ok(())
}

#[derive(Debug, Args)]
pub struct EvalAnalogyArgs {
    #[arg(long)]
    pub embeddings: PathBuf,
    /// Four words per line; `: name` lines start a section.
    #[arg(long)]
    pub dataset: PathBuf,
}

pub(super) fn eval_analogy(run: &mut Run, a: &EvalAnalogyArgs) -> Result<()> {
    let emb = load_embeddings(run, &a.embeddings)?;
    let text = run.read_text(&a.dataset)?;
    let qs = read_analogy(text.as_bytes()).with_context(|| format!("{}", a.dataset.display()))?;
    let r = run_analogy(&emb, &qs)?;
    run.row(&[&"section", &"correct", &"answered", &"skipped", &"accuracy"]);
    for (name, t) in r.sections.iter().chain([(String::from("overall"), r.overall.clone())].iter()) {
        run.row(&[name, &t.correct, &t.answered, &t.skipped, &format_f64(t.accuracy())]);
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct EvalPhraseArgs {
    #[arg(long)]
    pub embeddings: PathBuf,
    /// Phrase list: one phrase per line, optional trailing <TAB>count.
    #[arg(long)]
    pub phrases: PathBuf,
    /// Comma-separated K values.
    #[arg(long, default_value = "1,5,10")]
    pub k: String,
    /// Write recall per phrase length to this TSV.
    #[arg(long)]
    pub by_length: Option<PathBuf>,
}

pub(super) fn eval_phrase(run: &mut Run, a: &EvalPhraseArgs) -> Result<()> {
    let ks: Vec<usize> = parse_list(&a.k)?;
    run.settings.record("k-values", &a.k);
    let emb = load_embeddings(run, &a.embeddings)?;
    let text = run.read_text(&a.phrases)?;
    let phrases = read_phrase_tokens(text.as_bytes())?;
    let r = eval_phrase_retrieval(&emb, &phrases, &ks)?;
    run.row(&[&"evaluated", &r.evaluated]);
    run.row(&[&"skipped", &r.skipped]);
    for (k, v) in r.ks.iter().zip(&r.recall) {
        run.row(&[&format!("recall@{k}"), &format_f64(*v)]);
    }
    if let Some(path) = &a.by_length {
        let mut out = String::from("length\tphrases");
        for k in &r.ks {
            write!(out, "\trecall@{k}").unwrap();
        }
        out.push('\n');
        for (len, (n, recall)) in &r.by_length {
            write!(out, "{len}\t{n}").unwrap();
            for v in recall {
                write!(out, "\t{}", format_f64(*v)).unwrap();
            }
            out.push('\n');
        }
        run.write(path, out)?;
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct NnArgs {
    #[arg(long)]
    pub embeddings: PathBuf,
    /// Query word or phrase.
    #[arg(long)]
    pub query: String,
    /// Number of results [default: 10].
    #[arg(long)]
    pub k: Option<usize>,
    /// dot or cosine, for word neighbours [default: cosine].
    #[arg(long)]
    pub metric: Option<String>,
    /// Rank the phrases of this list instead of words.
    #[arg(long)]
    pub collection: Option<PathBuf>,
    /// average-words or encode-counts [default: average-words].
    #[arg(long, requires = "collection")]
    pub mode: Option<String>,
    /// Checkpoint for encode-counts mode.
    #[arg(long)]
    pub model: Option<PathBuf>,
    /// Vocabulary for encode-counts mode (default: named next to the
    /// checkpoint).
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    /// Corpus files for encode-counts mode.
    #[arg(long, num_args = 1..)]
    pub corpus: Vec<PathBuf>,
    /// Context window for encode-counts mode [default: 10].
    #[arg(long)]
    pub window: Option<usize>,
}

pub(super) fn nn(run: &mut Run, a: &NnArgs) -> Result<()> {
    let k = run.settings.resolve("k", a.k, 10)?;
    let emb = load_embeddings(run, &a.embeddings)?;
    let query: Vec<String> = tokenize(&a.query).map(|t| t.into_string()).collect();
    if query.is_empty() {
        bail!("empty query");
    }
    let Some(collection_path) = &a.collection else {
        let metric = match run.settings.resolve("metric", a.metric.clone(), "cosine".into())?.as_str() {
            "cosine" => Metric::Cosine,
            "dot" => Metric::Dot,
            other => bail!("unknown metric {other:?} (expected dot or cosine)"),
        };
        let Some(q) = emb.compose(&query)? else {
            bail!("query has words missing from {}", a.embeddings.display());
        };
        run.row(&[&"rank", &"word", &"score"]);
        for (i, n) in nearest_words(&emb, &q, k, metric)?.iter().enumerate() {
            run.row(&[&(i + 1), &emb.word(n.id), &format_f64(n.score)]);
        }
        return Ok(());
    };

    let text = run.read_text(collection_path)?;
    let collection = PhraseCollection::new(&emb, &read_phrase_tokens(text.as_bytes())?)?;
    let mode = run.settings.resolve("mode", a.mode.clone(), "average-words".into())?;
    let hits = match mode.as_str() {
        "average-words" => nearest_phrases(&emb, &collection, PhraseQuery::AverageWords(&query), k)?,
        "encode-counts" => {
            let Some(model_path) = &a.model else {
                bail!("encode-counts needs --model");
            };
            if a.corpus.is_empty() {
                bail!("encode-counts needs --corpus");
            }
            let (model, vocab) = load_model(run, model_path, a.vocab.as_deref())?;
            let window = run.settings.resolve("window", a.window, 10)?;
            let (counts, occurrences) = corpus_phrase_counts(run, &vocab, &query, &a.corpus, window)?;
            run.row(&[&"occurrences", &occurrences]);
            nearest_phrases(
                &emb,
                &collection,
                PhraseQuery::EncodeCounts {
                    model: &model,
                    counts: &counts,
                },
                k,
            )?
        }
        other => bail!("unknown mode {other:?} (expected average-words or encode-counts)"),
    };
    run.row(&[&"skipped_phrases", &collection.skipped]);
    run.row(&[&"rank", &"phrase", &"score"]);
    for (i, n) in hits.iter().enumerate() {
        run.row(&[&(i + 1), &collection.phrases[n.id as usize].join(" "), &format_f64(n.score)]);
    }
    Ok(())
}
