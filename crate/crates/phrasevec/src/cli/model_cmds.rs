use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::Args;
use phrasevec_core::cooc::PhraseContextCounter;
use phrasevec_core::corpus::{tokenize, Vocabulary};
use phrasevec_core::eval::EmbeddingTable;
use phrasevec_core::model::{infer_from_counts, Model};
use phrasevec_core::phrases::load_phrases;
use phrasevec_core::svd::{build_design_matrix, truncated_svd, SvdOptions};
use phrasevec_core::trainer::{embed_words, train as train_model, EpochReport, PhraseSampling, TrainConfig, TrainHooks, WordRows};

use super::corpus_cmds::report_drops;
use super::{load_cooc, load_model, load_vocab, suffixed, Run};
use crate::corpus_io::{check_inputs, read_document, Input};
use crate::formats::checkpoint::{write_checkpoint, CheckpointManifest};
use crate::formats::datasets::read_word_counts;
use crate::formats::embeddings::write_embeddings;
use crate::formats::log::{format_log_line, write_log};
use crate::formats::{format_f64, write_atomic};

#[derive(Debug, Args)]
pub struct TrainArgs {
    #[arg(long)]
    pub cooc: PathBuf,
    #[arg(long)]
    pub vocab: PathBuf,
    /// Phrase list: one phrase per line, optional trailing <TAB>count.
    #[arg(long)]
    pub phrases: PathBuf,
    /// Output prefix: writes PREFIX.ckpt (+ .manifest), PREFIX.vec and
    /// PREFIX.log.tsv.
    #[arg(long)]
    pub out: PathBuf,
    /// Embedding dimension [default: 100].
    #[arg(long)]
    pub dim: Option<usize>,
    /// SGD step size [default: 0.01].
    #[arg(long)]
    pub lr: Option<f64>,
    /// Negative words per phrase [default: 10].
    #[arg(long)]
    pub negatives: Option<usize>,
    /// Weight of the ranking loss; 0 trains a plain autoencoder [default: 1].
    #[arg(long)]
    pub lambda: Option<f64>,
    /// [default: 10]
    #[arg(long)]
    pub epochs: Option<usize>,
    /// Reconstruction-only passes over all words first [default: 1].
    #[arg(long)]
    pub pretrain_epochs: Option<usize>,
    /// uniform (each phrase once per epoch) or frequency (each phrase count
    /// times) [default: uniform].
    #[arg(long)]
    pub sampling: Option<String>,
    #[arg(long)]
    pub no_shuffle: bool,
    /// Write PREFIX.epoch-N.ckpt every N epochs; 0 disables [default: 0].
    #[arg(long)]
    pub checkpoint_interval: Option<usize>,
    /// [default: 10]
    #[arg(long)]
    pub phrase_min_count: Option<u64>,
    /// Record zero for wall-clock columns so reruns are byte-identical.
    #[arg(long)]
    pub deterministic: bool,
}

struct CliHooks<'a> {
    start: Instant,
    deterministic: bool,
    prefix: &'a Path,
    error: Option<anyhow::Error>,
}

impl TrainHooks for CliHooks<'_> {
    fn now(&mut self) -> f64 {
        if self.deterministic {
            0.0
        } else {
            self.start.elapsed().as_secs_f64()
        }
    }

    fn on_epoch(&mut self, report: &EpochReport, _model: &Model) -> phrasevec_core::Result<()> {
        eprintln!("{}", format_log_line(report));
        Ok(())
    }

    fn checkpoint(&mut self, epoch: usize, model: &Model) -> phrasevec_core::Result<()> {
        let path = suffixed(self.prefix, &format!(".epoch-{epoch}.ckpt"));
        write_atomic(&path, &write_checkpoint(model)).map_err(|e| {
            let msg = format!("writing {}: {e}", path.display());
            self.error = Some(anyhow::anyhow!(msg.clone()));
            phrasevec_core::Error::InvalidArgument(msg)
        })
    }
}

pub(super) fn train(run: &mut Run, a: &TrainArgs) -> Result<()> {
    let s = &mut run.settings;
    let sampling = match s.resolve("sampling", a.sampling.clone(), "uniform".into())?.as_str() {
        "uniform" => PhraseSampling::Uniform,
        "frequency" => PhraseSampling::Frequency,
        other => bail!("unknown sampling {other:?} (expected uniform or frequency)"),
    };
    let config = TrainConfig {
        dim: s.resolve("dim", a.dim, 100)?,
        learning_rate: s.resolve("lr", a.lr, 0.01)?,
        lambda_rank: s.resolve("lambda", a.lambda, 1.0)?,
        negatives: s.resolve("negatives", a.negatives, 10)?,
        epochs: s.resolve("epochs", a.epochs, 10)?,
        pretrain_epochs: s.resolve("pretrain-epochs", a.pretrain_epochs, 1)?,
        seed: run.seed,
        shuffle: s.resolve("shuffle", a.no_shuffle.then_some(false), true)?,
        sampling,
        checkpoint_interval: s.resolve("checkpoint-interval", a.checkpoint_interval, 0)?,
    };
    let min = s.resolve("phrase-min-count", a.phrase_min_count, 10)?;
    let deterministic = s.resolve("deterministic", a.deterministic.then_some(true), false)?;
    config.validate()?;

    let vocab = load_vocab(run, &a.vocab)?;
    let vocab_digest = run.inputs.last().expect("vocabulary was just read").sha256.clone();
    let cooc = load_cooc(run, &a.cooc, &vocab)?;
    let text = run.read_text(&a.phrases)?;
    let rows = WordRows::from_cooc(&cooc)?;
    let (phrases, drops) = load_phrases(&text, &vocab, |w| !cooc.is_empty_row(w), min)?;
    if config.lambda_rank == 0.0 {
        eprintln!("lambda is 0: training a plain autoencoder");
    }

    let mut hooks = CliHooks {
        start: Instant::now(),
        deterministic,
        prefix: &a.out,
        error: None,
    };
    let (model, report) = match train_model(&rows, &phrases, &config, &mut hooks) {
        Ok(r) => r,
        Err(e) => return Err(hooks.error.take().unwrap_or_else(|| e.into())),
    };

    let ckpt = suffixed(&a.out, ".ckpt");
    run.write(&ckpt, write_checkpoint(&model))?;
    let sidecar = CheckpointManifest {
        vocab: a.vocab.display().to_string(),
        vocab_sha256: vocab_digest,
        dim: model.dim(),
        contexts: model.input_dim(),
    };
    run.write(&suffixed(&ckpt, ".manifest"), sidecar.to_text())?;
    let table = EmbeddingTable::from_ids(&vocab, model.dim(), &embed_words(&model, &rows)?)?;
    run.write(&suffixed(&a.out, ".vec"), write_embeddings(&table))?;
    run.write(&suffixed(&a.out, ".log.tsv"), write_log(&report.epochs))?;

    let mode = if config.lambda_rank == 0.0 { "autoencoder" } else { "joint" };
    run.row(&[&"mode", &mode]);
    run.row(&[&"phrases", &phrases.len()]);
    report_drops(run, &drops);
    let excluded: Vec<u32> = rows.excluded().collect();
    run.row(&[&"excluded_words", &excluded.len()]);
    for w in excluded {
        run.row(&[&"excluded_word", &vocab.word(w)]);
    }
    run.row(&[&"embedded_words", &table.len()]);
    for r in &report.pretrain {
        run.row(&[&"pretrain_rec_loss", &r.epoch, &format_f64(r.reconstruction_loss)]);
    }
    run.row(&[&"epochs", &report.epochs.len()]);
    if let Some(last) = report.epochs.last() {
        run.row(&[&"final_rec_loss", &format_f64(last.reconstruction_loss)]);
        run.row(&[&"final_rank_loss", &format_f64(last.ranking_loss)]);
    }
    Ok(())
}

#[derive(Debug, Args)]
pub struct SvdArgs {
    #[arg(long)]
    pub cooc: PathBuf,
    #[arg(long)]
    pub vocab: PathBuf,
    /// Embedding file to write.
    #[arg(long)]
    pub out: PathBuf,
    /// Number of singular vectors [default: 100].
    #[arg(long)]
    pub dim: Option<usize>,
    /// Embeddings are U·Σ^exponent [default: 1].
    #[arg(long)]
    pub exponent: Option<f64>,
    /// Extra subspace columns [default: 10].
    #[arg(long)]
    pub svd_oversample: Option<usize>,
    /// [default: 1000]
    #[arg(long)]
    pub svd_max_iterations: Option<usize>,
    /// Largest accepted ‖Xv − σu‖/σ₁ [default: 1e-8].
    #[arg(long)]
    pub svd_tolerance: Option<f64>,
}

pub(super) fn svd(run: &mut Run, a: &SvdArgs) -> Result<()> {
    let s = &mut run.settings;
    let dim = s.resolve("dim", a.dim, 100)?;
    let exponent = s.resolve("exponent", a.exponent, 1.0)?;
    if !(exponent.is_finite() && exponent >= 0.0) {
        bail!("exponent must be finite and non-negative");
    }
    let opts = SvdOptions {
        oversample: s.resolve("svd-oversample", a.svd_oversample, 10)?,
        max_iterations: s.resolve("svd-max-iterations", a.svd_max_iterations, 1000)?,
        tolerance: s.resolve("svd-tolerance", a.svd_tolerance, 1e-8)?,
        seed: run.seed,
    };
    let vocab = load_vocab(run, &a.vocab)?;
    let cooc = load_cooc(run, &a.cooc, &vocab)?;
    let design = build_design_matrix(&cooc)?;
    let svd = truncated_svd(design.matrix(), dim, &opts)?;
    let emb = svd.embeddings(exponent);
    let rows: Vec<(u32, Vec<f64>)> = design
        .words()
        .iter()
        .enumerate()
        .map(|(i, &w)| (w, emb.row(i).to_vec()))
        .collect();
    let table = EmbeddingTable::from_ids(&vocab, dim, &rows)?;
    run.write(&a.out, write_embeddings(&table))?;
    run.row(&[&"embedded_words", &table.len()]);
    run.row(&[&"excluded_words", &design.excluded().len()]);
    run.row(&[&"iterations", &svd.iterations]);
    for (i, s) in svd.singular_values.iter().enumerate() {
        run.row(&[&"sigma", &(i + 1), &format_f64(*s)]);
    }
    Ok(())
}

/// Context counts around every occurrence of `phrase` in the corpus.
pub(super) fn corpus_phrase_counts(
    run: &mut Run,
    vocab: &Vocabulary,
    phrase: &[String],
    corpus: &[PathBuf],
    window: usize,
) -> Result<(Vec<(u32, u64)>, u64)> {
    let inputs = Input::from_paths(corpus);
    check_inputs(&inputs)?;
    let mut counter = PhraseContextCounter::new(phrase, window, vocab.context_size())?;
    for input in &inputs {
        let d = read_document(input, |t| {
            counter.push(vocab, t.as_str());
            Ok(())
        })?;
        counter.end_document();
        run.inputs.push(d);
    }
    Ok((counter.counts(), counter.occurrences()))
}

#[derive(Debug, Args)]
pub struct InferArgs {
    /// Checkpoint written by `train`.
    #[arg(long)]
    pub model: PathBuf,
    /// Vocabulary (default: the one named next to the checkpoint).
    #[arg(long)]
    pub vocab: Option<PathBuf>,
    /// The phrase (or single word) to represent.
    #[arg(long)]
    pub phrase: String,
    /// Context counts as word<TAB>count lines, instead of a corpus.
    #[arg(long, conflicts_with = "corpus")]
    pub counts: Option<PathBuf>,
    /// Corpus files to collect the phrase's contexts from.
    #[arg(long, num_args = 1..)]
    pub corpus: Vec<PathBuf>,
    /// Window used when collecting from a corpus [default: 10].
    #[arg(long)]
    pub window: Option<usize>,
    /// Also write the vector in embedding format.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

pub(super) fn infer(run: &mut Run, a: &InferArgs) -> Result<()> {
    let (model, vocab) = load_model(run, &a.model, a.vocab.as_deref())?;
    let phrase: Vec<String> = tokenize(&a.phrase).map(|t| t.into_string()).collect();
    if phrase.is_empty() {
        bail!("empty phrase");
    }
    let (counts, occurrences, skipped) = match &a.counts {
        Some(p) => {
            let text = run.read_text(p)?;
            let mut counts = Vec::new();
            let mut skipped = 0;
            for (w, n) in read_word_counts(text.as_bytes()).with_context(|| format!("{}", p.display()))? {
                match vocab.id(&w).and_then(|id| vocab.context_id(id)) {
                    Some(c) => counts.push((c, n)),
                    None => skipped += 1,
                }
            }
            counts.sort_unstable();
            counts.dedup_by(|b, a| {
                let same = a.0 == b.0;
                if same {
                    a.1 += b.1;
                }
                same
            });
            (counts, None, skipped)
        }
        None => {
            if a.corpus.is_empty() {
                bail!("give either --counts or --corpus");
            }
            let window = run.settings.resolve("window", a.window, 10)?;
            let (counts, occ) = corpus_phrase_counts(run, &vocab, &phrase, &a.corpus, window)?;
            (counts, Some(occ), 0)
        }
    };
    if counts.iter().all(|&(_, n)| n == 0) {
        return Err(phrasevec_core::Error::ZeroOccurrences.into());
    }
    let v = infer_from_counts(&model, &counts)?;
    let name = phrase.join("_");
    if let Some(out) = &a.out {
        let table = EmbeddingTable::new(vec![name.clone()], v.len(), v.clone())?;
        run.write(out, write_embeddings(&table))?;
    }
    if let Some(n) = occurrences {
        run.row(&[&"occurrences", &n]);
    }
    run.row(&[&"contexts", &counts.len()]);
    run.row(&[&"skipped_words", &skipped]);
    let values: Vec<String> = v.iter().map(|x| format_f64(*x)).collect();
    run.row(&[&"vector", &name, &values.join(" ")]);
    Ok(())
}
