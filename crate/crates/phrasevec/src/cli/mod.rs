//! Subcommand front end. Every command prints a tab-separated result block
//! on stdout and writes a run manifest.

mod corpus_cmds;
mod eval_cmds;
mod model_cmds;

use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use phrasevec_core::cooc::CoocMatrix;
use phrasevec_core::corpus::Vocabulary;
use phrasevec_core::eval::EmbeddingTable;
use phrasevec_core::model::Model;

use crate::config::{Config, Settings};
use crate::formats::checkpoint::{read_checkpoint, CheckpointManifest};
use crate::formats::cooc::read_cooc;
use crate::formats::embeddings::read_embeddings;
use crate::formats::vocab::read_vocab;
use crate::formats::write_atomic;
use crate::manifest::{sha256_hex, unix_now, InputDigest, RunManifest};

#[derive(Debug, Parser)]
#[command(name = "phrasevec", version, about = "Word vectors whose sums represent phrases")]
pub struct Cli {
    /// key=value settings file; flags take precedence over it.
    #[arg(long, global = true, value_name = "FILE")]
    pub config: Option<PathBuf>,
    /// Seed for every random choice the command makes.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads where the command can use them (0 = all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,
    /// Also write the result block to this file.
    #[arg(long, global = true, value_name = "FILE")]
    pub report: Option<PathBuf>,
    /// Run manifest path (default: next to the main output).
    #[arg(long, global = true, value_name = "FILE")]
    pub manifest: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Count tokens and write the vocabulary.
    Vocab(corpus_cmds::VocabArgs),
    /// Count word/context co-occurrences.
    Cooc(corpus_cmds::CoocArgs),
    /// Train the joint model.
    Train(model_cmds::TrainArgs),
    /// Truncated-SVD baseline embeddings.
    Svd(model_cmds::SvdArgs),
    /// Word similarity (Spearman).
    EvalSim(eval_cmds::EvalSimArgs),
    /// Word analogy accuracy.
    EvalAnalogy(eval_cmds::EvalAnalogyArgs),
    /// Phrase word-retrieval Recall@K.
    EvalPhrase(eval_cmds::EvalPhraseArgs),
    /// Nearest words or phrases to a query.
    Nn(eval_cmds::NnArgs),
    /// Represent a phrase from the contexts it occurs in.
    Infer(model_cmds::InferArgs),
    /// Split a phrase list into train/valid/test.
    Split(corpus_cmds::SplitArgs),
    /// Extract candidate phrases (contiguous n-grams) from a corpus.
    Chunks(corpus_cmds::ChunksArgs),
    /// Generate a corpus with planted phrases.
    Synth(corpus_cmds::SynthArgs),
}

pub fn run(cli: Cli) -> Result<()> {
    let file = match &cli.config {
        Some(p) => Config::parse(&read_text(p)?).with_context(|| format!("{}", p.display()))?,
        None => Config::default(),
    };
    let mut settings = Settings::new(file);
    let seed = settings.resolve("seed", cli.seed, 1u64)?;
    let threads = settings.resolve("threads", cli.threads, 1usize)?;
    let mut run = Run {
        name: cli.command.name(),
        settings,
        inputs: Vec::new(),
        started: unix_now(),
        out: String::new(),
        primary: None,
        seed,
        threads: crate::corpus_io::resolve_threads(threads),
    };
    match &cli.command {
        Command::Vocab(a) => corpus_cmds::vocab(&mut run, a)?,
        Command::Cooc(a) => corpus_cmds::cooc(&mut run, a)?,
        Command::Train(a) => model_cmds::train(&mut run, a)?,
        Command::Svd(a) => model_cmds::svd(&mut run, a)?,
        Command::EvalSim(a) => eval_cmds::eval_sim(&mut run, a)?,
        Command::EvalAnalogy(a) => eval_cmds::eval_analogy(&mut run, a)?,
        Command::EvalPhrase(a) => eval_cmds::eval_phrase(&mut run, a)?,
        Command::Nn(a) => eval_cmds::nn(&mut run, a)?,
        Command::Infer(a) => model_cmds::infer(&mut run, a)?,
        Command::Split(a) => corpus_cmds::split(&mut run, a)?,
        Command::Chunks(a) => corpus_cmds::chunks(&mut run, a)?,
        Command::Synth(a) => corpus_cmds::synth(&mut run, a)?,
    }
    run.finish(cli.report.as_deref(), cli.manifest.as_deref())
}

impl Command {
    fn name(&self) -> &'static str {
        match self {
            Command::Vocab(_) => "vocab",
            Command::Cooc(_) => "cooc",
            Command::Train(_) => "train",
            Command::Svd(_) => "svd",
            Command::EvalSim(_) => "eval-sim",
            Command::EvalAnalogy(_) => "eval-analogy",
            Command::EvalPhrase(_) => "eval-phrase",
            Command::Nn(_) => "nn",
            Command::Infer(_) => "infer",
            Command::Split(_) => "split",
            Command::Chunks(_) => "chunks",
            Command::Synth(_) => "synth",
        }
    }
}

/// State shared by one command invocation.
pub(crate) struct Run {
    name: &'static str,
    settings: Settings,
    inputs: Vec<InputDigest>,
    started: u64,
    out: String,
    primary: Option<PathBuf>,
    seed: u64,
    threads: usize,
}

impl Run {
    /// Reads a whole input file, recording its digest.
    fn read(&mut self, path: &Path) -> Result<Vec<u8>> {
        let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
        self.inputs.push(InputDigest {
            path: path.display().to_string(),
            sha256: sha256_hex(&bytes),
        });
        Ok(bytes)
    }

    fn read_text(&mut self, path: &Path) -> Result<String> {
        let bytes = self.read(path)?;
        String::from_utf8(bytes).with_context(|| format!("{} is not valid UTF-8", path.display()))
    }

    fn write(&mut self, path: &Path, bytes: impl AsRef<[u8]>) -> Result<()> {
        if self.primary.is_none() {
            self.primary = Some(path.to_path_buf());
        }
        write_atomic(path, bytes.as_ref()).with_context(|| format!("writing {}", path.display()))
    }

    /// Appends one tab-separated line to the result block.
    fn row(&mut self, fields: &[&dyn Display]) {
        let line: Vec<String> = fields.iter().map(|f| f.to_string()).collect();
        self.out.push_str(&line.join("\t"));
        self.out.push('\n');
    }

    fn finish(self, report: Option<&Path>, manifest: Option<&Path>) -> Result<()> {
        print!("{}", self.out);
        if let Some(p) = report {
            write_atomic(p, self.out.as_bytes()).with_context(|| format!("writing {}", p.display()))?;
        }
        let m = RunManifest {
            subcommand: self.name.to_string(),
            config: self.settings.snapshot().clone(),
            inputs: self.inputs,
            seed: self.seed,
            version: env!("CARGO_PKG_VERSION").to_string(),
            started_unix: self.started,
            finished_unix: unix_now(),
        };
        let path = manifest
            .map(Path::to_path_buf)
            .or_else(|| self.primary.as_deref().or(report).map(|p| suffixed(p, ".run.json")));
        match path {
            Some(p) => write_atomic(&p, m.to_json().as_bytes()).with_context(|| format!("writing {}", p.display())),
            None => {
                eprint!("{}", m.to_json());
                Ok(())
            }
        }
    }
}

/// `path` with `suffix` appended to its file name.
pub(crate) fn suffixed(path: &Path, suffix: &str) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(suffix);
    PathBuf::from(s)
}

fn read_text(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))
}

/// Parses a comma-separated list such as `1,5,10`.
fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|v| v.trim().parse().map_err(|_| anyhow::anyhow!("bad list entry {v:?}")))
        .collect()
}

fn load_vocab(run: &mut Run, path: &Path) -> Result<Vocabulary> {
    let bytes = run.read(path)?;
    read_vocab(&bytes[..]).with_context(|| format!("vocabulary {}", path.display()))
}

/// Reads a co-occurrence file and checks it matches the vocabulary.
fn load_cooc(run: &mut Run, path: &Path, vocab: &Vocabulary) -> Result<CoocMatrix> {
    let bytes = run.read(path)?;
    let m = read_cooc(&bytes[..]).with_context(|| format!("co-occurrence file {}", path.display()))?;
    if m.n_words() != vocab.len() || m.n_contexts() != vocab.context_size() {
        bail!(
            "{} is {}x{} but the vocabulary has {} words and {} contexts",
            path.display(),
            m.n_words(),
            m.n_contexts(),
            vocab.len(),
            vocab.context_size()
        );
    }
    Ok(m)
}

fn load_embeddings(run: &mut Run, path: &Path) -> Result<EmbeddingTable> {
    let bytes = run.read(path)?;
    read_embeddings(&bytes[..]).with_context(|| format!("embeddings {}", path.display()))
}

/// Loads a checkpoint and the vocabulary it was trained against: `vocab` if
/// given, else the one named by the sidecar. A sidecar digest that does not
/// match the vocabulary is an error.
fn load_model(run: &mut Run, path: &Path, vocab: Option<&Path>) -> Result<(Model, Vocabulary)> {
    let bytes = run.read(path)?;
    let model = read_checkpoint(&bytes).with_context(|| format!("checkpoint {}", path.display()))?;
    let sidecar_path = suffixed(path, ".manifest");
    let sidecar = match std::fs::read_to_string(&sidecar_path) {
        Ok(text) => Some(CheckpointManifest::parse(&text).with_context(|| format!("{}", sidecar_path.display()))?),
        Err(_) => None,
    };
    let vocab_path = match (vocab, &sidecar) {
        (Some(v), _) => v.to_path_buf(),
        (None, Some(s)) => PathBuf::from(&s.vocab),
        (None, None) => bail!("no --vocab given and {} is missing", sidecar_path.display()),
    };
    let vocab = load_vocab(run, &vocab_path)?;
    if let Some(s) = sidecar {
        let digest = &run.inputs.last().expect("vocabulary was just read").sha256;
        if *digest != s.vocab_sha256 {
            bail!("{} does not match the vocabulary the model was trained with", vocab_path.display());
        }
    }
    if model.input_dim() != vocab.context_size() {
        bail!(
            "model expects {} contexts, vocabulary has {}",
            model.input_dim(),
            vocab.context_size()
        );
    }
    Ok((model, vocab))
}
