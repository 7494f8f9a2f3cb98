//! Joint SGD over the reconstruction and phrase ranking objectives.
//!
//! Each visited phrase contributes one combined step: every phrase word is a
//! reconstruction example, and the phrase mean is ranked against `N` fresh
//! negatives. Word vectors are recomputed through the encoder on every step,
//! so both objectives update the same encoder; the decoder only sees the
//! reconstruction gradient.
//!
//! Before the phrase epochs an optional pre-training pass runs plain
//! reconstruction over every word with counts, so words outside all phrases
//! still get trained embeddings.

use alloc::vec::Vec;

use rand::seq::SliceRandom;
use rand::Rng as _;

use crate::cooc::{CoocMatrix, SqrtDistribution};
use crate::linalg::Matrix;
use crate::model::{ranking_loss_and_grads, sample_negatives_from, Model, Phrase};
use crate::phrases::PhraseSet;
use crate::{seeded_rng, Error, Result, Rng};

/// How phrases are drawn within an epoch.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PhraseSampling {
    /// Each distinct phrase once per epoch.
    #[default]
    Uniform,
    /// Each phrase as many times as its count, so an epoch covers every
    /// observed occurrence.
    Frequency,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrainConfig {
    pub dim: usize,
    pub learning_rate: f64,
    /// Weight of the ranking objective relative to reconstruction.
    pub lambda_rank: f64,
    pub negatives: usize,
    pub epochs: usize,
    /// Reconstruction-only passes over all words before the phrase epochs.
    pub pretrain_epochs: usize,
    pub seed: u64,
    pub shuffle: bool,
    pub sampling: PhraseSampling,
    /// Emit a checkpoint every this many epochs; 0 disables.
    pub checkpoint_interval: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            dim: 100,
            learning_rate: 0.01,
            lambda_rank: 1.0,
            negatives: 10,
            epochs: 10,
            pretrain_epochs: 1,
            seed: 1,
            shuffle: true,
            sampling: PhraseSampling::Uniform,
            checkpoint_interval: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate >= 0.0 && self.learning_rate.is_finite()) {
            return Err(Error::invalid("learning_rate must be finite and non-negative"));
        }
        if !(self.lambda_rank >= 0.0 && self.lambda_rank.is_finite()) {
            return Err(Error::invalid("lambda_rank must be finite and non-negative"));
        }
        if self.negatives < 1 {
            return Err(Error::invalid("negatives must be at least 1"));
        }
        if self.dim < 1 {
            return Err(Error::invalid("dim must be at least 1"));
        }
        Ok(())
    }
}

/// Per-epoch statistics.
#[derive(Clone, Debug, PartialEq)]
pub struct EpochReport {
    /// 1-based.
    pub epoch: usize,
    /// Mean reconstruction loss per reconstructed word.
    pub reconstruction_loss: f64,
    /// Mean ranking loss per phrase (0 during pre-training).
    pub ranking_loss: f64,
    /// Phrases visited (words, during pre-training).
    pub examples: usize,
    pub seconds: f64,
}

impl EpochReport {
    pub fn examples_per_sec(&self) -> f64 {
        if self.seconds > 0.0 {
            self.examples as f64 / self.seconds
        } else {
            0.0
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct TrainReport {
    pub pretrain: Vec<EpochReport>,
    pub epochs: Vec<EpochReport>,
}

/// Callbacks for things the core cannot do itself: reading a clock and
/// persisting checkpoints.
pub trait TrainHooks {
    /// Monotonic time in seconds. The default clock is frozen at zero.
    fn now(&mut self) -> f64 {
        0.0
    }

    fn on_epoch(&mut self, _report: &EpochReport, _model: &Model) -> Result<()> {
        Ok(())
    }

    fn checkpoint(&mut self, _epoch: usize, _model: &Model) -> Result<()> {
        Ok(())
    }
}

/// Hooks that do nothing.
#[derive(Clone, Copy, Debug, Default)]
pub struct NoHooks;

impl TrainHooks for NoHooks {}

/// `√P_w` for every word, with words lacking counts set aside.
#[derive(Clone, Debug)]
pub struct WordRows {
    rows: Vec<Option<SqrtDistribution>>,
    trainable: Vec<u32>,
    n_contexts: usize,
}

impl WordRows {
    pub fn from_cooc(cooc: &CoocMatrix) -> Result<Self> {
        let mut rows = Vec::with_capacity(cooc.n_words());
        let mut trainable = Vec::new();
        for w in 0..cooc.n_words() as u32 {
            if cooc.is_empty_row(w) {
                rows.push(None);
            } else {
                rows.push(Some(cooc.sqrt_row(w)?));
                trainable.push(w);
            }
        }
        Ok(WordRows {
            rows,
            trainable,
            n_contexts: cooc.n_contexts(),
        })
    }

    /// Rows given directly, e.g. a synthetic design matrix.
    pub fn from_rows(rows: Vec<Option<SqrtDistribution>>, n_contexts: usize) -> Result<Self> {
        if let Some(bad) = rows.iter().flatten().find(|r| r.dim() != n_contexts) {
            return Err(Error::DimensionMismatch {
                expected: n_contexts,
                found: bad.dim(),
            });
        }
        let trainable = rows
            .iter()
            .enumerate()
            .filter(|(_, r)| r.is_some())
            .map(|(i, _)| i as u32)
            .collect();
        Ok(WordRows {
            rows,
            trainable,
            n_contexts,
        })
    }

    pub fn get(&self, word: u32) -> Option<&SqrtDistribution> {
        self.rows.get(word as usize).and_then(Option::as_ref)
    }

    fn require(&self, word: u32) -> Result<&SqrtDistribution> {
        self.get(word).ok_or(Error::EmptyRow { word })
    }

    /// Words with a non-empty row, ascending.
    pub fn trainable(&self) -> &[u32] {
        &self.trainable
    }

    /// Words without counts; they get no embedding.
    pub fn excluded(&self) -> impl Iterator<Item = u32> + '_ {
        self.rows
            .iter()
            .enumerate()
            .filter(|(_, r)| r.is_none())
            .map(|(i, _)| i as u32)
    }

    pub fn n_words(&self) -> usize {
        self.rows.len()
    }

    pub fn n_contexts(&self) -> usize {
        self.n_contexts
    }
}

/// Uniform initialization in `±1/√|D|`, deterministic in `seed`.
pub fn init_model(seed: u64, dim: usize, n_contexts: usize) -> Result<Model> {
    if dim == 0 || n_contexts == 0 {
        return Err(Error::invalid("model dimensions must be positive"));
    }
    if dim > n_contexts {
        return Err(Error::invalid(alloc::format!(
            "embedding dimension {dim} exceeds context dimension {n_contexts}"
        )));
    }
    let bound = 1.0 / libm::sqrt(n_contexts as f64);
    let mut rng = seeded_rng(seed);
    let encoder = Matrix::from_fn(dim, n_contexts, |_, _| rng.gen_range(-bound..=bound));
    let decoder = Matrix::from_fn(n_contexts, dim, |_, _| rng.gen_range(-bound..=bound));
    Model::new(encoder, decoder)
}

/// Losses of one step, measured before the update.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepLoss {
    /// Sum over the phrase words.
    pub reconstruction: f64,
    pub ranking: f64,
}

/// One combined SGD step on a phrase.
pub fn train_step(
    model: &mut Model,
    phrase: &Phrase,
    rows: &WordRows,
    config: &TrainConfig,
    rng: &mut Rng,
) -> Result<StepLoss> {
    let inputs: Vec<&SqrtDistribution> = phrase
        .word_ids()
        .iter()
        .map(|&w| rows.require(w))
        .collect::<Result<_>>()?;

    let mut rec_grads = Vec::with_capacity(inputs.len());
    let mut reconstruction = 0.0;
    for v in &inputs {
        let g = model.reconstruction_loss_and_grads(v)?;
        reconstruction += g.loss;
        rec_grads.push(g);
    }

    let negatives = sample_negatives_from(rng, rows.trainable(), phrase, config.negatives)?;
    let neg_inputs: Vec<&SqrtDistribution> = negatives
        .word_ids()
        .iter()
        .map(|&w| rows.require(w))
        .collect::<Result<_>>()?;
    let neg_vectors: Vec<Vec<f64>> = neg_inputs
        .iter()
        .map(|v| model.encode(v))
        .collect::<Result<_>>()?;
    let word_vectors: Vec<&[f64]> = rec_grads.iter().map(|g| g.code.as_slice()).collect();
    let rank = ranking_loss_and_grads(&word_vectors, &neg_vectors)?;

    if !reconstruction.is_finite() {
        return Err(Error::NonFinite {
            what: "reconstruction loss",
        });
    }
    if !rank.loss.is_finite() {
        return Err(Error::NonFinite { what: "ranking loss" });
    }

    let lr = config.learning_rate;
    if lr != 0.0 {
        for g in &rec_grads {
            g.apply(model, lr);
        }
        if config.lambda_rank != 0.0 && !rank.is_zero() {
            let scale = -lr * config.lambda_rank;
            for (grad, v) in rank.words.iter().zip(&inputs) {
                model.add_encoder_outer(scale, grad, v.as_sparse());
            }
            for (grad, v) in rank.negatives.iter().zip(&neg_inputs) {
                model.add_encoder_outer(scale, grad, v.as_sparse());
            }
        }
    }
    Ok(StepLoss {
        reconstruction,
        ranking: rank.loss,
    })
}

/// One reconstruction-only step on a single word.
pub fn reconstruction_step(model: &mut Model, rows: &WordRows, word: u32, learning_rate: f64) -> Result<f64> {
    let g = model.reconstruction_loss_and_grads(rows.require(word)?)?;
    if !g.loss.is_finite() {
        return Err(Error::NonFinite {
            what: "reconstruction loss",
        });
    }
    if learning_rate != 0.0 {
        g.apply(model, learning_rate);
    }
    Ok(g.loss)
}

fn epoch_order(phrases: &PhraseSet, config: &TrainConfig, rng: &mut Rng) -> Vec<usize> {
    match config.sampling {
        PhraseSampling::Uniform => {
            let mut order: Vec<usize> = (0..phrases.len()).collect();
            if config.shuffle {
                order.shuffle(rng);
            }
            order
        }
        PhraseSampling::Frequency => {
            let mut order: Vec<usize> = phrases
                .iter()
                .enumerate()
                .flat_map(|(i, p)| core::iter::repeat_n(i, p.count().max(1) as usize))
                .collect();
            if config.shuffle {
                order.shuffle(rng);
            }
            order
        }
    }
}

/// Full training run: initialization, pre-training, then phrase epochs.
///
/// With `epochs == 0` the freshly initialized model is returned untouched
/// (pre-training is skipped as well).
pub fn train(
    rows: &WordRows,
    phrases: &PhraseSet,
    config: &TrainConfig,
    hooks: &mut impl TrainHooks,
) -> Result<(Model, TrainReport)> {
    config.validate()?;
    if phrases.is_empty() {
        return Err(Error::EmptyInput("phrase set"));
    }
    for p in phrases.iter() {
        for &w in p.word_ids() {
            rows.require(w)?;
        }
    }
    let mut model = init_model(config.seed, config.dim, rows.n_contexts())?;
    let mut report = TrainReport::default();
    if config.epochs == 0 {
        return Ok((model, report));
    }

    let mut rng = seeded_rng(config.seed);
    rng.set_stream(1);

    for epoch in 1..=config.pretrain_epochs {
        let start = hooks.now();
        let mut order = rows.trainable().to_vec();
        if config.shuffle {
            order.shuffle(&mut rng);
        }
        let mut total = 0.0;
        for &w in &order {
            total += reconstruction_step(&mut model, rows, w, config.learning_rate)?;
        }
        let r = EpochReport {
            epoch,
            reconstruction_loss: total / order.len().max(1) as f64,
            ranking_loss: 0.0,
            examples: order.len(),
            seconds: hooks.now() - start,
        };
        report.pretrain.push(r);
    }

    for epoch in 1..=config.epochs {
        let start = hooks.now();
        let order = epoch_order(phrases, config, &mut rng);
        let (mut rec, mut rank, mut words) = (0.0, 0.0, 0usize);
        for &i in &order {
            let p = &phrases.phrases()[i];
            let loss = train_step(&mut model, p, rows, config, &mut rng)?;
            rec += loss.reconstruction;
            rank += loss.ranking;
            words += p.len();
        }
        if !model.is_finite() {
            return Err(Error::NonFinite { what: "model weight" });
        }
        let r = EpochReport {
            epoch,
            reconstruction_loss: rec / words as f64,
            ranking_loss: rank / order.len() as f64,
            examples: order.len(),
            seconds: hooks.now() - start,
        };
        hooks.on_epoch(&r, &model)?;
        if config.checkpoint_interval > 0 && epoch % config.checkpoint_interval == 0 {
            hooks.checkpoint(epoch, &model)?;
        }
        report.epochs.push(r);
    }
    Ok((model, report))
}

/// Word vectors `x_w = f(√P_w)` for every trainable word, as `(id, vector)`.
pub fn embed_words(model: &Model, rows: &WordRows) -> Result<Vec<(u32, Vec<f64>)>> {
    rows.trainable()
        .iter()
        .map(|&w| Ok((w, model.encode(rows.require(w)?)?)))
        .collect()
}
