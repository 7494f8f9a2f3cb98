//! The linear autoencoder and the phrase ranking objective.
//!
//! The encoder maps `√P_w` (dimension |D|) to a word vector `x_w` of
//! dimension `m`; the decoder maps it back. Neither has a bias and the
//! inputs are not centered. A phrase is represented by the mean of its word
//! vectors and trained to score its own words above sampled negatives by a
//! unit margin.

use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashSet;
use rand::Rng as _;

use crate::cooc::{sqrt_transform, Distribution, SqrtDistribution};
use crate::linalg::{axpy, dot, Matrix, SparseVector};
use crate::{Error, Result, Rng};

/// Longest phrase accepted.
pub const MAX_PHRASE_LEN: usize = 8;

/// Encoder (`m × |D|`) and decoder (`|D| × m`) weights.
#[derive(Clone, Debug, PartialEq)]
pub struct Model {
    encoder: Matrix,
    decoder: Matrix,
}

impl Model {
    pub fn new(encoder: Matrix, decoder: Matrix) -> Result<Self> {
        if encoder.rows() != decoder.cols() || encoder.cols() != decoder.rows() {
            return Err(Error::invalid(alloc::format!(
                "encoder is {}x{} but decoder is {}x{}",
                encoder.rows(),
                encoder.cols(),
                decoder.rows(),
                decoder.cols()
            )));
        }
        if encoder.rows() == 0 || encoder.cols() == 0 {
            return Err(Error::invalid("model dimensions must be positive"));
        }
        Ok(Model { encoder, decoder })
    }

    /// Embedding dimension `m`.
    pub fn dim(&self) -> usize {
        self.encoder.rows()
    }

    /// Input dimension |D|.
    pub fn input_dim(&self) -> usize {
        self.encoder.cols()
    }

    pub fn encoder(&self) -> &Matrix {
        &self.encoder
    }

    pub fn decoder(&self) -> &Matrix {
        &self.decoder
    }

    pub fn encoder_mut(&mut self) -> &mut Matrix {
        &mut self.encoder
    }

    pub fn decoder_mut(&mut self) -> &mut Matrix {
        &mut self.decoder
    }

    pub fn is_finite(&self) -> bool {
        self.encoder.is_finite() && self.decoder.is_finite()
    }

    /// `x_w = f(√P_w)`
    pub fn encode(&self, input: &SqrtDistribution) -> Result<Vec<f64>> {
        self.encoder.matvec_sparse(input.as_sparse())
    }

    /// Encodes any sparse input vector, not necessarily a distribution.
    pub fn encode_sparse(&self, input: &SparseVector) -> Result<Vec<f64>> {
        self.encoder.matvec_sparse(input)
    }

    pub fn decode(&self, code: &[f64]) -> Result<Vec<f64>> {
        self.decoder.matvec(code)
    }

    /// `‖g(f(v)) − v‖²` and its exact gradients.
    pub fn reconstruction_loss_and_grads(&self, input: &SqrtDistribution) -> Result<ReconstructionGrad> {
        let v = input.as_sparse();
        let code = self.encode_sparse(v)?;
        let mut residual = self.decode(&code)?;
        for (j, val) in v.iter() {
            residual[j as usize] -= val;
        }
        let loss = dot(&residual, &residual);
        let back = self.decoder.matvec_transpose(&residual)?;
        Ok(ReconstructionGrad {
            loss,
            code,
            residual,
            back,
            input: v.clone(),
        })
    }

    /// Adds `scale · left · rightᵀ` to the encoder, touching only the columns
    /// in the support of `right`.
    pub fn add_encoder_outer(&mut self, scale: f64, left: &[f64], right: &SparseVector) {
        debug_assert_eq!(left.len(), self.dim());
        let cols = self.encoder.cols();
        let data = self.encoder.as_mut_slice();
        for (k, &l) in left.iter().enumerate() {
            if l == 0.0 {
                continue;
            }
            let row = &mut data[k * cols..(k + 1) * cols];
            for (j, v) in right.iter() {
                row[j as usize] += scale * l * v;
            }
        }
    }

    /// Adds `scale · left · rightᵀ` to the decoder.
    pub fn add_decoder_outer(&mut self, scale: f64, left: &[f64], right: &[f64]) {
        debug_assert_eq!(right.len(), self.dim());
        for (i, &l) in left.iter().enumerate() {
            if l != 0.0 {
                axpy(scale * l, right, self.decoder.row_mut(i));
            }
        }
    }
}

/// Gradients of the reconstruction loss, kept in factored (outer product)
/// form: `∂/∂decoder = 2 r xᵀ`, `∂/∂encoder = 2 (decoderᵀ r) vᵀ` where `r` is
/// the residual, `x` the code and `v` the sparse input.
#[derive(Clone, Debug)]
pub struct ReconstructionGrad {
    pub loss: f64,
    /// The code `x = f(v)`.
    pub code: Vec<f64>,
    /// `g(f(v)) − v`
    pub residual: Vec<f64>,
    /// `decoderᵀ · residual`
    pub back: Vec<f64>,
    pub input: SparseVector,
}

impl ReconstructionGrad {
    /// ∂loss/∂x, the gradient with respect to the code.
    pub fn code_grad(&self) -> Vec<f64> {
        self.back.iter().map(|b| 2.0 * b).collect()
    }

    pub fn encoder_grad(&self) -> Matrix {
        let v = self.input.to_dense();
        Matrix::from_fn(self.back.len(), v.len(), |k, j| 2.0 * self.back[k] * v[j])
    }

    pub fn decoder_grad(&self) -> Matrix {
        Matrix::from_fn(self.residual.len(), self.code.len(), |i, k| {
            2.0 * self.residual[i] * self.code[k]
        })
    }

    /// `model ← model − lr · ∇`
    pub fn apply(&self, model: &mut Model, lr: f64) {
        model.add_encoder_outer(-2.0 * lr, &self.back, &self.input);
        model.add_decoder_outer(-2.0 * lr, &self.residual, &self.code);
    }
}

/// Mean of the word vectors, `x_s = (1/T) Σ x_{w_t}`.
pub fn compose_phrase<V: AsRef<[f64]>>(vectors: &[V]) -> Result<Vec<f64>> {
    let first = vectors.first().ok_or(Error::EmptyInput("phrase vectors"))?;
    let dim = first.as_ref().len();
    let mut out = vec![0.0; dim];
    for v in vectors {
        let v = v.as_ref();
        if v.len() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: v.len(),
            });
        }
        axpy(1.0, v, &mut out);
    }
    let inv = 1.0 / vectors.len() as f64;
    out.iter_mut().for_each(|x| *x *= inv);
    Ok(out)
}

/// Loss and subgradients of the phrase ranking objective.
#[derive(Clone, Debug)]
pub struct RankingGrad {
    pub loss: f64,
    /// Gradient for each phrase position (same order as the input).
    pub words: Vec<Vec<f64>>,
    /// Gradient for each negative.
    pub negatives: Vec<Vec<f64>>,
    /// Number of (positive, negative) pairs with an active hinge.
    pub active_pairs: usize,
}

impl RankingGrad {
    pub fn is_zero(&self) -> bool {
        self.active_pairs == 0
    }
}

/// `Σ_t Σ_i max(0, 1 − x_s·x_t + x_s·x_i)` with `x_s` the phrase mean.
///
/// Gradients account for `x_t` appearing both in its own score and inside
/// `x_s`. A hinge exactly at zero is treated as inactive.
pub fn ranking_loss_and_grads<V: AsRef<[f64]>, N: AsRef<[f64]>>(
    word_vectors: &[V],
    negative_vectors: &[N],
) -> Result<RankingGrad> {
    if negative_vectors.is_empty() {
        return Err(Error::EmptyInput("negative set"));
    }
    let phrase = compose_phrase(word_vectors)?;
    let dim = phrase.len();
    if let Some(bad) = negative_vectors.iter().find(|v| v.as_ref().len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: bad.as_ref().len(),
        });
    }
    let pos_scores: Vec<f64> = word_vectors.iter().map(|w| dot(&phrase, w.as_ref())).collect();
    let neg_scores: Vec<f64> = negative_vectors
        .iter()
        .map(|w| dot(&phrase, w.as_ref()))
        .collect();

    let t_len = word_vectors.len();
    let mut words = vec![vec![0.0; dim]; t_len];
    let mut negatives = vec![vec![0.0; dim]; negative_vectors.len()];
    let mut phrase_grad = vec![0.0; dim];
    let mut loss = 0.0;
    let mut active_pairs = 0;
    for (t, &sp) in pos_scores.iter().enumerate() {
        for (i, &sn) in neg_scores.iter().enumerate() {
            let margin = 1.0 - sp + sn;
            if margin > 0.0 {
                loss += margin;
                active_pairs += 1;
                // d/dx_s (x_s·x_i − x_s·x_t) = x_i − x_t
                axpy(1.0, negative_vectors[i].as_ref(), &mut phrase_grad);
                axpy(-1.0, word_vectors[t].as_ref(), &mut phrase_grad);
                axpy(-1.0, &phrase, &mut words[t]);
                axpy(1.0, &phrase, &mut negatives[i]);
            }
        }
    }
    let inv_t = 1.0 / t_len as f64;
    for w in &mut words {
        axpy(inv_t, &phrase_grad, w);
    }
    Ok(RankingGrad {
        loss,
        words,
        negatives,
        active_pairs,
    })
}

/// A phrase chunk as word ids, with its corpus count.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Phrase {
    word_ids: Vec<u32>,
    count: u64,
}

impl Phrase {
    pub fn new(word_ids: Vec<u32>, count: u64) -> Result<Self> {
        if word_ids.is_empty() {
            return Err(Error::EmptyInput("phrase"));
        }
        if word_ids.len() > MAX_PHRASE_LEN {
            return Err(Error::invalid(alloc::format!(
                "phrase has {} words, at most {MAX_PHRASE_LEN} allowed",
                word_ids.len()
            )));
        }
        Ok(Phrase { word_ids, count })
    }

    pub fn word_ids(&self) -> &[u32] {
        &self.word_ids
    }

    pub fn len(&self) -> usize {
        self.word_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word_ids.is_empty()
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub(crate) fn add_count(&mut self, n: u64) {
        self.count += n;
    }

    /// Distinct word ids, in order of first appearance.
    pub fn unique_ids(&self) -> Vec<u32> {
        let mut seen = Vec::with_capacity(self.word_ids.len());
        for &w in &self.word_ids {
            if !seen.contains(&w) {
                seen.push(w);
            }
        }
        seen
    }
}

/// Negative word ids for one phrase: distinct and disjoint from the phrase.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct NegativeSet(Vec<u32>);

impl NegativeSet {
    pub fn word_ids(&self) -> &[u32] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

/// Draws `n` distinct words uniformly from `candidates` minus the phrase.
pub fn sample_negatives_from(
    rng: &mut Rng,
    candidates: &[u32],
    phrase: &Phrase,
    n: usize,
) -> Result<NegativeSet> {
    let in_phrase = |w: &u32| phrase.word_ids.contains(w);
    let excluded = candidates.iter().filter(|w| in_phrase(w)).count();
    let available = candidates.len() - excluded;
    if n > available {
        return Err(Error::TooManyNegatives {
            requested: n,
            available,
        });
    }
    if 2 * n <= available {
        let mut chosen = Vec::with_capacity(n);
        let mut seen = HashSet::with_capacity(n);
        while chosen.len() < n {
            let w = candidates[rng.gen_range(0..candidates.len())];
            if !in_phrase(&w) && seen.insert(w) {
                chosen.push(w);
            }
        }
        Ok(NegativeSet(chosen))
    } else {
        // Dense case: partial Fisher-Yates over the eligible list.
        let mut pool: Vec<u32> = candidates.iter().copied().filter(|w| !in_phrase(w)).collect();
        for i in 0..n {
            let j = rng.gen_range(i..pool.len());
            pool.swap(i, j);
        }
        pool.truncate(n);
        Ok(NegativeSet(pool))
    }
}

/// Draws `n` distinct negatives from the ids `0..vocab_size` not in the phrase.
pub fn sample_negatives(rng: &mut Rng, vocab_size: usize, phrase: &Phrase, n: usize) -> Result<NegativeSet> {
    let candidates: Vec<u32> = (0..vocab_size as u32).collect();
    sample_negatives_from(rng, &candidates, phrase, n)
}

/// Encodes raw context counts `(context id, count)` sorted by context id:
/// normalize, take square roots, encode. Used for unseen words and for the
/// count-based phrase representation.
pub fn infer_from_counts(model: &Model, counts: &[(u32, u64)]) -> Result<Vec<f64>> {
    if counts.iter().all(|&(_, n)| n == 0) {
        return Err(Error::EmptyInput("context counts"));
    }
    let p = Distribution::from_counts(model.input_dim(), counts)?;
    model.encode(&sqrt_transform(&p)?)
}
