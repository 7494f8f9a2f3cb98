//! Co-occurrence counting, context distributions and the Hellinger geometry.
//!
//! Windows are symmetric, unweighted and truncated at document boundaries.
//! Out-of-vocabulary tokens occupy window positions but are never centers or
//! contexts. A word appearing in its own window at another position counts
//! as its own context.

use alloc::collections::VecDeque;
use alloc::string::String;
use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::corpus::Vocabulary;
use crate::linalg::SparseVector;
use crate::{Error, Result};

/// Tolerance used when checking that a vector sums to one.
pub const SUM_TOLERANCE: f64 = 1e-9;

/// Streaming symmetric-window counter.
///
/// Feed token ids with [`push`](Self::push) and call
/// [`end_document`](Self::end_document) between documents. Counters over
/// different shards can be [`merge`](Self::merge)d; the finished matrix is
/// independent of sharding as long as no document is split.
#[derive(Clone, Debug)]
pub struct CoocCounter {
    window: usize,
    n_words: usize,
    n_contexts: usize,
    counts: HashMap<u64, u32>,
    history: VecDeque<Option<u32>>,
}

#[inline]
fn key(word: u32, context: u32) -> u64 {
    ((word as u64) << 32) | context as u64
}

impl CoocCounter {
    pub fn new(vocab: &Vocabulary, window: usize) -> Result<Self> {
        Self::with_dims(vocab.len(), vocab.context_size(), window)
    }

    pub fn with_dims(n_words: usize, n_contexts: usize, window: usize) -> Result<Self> {
        if window < 1 {
            return Err(Error::invalid("window must be at least 1"));
        }
        if n_contexts > n_words {
            return Err(Error::invalid("context dictionary larger than vocabulary"));
        }
        Ok(CoocCounter {
            window,
            n_words,
            n_contexts,
            counts: HashMap::new(),
            history: VecDeque::with_capacity(window + 1),
        })
    }

    fn bump(&mut self, word: u32, context: u32) -> Result<()> {
        let slot = self.counts.entry(key(word, context)).or_insert(0);
        *slot = slot
            .checked_add(1)
            .ok_or(Error::CountOverflow { word, context })?;
        Ok(())
    }

    /// Advances the window by one token; `None` marks an out-of-vocabulary
    /// token.
    pub fn push(&mut self, id: Option<u32>) -> Result<()> {
        if let Some(w) = id {
            if w as usize >= self.n_words {
                return Err(Error::invalid("token id outside the vocabulary"));
            }
        }
        if let Some(cur) = id {
            let ctx = self.n_contexts as u32;
            for i in 0..self.history.len() {
                if let Some(prev) = self.history[i] {
                    if prev < ctx {
                        self.bump(cur, prev)?;
                    }
                    if cur < ctx {
                        self.bump(prev, cur)?;
                    }
                }
            }
        }
        self.history.push_back(id);
        if self.history.len() > self.window {
            self.history.pop_front();
        }
        Ok(())
    }

    /// Looks a token up in `vocab` and pushes it.
    pub fn push_token(&mut self, vocab: &Vocabulary, token: &str) -> Result<()> {
        self.push(vocab.id(token))
    }

    pub fn end_document(&mut self) {
        self.history.clear();
    }

    pub fn merge(&mut self, other: CoocCounter) -> Result<()> {
        if (self.n_words, self.n_contexts, self.window)
            != (other.n_words, other.n_contexts, other.window)
        {
            return Err(Error::invalid("cannot merge counters with different shapes"));
        }
        for (k, n) in other.counts {
            let slot = self.counts.entry(k).or_insert(0);
            *slot = slot.checked_add(n).ok_or(Error::CountOverflow {
                word: (k >> 32) as u32,
                context: k as u32,
            })?;
        }
        Ok(())
    }

    pub fn finish(self) -> CoocMatrix {
        let mut triplets: Vec<(u64, u32)> = self.counts.into_iter().collect();
        triplets.sort_unstable_by_key(|&(k, _)| k);
        let mut row_ptr = Vec::with_capacity(self.n_words + 1);
        let mut cols = Vec::with_capacity(triplets.len());
        let mut counts = Vec::with_capacity(triplets.len());
        row_ptr.push(0);
        let mut row = 0usize;
        for (k, n) in triplets {
            let w = (k >> 32) as usize;
            while row < w {
                row_ptr.push(cols.len());
                row += 1;
            }
            cols.push(k as u32);
            counts.push(n);
        }
        while row < self.n_words {
            row_ptr.push(cols.len());
            row += 1;
        }
        CoocMatrix::from_csr(self.n_contexts, self.window, row_ptr, cols, counts)
    }
}

/// Counts a single document.
pub fn count_cooccurrences<I, T>(tokens: I, vocab: &Vocabulary, window: usize) -> Result<CoocMatrix>
where
    I: IntoIterator<Item = T>,
    T: AsRef<str>,
{
    let mut counter = CoocCounter::new(vocab, window)?;
    for t in tokens {
        counter.push_token(vocab, t.as_ref())?;
    }
    Ok(counter.finish())
}

/// Sparse word-by-context count matrix in compressed row form.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoocMatrix {
    n_contexts: usize,
    window: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    counts: Vec<u32>,
    totals: Vec<u64>,
}

impl CoocMatrix {
    fn from_csr(
        n_contexts: usize,
        window: usize,
        row_ptr: Vec<usize>,
        cols: Vec<u32>,
        counts: Vec<u32>,
    ) -> Self {
        let totals = row_ptr
            .windows(2)
            .map(|r| counts[r[0]..r[1]].iter().map(|&c| c as u64).sum())
            .collect();
        CoocMatrix {
            n_contexts,
            window,
            row_ptr,
            cols,
            counts,
            totals,
        }
    }

    /// Rebuilds a matrix from `(word, context, count)` triplets sorted by
    /// `(word, context)`. Zero counts and duplicates are rejected.
    pub fn from_triplets<I>(n_words: usize, n_contexts: usize, window: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (u32, u32, u32)>,
    {
        let mut row_ptr = Vec::with_capacity(n_words + 1);
        let mut cols = Vec::new();
        let mut counts = Vec::new();
        row_ptr.push(0);
        let mut row = 0usize;
        let mut last: Option<(u32, u32)> = None;
        for (i, (w, c, n)) in triplets.into_iter().enumerate() {
            let bad = |message: &str| Error::Parse {
                line: i + 1,
                message: String::from(message),
            };
            if w as usize >= n_words || c as usize >= n_contexts {
                return Err(bad("triplet outside matrix bounds"));
            }
            if n == 0 {
                return Err(bad("zero count stored"));
            }
            if last.is_some_and(|prev| prev >= (w, c)) {
                return Err(bad("triplets not strictly sorted"));
            }
            last = Some((w, c));
            while row < w as usize {
                row_ptr.push(cols.len());
                row += 1;
            }
            cols.push(c);
            counts.push(n);
        }
        while row < n_words {
            row_ptr.push(cols.len());
            row += 1;
        }
        Ok(Self::from_csr(n_contexts, window, row_ptr, cols, counts))
    }

    /// |W|
    pub fn n_words(&self) -> usize {
        self.totals.len()
    }

    /// |D|
    pub fn n_contexts(&self) -> usize {
        self.n_contexts
    }

    pub fn window(&self) -> usize {
        self.window
    }

    pub fn nnz(&self) -> usize {
        self.cols.len()
    }

    /// Context ids and counts of row `word`.
    pub fn row(&self, word: u32) -> (&[u32], &[u32]) {
        let (a, b) = (self.row_ptr[word as usize], self.row_ptr[word as usize + 1]);
        (&self.cols[a..b], &self.counts[a..b])
    }

    /// Σ_c n(c, word)
    pub fn total(&self, word: u32) -> u64 {
        self.totals[word as usize]
    }

    pub fn is_empty_row(&self, word: u32) -> bool {
        self.totals[word as usize] == 0
    }

    /// Words whose rows hold no counts.
    pub fn empty_rows(&self) -> impl Iterator<Item = u32> + '_ {
        (0..self.n_words() as u32).filter(move |&w| self.is_empty_row(w))
    }

    /// Triplets in `(word, context)` order.
    pub fn triplets(&self) -> impl Iterator<Item = (u32, u32, u32)> + '_ {
        (0..self.n_words() as u32).flat_map(move |w| {
            let (c, n) = self.row(w);
            c.iter().zip(n).map(move |(&c, &n)| (w, c, n))
        })
    }

    /// Sum of all stored counts.
    pub fn grand_total(&self) -> u64 {
        self.totals.iter().sum()
    }

    /// The context distribution `P_w` of a word.
    pub fn row_distribution(&self, word: u32) -> Result<Distribution> {
        if word as usize >= self.n_words() {
            return Err(Error::invalid("word id outside the matrix"));
        }
        let (cols, counts) = self.row(word);
        let pairs: Vec<(u32, u64)> = cols.iter().zip(counts).map(|(&c, &n)| (c, n as u64)).collect();
        Distribution::from_counts(self.n_contexts, &pairs).map_err(|e| match e {
            Error::EmptyInput(_) => Error::EmptyRow { word },
            e => e,
        })
    }

    /// `√P_w` for a word.
    pub fn sqrt_row(&self, word: u32) -> Result<SqrtDistribution> {
        sqrt_transform(&self.row_distribution(word)?)
    }
}

/// A discrete probability vector over the context dictionary.
#[derive(Clone, Debug, PartialEq)]
pub struct Distribution(SparseVector);

impl Distribution {
    /// Validates non-negativity and unit mass. Explicit zeros are dropped.
    pub fn new(p: SparseVector) -> Result<Self> {
        if let Some(k) = p.values().iter().position(|&v| v < 0.0 || v.is_nan()) {
            return Err(Error::NegativeProbability {
                index: p.indices()[k] as usize,
            });
        }
        let sum = p.sum();
        if (sum - 1.0).abs() > SUM_TOLERANCE {
            return Err(Error::invalid(alloc::format!(
                "probabilities sum to {sum}, not 1"
            )));
        }
        Ok(Distribution(drop_zeros(p)))
    }

    pub fn from_dense(p: &[f64]) -> Result<Self> {
        Self::new(SparseVector::from_dense(p))
    }

    /// Normalizes sparse counts `(context, count)` sorted by context.
    pub fn from_counts(dim: usize, counts: &[(u32, u64)]) -> Result<Self> {
        let total: u64 = counts.iter().map(|&(_, n)| n).sum();
        if total == 0 {
            return Err(Error::EmptyInput("context counts"));
        }
        let (indices, values): (Vec<u32>, Vec<f64>) = counts
            .iter()
            .filter(|&&(_, n)| n > 0)
            .map(|&(c, n)| (c, n as f64 / total as f64))
            .unzip();
        Ok(Distribution(SparseVector::new(dim, indices, values)?))
    }

    pub fn as_sparse(&self) -> &SparseVector {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }
}

fn drop_zeros(p: SparseVector) -> SparseVector {
    if p.values().iter().all(|&v| v != 0.0) {
        return p;
    }
    let (i, v) = p.iter().filter(|&(_, v)| v != 0.0).unzip();
    SparseVector::new(p.dim(), i, v).expect("subset of valid indices")
}

/// `√P`: a unit vector under the L2 norm with strictly positive entries.
#[derive(Clone, Debug, PartialEq)]
pub struct SqrtDistribution(SparseVector);

impl SqrtDistribution {
    pub fn as_sparse(&self) -> &SparseVector {
        &self.0
    }

    pub fn dim(&self) -> usize {
        self.0.dim()
    }

    pub fn to_dense(&self) -> Vec<f64> {
        self.0.to_dense()
    }
}

/// Element-wise square root of a probability vector.
pub fn sqrt_transform(p: &Distribution) -> Result<SqrtDistribution> {
    Ok(SqrtDistribution(p.0.clone().map_values(libm::sqrt)))
}

/// Validating variant for raw probability vectors.
pub fn sqrt_transform_dense(p: &[f64]) -> Result<SqrtDistribution> {
    sqrt_transform(&Distribution::from_dense(p)?)
}

/// Hellinger distance `‖√P − √Q‖₂ / √2`, in `[0, 1]`.
pub fn hellinger_distance(p: &Distribution, q: &Distribution) -> Result<f64> {
    if p.dim() != q.dim() {
        return Err(Error::DimensionMismatch {
            expected: p.dim(),
            found: q.dim(),
        });
    }
    let d = sqrt_transform(p)?.0.distance(&sqrt_transform(q)?.0)?;
    Ok((d * core::f64::consts::FRAC_1_SQRT_2).min(1.0))
}

/// Counts context words around every occurrence of a token sequence.
///
/// For an occurrence spanning positions `a..=b`, the `window` tokens before
/// `a` and after `b` are contexts (truncated at document boundaries). For a
/// single in-vocabulary word this reproduces that word's
/// [`CoocMatrix`] row.
#[derive(Clone, Debug)]
pub struct PhraseContextCounter {
    phrase: Vec<String>,
    window: usize,
    n_contexts: usize,
    // (token, context id if the token is in D)
    history: VecDeque<(String, Option<u32>)>,
    pending_right: Vec<usize>,
    counts: HashMap<u32, u64>,
    occurrences: u64,
}

impl PhraseContextCounter {
    pub fn new<S: AsRef<str>>(phrase: &[S], window: usize, n_contexts: usize) -> Result<Self> {
        if phrase.is_empty() {
            return Err(Error::EmptyInput("phrase"));
        }
        if window < 1 {
            return Err(Error::invalid("window must be at least 1"));
        }
        Ok(PhraseContextCounter {
            phrase: phrase.iter().map(|s| String::from(s.as_ref())).collect(),
            window,
            n_contexts,
            history: VecDeque::new(),
            pending_right: Vec::new(),
            counts: HashMap::new(),
            occurrences: 0,
        })
    }

    pub fn push(&mut self, vocab: &Vocabulary, token: &str) {
        let ctx = vocab
            .id(token)
            .filter(|&id| (id as usize) < self.n_contexts);
        if let Some(c) = ctx {
            let hits = self.pending_right.len() as u64;
            if hits > 0 {
                *self.counts.entry(c).or_insert(0) += hits;
            }
        }
        self.pending_right.retain_mut(|r| {
            *r -= 1;
            *r > 0
        });

        self.history.push_back((String::from(token), ctx));
        let len = self.phrase.len();
        let n = self.history.len();
        if n >= len
            && self
                .history
                .range(n - len..)
                .zip(&self.phrase)
                .all(|((t, _), p)| t == p)
        {
            self.occurrences += 1;
            for (_, c) in self.history.range(..n - len) {
                if let Some(c) = c {
                    *self.counts.entry(*c).or_insert(0) += 1;
                }
            }
            self.pending_right.push(self.window);
        }
        if self.history.len() > len - 1 + self.window {
            self.history.pop_front();
        }
    }

    pub fn end_document(&mut self) {
        self.history.clear();
        self.pending_right.clear();
    }

    /// Number of phrase occurrences seen.
    pub fn occurrences(&self) -> u64 {
        self.occurrences
    }

    /// Context counts sorted by context id.
    pub fn counts(&self) -> Vec<(u32, u64)> {
        let mut v: Vec<(u32, u64)> = self.counts.iter().map(|(&c, &n)| (c, n)).collect();
        v.sort_unstable();
        v
    }
}
