//! Evaluation: word similarity, word analogy, phrase word-retrieval and
//! nearest-neighbour queries.
//!
//! All tasks skip items with out-of-vocabulary words and report how many
//! were skipped. Ties in any ranking go to the lower word id.

use alloc::collections::BTreeMap;
use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;

use hashbrown::HashMap;

use crate::corpus::Vocabulary;
use crate::linalg::{cosine, dot, norm};
use crate::model::{compose_phrase, infer_from_counts, Model};
use crate::{Error, Result};

/// Word vectors, one row per word.
#[derive(Clone, Debug, PartialEq)]
pub struct EmbeddingTable {
    words: Vec<String>,
    index: HashMap<String, u32>,
    dim: usize,
    data: Vec<f64>,
}

impl EmbeddingTable {
    pub fn new(words: Vec<String>, dim: usize, data: Vec<f64>) -> Result<Self> {
        if dim == 0 {
            return Err(Error::invalid("embedding dimension must be positive"));
        }
        if data.len() != words.len() * dim {
            return Err(Error::DimensionMismatch {
                expected: words.len() * dim,
                found: data.len(),
            });
        }
        if data.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "embedding value" });
        }
        let mut index = HashMap::with_capacity(words.len());
        for (i, w) in words.iter().enumerate() {
            if index.insert(w.clone(), i as u32).is_some() {
                return Err(Error::invalid(alloc::format!("duplicate word {w:?}")));
            }
        }
        Ok(EmbeddingTable {
            words,
            index,
            dim,
            data,
        })
    }

    /// Table from `(word id, vector)` pairs, e.g. trained or SVD embeddings.
    pub fn from_ids(vocab: &Vocabulary, dim: usize, rows: &[(u32, Vec<f64>)]) -> Result<Self> {
        let words = rows.iter().map(|(w, _)| String::from(vocab.word(*w))).collect();
        let mut data = Vec::with_capacity(rows.len() * dim);
        for (_, v) in rows {
            if v.len() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: v.len(),
                });
            }
            data.extend_from_slice(v);
        }
        Self::new(words, dim, data)
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn word(&self, id: u32) -> &str {
        &self.words[id as usize]
    }

    pub fn id(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }

    pub fn vector(&self, id: u32) -> &[f64] {
        let i = id as usize * self.dim;
        &self.data[i..i + self.dim]
    }

    pub fn get(&self, word: &str) -> Option<&[f64]> {
        self.id(word).map(|i| self.vector(i))
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    /// Copy with every non-zero row scaled to unit length.
    pub fn normalized(&self) -> EmbeddingTable {
        let mut out = self.clone();
        for row in out.data.chunks_mut(self.dim) {
            let n = norm(row);
            if n > 0.0 {
                row.iter_mut().for_each(|x| *x /= n);
            }
        }
        out
    }

    fn ids_of<S: AsRef<str>>(&self, words: &[S]) -> Option<Vec<u32>> {
        words.iter().map(|w| self.id(w.as_ref())).collect()
    }

    /// Mean of the words' vectors; `None` if a word is missing.
    pub fn compose<S: AsRef<str>>(&self, words: &[S]) -> Result<Option<Vec<f64>>> {
        match self.ids_of(words) {
            None => Ok(None),
            Some(ids) => {
                let vs: Vec<&[f64]> = ids.iter().map(|&i| self.vector(i)).collect();
                compose_phrase(&vs).map(Some)
            }
        }
    }
}

fn average_ranks(xs: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..xs.len()).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut ranks = vec![0.0; xs.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && xs[order[j + 1]] == xs[order[i]] {
            j += 1;
        }
        // positions i..=j share the mean of ranks i+1..=j+1
        let r = (i + j) as f64 / 2.0 + 1.0;
        for &k in &order[i..=j] {
            ranks[k] = r;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(xs: &[f64], ys: &[f64]) -> Result<f64> {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (x, y) in xs.iter().zip(ys) {
        let (dx, dy) = (x - mx, y - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::invalid("rank correlation undefined for a constant list"));
    }
    Ok((sxy / libm::sqrt(sxx * syy)).clamp(-1.0, 1.0))
}

/// Spearman's rho: Pearson correlation of average ranks.
pub fn spearman(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() {
        return Err(Error::DimensionMismatch {
            expected: xs.len(),
            found: ys.len(),
        });
    }
    if xs.len() < 2 {
        return Err(Error::invalid("spearman needs at least two observations"));
    }
    pearson(&average_ranks(xs), &average_ranks(ys))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityPair {
    pub word1: String,
    pub word2: String,
    pub human_score: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimilarityResult {
    pub rho: f64,
    pub covered: usize,
    pub total: usize,
}

impl SimilarityResult {
    pub fn coverage(&self) -> f64 {
        self.covered as f64 / self.total as f64
    }
}

/// Spearman correlation between human scores and vector cosines.
pub fn eval_similarity(emb: &EmbeddingTable, pairs: &[SimilarityPair]) -> Result<SimilarityResult> {
    if pairs.is_empty() {
        return Err(Error::EmptyInput("similarity dataset"));
    }
    let mut human = Vec::new();
    let mut model = Vec::new();
    for p in pairs {
        if let (Some(a), Some(b)) = (emb.get(&p.word1), emb.get(&p.word2)) {
            human.push(p.human_score);
            model.push(cosine(a, b));
        }
    }
    if human.is_empty() {
        return Err(Error::NoCoverage);
    }
    Ok(SimilarityResult {
        rho: spearman(&model, &human)?,
        covered: human.len(),
        total: pairs.len(),
    })
}

/// `a : b :: c : d`
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnalogyQuestion {
    pub a: String,
    pub b: String,
    pub c: String,
    pub d: String,
    pub section: String,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct AnalogyTally {
    pub correct: usize,
    pub answered: usize,
    pub skipped: usize,
}

impl AnalogyTally {
    pub fn accuracy(&self) -> f64 {
        if self.answered == 0 {
            0.0
        } else {
            self.correct as f64 / self.answered as f64
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AnalogyResult {
    pub overall: AnalogyTally,
    /// Per section, in order of first appearance.
    pub sections: Vec<(String, AnalogyTally)>,
}

/// Answers `b − a + c` among unit-normalized vectors, excluding the three
/// query words. Returns the predicted word id.
pub fn answer_analogy(normalized: &EmbeddingTable, a: u32, b: u32, c: u32) -> Option<u32> {
    let (va, vb, vc) = (normalized.vector(a), normalized.vector(b), normalized.vector(c));
    let target: Vec<f64> = (0..normalized.dim()).map(|k| vb[k] - va[k] + vc[k]).collect();
    let mut best: Option<(u32, f64)> = None;
    for w in 0..normalized.len() as u32 {
        if w == a || w == b || w == c {
            continue;
        }
        let s = dot(normalized.vector(w), &target);
        if best.is_none_or(|(_, bs)| s > bs) {
            best = Some((w, s));
        }
    }
    best.map(|(w, _)| w)
}

pub fn eval_analogy(emb: &EmbeddingTable, questions: &[AnalogyQuestion]) -> Result<AnalogyResult> {
    if questions.is_empty() {
        return Err(Error::EmptyInput("analogy dataset"));
    }
    let unit = emb.normalized();
    let mut overall = AnalogyTally::default();
    let mut sections: Vec<(String, AnalogyTally)> = Vec::new();
    for q in questions {
        let idx = match sections.iter().position(|(s, _)| *s == q.section) {
            Some(i) => i,
            None => {
                sections.push((q.section.clone(), AnalogyTally::default()));
                sections.len() - 1
            }
        };
        let tally = &mut sections[idx].1;
        let ids = emb.ids_of(&[&q.a, &q.b, &q.c, &q.d]);
        let Some(ids) = ids else {
            overall.skipped += 1;
            tally.skipped += 1;
            continue;
        };
        let hit = answer_analogy(&unit, ids[0], ids[1], ids[2]) == Some(ids[3]);
        for t in [&mut overall, tally] {
            t.answered += 1;
            t.correct += hit as usize;
        }
    }
    Ok(AnalogyResult { overall, sections })
}

/// Rank (0-based) of `target` when all words are ordered by descending
/// score, ties to the lower id.
fn rank_of(scores: &[f64], target: usize) -> usize {
    let s = scores[target];
    scores
        .iter()
        .enumerate()
        .filter(|&(i, &x)| x > s || (x == s && i < target))
        .count()
}

#[derive(Clone, Debug, PartialEq)]
pub struct RetrievalResult {
    pub ks: Vec<usize>,
    /// Mean Recall@K for each entry of `ks`.
    pub recall: Vec<f64>,
    /// Phrase length → (number of phrases, mean Recall@K per `ks`).
    pub by_length: BTreeMap<usize, (usize, Vec<f64>)>,
    pub evaluated: usize,
    pub skipped: usize,
}

/// Per-phrase recall for each `K`: the fraction of the phrase's distinct
/// words among the top `K·T` words by dot product with the phrase mean.
pub fn phrase_recall(emb: &EmbeddingTable, ids: &[u32], ks: &[usize]) -> Result<Vec<f64>> {
    let vs: Vec<&[f64]> = ids.iter().map(|&i| emb.vector(i)).collect();
    let xs = compose_phrase(&vs)?;
    let scores: Vec<f64> = (0..emb.len() as u32).map(|w| dot(&xs, emb.vector(w))).collect();
    let mut unique: Vec<u32> = ids.to_vec();
    unique.sort_unstable();
    unique.dedup();
    let ranks: Vec<usize> = unique.iter().map(|&w| rank_of(&scores, w as usize)).collect();
    let t = ids.len();
    Ok(ks
        .iter()
        .map(|&k| {
            let pool = k * t;
            ranks.iter().filter(|&&r| r < pool).count() as f64 / unique.len() as f64
        })
        .collect())
}

pub fn eval_phrase_retrieval<S: AsRef<str>>(
    emb: &EmbeddingTable,
    phrases: &[Vec<S>],
    ks: &[usize],
) -> Result<RetrievalResult> {
    if ks.is_empty() || ks.contains(&0) {
        return Err(Error::invalid("K values must be positive"));
    }
    let mut sums = vec![0.0; ks.len()];
    let mut by_length: BTreeMap<usize, (usize, Vec<f64>)> = BTreeMap::new();
    let (mut evaluated, mut skipped) = (0, 0);
    for p in phrases {
        let Some(ids) = emb.ids_of(p).filter(|ids| !ids.is_empty()) else {
            skipped += 1;
            continue;
        };
        let r = phrase_recall(emb, &ids, ks)?;
        let entry = by_length
            .entry(ids.len())
            .or_insert_with(|| (0, vec![0.0; ks.len()]));
        entry.0 += 1;
        for i in 0..ks.len() {
            sums[i] += r[i];
            entry.1[i] += r[i];
        }
        evaluated += 1;
    }
    if evaluated == 0 {
        return Err(Error::NoCoverage);
    }
    for (n, v) in by_length.values_mut() {
        v.iter_mut().for_each(|x| *x /= *n as f64);
    }
    Ok(RetrievalResult {
        ks: ks.to_vec(),
        recall: sums.iter().map(|s| s / evaluated as f64).collect(),
        by_length,
        evaluated,
        skipped,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum Metric {
    Dot,
    #[default]
    Cosine,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Neighbor {
    pub id: u32,
    pub score: f64,
}

fn top_k(scores: Vec<f64>, k: usize) -> Vec<Neighbor> {
    let mut all: Vec<Neighbor> = scores
        .into_iter()
        .enumerate()
        .map(|(i, score)| Neighbor { id: i as u32, score })
        .collect();
    all.sort_by(|a, b| b.score.total_cmp(&a.score).then(a.id.cmp(&b.id)));
    all.truncate(k);
    all
}

/// The `k` best words for a query vector.
pub fn nearest_words(emb: &EmbeddingTable, query: &[f64], k: usize, metric: Metric) -> Result<Vec<Neighbor>> {
    if query.len() != emb.dim() {
        return Err(Error::DimensionMismatch {
            expected: emb.dim(),
            found: query.len(),
        });
    }
    let scores = (0..emb.len() as u32)
        .map(|w| match metric {
            Metric::Dot => dot(query, emb.vector(w)),
            Metric::Cosine => cosine(query, emb.vector(w)),
        })
        .collect();
    Ok(top_k(scores, k))
}

/// A collection of phrases represented by averaging their word vectors.
#[derive(Clone, Debug, PartialEq)]
pub struct PhraseCollection {
    pub phrases: Vec<Vec<String>>,
    pub vectors: Vec<Vec<f64>>,
    pub skipped: usize,
}

impl PhraseCollection {
    /// Phrases with out-of-vocabulary words are skipped.
    pub fn new<S: AsRef<str>>(emb: &EmbeddingTable, phrases: &[Vec<S>]) -> Result<Self> {
        let mut out = PhraseCollection {
            phrases: Vec::new(),
            vectors: Vec::new(),
            skipped: 0,
        };
        for p in phrases {
            match (!p.is_empty()).then(|| emb.compose(p)).transpose()?.flatten() {
                Some(v) => {
                    out.phrases.push(p.iter().map(|s| String::from(s.as_ref())).collect());
                    out.vectors.push(v);
                }
                None => out.skipped += 1,
            }
        }
        Ok(out)
    }

    pub fn len(&self) -> usize {
        self.phrases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phrases.is_empty()
    }
}

/// How to represent the query phrase.
#[derive(Clone, Copy, Debug)]
pub enum PhraseQuery<'a> {
    /// Mean of the query's word vectors.
    AverageWords(&'a [String]),
    /// Encode the context counts collected around the query's occurrences.
    EncodeCounts {
        model: &'a Model,
        counts: &'a [(u32, u64)],
    },
}

impl PhraseQuery<'_> {
    pub fn vector(&self, emb: &EmbeddingTable) -> Result<Vec<f64>> {
        match *self {
            PhraseQuery::AverageWords(words) => emb
                .compose(words)?
                .ok_or(Error::invalid("query phrase has out-of-vocabulary words")),
            PhraseQuery::EncodeCounts { model, counts } => {
                if counts.iter().all(|&(_, n)| n == 0) {
                    return Err(Error::ZeroOccurrences);
                }
                infer_from_counts(model, counts)
            }
        }
    }
}

/// The `k` collection phrases closest (cosine) to the query; ids index the
/// collection.
pub fn nearest_phrases(
    emb: &EmbeddingTable,
    collection: &PhraseCollection,
    query: PhraseQuery<'_>,
    k: usize,
) -> Result<Vec<Neighbor>> {
    if k == 0 {
        return Ok(Vec::new());
    }
    let q = query.vector(emb)?;
    if q.len() != emb.dim() {
        return Err(Error::DimensionMismatch {
            expected: emb.dim(),
            found: q.len(),
        });
    }
    let scores = collection.vectors.iter().map(|v| cosine(&q, v)).collect();
    Ok(top_k(scores, k))
}
