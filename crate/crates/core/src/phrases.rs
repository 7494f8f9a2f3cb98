//! Phrase chunk ingestion, splitting and a naive n-gram extractor.
//!
//! The phrase list format is one phrase per line, space separated tokens,
//! with an optional trailing `<TAB>count` (default 1). Lines are tokenized
//! with the corpus rules before lookup.

use alloc::collections::VecDeque;
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt::Write as _;

use hashbrown::HashMap;
use rand::seq::SliceRandom;

use crate::corpus::{tokenize, Token, Vocabulary};
use crate::model::{Phrase, MAX_PHRASE_LEN};
use crate::{seeded_rng, Error, Result};

/// Deduplicated phrases, all with `count >= min_phrase_count`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PhraseSet {
    phrases: Vec<Phrase>,
    min_phrase_count: u64,
}

impl PhraseSet {
    /// Deduplicates (summing counts) and applies the count threshold.
    /// Order of first appearance is kept.
    pub fn new(phrases: Vec<Phrase>, min_phrase_count: u64) -> Self {
        let mut index: HashMap<Vec<u32>, usize> = HashMap::new();
        let mut merged: Vec<Phrase> = Vec::new();
        for p in phrases {
            match index.get(p.word_ids()) {
                Some(&i) => merged[i].add_count(p.count()),
                None => {
                    index.insert(p.word_ids().to_vec(), merged.len());
                    merged.push(p);
                }
            }
        }
        merged.retain(|p| p.count() >= min_phrase_count);
        PhraseSet {
            phrases: merged,
            min_phrase_count,
        }
    }

    pub fn phrases(&self) -> &[Phrase] {
        &self.phrases
    }

    pub fn len(&self) -> usize {
        self.phrases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phrases.is_empty()
    }

    pub fn min_phrase_count(&self) -> u64 {
        self.min_phrase_count
    }

    pub fn iter(&self) -> impl Iterator<Item = &Phrase> + '_ {
        self.phrases.iter()
    }

    /// Serializes in the phrase list format.
    pub fn to_text(&self, vocab: &Vocabulary) -> String {
        let mut out = String::new();
        for p in &self.phrases {
            for (i, &w) in p.word_ids().iter().enumerate() {
                if i > 0 {
                    out.push(' ');
                }
                out.push_str(vocab.word(w));
            }
            let _ = writeln!(out, "\t{}", p.count());
        }
        out
    }
}

/// Why a phrase line was dropped.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum DropReason {
    OutOfVocabulary(String),
    EmptyRow(String),
    TooLong(usize),
}

/// Lines dropped while loading, with 1-based line numbers.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct LoadReport {
    pub lines: usize,
    pub dropped: Vec<(usize, DropReason)>,
    pub below_threshold: usize,
}

fn parse_line(line: &str, line_no: usize) -> Result<(Vec<Token>, u64)> {
    let (text, count) = match line.rsplit_once('\t') {
        Some((text, count)) if !count.trim().is_empty() => {
            let n = count.trim().parse::<u64>().map_err(|_| Error::Parse {
                line: line_no,
                message: alloc::format!("invalid phrase count {:?}", count.trim()),
            })?;
            (text, n)
        }
        _ => (line, 1),
    };
    Ok((tokenize(text).collect(), count))
}

/// Parses a phrase list against a vocabulary.
///
/// `has_row(id)` tells whether a word has co-occurrence counts; phrases with
/// words lacking them, with out-of-vocabulary words, or longer than
/// [`MAX_PHRASE_LEN`] are dropped and reported.
pub fn load_phrases(
    text: &str,
    vocab: &Vocabulary,
    has_row: impl Fn(u32) -> bool,
    min_phrase_count: u64,
) -> Result<(PhraseSet, LoadReport)> {
    let mut report = LoadReport::default();
    let mut raw = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        if line.trim().is_empty() {
            continue;
        }
        report.lines += 1;
        let (tokens, count) = parse_line(line, line_no)?;
        if tokens.is_empty() {
            continue;
        }
        if tokens.len() > MAX_PHRASE_LEN {
            report.dropped.push((line_no, DropReason::TooLong(tokens.len())));
            continue;
        }
        let mut ids = Vec::with_capacity(tokens.len());
        let mut reason = None;
        for t in &tokens {
            match vocab.id(t.as_str()) {
                None => {
                    reason = Some(DropReason::OutOfVocabulary(t.as_str().into()));
                    break;
                }
                Some(id) if !has_row(id) => {
                    reason = Some(DropReason::EmptyRow(t.as_str().into()));
                    break;
                }
                Some(id) => ids.push(id),
            }
        }
        match reason {
            Some(r) => report.dropped.push((line_no, r)),
            None => raw.push(Phrase::new(ids, count)?),
        }
    }
    let before = PhraseSet::new(raw.clone(), 0).len();
    let set = PhraseSet::new(raw, min_phrase_count);
    report.below_threshold = before - set.len();
    if set.is_empty() {
        return Err(Error::EmptyInput("phrase set (no phrase survived filtering)"));
    }
    Ok((set, report))
}

/// Seeded shuffle, then `valid` and `test` are cut from the front; the rest
/// is the training set.
pub fn split_phrases(
    set: &PhraseSet,
    n_valid: usize,
    n_test: usize,
    seed: u64,
) -> Result<(PhraseSet, PhraseSet, PhraseSet)> {
    if n_valid + n_test >= set.len() {
        return Err(Error::invalid(alloc::format!(
            "cannot hold out {} of {} phrases",
            n_valid + n_test,
            set.len()
        )));
    }
    let mut order: Vec<usize> = (0..set.len()).collect();
    order.shuffle(&mut seeded_rng(seed));
    let take = |idx: &[usize]| PhraseSet {
        phrases: idx.iter().map(|&i| set.phrases[i].clone()).collect(),
        min_phrase_count: set.min_phrase_count,
    };
    let valid = take(&order[..n_valid]);
    let test = take(&order[n_valid..n_valid + n_test]);
    let train = take(&order[n_valid + n_test..]);
    Ok((train, valid, test))
}

/// Emits every contiguous in-vocabulary n-gram (`2 <= n <= max_len`) that
/// does not cross a punctuation token. Only meant for building test data.
#[derive(Clone, Debug)]
pub struct ChunkCollector {
    max_len: usize,
    run: VecDeque<u32>,
    counts: HashMap<Vec<u32>, u64>,
}

impl ChunkCollector {
    pub fn new(max_len: usize) -> Result<Self> {
        if !(2..=MAX_PHRASE_LEN).contains(&max_len) {
            return Err(Error::invalid("max_len must be in 2..=8"));
        }
        Ok(ChunkCollector {
            max_len,
            run: VecDeque::new(),
            counts: HashMap::new(),
        })
    }

    /// Pushes a token and returns the n-grams ending at it, shortest first.
    pub fn push(&mut self, vocab: &Vocabulary, token: &Token) -> Vec<Vec<u32>> {
        let id = match vocab.id(token.as_str()) {
            Some(id) if !token.is_punctuation() => id,
            _ => {
                self.run.clear();
                return Vec::new();
            }
        };
        self.run.push_back(id);
        if self.run.len() > self.max_len {
            self.run.pop_front();
        }
        let n = self.run.len();
        let grams: Vec<Vec<u32>> = (2..=n)
            .map(|len| self.run.range(n - len..).copied().collect())
            .collect();
        for g in &grams {
            *self.counts.entry(g.clone()).or_insert(0) += 1;
        }
        grams
    }

    pub fn end_document(&mut self) {
        self.run.clear();
    }

    /// Accumulated candidates with counts, sorted by id sequence.
    pub fn finish(self) -> Vec<(Vec<u32>, u64)> {
        let mut v: Vec<_> = self.counts.into_iter().collect();
        v.sort_unstable();
        v
    }
}

/// All candidate n-grams of one token sequence, in emission order.
pub fn naive_chunks(tokens: &[Token], vocab: &Vocabulary, max_len: usize) -> Result<Vec<Vec<u32>>> {
    let mut c = ChunkCollector::new(max_len)?;
    Ok(tokens.iter().flat_map(|t| c.push(vocab, t)).collect())
}
