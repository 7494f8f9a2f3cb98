//! Token normalization, tokenization and vocabulary construction.
//!
//! Normalization lowercases first and then replaces every maximal run of
//! numeric characters with the reserved sentinel [`NUMBER`]. The sentinel is
//! kept uppercase so it can never collide with the ordinary word "number".
//!
//! The tokenizer splits on Unicode whitespace and peels leading and trailing
//! punctuation off each unit, one token per punctuation character. Anything
//! that is neither alphanumeric nor whitespace counts as punctuation.
//! Punctuation inside a unit (`don't`, `u.s`) stays attached.

use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use hashbrown::HashMap;

use crate::{Error, Result};

/// Replacement for digit runs.
pub const NUMBER: &str = "NUMBER";

/// A normalized token: lowercase, with digit runs replaced by [`NUMBER`].
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Token(String);

impl Token {
    pub fn as_str(&self) -> &str {
        &self.0
    }

    pub fn into_string(self) -> String {
        self.0
    }

    /// True for tokens made only of punctuation characters.
    pub fn is_punctuation(&self) -> bool {
        self.0.chars().all(is_punctuation)
    }
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for Token {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

fn is_punctuation(c: char) -> bool {
    !c.is_alphanumeric() && !c.is_whitespace()
}

/// Lowercases `raw` and collapses each digit run into [`NUMBER`].
///
/// Returns `None` only for empty input.
pub fn normalize_token(raw: &str) -> Option<Token> {
    if raw.is_empty() {
        return None;
    }
    let lower = raw.to_lowercase();
    let mut out = String::with_capacity(lower.len());
    let mut in_digits = false;
    for c in lower.chars() {
        if c.is_numeric() {
            if !in_digits {
                out.push_str(NUMBER);
                in_digits = true;
            }
        } else {
            in_digits = false;
            out.push(c);
        }
    }
    Some(Token(out))
}

fn split_unit(unit: &str) -> impl Iterator<Item = Token> + '_ {
    let (lead, core, trail) = match unit.find(|c: char| !is_punctuation(c)) {
        None => (unit, "", ""),
        Some(start) => {
            let (last, c) = unit
                .char_indices()
                .rev()
                .find(|&(_, c)| !is_punctuation(c))
                .expect("a non-punctuation char exists");
            let end = last + c.len_utf8();
            (&unit[..start], &unit[start..end], &unit[end..])
        }
    };
    let punct = |c: char| Token(c.to_string());
    lead.chars()
        .map(punct)
        .chain(normalize_token(core))
        .chain(trail.chars().map(punct))
}

/// Tokenizes UTF-8 text. Deterministic and allocation-light: tokens are
/// produced lazily.
pub fn tokenize(text: &str) -> impl Iterator<Item = Token> + '_ {
    text.split_whitespace().flat_map(split_unit)
}

/// Tokenizes raw bytes, failing on invalid UTF-8.
///
/// `base_offset` is added to the reported error offset so callers streaming a
/// file chunk by chunk can report positions relative to the whole file.
pub fn tokenize_bytes(bytes: &[u8], base_offset: usize) -> Result<Vec<Token>> {
    let text = core::str::from_utf8(bytes).map_err(|e| Error::InvalidUtf8 {
        offset: base_offset + e.valid_up_to(),
    })?;
    Ok(tokenize(text).collect())
}

/// Word list with counts, ordered by descending count (ties broken
/// lexicographically). The first `context_size` entries form the context
/// dictionary.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Vocabulary {
    words: Vec<String>,
    counts: Vec<u64>,
    index: HashMap<String, u32>,
    context_size: usize,
}

impl Vocabulary {
    /// Rebuilds a vocabulary from entries already in id order.
    ///
    /// Checks the ordering invariant and uniqueness. `context_size` is
    /// clipped to the number of entries.
    pub fn from_entries(entries: Vec<(String, u64)>, context_size: usize) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::EmptyCorpus);
        }
        if entries.len() > u32::MAX as usize {
            return Err(Error::invalid("vocabulary larger than 2^32 entries"));
        }
        for (i, pair) in entries.windows(2).enumerate() {
            let (ref a, ca) = pair[0];
            let (ref b, cb) = pair[1];
            if ca < cb || (ca == cb && a >= b) {
                return Err(Error::Parse {
                    line: i + 2,
                    message: alloc::format!("entries out of order: {a:?} ({ca}) before {b:?} ({cb})"),
                });
            }
        }
        let mut index = HashMap::with_capacity(entries.len());
        let mut words = Vec::with_capacity(entries.len());
        let mut counts = Vec::with_capacity(entries.len());
        for (id, (word, count)) in entries.into_iter().enumerate() {
            index.insert(word.clone(), id as u32);
            words.push(word);
            counts.push(count);
        }
        let context_size = context_size.min(words.len());
        Ok(Vocabulary {
            words,
            counts,
            index,
            context_size,
        })
    }

    pub fn len(&self) -> usize {
        self.words.len()
    }

    pub fn is_empty(&self) -> bool {
        self.words.is_empty()
    }

    /// Size of the context dictionary |D|.
    pub fn context_size(&self) -> usize {
        self.context_size
    }

    pub fn id(&self, word: &str) -> Option<u32> {
        self.index.get(word).copied()
    }

    pub fn word(&self, id: u32) -> &str {
        &self.words[id as usize]
    }

    pub fn count(&self, id: u32) -> u64 {
        self.counts[id as usize]
    }

    /// Column index of `id` in the context dictionary, if it is a context word.
    pub fn context_id(&self, id: u32) -> Option<u32> {
        ((id as usize) < self.context_size).then_some(id)
    }

    pub fn words(&self) -> &[String] {
        &self.words
    }

    pub fn iter(&self) -> impl Iterator<Item = (&str, u64)> + '_ {
        self.words
            .iter()
            .map(String::as_str)
            .zip(self.counts.iter().copied())
    }

    pub fn total_count(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Streaming token counter. Counters built over disjoint shards can be
/// merged; the result does not depend on merge order.
#[derive(Clone, Debug, Default)]
pub struct VocabCounter {
    counts: HashMap<String, u64>,
    total: u64,
}

impl VocabCounter {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, token: &str) {
        self.total += 1;
        if let Some(c) = self.counts.get_mut(token) {
            *c += 1;
        } else {
            self.counts.insert(token.to_string(), 1);
        }
    }

    pub fn extend<I, T>(&mut self, tokens: I)
    where
        I: IntoIterator<Item = T>,
        T: AsRef<str>,
    {
        for t in tokens {
            self.add(t.as_ref());
        }
    }

    pub fn merge(&mut self, other: VocabCounter) {
        self.total += other.total;
        for (word, n) in other.counts {
            *self.counts.entry(word).or_insert(0) += n;
        }
    }

    /// Number of tokens seen.
    pub fn total(&self) -> u64 {
        self.total
    }

    /// Number of distinct tokens seen.
    pub fn distinct(&self) -> usize {
        self.counts.len()
    }

    /// Applies the `min_count` filter and orders the survivors.
    pub fn finish(self, min_count: u64, context_size: usize) -> Result<Vocabulary> {
        if min_count < 1 {
            return Err(Error::invalid("min_count must be at least 1"));
        }
        if context_size < 1 {
            return Err(Error::invalid("context_size must be at least 1"));
        }
        if self.total == 0 {
            return Err(Error::EmptyCorpus);
        }
        let mut entries: Vec<(String, u64)> = self
            .counts
            .into_iter()
            .filter(|&(_, n)| n >= min_count)
            .collect();
        if entries.is_empty() {
            return Err(Error::invalid(alloc::format!(
                "no word occurs at least {min_count} times"
            )));
        }
        entries.sort_unstable_by(|(wa, ca), (wb, cb)| cb.cmp(ca).then_with(|| wa.cmp(wb)));
        Vocabulary::from_entries(entries, context_size)
    }
}

/// Counts a token stream and builds the vocabulary in one go.
pub fn build_vocabulary<I, T>(tokens: I, min_count: u64, context_size: usize) -> Result<Vocabulary>
where
    I: IntoIterator<Item = T>,
    T: AsRef<str>,
{
    let mut counter = VocabCounter::new();
    counter.extend(tokens);
    counter.finish(min_count, context_size)
}
