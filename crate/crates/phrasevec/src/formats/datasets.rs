//! Evaluation datasets and small auxiliary inputs.
//!
//! Words are normalized with the corpus tokenizer so they match vocabulary
//! entries.

use std::io::BufRead;

use phrasevec_core::corpus::{normalize_token, tokenize};
use phrasevec_core::eval::{AnalogyQuestion, SimilarityPair};

use super::{parse_f64, parse_int};
use crate::error::{Error, Result};

/// A dataset word as the corpus pipeline would have produced it: the single
/// non-punctuation token of `raw`, if there is one.
pub fn normalize_word(raw: &str) -> String {
    let mut toks = tokenize(raw).filter(|t| !t.is_punctuation());
    match (toks.next(), toks.next()) {
        (Some(t), None) => t.into_string(),
        _ => normalize_token(raw).map(|t| t.into_string()).unwrap_or_default(),
    }
}

fn content_lines(reader: impl BufRead) -> impl Iterator<Item = Result<(usize, String)>> {
    reader.lines().enumerate().filter_map(|(i, l)| match l {
        Err(e) => Some(Err(Error::format(i + 1, e.to_string()))),
        Ok(l) if l.trim().is_empty() || l.starts_with('#') => None,
        Ok(l) => Some(Ok((i + 1, l))),
    })
}

/// `word1 word2 score`, tab separated (or whitespace separated when a
/// line has no tab). A first line whose score
/// is not numeric is taken as a column header and skipped.
pub fn read_similarity(reader: impl BufRead) -> Result<Vec<SimilarityPair>> {
    let mut out = Vec::new();
    for (n, item) in content_lines(reader).enumerate() {
        let (lineno, line) = item?;
        let f: Vec<&str> = if line.contains('\t') {
            line.split('\t').map(str::trim).collect()
        } else {
            line.split_whitespace().collect()
        };
        if f.len() != 3 {
            return Err(Error::format(lineno, "expected word1 word2 score"));
        }
        let score = match parse_f64(f[2], lineno) {
            Ok(s) => s,
            Err(_) if n == 0 => continue,
            Err(e) => return Err(e),
        };
        out.push(SimilarityPair {
            word1: normalize_word(f[0]),
            word2: normalize_word(f[1]),
            human_score: score,
        });
    }
    Ok(out)
}

/// Four words per line; `: name` lines start a section.
pub fn read_analogy(reader: impl BufRead) -> Result<Vec<AnalogyQuestion>> {
    let mut section = String::from("default");
    let mut out = Vec::new();
    for item in content_lines(reader) {
        let (lineno, line) = item?;
        if let Some(name) = line.strip_prefix(':') {
            section = name.trim().to_string();
            continue;
        }
        let f: Vec<&str> = line.split_whitespace().collect();
        let [a, b, c, d] = f[..] else {
            return Err(Error::format(lineno, "expected four words"));
        };
        out.push(AnalogyQuestion {
            a: normalize_word(a),
            b: normalize_word(b),
            c: normalize_word(c),
            d: normalize_word(d),
            section: section.clone(),
        });
    }
    Ok(out)
}

/// Phrase list as token sequences; any trailing `<TAB>count` is dropped.
pub fn read_phrase_tokens(reader: impl BufRead) -> Result<Vec<Vec<String>>> {
    let mut out = Vec::new();
    for item in content_lines(reader) {
        let (_, line) = item?;
        let text = line.rsplit_once('\t').map_or(line.as_str(), |(t, _)| t);
        let toks: Vec<String> = tokenize(text).map(|t| t.into_string()).collect();
        if !toks.is_empty() {
            out.push(toks);
        }
    }
    Ok(out)
}

/// `context_word<TAB>count` lines, as produced around a phrase's occurrences.
pub fn read_word_counts(reader: impl BufRead) -> Result<Vec<(String, u64)>> {
    let mut out = Vec::new();
    for item in content_lines(reader) {
        let (lineno, line) = item?;
        let (w, c) = line
            .split_once('\t')
            .ok_or_else(|| Error::format(lineno, "expected word<TAB>count"))?;
        out.push((normalize_word(w), parse_int(c.trim(), lineno, "count")?));
    }
    Ok(out)
}
