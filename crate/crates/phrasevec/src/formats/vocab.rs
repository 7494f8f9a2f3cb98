//! `#words=<|W|> context=<|D|>` then `word<TAB>count` per line, in id order.

use std::fmt::Write as _;
use std::io::BufRead;

use phrasevec_core::corpus::Vocabulary;

use super::{header_fields, parse_int};
use crate::error::{Error, Result};

pub fn write_vocab(vocab: &Vocabulary) -> String {
    let mut out = format!("#words={} context={}\n", vocab.len(), vocab.context_size());
    for (w, c) in vocab.iter() {
        writeln!(out, "{w}\t{c}").unwrap();
    }
    out
}

pub fn read_vocab(reader: impl BufRead) -> Result<Vocabulary> {
    let mut lines = reader.lines();
    let header = match lines.next() {
        Some(l) => l.map_err(|e| Error::format(1, e.to_string()))?,
        None => return Err(Error::format(1, "empty vocabulary file")),
    };
    let f = header_fields(&header, &["words", "context"])?;
    let n: usize = parse_int(f[0], 1, "word count")?;
    let context: usize = parse_int(f[1], 1, "context size")?;
    let mut entries = Vec::with_capacity(n);
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let line = line.map_err(|e| Error::format(lineno, e.to_string()))?;
        let (word, count) = line
            .split_once('\t')
            .ok_or_else(|| Error::format(lineno, "expected word<TAB>count"))?;
        entries.push((word.to_string(), parse_int(count, lineno, "count")?));
    }
    if entries.len() != n {
        return Err(Error::format(
            1,
            format!("header says {n} words, file has {}", entries.len()),
        ));
    }
    if n == 0 {
        return Err(Error::format(1, "vocabulary has no words"));
    }
    let vocab = Vocabulary::from_entries(entries, context)?;
    if vocab.context_size() != context {
        return Err(Error::format(1, "context size exceeds word count"));
    }
    Ok(vocab)
}
