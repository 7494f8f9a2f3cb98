//! `#rows=<|W|> cols=<|D|> window=<w>` then `word_id context_id count`
//! per line, sorted by `(word_id, context_id)`.

use std::fmt::Write as _;
use std::io::BufRead;

use phrasevec_core::cooc::CoocMatrix;

use super::{header_fields, parse_int};
use crate::error::{Error, Result};

pub fn write_cooc(m: &CoocMatrix) -> String {
    let mut out = String::with_capacity(16 * m.nnz() + 64);
    writeln!(out, "#rows={} cols={} window={}", m.n_words(), m.n_contexts(), m.window()).unwrap();
    for (w, c, n) in m.triplets() {
        writeln!(out, "{w} {c} {n}").unwrap();
    }
    out
}

pub fn read_cooc(reader: impl BufRead) -> Result<CoocMatrix> {
    let mut lines = reader.lines();
    let header = match lines.next() {
        Some(l) => l.map_err(|e| Error::format(1, e.to_string()))?,
        None => return Err(Error::format(1, "empty co-occurrence file")),
    };
    let f = header_fields(&header, &["rows", "cols", "window"])?;
    let rows: usize = parse_int(f[0], 1, "row count")?;
    let cols: usize = parse_int(f[1], 1, "column count")?;
    let window: usize = parse_int(f[2], 1, "window")?;
    let mut triplets = Vec::new();
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let line = line.map_err(|e| Error::format(lineno, e.to_string()))?;
        let mut it = line.split_ascii_whitespace();
        let (Some(w), Some(c), Some(n), None) = (it.next(), it.next(), it.next(), it.next()) else {
            return Err(Error::format(lineno, "expected three fields"));
        };
        triplets.push((
            parse_int(w, lineno, "word id")?,
            parse_int(c, lineno, "context id")?,
            parse_int(n, lineno, "count")?,
        ));
    }
    Ok(CoocMatrix::from_triplets(rows, cols, window, triplets)?)
}
