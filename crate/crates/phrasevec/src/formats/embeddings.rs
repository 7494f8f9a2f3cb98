//! `<count> <dim>` then `word v1 … vm` per line.

use std::io::BufRead;

use phrasevec_core::eval::EmbeddingTable;

use super::{format_f64, parse_f64, parse_int};
use crate::error::{Error, Result};

pub fn write_embeddings(table: &EmbeddingTable) -> String {
    let mut out = format!("{} {}\n", table.len(), table.dim());
    for (i, w) in table.words().iter().enumerate() {
        out.push_str(w);
        for &x in table.vector(i as u32) {
            out.push(' ');
            out.push_str(&format_f64(x));
        }
        out.push('\n');
    }
    out
}

pub fn read_embeddings(reader: impl BufRead) -> Result<EmbeddingTable> {
    let mut lines = reader.lines();
    let header = match lines.next() {
        Some(l) => l.map_err(|e| Error::format(1, e.to_string()))?,
        None => return Err(Error::format(1, "empty embedding file")),
    };
    let mut h = header.split_ascii_whitespace();
    let (Some(n), Some(dim), None) = (h.next(), h.next(), h.next()) else {
        return Err(Error::format(1, "header must be '<count> <dim>'"));
    };
    let n: usize = parse_int(n, 1, "count")?;
    let dim: usize = parse_int(dim, 1, "dimension")?;
    let mut words = Vec::with_capacity(n);
    let mut data = Vec::with_capacity(n * dim);
    for (i, line) in lines.enumerate() {
        let lineno = i + 2;
        let line = line.map_err(|e| Error::format(lineno, e.to_string()))?;
        if line.trim().is_empty() {
            continue;
        }
        let mut it = line.split_ascii_whitespace();
        words.push(it.next().unwrap().to_string());
        let before = data.len();
        for f in it {
            data.push(parse_f64(f, lineno)?);
        }
        if data.len() - before != dim {
            return Err(Error::format(
                lineno,
                format!("expected {dim} values, found {}", data.len() - before),
            ));
        }
    }
    if words.len() != n {
        return Err(Error::format(1, format!("header says {n} vectors, file has {}", words.len())));
    }
    Ok(EmbeddingTable::new(words, dim, data)?)
}
