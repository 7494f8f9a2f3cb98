//! Text and binary file formats, plus atomic output.

pub mod checkpoint;
pub mod cooc;
pub mod datasets;
pub mod embeddings;
pub mod log;
pub mod vocab;

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};

/// Writes `bytes` to a temporary file next to `path` and renames it into
/// place, so readers never see a partial file.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(p) if !p.as_os_str().is_empty() => p,
        _ => Path::new("."),
    };
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(|e| Error::io(dir, e))?;
    tmp.write_all(bytes).map_err(|e| Error::io(tmp.path(), e))?;
    tmp.as_file().sync_all().map_err(|e| Error::io(tmp.path(), e))?;
    tmp.persist(path).map_err(|e| Error::io(path, e.error))?;
    Ok(())
}

/// Shortest decimal that parses back to the same `f64` (at most 17
/// significant digits). Very large or small magnitudes use an exponent.
pub fn format_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-5..1e16).contains(&a) {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub(crate) fn parse_f64(s: &str, line: usize) -> Result<f64> {
    let v: f64 = s
        .parse()
        .map_err(|_| Error::format(line, format!("not a number: {s:?}")))?;
    if !v.is_finite() {
        return Err(Error::format(line, format!("non-finite value {s:?}")));
    }
    Ok(v)
}

pub(crate) fn parse_int<T: std::str::FromStr>(s: &str, line: usize, what: &str) -> Result<T> {
    s.parse()
        .map_err(|_| Error::format(line, format!("bad {what}: {s:?}")))
}

/// Parses `key=value` pairs from a header such as `#rows=3 cols=2`.
pub(crate) fn header_fields<'a>(line: &'a str, keys: &[&str]) -> Result<Vec<&'a str>> {
    let body = line
        .strip_prefix('#')
        .ok_or_else(|| Error::format(1, "missing '#' header line"))?;
    let mut out = Vec::with_capacity(keys.len());
    let mut fields = body.split_whitespace();
    for key in keys {
        let f = fields
            .next()
            .and_then(|f| f.strip_prefix(key))
            .and_then(|f| f.strip_prefix('='))
            .ok_or_else(|| Error::format(1, format!("header must contain {key}=")))?;
        out.push(f);
    }
    if fields.next().is_some() {
        return Err(Error::format(1, "unexpected header field"));
    }
    Ok(out)
}
