//! Binary model checkpoint and its text sidecar.
//!
//! Layout: 8-byte magic, `u32` version, `u64` m, `u64` |D|, then the
//! encoder (m×|D|) and decoder (|D|×m) row-major, all little-endian, floats
//! as `f64`.

use std::fmt::Write as _;

use phrasevec_core::linalg::Matrix;
use phrasevec_core::model::Model;

use crate::error::{Error, Result};

pub const MAGIC: &[u8; 8] = b"PHRVECCK";
pub const VERSION: u32 = 1;
const HEADER_LEN: usize = 8 + 4 + 8 + 8;

pub fn write_checkpoint(model: &Model) -> Vec<u8> {
    let (m, d) = (model.dim(), model.input_dim());
    let mut out = Vec::with_capacity(HEADER_LEN + 16 * m * d);
    out.extend_from_slice(MAGIC);
    out.extend_from_slice(&VERSION.to_le_bytes());
    out.extend_from_slice(&(m as u64).to_le_bytes());
    out.extend_from_slice(&(d as u64).to_le_bytes());
    for x in model.encoder().as_slice().iter().chain(model.decoder().as_slice()) {
        out.extend_from_slice(&x.to_le_bytes());
    }
    out
}

pub fn read_checkpoint(bytes: &[u8]) -> Result<Model> {
    let bad = |msg: &str| Error::Invalid(format!("checkpoint: {msg}"));
    if bytes.len() < HEADER_LEN || &bytes[..8] != MAGIC {
        return Err(bad("not a checkpoint file"));
    }
    let version = u32::from_le_bytes(bytes[8..12].try_into().unwrap());
    if version != VERSION {
        return Err(bad(&format!("unsupported version {version}")));
    }
    let m = u64::from_le_bytes(bytes[12..20].try_into().unwrap());
    let d = u64::from_le_bytes(bytes[20..28].try_into().unwrap());
    let n = m
        .checked_mul(d)
        .and_then(|n| usize::try_from(n).ok())
        .ok_or_else(|| bad("dimensions overflow"))?;
    let body = &bytes[HEADER_LEN..];
    if Some(body.len()) != n.checked_mul(16) {
        return Err(bad(&format!("expected {} payload bytes, found {}", 16 * n, body.len())));
    }
    let floats: Vec<f64> = body
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    let (m, d) = (m as usize, d as usize);
    let (enc, dec) = floats.split_at(n);
    let model = Model::new(
        Matrix::from_vec(m, d, enc.to_vec())?,
        Matrix::from_vec(d, m, dec.to_vec())?,
    )?;
    if !model.is_finite() {
        return Err(bad("non-finite weight"));
    }
    Ok(model)
}

/// Sidecar naming the vocabulary a checkpoint was trained against.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckpointManifest {
    pub vocab: String,
    pub vocab_sha256: String,
    pub dim: usize,
    pub contexts: usize,
}

impl CheckpointManifest {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        writeln!(s, "vocab={}", self.vocab).unwrap();
        writeln!(s, "vocab_sha256={}", self.vocab_sha256).unwrap();
        writeln!(s, "dim={}", self.dim).unwrap();
        writeln!(s, "contexts={}", self.contexts).unwrap();
        s
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut vocab = None;
        let mut digest = None;
        let mut dim = None;
        let mut contexts = None;
        for (i, line) in text.lines().enumerate() {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::format(i + 1, "expected key=value"))?;
            match k {
                "vocab" => vocab = Some(v.to_string()),
                "vocab_sha256" => digest = Some(v.to_string()),
                "dim" => dim = Some(super::parse_int(v, i + 1, "dim")?),
                "contexts" => contexts = Some(super::parse_int(v, i + 1, "contexts")?),
                _ => return Err(Error::format(i + 1, format!("unknown key {k:?}"))),
            }
        }
        let missing = |k: &str| Error::Invalid(format!("checkpoint manifest lacks {k}"));
        Ok(CheckpointManifest {
            vocab: vocab.ok_or_else(|| missing("vocab"))?,
            vocab_sha256: digest.ok_or_else(|| missing("vocab_sha256"))?,
            dim: dim.ok_or_else(|| missing("dim"))?,
            contexts: contexts.ok_or_else(|| missing("contexts"))?,
        })
    }
}
