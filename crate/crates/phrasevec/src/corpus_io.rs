//! Streaming corpus input. Each file is one document; with no paths (or
//! `-`) standard input is read as a single document.

use std::fs::File;
use std::io::{self, BufRead, BufReader, Read};
use std::path::{Path, PathBuf};
use std::thread;

use phrasevec_core::cooc::CoocCounter;
use phrasevec_core::corpus::{tokenize_bytes, Token, VocabCounter, Vocabulary};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::manifest::InputDigest;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Input {
    Stdin,
    File(PathBuf),
}

impl Input {
    pub fn from_paths(paths: &[PathBuf]) -> Vec<Input> {
        if paths.is_empty() {
            return vec![Input::Stdin];
        }
        paths
            .iter()
            .map(|p| if p.as_os_str() == "-" { Input::Stdin } else { Input::File(p.clone()) })
            .collect()
    }

    pub fn label(&self) -> String {
        match self {
            Input::Stdin => "-".into(),
            Input::File(p) => p.display().to_string(),
        }
    }

    fn path(&self) -> &Path {
        match self {
            Input::Stdin => Path::new("-"),
            Input::File(p) => p,
        }
    }
}

/// Fails early if any input file is missing, before work starts.
pub fn check_inputs(inputs: &[Input]) -> Result<()> {
    for i in inputs {
        if let Input::File(p) = i {
            File::open(p).map_err(|e| Error::io(p, e))?;
        }
    }
    Ok(())
}

/// Calls `f` for every token of one document and returns the digest of
/// the bytes read.
pub fn read_document(input: &Input, mut f: impl FnMut(Token) -> Result<()>) -> Result<InputDigest> {
    let reader: Box<dyn Read> = match input {
        Input::Stdin => Box::new(io::stdin().lock()),
        Input::File(p) => Box::new(File::open(p).map_err(|e| Error::io(p, e))?),
    };
    let mut reader = BufReader::with_capacity(1 << 16, reader);
    let mut hasher = Sha256::new();
    let mut line = Vec::new();
    let mut offset = 0;
    loop {
        line.clear();
        let n = reader
            .read_until(b'\n', &mut line)
            .map_err(|e| Error::io(input.path(), e))?;
        if n == 0 {
            break;
        }
        hasher.update(&line);
        let tokens = tokenize_bytes(&line, offset)
            .map_err(|e| Error::Invalid(format!("{}: {e}", input.label())))?;
        for t in tokens {
            f(t)?;
        }
        offset += n;
    }
    Ok(InputDigest {
        path: input.label(),
        sha256: hex::encode(hasher.finalize()),
    })
}

/// Runs one worker per shard of contiguous inputs and returns the workers'
/// states in shard order, with every input's digest in input order.
fn sharded<S: Send>(
    inputs: &[Input],
    threads: usize,
    init: impl Fn() -> Result<S> + Sync,
    doc: impl Fn(&mut S, &Input) -> Result<InputDigest> + Sync,
) -> Result<(Vec<S>, Vec<InputDigest>)> {
    let threads = threads.clamp(1, inputs.len().max(1));
    let chunk = inputs.len().div_ceil(threads).max(1);
    let run = |part: &[Input]| -> Result<(S, Vec<InputDigest>)> {
        let mut state = init()?;
        let digests = part.iter().map(|i| doc(&mut state, i)).collect::<Result<_>>()?;
        Ok((state, digests))
    };
    let results: Vec<Result<(S, Vec<InputDigest>)>> = if threads == 1 {
        vec![run(inputs)]
    } else {
        thread::scope(|s| {
            let handles: Vec<_> = inputs.chunks(chunk).map(|part| s.spawn(|| run(part))).collect();
            handles
                .into_iter()
                .map(|h| h.join().expect("corpus worker panicked"))
                .collect()
        })
    };
    let mut states = Vec::new();
    let mut digests = Vec::new();
    for r in results {
        let (s, d) = r?;
        states.push(s);
        digests.extend(d);
    }
    Ok((states, digests))
}

/// Token counts over all inputs. The result does not depend on `threads`.
pub fn count_vocabulary(inputs: &[Input], threads: usize) -> Result<(VocabCounter, Vec<InputDigest>)> {
    let (states, digests) = sharded(
        inputs,
        threads,
        || Ok(VocabCounter::new()),
        |c, input| {
            read_document(input, |t| {
                c.add(t.as_str());
                Ok(())
            })
        },
    )?;
    let mut total = VocabCounter::new();
    for s in states {
        total.merge(s);
    }
    Ok((total, digests))
}

/// Co-occurrence counts over all inputs. The result does not depend on
/// `threads`.
pub fn count_cooc(
    inputs: &[Input],
    vocab: &Vocabulary,
    window: usize,
    threads: usize,
) -> Result<(CoocCounter, Vec<InputDigest>)> {
    let (states, digests) = sharded(
        inputs,
        threads,
        || Ok(CoocCounter::new(vocab, window)?),
        |c, input| {
            let d = read_document(input, |t| Ok(c.push_token(vocab, t.as_str())?))?;
            c.end_document();
            Ok(d)
        },
    )?;
    let mut it = states.into_iter();
    let mut total = it.next().expect("at least one shard");
    for s in it {
        total.merge(s)?;
    }
    Ok((total, digests))
}

pub fn resolve_threads(requested: usize) -> usize {
    if requested == 0 {
        thread::available_parallelism().map_or(1, |n| n.get())
    } else {
        requested
    }
}
