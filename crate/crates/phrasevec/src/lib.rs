//! File formats, corpus streaming and the command-line front end for
//! `phrasevec-core`.

pub mod cli;
pub mod config;
pub mod corpus_io;
pub mod error;
pub mod formats;
pub mod manifest;
pub mod synth;

pub use error::{Error, Result};
