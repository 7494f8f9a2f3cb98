//! Joint learning of word vectors and their additive phrase composition.
//!
//! Words are represented by the square root of their context distribution
//! (a unit vector under the L2 norm), compressed by a linear autoencoder,
//! and simultaneously trained so that the mean of a phrase's word vectors
//! scores its own words above random negatives.
//!
//! This crate is `no_std` (it needs `alloc`). Everything touching files,
//! clocks, or the command line lives in the `phrasevec` crate.

#![no_std]
#![warn(missing_debug_implementations, rust_2018_idioms)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod cooc;
pub mod corpus;
pub mod eval;
pub mod linalg;
pub mod model;
pub mod phrases;
pub mod svd;
pub mod trainer;

mod error;

pub use error::Error;

/// Random number generator used everywhere randomness is needed.
///
/// ChaCha8 is stable across platforms and crate versions, which is what the
/// bit-exact reproducibility guarantees rely on.
pub type Rng = rand_chacha::ChaCha8Rng;

/// Builds the crate's generator from a seed.
pub fn seeded_rng(seed: u64) -> Rng {
    use rand::SeedableRng;
    Rng::seed_from_u64(seed)
}

pub type Result<T, E = Error> = core::result::Result<T, E>;
