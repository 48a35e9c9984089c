//! Numerical core for leakage-aware randomized benchmarking on qutrit
//! registers.
//!
//! Every physical qubit carries one extra (leakage) level, so an `N`-qubit
//! register lives in a `3^N`-dimensional space with a `2^N`-dimensional
//! computational subspace. The crate is `no_std` (it only needs `alloc`):
//!
//! - [`linalg`]: dense complex matrices, a general eigensolver, Haar sampling.
//! - [`clifford`]: qubit Clifford groups, qutrit embeddings and the
//!   phase-randomized extended set.
//! - [`channel`]: Kraus channels, transition matrices on diagonal states,
//!   twirls and sequence-extension maps.
//! - [`engine`]: sequence simulation, exact oracles and variance.
//! - [`fit`]: multi-exponential decay fitting and derived error estimates.
//!
//! Randomness is always passed in explicitly; nothing here touches global
//! state, so all values can be shared freely across threads.
#![no_std]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod channel;
pub mod clifford;
pub mod engine;
mod error;
pub mod fit;
pub mod linalg;
pub mod register;
pub mod tol;

pub use error::{Error, Result};
pub use num_complex::Complex64 as C64;

/// Deterministic random stream used throughout the crate.
pub type Rng = rand_chacha::ChaCha8Rng;

/// Creates the crate's standard random stream from a 64-bit seed.
pub fn rng_from_seed(seed: u64) -> Rng {
    use rand::SeedableRng;
    rand_chacha::ChaCha8Rng::seed_from_u64(seed)
}
