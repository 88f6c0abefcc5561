//! Message authentication over a wiretap channel.
//!
//! A sender and receiver share a key `(k0, k1)`. The sender hashes the message
//! with an almost-strongly-universal family keyed by `k0`, uses the tag to pick
//! a column of a type-class codebook and `k1` to pick a row, and sends a random
//! codeword of that cell over the main channel while an eavesdropper listens on
//! a noisier channel. The receiver recomputes the tag, decodes by conditional
//! typicality and accepts if the decoded codeword lies in its own cell.
//!
//! This crate is `no_std` (with `alloc`) and contains the whole model: finite
//! probability tools, method of types, GF(q) hashing, codebook construction,
//! the protocol, adversary games and exact leakage computations. The `std`
//! companion crate adds configuration files, parallel drivers and the CLI.
#![no_std]
#![forbid(unsafe_code)]
// negated float comparisons reject NaN on purpose
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod adversary;
pub mod asu;
pub mod codebook;
pub mod error;
pub mod field;
pub mod infotheory;
pub mod math;
pub mod protocol;
pub mod rng;
pub mod stats;
pub mod types;

pub use error::{Error, Result};

/// Crate version, recorded in run manifests.
pub const VERSION: &str = env!("CARGO_PKG_VERSION");
