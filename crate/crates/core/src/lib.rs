//! Two-process randomness extraction over GF(2), together with a desk-scale
//! quantum analysis engine used to check extractor security bounds exactly on
//! small instances.
//!
//! The crate is organized bottom-up:
//!
//! - [`bitlinalg`]: packed GF(2) vectors and matrices, polynomials, and the
//!   matrix families that parameterize the multi-bit extractor.
//! - [`extractor`]: inner-product and DEOR extractors on blocks and streams.
//! - [`quantum`]: states, instruments, partial traces and distances.
//! - [`entropy`]: conditional Rényi entropies and the min-entropy SDP.
//! - [`verify`]: brute-force oracles and instance generators.
//! - [`dira`]: SV-source simulation and the amplification rate calculator.

pub mod bitlinalg;
pub mod dira;
pub mod entropy;
mod error;
pub mod extractor;
pub mod par;
pub mod quantum;
pub mod verify;

pub use error::{Error, Result};
