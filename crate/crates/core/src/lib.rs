//! Desk-scale CKKS encrypt/decrypt pipeline with a single-bit fault-injection
//! harness.
//!
//! The crate implements the same scheme twice:
//!
//! * a **textbook backend** — plaintexts and ciphertext halves are polynomials
//!   in `Z_Q[X]/(X^N+1)` with arbitrary-precision coefficients, multiplied by
//!   the schoolbook O(N²) rule ([`ring`]);
//! * an **RNS+NTT backend** — coefficients are split across a chain of
//!   word-sized primes ([`rns`]) and polynomials are multiplied pointwise in
//!   the NTT domain ([`ntt`]).
//!
//! Both backends draw their randomness from one shared, backend-agnostic
//! sampling path, so with equal seeds they produce *integer-identical*
//! results; the textbook backend doubles as the oracle for the optimized one.
//!
//! On top of the scheme ([`ckks`]) sits a fault harness ([`fault`]) that XORs
//! exactly one bit of one coefficient word at a chosen pipeline stage, re-runs
//! the pipeline under the same seed, and classifies the outcome as BENIGN,
//! SDC (silent data corruption), or DETECTED (caught by a representation
//! validity check). [`campaign`] orchestrates whole sweeps — bit position,
//! scale factor, backend, image round-trips — and emits deterministic CSV.
//!
//! Parameters are deliberately desk-scale (N up to a few thousand, three
//! 59-bit primes): large enough to show the optimization-sensitivity effects,
//! small enough that the exhaustive reference arithmetic stays testable.
//! Nothing here is hardened for production use.

pub mod campaign;
pub mod ckks;
pub mod error;
pub mod fault;
pub mod ntt;
pub mod pgm;
pub mod ring;
pub mod rns;
pub mod zq;

pub use error::{Error, Result};
