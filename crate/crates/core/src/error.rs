//! Crate-wide error type.
//!
//! One variant deserves a note: [`Error::RepresentationViolation`] is not a
//! bug signal. It is raised by the validity checks at decrypt/decode entry
//! (an RNS residue `>= q_k`, a big coefficient `>= Q`) and the fault harness
//! maps it to the DETECTED outcome class — the analog of a library aborting
//! on corrupted internal state. Every other variant is a misuse of the API.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("operands belong to different prime chains")]
    ChainMismatch,

    #[error("operands are in different domains (coefficient vs NTT)")]
    DomainMismatch,

    #[error("representation violation: {0}")]
    RepresentationViolation(String),

    #[error("{q} is not NTT-friendly: q-1 not divisible by {two_n}")]
    NotNttFriendly { q: u64, two_n: u64 },

    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    #[error("{what} out of range: {value} not below {bound}")]
    AddressOutOfRange {
        what: &'static str,
        value: u64,
        bound: u64,
    },

    #[error("malformed image: {0}")]
    MalformedImage(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for the one error class the fault harness treats as an outcome
    /// (DETECTED) rather than a bug.
    pub fn is_detected(&self) -> bool {
        matches!(self, Error::RepresentationViolation(_))
    }
}
