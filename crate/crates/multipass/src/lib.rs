//! Multipass (k-pass pushdown) automata.
//!
//! A multipass automaton reads its input word, followed by an end-marker, a
//! fixed number of times; the head resets and the stack empties between
//! passes. The deterministic machines recognize exactly the Boolean closure
//! of the deterministic context-free languages, and the nondeterministic
//! ones the finite intersections of context-free languages. This crate
//! provides the machine model, the closure constructions (complement, union,
//! intersection, profile decomposition), conversions to and from pushdown
//! automata, transducer-based closures (inverse gsm images, interleaved
//! products, left quotients), word-problem builders for several group
//! families, and independent brute-force oracles used to verify all of it.

pub mod analysis;
pub mod closures;
pub mod format;
pub mod groups;
pub mod gsm;
pub mod machine;
pub mod oracles;
pub mod pda;
pub mod verify;
pub mod words;

use thiserror::Error;

/// Errors raised by constructions and parsers. Verdicts of a run (including
/// budget exhaustion) are data, not errors.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid machine: {0}")]
    InvalidMachine(String),
    #[error("precondition failed: {0}")]
    Precondition(String),
    #[error("alphabet mismatch: {0}")]
    AlphabetMismatch(String),
    #[error("mode mismatch: {0}")]
    ModeMismatch(String),
    #[error("invalid group spec: {0}")]
    InvalidSpec(String),
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
