//! Token grammar for constrained molecule generation.
//!
//! Molecules are written as token sequences that mirror a depth-first
//! SMILES walk. [`state::GenState`] tracks a partial construction and
//! reports which tokens may legally come next, so a sampler that respects
//! the mask only ever completes sequences that decode to valid molecules.

pub mod state;
pub mod token;
pub mod tokenize;
pub mod vocab;

pub use state::{Discipline, GenState};
pub use token::{AtomDesc, Token};
pub use tokenize::{detokenize, tokenize};
pub use vocab::{Vocab, FIXED_TOKENS, MAX_OPEN_ANCHORS, MAX_VOCAB};

use thiserror::Error;

#[derive(Debug, Error)]
pub enum GrammarError {
    #[error("unknown token text {0:?}")]
    UnknownToken(String),
    #[error("vocabulary needs {0} tokens, the mask limit is {max}", max = MAX_VOCAB)]
    VocabTooLarge(usize),
    #[error("token {token} is illegal at position {position}")]
    Illegal { position: usize, token: String },
    #[error("token sequence does not form a complete molecule")]
    Incomplete,
    #[error("molecule cannot be expressed as a token sequence: {0}")]
    Unrepresentable(String),
    #[error(transparent)]
    Mol(#[from] mol_core::error::MolError),
}
