//! Molecular graphs for pi-conjugated systems: SMILES parsing and writing,
//! canonical atom ordering, ring perception, structural constraints and
//! fingerprint-based diversity.
//!
//! Graphs are immutable after construction and fully validated on the way in,
//! so every `MolGraph` in circulation satisfies the valence table, aromatic
//! bond endpoints are aromatic, every aromatic atom sits on a cycle of
//! aromatic bonds, and the graph is connected.

pub mod canon;
pub mod constraint;
pub mod element;
pub mod error;
pub mod fingerprint;
pub mod graph;
pub mod parse;
pub mod rings;
pub mod write;

pub use constraint::{constraint_check, ConstraintConfig, Violation};
pub use element::{Element, ValenceTable};
pub use error::MolError;
pub use fingerprint::{fingerprint, internal_diversity, jaccard, Fingerprint};
pub use graph::{Atom, Bond, BondOrder, MolGraph};
pub use parse::{parse_smiles, parse_smiles_with_attachments};
pub use write::{canonical_smiles, write_smiles};

/// Test corpus bundled with the crate: one SMILES per line.
pub fn bundled_corpus() -> &'static str {
    include_str!("../data/corpus.smi")
}

/// Lines of the bundled corpus, empty lines skipped.
pub fn corpus_lines() -> impl Iterator<Item = &'static str> {
    bundled_corpus().lines().filter(|l| !l.trim().is_empty())
}
