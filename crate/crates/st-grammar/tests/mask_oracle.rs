//! Exhaustive soundness check on a small vocabulary.
//!
//! Enumerates every mask-respecting token sequence up to a budget and
//! verifies the two directions that make masked sampling trustworthy:
//! every token the mask admits really applies, and the finish token is
//! admitted exactly when the built structure validates as a molecule.

use std::collections::HashSet;

use mol_core::constraint::ConstraintConfig;
use mol_core::element::ValenceTable;
use mol_core::parse::parse_smiles;
use st_grammar::{GenState, Token, Vocab};

#[test]
fn mask_matches_decodability_exhaustively() {
    let seed_mols = [parse_smiles("O=C1CCC1").expect("seed molecule")];
    let vocab = Vocab::from_molecules(&seed_mols).expect("small vocabulary");
    let cfg = ConstraintConfig {
        max_ring_size: 5,
        max_atoms: 4,
        ..ConstraintConfig::default()
    };
    let table = ValenceTable::default();
    let eos_id = vocab.eos();

    let mut start = GenState::new(cfg, table);
    start
        .apply(Token::Bos)
        .expect("sequences start with the begin token");

    let budget = 13;
    let mut level = vec![start];
    let mut states_checked = 0usize;
    let mut finishes_checked = 0usize;
    for _ in 0..budget {
        let mut next = Vec::new();
        let mut seen = HashSet::new();
        for st in &level {
            states_checked += 1;
            let mask = st.legal_mask(&vocab);
            for id in 0..vocab.len() as u16 {
                if mask & (1 << id) == 0 {
                    continue;
                }
                let tok = vocab.token(id).expect("id in range");
                let mut child = st.clone();
                child
                    .apply(tok)
                    .unwrap_or_else(|e| panic!("mask admitted {tok} but apply failed: {e}"));
                if id == eos_id {
                    finishes_checked += 1;
                    child
                        .clone()
                        .into_graph()
                        .unwrap_or_else(|e| panic!("finished sequence is invalid: {e}"));
                    continue;
                }
                if seen.insert(format!("{child:?}")) {
                    next.push(child);
                }
            }
            // the converse: a decodable top-level state must be finishable
            if st.open_branches() == 0
                && !st.has_pending_bond()
                && st.open_anchors() == 0
                && st.atom_count() > 0
                && st.preview_graph().is_ok()
            {
                assert!(
                    mask & (1 << eos_id) != 0,
                    "valid structure cannot finish: {st:?}"
                );
            }
        }
        level = next;
    }
    assert!(states_checked > 2_000, "explored {states_checked} states");
    assert!(finishes_checked > 200, "finished {finishes_checked} times");
}
