//! Every reference molecule must tokenize, replay under the legality mask
//! with each actual token unmasked at its step, and decode back to the same
//! molecule.

use mol_core::constraint::ConstraintConfig;
use mol_core::element::ValenceTable;
use mol_core::graph::MolGraph;
use mol_core::parse::parse_smiles;
use mol_core::write::canonical_smiles;
use st_grammar::{detokenize, tokenize, Discipline, GenState, Vocab, MAX_VOCAB};

fn corpus() -> Vec<MolGraph> {
    mol_core::corpus_lines()
        .map(|line| parse_smiles(line).expect("corpus parses"))
        .collect()
}

/// Reference molecules include ring systems beyond the generation default,
/// so replay uses a wider structural window.
fn wide_config() -> ConstraintConfig {
    ConstraintConfig {
        max_ring_size: 12,
        max_atoms: 120,
        ..ConstraintConfig::default()
    }
}

#[test]
fn vocabulary_fits_the_mask_width() {
    let mols = corpus();
    let vocab = Vocab::from_molecules(&mols).expect("vocabulary builds");
    assert!(vocab.len() <= MAX_VOCAB, "vocab size {}", vocab.len());
}

/// Replay under the mask with sampling caps lifted: the caps tune random
/// rollouts and reference molecules legitimately exceed them.
#[test]
fn corpus_replays_under_the_mask() {
    let mols = corpus();
    let vocab = Vocab::from_molecules(&mols).expect("vocabulary builds");
    let cfg = wide_config();
    let table = ValenceTable::default();
    for mol in &mols {
        let smiles = canonical_smiles(mol);
        let tokens = tokenize(mol).expect("tokenizes");
        let mut st = GenState::with_discipline(cfg.clone(), table.clone(), Discipline::unbounded());
        for (i, &t) in tokens.iter().enumerate() {
            let id = vocab.id(&t).unwrap_or_else(|| panic!("{t} in vocabulary"));
            let mask = st.legal_mask(&vocab);
            assert!(
                mask & (1 << id) != 0,
                "step {i}: token {t} masked while replaying {smiles}"
            );
            st.apply(t)
                .unwrap_or_else(|e| panic!("step {i} of {smiles}: {e}"));
        }
        assert!(st.finished());
    }
}

#[test]
fn decode_inverts_encode() {
    let cfg = wide_config();
    let table = ValenceTable::default();
    for mol in corpus() {
        let tokens = tokenize(&mol).expect("tokenizes");
        let back = detokenize(&tokens, &cfg, &table).expect("decodes");
        assert_eq!(
            canonical_smiles(&back),
            canonical_smiles(&mol),
            "decode changed the molecule"
        );
    }
}

#[test]
fn token_sequences_stay_moderate() {
    for mol in corpus() {
        let tokens = tokenize(&mol).expect("tokenizes");
        assert!(
            tokens.len() <= 4 * mol.atom_count() + 2,
            "sequence blowup: {} tokens for {} atoms",
            tokens.len(),
            mol.atom_count()
        );
    }
}
