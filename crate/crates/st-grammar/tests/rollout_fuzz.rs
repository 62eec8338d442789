//! Masked uniform sampling should finish cleanly almost always and every
//! finished sequence must decode to a valid molecule within constraints.

use mol_core::constraint::{constraint_check, ConstraintConfig};
use mol_core::element::ValenceTable;
use mol_core::parse::parse_smiles;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use st_grammar::{GenState, Vocab};

#[test]
fn uniform_masked_rollouts_rarely_dead_end_and_always_decode() {
    let mols: Vec<_> = mol_core::corpus_lines()
        .map(|l| parse_smiles(l).expect("corpus parses"))
        .collect();
    let vocab = Vocab::from_molecules(&mols).expect("vocabulary builds");
    let cfg = ConstraintConfig {
        max_atoms: 40,
        ..ConstraintConfig::default()
    };
    let table = ValenceTable::default();
    let mut rng = ChaCha8Rng::seed_from_u64(0x0dd5eed);

    let rollouts = 2_000;
    let step_cap = 4 * cfg.max_atoms + 64;
    let mut dead_ends = 0usize;
    let mut completed = 0usize;
    for _ in 0..rollouts {
        let mut st = GenState::new(cfg.clone(), table.clone());
        st.apply(st_grammar::Token::Bos).expect("begin");
        let mut finished = false;
        for _ in 0..step_cap {
            let mask = st.legal_mask(&vocab);
            if mask == 0 {
                break;
            }
            let choices: Vec<u16> = (0..vocab.len() as u16)
                .filter(|id| mask & (1 << id) != 0)
                .collect();
            let id = *choices.choose(&mut rng).expect("nonempty mask");
            st.apply(vocab.token(id).expect("id in range"))
                .expect("masked token applies");
            if st.finished() {
                finished = true;
                break;
            }
        }
        if !finished {
            dead_ends += 1;
            continue;
        }
        completed += 1;
        let mol = st.into_graph().expect("finished sequence decodes");
        let violations = constraint_check(&mol, &cfg, None);
        assert!(
            violations.is_empty(),
            "decoded molecule violates constraints: {violations:?}"
        );
    }
    let rate = dead_ends as f64 / rollouts as f64;
    assert!(
        rate < 0.05,
        "dead-end rate {rate:.3} ({dead_ends}/{rollouts}, {completed} completed)"
    );
}
