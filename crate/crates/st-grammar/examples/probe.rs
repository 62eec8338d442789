// Dead-end rate probe: uniform masked rollouts over a few vocabularies.
// Run with `cargo run -p st-grammar --example probe --release`.

use mol_core::constraint::ConstraintConfig;
use mol_core::element::ValenceTable;
use mol_core::parse::parse_smiles;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use st_grammar::{Discipline, GenState, Token, Vocab};

const GENERATION_SEEDS: &[&str] = &[
    "c1ccccc1",
    "c1ccncc1",
    "c1cc[nH]c1",
    "c1ccoc1",
    "c1ccsc1",
    "CC(=O)N",
    "C=CC#N",
    "FC(Cl)Br",
    "OCCS",
];

fn vocab_from(smiles: &[&str]) -> Vocab {
    let mols: Vec<_> = smiles
        .iter()
        .map(|s| parse_smiles(s).unwrap())
        .collect();
    Vocab::from_molecules(&mols).unwrap()
}

fn corpus_vocab() -> Vocab {
    let mols: Vec<_> = mol_core::corpus_lines()
        .map(|s| parse_smiles(s).unwrap())
        .collect();
    Vocab::from_molecules(&mols).unwrap()
}

fn measure(name: &str, vocab: &Vocab, cfg: &ConstraintConfig, n: usize, verbose: usize) {
    measure_with(name, vocab, cfg, Discipline::default(), n, verbose);
}

fn measure_with(
    name: &str,
    vocab: &Vocab,
    cfg: &ConstraintConfig,
    disc: Discipline,
    n: usize,
    verbose: usize,
) {
    let table = ValenceTable::default();
    let cap = 4 * cfg.max_atoms + 64;
    let mut rng = ChaCha8Rng::seed_from_u64(0x0dd5eed);
    let mut done = 0usize;
    let mut zero_mask = 0usize;
    let mut step_cap = 0usize;
    let mut shown = 0usize;
    let mut budget_dead = 0usize;
    let mut island_dead = 0usize;
    let mut anchor_dead = 0usize;
    let mut other_dead = 0usize;
    for _ in 0..n {
        let mut st = GenState::with_discipline(cfg.clone(), table.clone(), disc.clone());
        st.apply(Token::Bos).unwrap();
        let mut trace: Vec<String> = Vec::new();
        loop {
            if st.steps() > cap {
                step_cap += 1;
                break;
            }
            let mask = st.legal_mask(vocab);
            if mask == 0 {
                zero_mask += 1;
                let (anchors, pend, depth, hard) = st.debug_stats(vocab);
                if st.atom_count() >= cfg.max_atoms {
                    budget_dead += 1;
                } else if pend > 0 {
                    island_dead += 1;
                } else if anchors > 0 {
                    anchor_dead += 1;
                } else {
                    other_dead += 1;
                }
                if shown < verbose {
                    shown += 1;
                    let tail: Vec<_> =
                        trace.iter().rev().take(30).rev().cloned().collect();
                    let blocked: Vec<String> = st
                        .debug_hard_only(vocab)
                        .iter()
                        .map(|t| format!("{t}"))
                        .collect();
                    println!(
                        "  [{name}] dead atoms={}/{} anchors={anchors} pending_islands={pend} stack={depth} hard_bits={hard} blocked=[{}]: ... {}",
                        st.atom_count(),
                        cfg.max_atoms,
                        blocked.join(" "),
                        tail.join(" ")
                    );
                }
                break;
            }
            let bits: Vec<usize> = (0..vocab.len()).filter(|i| mask >> i & 1 == 1).collect();
            let id = *bits.choose(&mut rng).unwrap();
            let tok = vocab.token(id as u16).unwrap();
            trace.push(format!("{tok}"));
            st.apply(tok).unwrap();
            if st.finished() {
                done += 1;
                break;
            }
        }
    }
    let rate = (zero_mask + step_cap) as f64 / n as f64;
    println!(
        "{name}: done {done} zero-mask {zero_mask} step-cap {step_cap} / {n}  rate {rate:.3}  \
         [budget {budget_dead} island {island_dead} anchor {anchor_dead} other {other_dead}]"
    );
}

fn main() {
    let default_cfg = ConstraintConfig::default();

    measure("plain", &vocab_from(&["CC(=O)N", "FC(Cl)Br", "OCCS", "C#N"]), &default_cfg, 2000, 4);
    measure("benzene", &vocab_from(&["c1ccccc1", "C"]), &default_cfg, 2000, 4);
    measure(
        "aromatics",
        &vocab_from(&["c1ccncc1", "c1cc[nH]c1", "c1ccoc1", "c1ccsc1", "C"]),
        &default_cfg,
        2000,
        4,
    );

    let gen_vocab = vocab_from(GENERATION_SEEDS);
    println!(
        "generation vocab: {} tokens ({} atom kinds)",
        gen_vocab.len(),
        gen_vocab.atom_descs().count()
    );
    measure("generation/default", &gen_vocab, &default_cfg, 2000, 8);
    for anchors in [2usize, 3, 4] {
        for islands in [1usize, 2] {
            let disc = Discipline {
                max_open_anchors: anchors,
                max_pending_islands: islands,
                focused_rings: true,
            };
            let name = format!("generation/a{anchors}i{islands}");
            measure_with(&name, &gen_vocab, &default_cfg, disc, 2000, 0);
        }
    }

    let wide_cfg = ConstraintConfig {
        max_ring_size: 12,
        max_atoms: 120,
        ..ConstraintConfig::default()
    };
    let cv = corpus_vocab();
    println!("corpus vocab: {} tokens ({} atom kinds)", cv.len(), cv.atom_descs().count());
    measure("corpus/default", &cv, &default_cfg, 500, 4);
    measure("corpus/wide", &cv, &wide_cfg, 500, 0);
}
