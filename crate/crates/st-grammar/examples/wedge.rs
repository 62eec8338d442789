// Dev repro: replay one wedged prefix and report which tokens stay legal.

use mol_core::constraint::ConstraintConfig;
use mol_core::element::ValenceTable;
use mol_core::parse::parse_smiles;
use st_grammar::{GenState, Token, Vocab};

fn main() {
    let mols: Vec<_> = ["c1ccccc1", "C"]
        .iter()
        .map(|s| parse_smiles(s).unwrap())
        .collect();
    let vocab = Vocab::from_molecules(&mols).unwrap();
    let script = std::env::args().nth(1).unwrap_or_else(|| {
        "<bos> c <ring> ( : c <ring> ( : c <ring> - c <ring>".into()
    });
    let mut st = GenState::new(ConstraintConfig::default(), ValenceTable::default());
    for text in script.split_whitespace() {
        let tok: Token = text.parse().expect("token text");
        let mask = st.legal_mask(&vocab);
        let id = vocab.id(&tok).expect("token in vocab");
        let legal = mask & (1 << id) != 0;
        println!("applying {text} (masked-legal: {legal})");
        st.apply(tok).unwrap_or_else(|e| panic!("{text}: {e}"));
    }
    println!("--- final state ---");
    let (anchors, pend, depth, hard) = st.debug_stats(&vocab);
    println!("anchors={anchors} pending_islands={pend} stack={depth} hard_bits={hard}");
    print!("{}", st.debug_dump());
    let mask = st.legal_mask(&vocab);
    for (i, &t) in vocab.tokens().iter().enumerate() {
        if mask & (1 << i) != 0 {
            println!("legal: {t}");
        }
    }
    for t in st.debug_hard_only(&vocab) {
        println!("hard-only (lookahead blocked): {t}");
    }
}
