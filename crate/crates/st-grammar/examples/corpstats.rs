use mol_core::constraint::ConstraintConfig;
use mol_core::element::{Element, ValenceTable};
use mol_core::graph::{BondOrder, MolGraph};
use mol_core::parse::parse_smiles;
use st_grammar::{tokenize, Discipline, GenState, Token, Vocab};

fn chemistry_audit(mols: &[MolGraph]) {
    let mut aromatic_multi = 0usize;
    let mut s_double_bad = 0usize;
    let mut triple_bad = 0usize;
    let mut cumulated = 0usize;
    let mut ring_triple = 0usize;
    for m in mols {
        let ring = m.ring_atoms();
        let mut doubles = vec![0usize; m.atom_count()];
        for b in m.bonds() {
            let (ea, eb) = (m.atom(b.a), m.atom(b.b));
            match b.order {
                BondOrder::Double | BondOrder::Triple if ea.aromatic || eb.aromatic => {
                    aromatic_multi += 1;
                }
                _ => {}
            }
            match b.order {
                BondOrder::Double => {
                    doubles[b.a] += 1;
                    doubles[b.b] += 1;
                    let s_side = [ea, eb].iter().any(|x| x.element == Element::S);
                    let both_ok = (ea.element != Element::S || eb.element == Element::O)
                        && (eb.element != Element::S || ea.element == Element::O);
                    if s_side && !both_ok {
                        s_double_bad += 1;
                    }
                }
                BondOrder::Triple => {
                    let pair = (ea.element, eb.element);
                    let fine = matches!(
                        pair,
                        (Element::C, Element::C) | (Element::C, Element::N) | (Element::N, Element::C)
                    );
                    if !fine {
                        triple_bad += 1;
                    }
                    if ring[b.a] && ring[b.b] {
                        ring_triple += 1;
                    }
                }
                _ => {}
            }
        }
        for (i, &d) in doubles.iter().enumerate() {
            if d > 1 && matches!(m.atom(i).element, Element::C | Element::N) {
                cumulated += 1;
            }
        }
    }
    println!("aromatic atoms with double/triple bonds: {aromatic_multi}");
    println!("sulfur doubles without oxygen partner: {s_double_bad}");
    println!("triples outside C/C and C/N: {triple_bad}");
    println!("carbons or nitrogens with two doubles: {cumulated}");
    println!("triple bonds with both ends in rings: {ring_triple}");
}

fn main() {
    let table = ValenceTable::default();
    let cfg = ConstraintConfig {
        max_ring_size: 12,
        max_atoms: 120,
        ..ConstraintConfig::default()
    };
    let mols: Vec<_> = mol_core::corpus_lines()
        .map(|s| parse_smiles(s).unwrap())
        .collect();
    chemistry_audit(&mols);
    let vocab = Vocab::from_molecules(&mols).unwrap();
    let mut max_anchors = 0usize;
    let mut max_pending = 0usize;
    let mut max_stack = 0usize;
    let mut ring_open_not_after_atom = 0usize;
    let mut forced_closures = [0usize; 4];
    for m in &mols {
        let toks = tokenize(m).unwrap();
        let mut st = GenState::with_discipline(cfg.clone(), table.clone(), Discipline::unbounded());
        let mut prev: Option<Token> = None;
        for &t in &toks {
            if t == Token::RingOpen {
                let fine = matches!(prev, Some(Token::Atom(_)) | Some(Token::RingOpen));
                if !fine {
                    ring_open_not_after_atom += 1;
                }
            }
            if let (Some(Token::Bond(o)), Token::RingClose(_)) = (prev, t) {
                forced_closures[o as usize] += 1;
            }
            st.apply(t).unwrap();
            let (a, p, s, _) = st.debug_stats(&vocab);
            max_anchors = max_anchors.max(a);
            max_pending = max_pending.max(p);
            max_stack = max_stack.max(s);
            prev = Some(t);
        }
    }
    println!("max simultaneous anchors: {max_anchors}");
    println!("max simultaneous pending islands: {max_pending}");
    println!("max stack depth: {max_stack}");
    println!("ring opens not right after an atom: {ring_open_not_after_atom}");
    println!("explicit closure orders [single double triple aromatic]: {forced_closures:?}");
}
