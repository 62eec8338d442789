//! Molecules to token sequences and back.
//!
//! The walk matches the canonical SMILES writer: rooted at the top-ranked
//! atom, children in rank order, ring bonds become anchor open/close pairs.
//! At an atom that closes several anchors the newest closes first, which
//! keeps every intermediate ring within the size limit. A bond token is
//! emitted before a closure only when the closure order differs from the
//! inferred one (aromatic between two aromatic atoms, otherwise single).

use crate::state::GenState;
use crate::token::{AtomDesc, Token};
use crate::vocab::MAX_OPEN_ANCHORS;
use crate::GrammarError;
use mol_core::canon::canonical_ranks;
use mol_core::constraint::ConstraintConfig;
use mol_core::element::ValenceTable;
use mol_core::graph::{BondOrder, MolGraph};

pub fn tokenize(mol: &MolGraph) -> Result<Vec<Token>, GrammarError> {
    let n = mol.atom_count();
    let ranks = canonical_ranks(mol);
    let root = ranks.iter().position(|&r| r == 0).expect("rank 0 exists");

    let mut order_of: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for u in 0..n {
        let mut nb = mol.neighbors(u).to_vec();
        nb.sort_by_key(|&(v, _)| ranks[v]);
        order_of[u] = nb;
    }

    // Classify tree and ring bonds along the walk.
    let mut arrival = vec![usize::MAX; n];
    let mut children: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    let mut ring_bonds: Vec<usize> = Vec::new();
    let mut seen_bond = vec![false; mol.bond_count()];
    let mut clock = 0usize;
    let mut stack: Vec<(usize, usize)> = Vec::new();
    arrival[root] = clock;
    clock += 1;
    stack.push((root, 0));
    while let Some(&(u, cursor)) = stack.last() {
        if cursor < order_of[u].len() {
            stack.last_mut().expect("frame").1 += 1;
            let (v, bi) = order_of[u][cursor];
            if seen_bond[bi] {
                continue;
            }
            seen_bond[bi] = true;
            if arrival[v] == usize::MAX {
                arrival[v] = clock;
                clock += 1;
                children[u].push((v, bi));
                stack.push((v, 0));
            } else {
                ring_bonds.push(bi);
            }
        } else {
            stack.pop();
        }
    }
    assert_eq!(clock, n, "graph must be connected");

    // Anchors open at the earlier-arrived endpoint and close at the later.
    let rn = ring_bonds.len();
    let mut ring_open_atom = vec![0usize; rn];
    let mut ring_close_atom = vec![0usize; rn];
    let mut ring_order = vec![BondOrder::Single; rn];
    let mut opens_at: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut closes_at: Vec<Vec<usize>> = vec![Vec::new(); n];
    for (ri, &bi) in ring_bonds.iter().enumerate() {
        let b = mol.bond(bi);
        let (open, close) = if arrival[b.a] < arrival[b.b] {
            (b.a, b.b)
        } else {
            (b.b, b.a)
        };
        ring_open_atom[ri] = open;
        ring_close_atom[ri] = close;
        ring_order[ri] = b.order;
        opens_at[open].push(ri);
        closes_at[close].push(ri);
    }
    let mut open_seq = vec![0usize; rn];
    for u in 0..n {
        opens_at[u].sort_by_key(|&ri| arrival[ring_close_atom[ri]]);
        for (i, &ri) in opens_at[u].iter().enumerate() {
            open_seq[ri] = arrival[u] * n + i;
        }
    }
    for u in 0..n {
        closes_at[u].sort_by_key(|&ri| std::cmp::Reverse(open_seq[ri]));
    }

    let mut em = Emitter {
        mol,
        children: &children,
        opens_at: &opens_at,
        closes_at: &closes_at,
        ring_open_atom: &ring_open_atom,
        ring_order: &ring_order,
        live: Vec::new(),
        out: vec![Token::Bos],
    };
    em.emit_atom(root)?;
    em.out.push(Token::Eos);
    Ok(em.out)
}

struct Emitter<'a> {
    mol: &'a MolGraph,
    children: &'a [Vec<(usize, usize)>],
    opens_at: &'a [Vec<usize>],
    closes_at: &'a [Vec<usize>],
    ring_open_atom: &'a [usize],
    ring_order: &'a [BondOrder],
    live: Vec<usize>,
    out: Vec<Token>,
}

impl Emitter<'_> {
    fn emit_atom(&mut self, u: usize) -> Result<(), GrammarError> {
        self.out
            .push(Token::Atom(AtomDesc::from_atom(self.mol.atom(u))));
        for &ri in &self.closes_at[u] {
            let k = self
                .live
                .iter()
                .position(|&x| x == ri)
                .expect("closing an open anchor");
            let a = self.mol.atom(self.ring_open_atom[ri]);
            let b = self.mol.atom(u);
            let inferred = if a.aromatic && b.aromatic {
                BondOrder::Aromatic
            } else {
                BondOrder::Single
            };
            if self.ring_order[ri] != inferred {
                self.out.push(Token::Bond(self.ring_order[ri]));
            }
            self.out.push(Token::RingClose(k as u8));
            self.live.remove(k);
        }
        for &ri in &self.opens_at[u] {
            if self.live.len() >= MAX_OPEN_ANCHORS {
                return Err(GrammarError::Unrepresentable(format!(
                    "more than {MAX_OPEN_ANCHORS} ring bonds open at once"
                )));
            }
            self.out.push(Token::RingOpen);
            self.live.push(ri);
        }
        let kids = self.children[u].len();
        for (pos, &(v, bi)) in self.children[u].iter().enumerate() {
            let last = pos + 1 == kids;
            if !last {
                self.out.push(Token::BranchOpen);
            }
            self.out.push(Token::Bond(self.mol.bond(bi).order));
            self.emit_atom(v)?;
            if !last {
                self.out.push(Token::BranchClose);
            }
        }
        Ok(())
    }
}

/// Replay a token sequence into a validated molecular graph.
pub fn detokenize(
    tokens: &[Token],
    cfg: &ConstraintConfig,
    table: &ValenceTable,
) -> Result<MolGraph, GrammarError> {
    let mut st = GenState::new(cfg.clone(), table.clone());
    for &t in tokens {
        st.apply(t)?;
    }
    st.into_graph()
}
