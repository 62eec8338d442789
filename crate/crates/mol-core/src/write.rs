//! SMILES writer.
//!
//! Emits a spanning-tree traversal rooted at the top-ranked atom, children
//! in rank order, ring-closure digits allocated smallest-first and reused
//! after release. Single bonds between two aromatic atoms are written with
//! an explicit `-`; aromatic bonds between aromatic atoms are implicit.

use crate::canon::canonical_ranks;
use crate::element::ValenceTable;
use crate::graph::{derive_hydrogens, Atom, BondOrder, MolGraph};

/// Canonical SMILES: writer applied to the canonical atom ranking.
pub fn canonical_smiles(mol: &MolGraph) -> String {
    write_smiles(mol, &canonical_ranks(mol))
}

/// Write SMILES following the given rank order (rank 0 roots the traversal,
/// neighbors are visited in ascending rank).
pub fn write_smiles(mol: &MolGraph, ranks: &[usize]) -> String {
    let n = mol.atom_count();
    assert_eq!(ranks.len(), n, "rank vector length mismatch");
    let table = ValenceTable::default();

    let root = ranks.iter().position(|&r| r == 0).expect("rank 0 exists");

    // Neighbors of each atom in ascending rank order, with bond indices.
    let mut order_of: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
    for u in 0..n {
        let mut nb: Vec<(usize, usize)> = mol.neighbors(u).to_vec();
        nb.sort_by_key(|&(v, _)| ranks[v]);
        order_of[u] = nb;
    }

    // Pass 1: DFS classifying tree and ring edges.
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

    // Ring bookkeeping: per atom, closures and openings in emission order.
    let mut ring_open = Vec::new();
    let mut ring_close = Vec::new();
    let mut ring_order = Vec::new();
    for &bi in &ring_bonds {
        let b = mol.bond(bi);
        let (open, close) = if arrival[b.a] < arrival[b.b] {
            (b.a, b.b)
        } else {
            (b.b, b.a)
        };
        ring_open.push(open);
        ring_close.push(close);
        ring_order.push(b.order);
    }
    let mut opens_at: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut closes_at: Vec<Vec<usize>> = vec![Vec::new(); n];
    for ri in 0..ring_open.len() {
        opens_at[ring_open[ri]].push(ri);
        closes_at[ring_close[ri]].push(ri);
    }
    for u in 0..n {
        opens_at[u].sort_by_key(|&ri| arrival[ring_close[ri]]);
        closes_at[u].sort_by_key(|&ri| arrival[ring_open[ri]]);
    }

    // Pass 2: emission.
    enum Frame {
        Atom(usize),
        Bond(usize, usize),
        Text(&'static str),
    }
    let mut ring_digit = vec![0u16; ring_open.len()];
    let mut out = String::new();
    let mut free_digits: Vec<u16> = (1..100).rev().collect();
    let mut emit_stack: Vec<Frame> = vec![Frame::Atom(root)];
    while let Some(frame) = emit_stack.pop() {
        match frame {
            Frame::Text(t) => out.push_str(t),
            Frame::Bond(u, v) => {
                let order = mol.bond_between(u, v).expect("edge").order;
                push_bond_char(&mut out, order, mol.atom(u), mol.atom(v));
            }
            Frame::Atom(u) => {
                out.push_str(&atom_text(mol, u, &table));
                for &ri in &closes_at[u] {
                    let digit = ring_digit[ri];
                    push_digit(&mut out, digit);
                    free_digits.push(digit);
                    free_digits.sort_unstable_by(|a, b| b.cmp(a));
                }
                for &ri in &opens_at[u] {
                    let digit = free_digits.pop().expect("ring digit available");
                    ring_digit[ri] = digit;
                    push_bond_char(
                        &mut out,
                        ring_order[ri],
                        mol.atom(ring_open[ri]),
                        mol.atom(ring_close[ri]),
                    );
                    push_digit(&mut out, digit);
                }
                let kids = &children[u];
                // Push in reverse so the first child is emitted first.
                for (pos, &(v, _)) in kids.iter().enumerate().rev() {
                    let last = pos + 1 == kids.len();
                    if !last {
                        emit_stack.push(Frame::Text(")"));
                    }
                    emit_stack.push(Frame::Atom(v));
                    emit_stack.push(Frame::Bond(u, v));
                    if !last {
                        emit_stack.push(Frame::Text("("));
                    }
                }
            }
        }
    }
    out
}

fn push_digit(out: &mut String, digit: u16) {
    if digit < 10 {
        out.push_str(&digit.to_string());
    } else {
        out.push_str(&format!("%{digit:02}"));
    }
}

fn push_bond_char(out: &mut String, order: BondOrder, a: &Atom, b: &Atom) {
    match order {
        BondOrder::Single => {
            if a.aromatic && b.aromatic {
                out.push('-');
            }
        }
        BondOrder::Double => out.push('='),
        BondOrder::Triple => out.push('#'),
        BondOrder::Aromatic => {}
    }
}

fn atom_text(mol: &MolGraph, u: usize, table: &ValenceTable) -> String {
    let a = mol.atom(u);
    let h = mol.hydrogens(u);
    let symbol = if a.aromatic {
        a.element.symbol().to_lowercase()
    } else {
        a.element.symbol().to_string()
    };
    let plain_ok = a.charge == 0 && {
        let probe = Atom {
            explicit_h: None,
            ..*a
        };
        derive_hydrogens(&probe, mol.bond_load(u), table) == Some(h)
    };
    if plain_ok {
        return symbol;
    }
    let mut s = String::from("[");
    s.push_str(&symbol);
    if h == 1 {
        s.push('H');
    } else if h > 1 {
        s.push('H');
        s.push_str(&h.to_string());
    }
    if a.charge != 0 {
        let sign = if a.charge > 0 { '+' } else { '-' };
        s.push(sign);
        let mag = a.charge.abs();
        if mag > 1 {
            s.push_str(&mag.to_string());
        }
    }
    s.push(']');
    s
}
