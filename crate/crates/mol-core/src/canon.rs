//! Canonical atom ordering.
//!
//! Iterative partition refinement over (element, degree, charge, aromatic
//! flag, hydrogen count) invariants, followed by individualization of the
//! first non-singleton cell when refinement alone does not discriminate.
//! Among all discrete orderings explored, the one with the lexicographically
//! smallest graph certificate wins, which makes the result independent of
//! input atom order.

use crate::graph::MolGraph;

/// Rank per atom; rank 0 is the canonical root. The mapping is a permutation
/// of `0..atom_count` and is invariant under relabeling of the input.
pub fn canonical_ranks(mol: &MolGraph) -> Vec<usize> {
    let n = mol.atom_count();
    if n == 1 {
        return vec![0];
    }
    let initial: Vec<u64> = (0..n).map(|i| initial_invariant(mol, i)).collect();
    let colors = refine(mol, &assign_colors(&initial));
    let mut best: Option<(Vec<u64>, Vec<usize>)> = None;
    search(mol, colors, &mut best, 0);
    best.expect("canonical search yields at least one ordering").1
}

fn initial_invariant(mol: &MolGraph, i: usize) -> u64 {
    let a = mol.atom(i);
    (u64::from(a.element.code()) << 32)
        | ((mol.degree(i) as u64) << 24)
        | ((i16::from(a.charge) + 8) as u64) << 16
        | (u64::from(a.aromatic) << 8)
        | u64::from(mol.hydrogens(i))
}

/// Map arbitrary per-atom values to dense color ids ordered by value.
fn assign_colors(values: &[u64]) -> Vec<usize> {
    let mut sorted: Vec<u64> = values.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    values
        .iter()
        .map(|v| sorted.binary_search(v).expect("value present"))
        .collect()
}

fn class_count(colors: &[usize]) -> usize {
    colors.iter().copied().max().map_or(0, |m| m + 1)
}

/// Refine colors to a stable partition: each round keys every atom by its
/// color plus the sorted multiset of (bond order, neighbor color) pairs.
fn refine(mol: &MolGraph, colors: &[usize]) -> Vec<usize> {
    let n = mol.atom_count();
    let mut colors = colors.to_vec();
    loop {
        let before = class_count(&colors);
        let mut keys: Vec<(usize, Vec<(u8, usize)>)> = Vec::with_capacity(n);
        for i in 0..n {
            let mut nb: Vec<(u8, usize)> = mol
                .neighbors(i)
                .iter()
                .map(|&(j, bi)| (mol.bond(bi).order.code(), colors[j]))
                .collect();
            nb.sort_unstable();
            keys.push((colors[i], nb));
        }
        let mut sorted_keys = keys.clone();
        sorted_keys.sort();
        sorted_keys.dedup();
        for i in 0..n {
            colors[i] = sorted_keys
                .binary_search(&keys[i])
                .expect("key present");
        }
        if class_count(&colors) == before {
            return colors;
        }
    }
}

fn search(
    mol: &MolGraph,
    colors: Vec<usize>,
    best: &mut Option<(Vec<u64>, Vec<usize>)>,
    depth: usize,
) {
    let n = mol.atom_count();
    debug_assert!(depth <= n);
    if class_count(&colors) == n {
        let ranks = colors;
        let cert = certificate(mol, &ranks);
        let better = match best {
            None => true,
            Some((b, _)) => cert < *b,
        };
        if better {
            *best = Some((cert, ranks));
        }
        return;
    }
    // First non-singleton cell (smallest color with more than one member).
    let mut counts = vec![0usize; class_count(&colors)];
    for &c in &colors {
        counts[c] += 1;
    }
    let target = counts
        .iter()
        .position(|&c| c > 1)
        .expect("non-discrete partition has a non-singleton cell");
    let members: Vec<usize> = (0..n).filter(|&i| colors[i] == target).collect();
    for &m in &members {
        let mut split: Vec<usize> = colors.iter().map(|&c| c * 2 + 1).collect();
        split[m] -= 1;
        let refined = refine(mol, &assign_colors_usize(&split));
        search(mol, refined, best, depth + 1);
    }
}

fn assign_colors_usize(values: &[usize]) -> Vec<usize> {
    let mut sorted: Vec<usize> = values.to_vec();
    sorted.sort_unstable();
    sorted.dedup();
    values
        .iter()
        .map(|v| sorted.binary_search(v).expect("value present"))
        .collect()
}

/// Graph certificate under a complete ranking: atoms listed in rank order
/// with their fields and sorted (neighbor rank, bond order) lists. Two
/// labelings of isomorphic graphs produce the same certificate exactly when
/// the rank-induced relabelings coincide.
pub fn certificate(mol: &MolGraph, ranks: &[usize]) -> Vec<u64> {
    let n = mol.atom_count();
    let mut atom_of_rank = vec![usize::MAX; n];
    for (atom, &r) in ranks.iter().enumerate() {
        atom_of_rank[r] = atom;
    }
    let mut cert: Vec<u64> = Vec::with_capacity(n * 4);
    for &i in &atom_of_rank {
        let a = mol.atom(i);
        cert.push(
            (u64::from(a.element.code()) << 32)
                | ((i16::from(a.charge) + 8) as u64) << 16
                | (u64::from(a.aromatic) << 8)
                | u64::from(mol.hydrogens(i)),
        );
        let mut nb: Vec<u64> = mol
            .neighbors(i)
            .iter()
            .map(|&(j, bi)| ((ranks[j] as u64) << 8) | u64::from(mol.bond(bi).order.code()))
            .collect();
        nb.sort_unstable();
        cert.push(nb.len() as u64);
        cert.extend(nb);
    }
    cert
}

/// Certificate induced by the canonical ranks; equal certificates mean
/// isomorphic graphs (for the graph sizes this crate handles).
pub fn canonical_certificate(mol: &MolGraph) -> Vec<u64> {
    certificate(mol, &canonical_ranks(mol))
}
