mod common;

use mol_core::graph::MolGraph;
use mol_core::parse::parse_smiles;
use mol_core::rings::ring_sizes;
use std::collections::BTreeSet;

/// Enumerates every simple cycle of the molecule as an edge bitmask.
///
/// Walks DFS paths from each start vertex visiting only vertices with a
/// larger index, so each cycle is found exactly once up to direction.
/// Exponential in the worst case, so callers keep the inputs small.
fn all_simple_cycles(mol: &MolGraph) -> Vec<u128> {
    let n = mol.atom_count();
    let mut found = BTreeSet::new();
    for start in 0..n {
        let mut path = vec![start];
        let mut edges: Vec<usize> = Vec::new();
        let mut on_path = vec![false; n];
        on_path[start] = true;
        walk(mol, start, start, &mut path, &mut edges, &mut on_path, &mut found);
    }
    found.into_iter().collect()
}

#[allow(clippy::too_many_arguments)]
fn walk(
    mol: &MolGraph,
    start: usize,
    at: usize,
    path: &mut Vec<usize>,
    edges: &mut Vec<usize>,
    on_path: &mut [bool],
    found: &mut BTreeSet<u128>,
) {
    for &(next, bond) in mol.neighbors(at) {
        if next == start && path.len() >= 3 {
            let mut mask: u128 = 1 << bond;
            for &e in edges.iter() {
                mask |= 1 << e;
            }
            found.insert(mask);
            continue;
        }
        if next <= start || on_path[next] {
            continue;
        }
        on_path[next] = true;
        path.push(next);
        edges.push(bond);
        walk(mol, start, next, path, edges, on_path, found);
        edges.pop();
        path.pop();
        on_path[next] = false;
    }
}

/// Minimum cycle basis lengths by greedy GF(2) selection over the full
/// cycle list, shortest first. Independent of the production algorithm,
/// which never materializes the complete cycle set.
fn mcb_by_exhaustion(mol: &MolGraph) -> Vec<usize> {
    let mut components = 0usize;
    let n = mol.atom_count();
    let mut seen = vec![false; n];
    for s in 0..n {
        if seen[s] {
            continue;
        }
        components += 1;
        let mut stack = vec![s];
        seen[s] = true;
        while let Some(u) = stack.pop() {
            for &(v, _) in mol.neighbors(u) {
                if !seen[v] {
                    seen[v] = true;
                    stack.push(v);
                }
            }
        }
    }
    let dim = mol.bond_count() + components - n;
    let mut cycles = all_simple_cycles(mol);
    cycles.sort_by_key(|m| (m.count_ones(), *m));
    let mut basis: Vec<u128> = Vec::new();
    let mut lengths = Vec::new();
    for cand in cycles {
        if basis.len() == dim {
            break;
        }
        let mut reduced = cand;
        for &b in &basis {
            let pivot = 1u128 << b.trailing_zeros();
            if reduced & pivot != 0 {
                reduced ^= b;
            }
        }
        if reduced != 0 {
            // Store reduced vectors keyed by their lowest set bit so the
            // elimination above stays a single pass.
            let mut v = reduced;
            basis.sort_by_key(|b| b.trailing_zeros());
            let mut i = 0;
            while i < basis.len() {
                let pivot = 1u128 << basis[i].trailing_zeros();
                if v & pivot != 0 {
                    v ^= basis[i];
                }
                i += 1;
            }
            if v != 0 {
                basis.push(v);
                lengths.push(cand.count_ones() as usize);
            }
        }
    }
    assert_eq!(basis.len(), dim, "oracle failed to span the cycle space");
    lengths.sort_unstable();
    lengths
}

#[test]
fn known_ring_systems() {
    let cases: &[(&str, &[usize])] = &[
        ("c1ccccc1", &[6]),
        ("C1CCCCC1", &[6]),
        ("C1CC1", &[3]),
        ("C1CCC1", &[4]),
        ("C1CCCC1", &[5]),
        ("c1ccc2ccccc2c1", &[6, 6]),
        ("c1ccc2cc3ccccc3cc2c1", &[6, 6, 6]),
        ("C1CC2CCC1CC2", &[6, 6]),
        ("C1CC2CCC1C2", &[5, 5]),
        ("C1CCC2(C1)CCCC2", &[5, 5]),
        ("C1CCC2CCCCC2C1", &[6, 6]),
        ("CCO", &[]),
        ("c1ccc(-c2ccccc2)cc1", &[6, 6]),
    ];
    for (smi, want) in cases {
        let mol = parse_smiles(smi).unwrap();
        assert_eq!(ring_sizes(&mol), *want, "{smi}");
    }
}

#[test]
fn matches_exhaustive_oracle_on_small_corpus_molecules() {
    let mut checked = 0;
    for line in mol_core::corpus_lines() {
        let mol = parse_smiles(line).unwrap();
        if mol.atom_count() > 14 {
            continue;
        }
        assert_eq!(ring_sizes(&mol), mcb_by_exhaustion(&mol), "{line}");
        checked += 1;
    }
    assert!(checked >= 15, "only {checked} corpus molecules were small enough");
}

#[test]
fn matches_exhaustive_oracle_on_fused_systems() {
    for smi in [
        "c1ccc2c(c1)ccc1ccccc12",
        "C1CC12CC2",
        "C1CC2(C1)CC2",
        "c1cnc2[nH]ccc2c1",
        "O=C1C=Cc2ccccc21",
        "C1CC2CCC1CC2",
        "c1ccc2cc3cc4ccccc4cc3cc2c1",
    ] {
        let mol = parse_smiles(smi).unwrap();
        assert_eq!(ring_sizes(&mol), mcb_by_exhaustion(&mol), "{smi}");
    }
}

#[test]
fn ring_size_multiset_is_permutation_invariant() {
    use rand::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(41);
    for smi in ["c1ccc2ccccc2c1", "C1CC2CCC1C2", "c1cnc2[nH]ccc2c1"] {
        let mol = parse_smiles(smi).unwrap();
        let want = ring_sizes(&mol);
        for _ in 0..20 {
            let p = common::permute_graph(&mol, &mut rng);
            assert_eq!(ring_sizes(&p), want, "{smi}");
        }
    }
}
