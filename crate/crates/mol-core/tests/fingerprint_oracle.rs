mod common;

use mol_core::fingerprint::{fingerprint, internal_diversity, jaccard, Fingerprint, FP_BITS};
use mol_core::graph::MolGraph;
use mol_core::parse::parse_smiles;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeSet;

// Straight-line re-derivation of the hash chain, kept separate from the
// production code so an accidental edit over there trips this file.

fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn chain(h: u64, v: u64) -> u64 {
    mix(h ^ mix(v))
}

fn expected_bits(mol: &MolGraph) -> BTreeSet<usize> {
    let n = mol.atom_count();
    let mut bits = BTreeSet::new();
    let mut level: Vec<u64> = Vec::with_capacity(n);
    for i in 0..n {
        let a = mol.atom(i);
        let packed = (u64::from(a.element.code()) << 32)
            | ((mol.degree(i) as u64) << 24)
            | (((i16::from(a.charge) + 8) as u64) << 16)
            | (u64::from(a.aromatic) << 8)
            | u64::from(mol.hydrogens(i));
        level.push(mix(packed));
    }
    for &h in &level {
        bits.insert((chain(0, h) % FP_BITS as u64) as usize);
    }
    for radius in 1u64..=2 {
        let mut next = Vec::with_capacity(n);
        for i in 0..n {
            let mut nb: Vec<(u8, u64)> = mol
                .neighbors(i)
                .iter()
                .map(|&(j, bi)| (mol.bond(bi).order.code(), level[j]))
                .collect();
            nb.sort_unstable();
            let mut h = chain(radius, level[i]);
            for (code, nh) in nb {
                h = chain(h, (u64::from(code) << 56) ^ nh);
            }
            next.push(h);
        }
        level = next;
        for &h in &level {
            bits.insert((chain(radius, h) % FP_BITS as u64) as usize);
        }
    }
    bits
}

#[test]
fn bit_pattern_matches_the_rederivation() {
    for line in mol_core::corpus_lines() {
        let mol = parse_smiles(line).unwrap();
        let got: BTreeSet<usize> = fingerprint(&mol).bits().collect();
        assert_eq!(got, expected_bits(&mol), "{line}");
    }
}

#[test]
fn fingerprint_is_permutation_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for line in mol_core::corpus_lines().take(12) {
        let mol = parse_smiles(line).unwrap();
        let reference = fingerprint(&mol);
        for _ in 0..10 {
            let shuffled = common::permute_graph(&mol, &mut rng);
            assert_eq!(fingerprint(&shuffled), reference, "{line}");
        }
    }
}

#[test]
fn equivalent_smiles_share_a_fingerprint() {
    for (a, b) in [
        ("CCO", "OCC"),
        ("c1ccccc1", "c1ccccc1"),
        ("CC(=O)c1ccccc1", "c1ccccc1C(C)=O"),
        ("c1ccc2ccccc2c1", "c1ccc2c(c1)cccc2"),
    ] {
        let fa = fingerprint(&parse_smiles(a).unwrap());
        let fb = fingerprint(&parse_smiles(b).unwrap());
        assert_eq!(fa, fb, "{a} vs {b}");
        assert_eq!(jaccard(&fa, &fb), 1.0);
    }
}

#[test]
fn different_molecules_differ() {
    let b = fingerprint(&parse_smiles("c1ccccc1").unwrap());
    let p = fingerprint(&parse_smiles("c1ccncc1").unwrap());
    let c = fingerprint(&parse_smiles("C1CCCCC1").unwrap());
    assert_ne!(b, p);
    assert_ne!(b, c);
    assert!(jaccard(&b, &p) < 1.0);
    assert!(jaccard(&b, &c) < jaccard(&b, &p));
}

#[test]
fn jaccard_identities() {
    let b = fingerprint(&parse_smiles("c1ccccc1").unwrap());
    let p = fingerprint(&parse_smiles("c1ccncc1").unwrap());
    assert_eq!(jaccard(&b, &b), 1.0);
    assert_eq!(jaccard(&b, &p), jaccard(&p, &b));
    let empty = Fingerprint::empty();
    assert_eq!(jaccard(&empty, &empty), 1.0);
    assert_eq!(jaccard(&b, &empty), 0.0);
    assert!(jaccard(&b, &p) >= 0.0 && jaccard(&b, &p) <= 1.0);
}

#[test]
fn diversity_matches_manual_average() {
    let fps: Vec<Fingerprint> = ["c1ccccc1", "C1CCCCC1", "c1ccncc1"]
        .iter()
        .map(|s| fingerprint(&parse_smiles(s).unwrap()))
        .collect();
    let manual = 1.0
        - (jaccard(&fps[0], &fps[1]) + jaccard(&fps[0], &fps[2]) + jaccard(&fps[1], &fps[2]))
            / 3.0;
    let got = internal_diversity(&fps).unwrap();
    assert!((got - manual).abs() < 1e-12);
    assert!(got > 0.0 && got < 1.0);
}

#[test]
fn diversity_edge_cases() {
    let b = fingerprint(&parse_smiles("c1ccccc1").unwrap());
    assert_eq!(internal_diversity(&[]), None);
    assert_eq!(internal_diversity(&[b.clone()]), None);
    assert_eq!(internal_diversity(&[b.clone(), b.clone(), b]), Some(0.0));
}
