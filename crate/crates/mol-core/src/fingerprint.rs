//! Circular substructure fingerprints and diversity.
//!
//! Radii 0..=2 neighborhood hashes folded into 2048 bits. The per-atom hash
//! at radius r combines the radius, the atom's previous-round hash and the
//! sorted (bond order, neighbor previous-round hash) pairs through a
//! splitmix-style 64-bit mixer, so the bits are invariant under atom
//! relabeling.

use crate::graph::MolGraph;

pub const FP_BITS: usize = 2048;
const FP_WORDS: usize = FP_BITS / 64;
pub const FP_RADIUS: u32 = 2;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Fingerprint {
    words: [u64; FP_WORDS],
}

impl Fingerprint {
    pub fn empty() -> Fingerprint {
        Fingerprint {
            words: [0; FP_WORDS],
        }
    }

    pub fn set(&mut self, bit: usize) {
        self.words[bit / 64] |= 1 << (bit % 64);
    }

    pub fn count_ones(&self) -> u32 {
        self.words.iter().map(|w| w.count_ones()).sum()
    }

    pub fn bits(&self) -> impl Iterator<Item = usize> + '_ {
        self.words.iter().enumerate().flat_map(|(wi, &w)| {
            (0..64).filter_map(move |b| {
                if w & (1 << b) != 0 {
                    Some(wi * 64 + b)
                } else {
                    None
                }
            })
        })
    }
}

fn splitmix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

fn combine(h: u64, v: u64) -> u64 {
    splitmix(h ^ splitmix(v))
}

/// Stable invariant of an atom: element, degree, charge, aromatic flag,
/// hydrogen count.
fn atom_invariant(mol: &MolGraph, i: usize) -> u64 {
    let a = mol.atom(i);
    let packed = (u64::from(a.element.code()) << 32)
        | ((mol.degree(i) as u64) << 24)
        | (((i16::from(a.charge) + 8) as u64) << 16)
        | (u64::from(a.aromatic) << 8)
        | u64::from(mol.hydrogens(i));
    splitmix(packed)
}

pub fn fingerprint(mol: &MolGraph) -> Fingerprint {
    let n = mol.atom_count();
    let mut fp = Fingerprint::empty();
    let mut hashes: Vec<u64> = (0..n).map(|i| atom_invariant(mol, i)).collect();
    for &h in &hashes {
        fp.set((combine(0, h) % FP_BITS as u64) as usize);
    }
    for radius in 1..=FP_RADIUS {
        let mut next = vec![0u64; n];
        for i in 0..n {
            let mut nb: Vec<(u8, u64)> = mol
                .neighbors(i)
                .iter()
                .map(|&(j, bi)| (mol.bond(bi).order.code(), hashes[j]))
                .collect();
            nb.sort_unstable();
            let mut h = combine(u64::from(radius), hashes[i]);
            for (code, nh) in nb {
                h = combine(h, (u64::from(code) << 56) ^ nh);
            }
            next[i] = h;
        }
        hashes = next;
        for &h in &hashes {
            fp.set((combine(u64::from(radius), h) % FP_BITS as u64) as usize);
        }
    }
    fp
}

/// Jaccard similarity of two fingerprints. Two empty fingerprints count as
/// identical (similarity 1).
pub fn jaccard(a: &Fingerprint, b: &Fingerprint) -> f64 {
    let mut inter = 0u32;
    let mut union = 0u32;
    for (x, y) in a.words.iter().zip(&b.words) {
        inter += (x & y).count_ones();
        union += (x | y).count_ones();
    }
    if union == 0 {
        1.0
    } else {
        f64::from(inter) / f64::from(union)
    }
}

/// Internal diversity: 1 minus the mean pairwise Jaccard similarity.
/// Requires at least two fingerprints.
pub fn internal_diversity(fps: &[Fingerprint]) -> Option<f64> {
    if fps.len() < 2 {
        return None;
    }
    let mut total = 0.0;
    let mut pairs = 0usize;
    for i in 0..fps.len() {
        for j in i + 1..fps.len() {
            total += jaccard(&fps[i], &fps[j]);
            pairs += 1;
        }
    }
    Some(1.0 - total / pairs as f64)
}
