use mol_core::graph::{Bond, MolGraph};
use rand::seq::SliceRandom;
use rand::Rng;

/// Relabel atoms by a random permutation and shuffle bond order and bond
/// endpoint order. The result is isomorphic to the input by construction.
pub fn permute_graph<R: Rng>(mol: &MolGraph, rng: &mut R) -> MolGraph {
    let n = mol.atom_count();
    let mut perm: Vec<usize> = (0..n).collect();
    perm.shuffle(rng);
    let mut atoms = vec![*mol.atom(0); n];
    for i in 0..n {
        atoms[perm[i]] = *mol.atom(i);
    }
    let mut bonds: Vec<Bond> = mol
        .bonds()
        .iter()
        .map(|b| {
            let (a, bb) = if rng.gen_bool(0.5) {
                (perm[b.a], perm[b.b])
            } else {
                (perm[b.b], perm[b.a])
            };
            Bond {
                a,
                b: bb,
                order: b.order,
            }
        })
        .collect();
    bonds.shuffle(rng);
    MolGraph::new(atoms, bonds).expect("permuted graph stays valid")
}
