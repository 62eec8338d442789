//! Ring perception: minimum cycle basis sizes.
//!
//! Candidate cycles come from the Horton family (shortest paths from every
//! vertex joined by an edge); a greedy scan in length order keeps the
//! GF(2)-independent ones until the cycle-space dimension is reached. All
//! minimum cycle bases share one length multiset, so the returned sizes are
//! invariant under atom relabeling.

use crate::graph::MolGraph;

/// Sorted multiset of ring sizes of the minimum cycle basis.
pub fn ring_sizes(mol: &MolGraph) -> Vec<usize> {
    let n = mol.atom_count();
    let e = mol.bond_count();

    // Cycle space dimension: E - V + number of components (always 1 for a
    // validated graph, but computed defensively).
    let components = {
        let mut seen = vec![false; n];
        let mut count = 0usize;
        for start in 0..n {
            if seen[start] {
                continue;
            }
            count += 1;
            let mut stack = vec![start];
            seen[start] = true;
            while let Some(u) = stack.pop() {
                for &(v, _) in mol.neighbors(u) {
                    if !seen[v] {
                        seen[v] = true;
                        stack.push(v);
                    }
                }
            }
        }
        count
    };
    let dim = e + components - n;
    if dim == 0 {
        return Vec::new();
    }

    let words = e.div_ceil(64);
    let mut candidates: Vec<(usize, Vec<u64>)> = Vec::new();
    let mut seen_masks = std::collections::HashSet::new();

    for v in 0..n {
        let (dist, parent_edge, parent_node) = bfs(mol, v);
        // Edge mask of the shortest path root..x.
        let path_mask = |mut x: usize| -> Option<Vec<u64>> {
            let mut mask = vec![0u64; words];
            while x != v {
                let pe = parent_edge[x]?;
                mask[pe / 64] |= 1 << (pe % 64);
                x = parent_node[x];
            }
            Some(mask)
        };
        for (bi, bond) in mol.bonds().iter().enumerate() {
            let (x, y) = (bond.a, bond.b);
            if dist[x] == usize::MAX || dist[y] == usize::MAX {
                continue;
            }
            let Some(px) = path_mask(x) else { continue };
            let Some(py) = path_mask(y) else { continue };
            // Paths must be edge-disjoint and must not contain the edge.
            if px.iter().zip(&py).any(|(a, b)| a & b != 0) {
                continue;
            }
            if (px[bi / 64] | py[bi / 64]) & (1 << (bi % 64)) != 0 {
                continue;
            }
            // Vertex-disjointness apart from v: lengths must add up.
            let len = dist[x] + dist[y] + 1;
            let mut mask: Vec<u64> = px.iter().zip(&py).map(|(a, b)| a | b).collect();
            mask[bi / 64] |= 1 << (bi % 64);
            let ones: usize = mask.iter().map(|w| w.count_ones() as usize).sum();
            if ones != len {
                continue;
            }
            if seen_masks.insert(mask.clone()) {
                candidates.push((len, mask));
            }
        }
    }

    candidates.sort();

    // Greedy GF(2) independence in length order.
    let mut basis: Vec<Vec<u64>> = Vec::new();
    let mut pivots: Vec<usize> = Vec::new();
    let mut sizes: Vec<usize> = Vec::new();
    for (len, mask) in candidates {
        let mut reduced = mask;
        for (row, &p) in basis.iter().zip(&pivots) {
            if reduced[p / 64] & (1 << (p % 64)) != 0 {
                for (r, b) in reduced.iter_mut().zip(row) {
                    *r ^= b;
                }
            }
        }
        if let Some(p) = first_bit(&reduced) {
            basis.push(reduced);
            pivots.push(p);
            sizes.push(len);
            if sizes.len() == dim {
                break;
            }
        }
    }
    debug_assert_eq!(sizes.len(), dim, "Horton candidates span the cycle space");
    sizes.sort_unstable();
    sizes
}

fn first_bit(mask: &[u64]) -> Option<usize> {
    for (wi, &w) in mask.iter().enumerate() {
        if w != 0 {
            return Some(wi * 64 + w.trailing_zeros() as usize);
        }
    }
    None
}

fn bfs(mol: &MolGraph, root: usize) -> (Vec<usize>, Vec<Option<usize>>, Vec<usize>) {
    let n = mol.atom_count();
    let mut dist = vec![usize::MAX; n];
    let mut parent_edge: Vec<Option<usize>> = vec![None; n];
    let mut parent_node = vec![usize::MAX; n];
    let mut queue = std::collections::VecDeque::new();
    dist[root] = 0;
    queue.push_back(root);
    while let Some(u) = queue.pop_front() {
        for &(v, bi) in mol.neighbors(u) {
            if dist[v] == usize::MAX {
                dist[v] = dist[u] + 1;
                parent_edge[v] = Some(bi);
                parent_node[v] = u;
                queue.push_back(v);
            }
        }
    }
    (dist, parent_edge, parent_node)
}
