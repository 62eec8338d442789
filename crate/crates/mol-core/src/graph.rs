//! Molecular graph type and validation.

use crate::element::{Element, ValenceTable};
use crate::error::MolError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Valence contribution in half-units: single 2, aromatic 3, double 4,
    /// triple 6.
    pub fn half_units(self) -> u32 {
        match self {
            BondOrder::Single => 2,
            BondOrder::Double => 4,
            BondOrder::Triple => 6,
            BondOrder::Aromatic => 3,
        }
    }

    /// Whole valence units for non-aromatic orders.
    pub fn units(self) -> u32 {
        match self {
            BondOrder::Single => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
            BondOrder::Aromatic => panic!("aromatic bonds have no whole-unit cost"),
        }
    }

    pub fn code(self) -> u8 {
        match self {
            BondOrder::Single => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
            BondOrder::Aromatic => 4,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Atom {
    pub element: Element,
    pub charge: i8,
    pub aromatic: bool,
    /// Hydrogen count fixed by a bracket expression; `None` means the count
    /// is derived from the valence table.
    pub explicit_h: Option<u8>,
}

impl Atom {
    pub fn new(element: Element) -> Atom {
        Atom {
            element,
            charge: 0,
            aromatic: false,
            explicit_h: None,
        }
    }

    pub fn aromatic(element: Element) -> Atom {
        Atom {
            element,
            charge: 0,
            aromatic: true,
            explicit_h: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub order: BondOrder,
}

impl Bond {
    pub fn other(&self, atom: usize) -> usize {
        if atom == self.a {
            self.b
        } else {
            self.a
        }
    }
}

/// Split of an atom's bond consumption: `aromatic` counts aromatic bonds,
/// `units` sums the whole-unit cost of the rest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct BondLoad {
    pub aromatic: u32,
    pub units: u32,
}

impl BondLoad {
    pub fn add(&mut self, order: BondOrder) {
        match order {
            BondOrder::Aromatic => self.aromatic += 1,
            other => self.units += other.units(),
        }
    }

    /// Total under the pi accounting: 1.5 per aromatic bond, floored.
    pub fn pi_total(&self) -> u32 {
        (3 * self.aromatic) / 2 + self.units
    }

    /// Total when the atom donates a lone pair: 1.0 per aromatic bond.
    pub fn donor_total(&self) -> u32 {
        self.aromatic + self.units
    }
}

/// Smallest hydrogen count completing the atom to an allowed valence, or
/// `None` when no completion exists. Considers both aromatic accounting modes
/// where the atom qualifies.
pub fn derive_hydrogens(atom: &Atom, load: BondLoad, table: &ValenceTable) -> Option<u8> {
    let allowed = table.allowed(atom.element, atom.charge)?;
    let mut totals = vec![load.pi_total()];
    if atom.aromatic
        && atom.charge == 0
        && atom.element.lone_pair_donor()
        && load.aromatic > 0
    {
        totals.push(load.donor_total());
    }
    let mut best: Option<u8> = None;
    for &t in allowed {
        for &total in &totals {
            if u32::from(t) >= total {
                let h = (u32::from(t) - total) as u8;
                best = Some(match best {
                    Some(b) => b.min(h),
                    None => h,
                });
            }
        }
    }
    best
}

/// Check that `load` plus a fixed hydrogen count reaches an allowed valence
/// exactly, under at least one accounting mode.
pub fn hydrogens_consistent(atom: &Atom, load: BondLoad, h: u8, table: &ValenceTable) -> bool {
    let Some(allowed) = table.allowed(atom.element, atom.charge) else {
        return false;
    };
    let mut totals = vec![load.pi_total() + u32::from(h)];
    if atom.aromatic
        && atom.charge == 0
        && atom.element.lone_pair_donor()
        && load.aromatic > 0
    {
        totals.push(load.donor_total() + u32::from(h));
    }
    allowed
        .iter()
        .any(|&t| totals.iter().any(|&total| total == u32::from(t)))
}

/// Immutable, validated molecular graph.
#[derive(Debug, Clone)]
pub struct MolGraph {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    adjacency: Vec<Vec<(usize, usize)>>,
    hydrogens: Vec<u8>,
}

impl MolGraph {
    /// Build and validate a graph against the default valence table.
    pub fn new(atoms: Vec<Atom>, bonds: Vec<Bond>) -> Result<MolGraph, MolError> {
        MolGraph::with_table(atoms, bonds, &ValenceTable::default())
    }

    pub fn with_table(
        atoms: Vec<Atom>,
        bonds: Vec<Bond>,
        table: &ValenceTable,
    ) -> Result<MolGraph, MolError> {
        if atoms.is_empty() {
            return Err(MolError::Structure("graph has no atoms".into()));
        }
        let n = atoms.len();
        let mut adjacency: Vec<Vec<(usize, usize)>> = vec![Vec::new(); n];
        for (bi, bond) in bonds.iter().enumerate() {
            if bond.a >= n || bond.b >= n {
                return Err(MolError::Structure(format!(
                    "bond {bi} references a missing atom"
                )));
            }
            if bond.a == bond.b {
                return Err(MolError::Structure(format!("bond {bi} is a self-loop")));
            }
            if adjacency[bond.a].iter().any(|&(nb, _)| nb == bond.b) {
                return Err(MolError::Structure(format!(
                    "duplicate bond between atoms {} and {}",
                    bond.a, bond.b
                )));
            }
            adjacency[bond.a].push((bond.b, bi));
            adjacency[bond.b].push((bond.a, bi));
        }

        // Element/charge support and aromatic flags.
        for (i, atom) in atoms.iter().enumerate() {
            if table.allowed(atom.element, atom.charge).is_none() {
                return Err(MolError::Valence {
                    atom: i,
                    offset: None,
                    detail: format!(
                        "no allowed valence for {}{:+}",
                        atom.element.symbol(),
                        atom.charge
                    ),
                });
            }
            if atom.aromatic && !atom.element.aromatic_capable() {
                return Err(MolError::Aromaticity {
                    atom: i,
                    offset: None,
                    detail: format!("{} cannot be aromatic", atom.element.symbol()),
                });
            }
        }

        // Aromatic bonds connect aromatic atoms.
        for bond in &bonds {
            if bond.order == BondOrder::Aromatic
                && !(atoms[bond.a].aromatic && atoms[bond.b].aromatic)
            {
                return Err(MolError::Aromaticity {
                    atom: if atoms[bond.a].aromatic { bond.b } else { bond.a },
                    offset: None,
                    detail: "aromatic bond on a non-aromatic atom".into(),
                });
            }
        }

        // Bond-pattern chemistry. Aromatic atoms keep their multiple-bond
        // character inside the ring system, double bonds at sulfur are the
        // S=O kind, triple bonds are alkyne or nitrile shaped and acyclic,
        // and carbon or nitrogen centers hold at most one double bond.
        let bridge = bridges_of(&adjacency, bonds.len());
        let mut double_count = vec![0u32; n];
        for (bi, bond) in bonds.iter().enumerate() {
            let (ea, eb) = (&atoms[bond.a], &atoms[bond.b]);
            let chem = |detail: String| MolError::Chemistry {
                a: bond.a,
                b: bond.b,
                detail,
            };
            match bond.order {
                BondOrder::Double | BondOrder::Triple if ea.aromatic || eb.aromatic => {
                    return Err(chem("multiple bond on an aromatic atom".into()));
                }
                BondOrder::Double => {
                    double_count[bond.a] += 1;
                    double_count[bond.b] += 1;
                    let paired = (ea.element != Element::S || eb.element == Element::O)
                        && (eb.element != Element::S || ea.element == Element::O);
                    if !paired {
                        return Err(chem("double bond at sulfur without oxygen".into()));
                    }
                }
                BondOrder::Triple => {
                    let pair = (ea.element, eb.element);
                    let shaped = matches!(
                        pair,
                        (Element::C, Element::C)
                            | (Element::C, Element::N)
                            | (Element::N, Element::C)
                    );
                    if !shaped {
                        return Err(chem("triple bond outside alkyne or nitrile".into()));
                    }
                    if !bridge[bi] {
                        return Err(chem("triple bond inside a ring".into()));
                    }
                }
                _ => {}
            }
        }
        for (i, atom) in atoms.iter().enumerate() {
            if double_count[i] > 1 && matches!(atom.element, Element::C | Element::N) {
                return Err(MolError::Chemistry {
                    a: i,
                    b: i,
                    detail: format!("{} atom with cumulated double bonds", atom.element.symbol()),
                });
            }
        }

        // Valence and hydrogen derivation.
        let mut hydrogens = vec![0u8; n];
        for (i, atom) in atoms.iter().enumerate() {
            let mut load = BondLoad::default();
            for &(_, bi) in &adjacency[i] {
                load.add(bonds[bi].order);
            }
            match atom.explicit_h {
                Some(h) => {
                    if !hydrogens_consistent(atom, load, h, table) {
                        return Err(MolError::Valence {
                            atom: i,
                            offset: None,
                            detail: format!(
                                "bond total plus {h} explicit hydrogens reaches no allowed valence"
                            ),
                        });
                    }
                    hydrogens[i] = h;
                }
                None => match derive_hydrogens(atom, load, table) {
                    Some(h) => hydrogens[i] = h,
                    None => {
                        return Err(MolError::Valence {
                            atom: i,
                            offset: None,
                            detail: "bond total exceeds every allowed valence".into(),
                        })
                    }
                },
            }
        }

        let graph = MolGraph {
            atoms,
            bonds,
            adjacency,
            hydrogens,
        };

        // Every aromatic atom lies on a cycle of aromatic bonds: it must have
        // an incident aromatic bond that is not a bridge of the aromatic
        // subgraph.
        let arom_non_bridge = graph.aromatic_cycle_membership();
        for (i, atom) in graph.atoms.iter().enumerate() {
            if atom.aromatic && !arom_non_bridge[i] {
                return Err(MolError::Aromaticity {
                    atom: i,
                    offset: None,
                    detail: "aromatic atom is not on any aromatic cycle".into(),
                });
            }
        }

        // Connectivity.
        if !graph.is_connected() {
            return Err(MolError::Structure("graph is not connected".into()));
        }

        Ok(graph)
    }

    pub fn atom_count(&self) -> usize {
        self.atoms.len()
    }

    pub fn bond_count(&self) -> usize {
        self.bonds.len()
    }

    pub fn atom(&self, i: usize) -> &Atom {
        &self.atoms[i]
    }

    pub fn atoms(&self) -> &[Atom] {
        &self.atoms
    }

    pub fn bond(&self, i: usize) -> &Bond {
        &self.bonds[i]
    }

    pub fn bonds(&self) -> &[Bond] {
        &self.bonds
    }

    /// Hydrogen count per atom (explicit or derived).
    pub fn hydrogens(&self, i: usize) -> u8 {
        self.hydrogens[i]
    }

    /// Neighbors of an atom as (atom index, bond index) pairs, in insertion
    /// order.
    pub fn neighbors(&self, i: usize) -> &[(usize, usize)] {
        &self.adjacency[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adjacency[i].len()
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<&Bond> {
        self.adjacency[a]
            .iter()
            .find(|&&(nb, _)| nb == b)
            .map(|&(_, bi)| &self.bonds[bi])
    }

    pub fn bond_load(&self, i: usize) -> BondLoad {
        let mut load = BondLoad::default();
        for &(_, bi) in &self.adjacency[i] {
            load.add(self.bonds[bi].order);
        }
        load
    }

    fn is_connected(&self) -> bool {
        let n = self.atoms.len();
        let mut seen = vec![false; n];
        let mut stack = vec![0usize];
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = stack.pop() {
            for &(v, _) in &self.adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    stack.push(v);
                }
            }
        }
        count == n
    }

    /// For each atom: whether it has an incident aromatic bond that lies on a
    /// cycle of the aromatic-bond subgraph.
    fn aromatic_cycle_membership(&self) -> Vec<bool> {
        let n = self.atoms.len();
        let arom_adj: Vec<Vec<(usize, usize)>> = (0..n)
            .map(|i| {
                self.adjacency[i]
                    .iter()
                    .copied()
                    .filter(|&(_, bi)| self.bonds[bi].order == BondOrder::Aromatic)
                    .collect()
            })
            .collect();
        let bridge = bridges_of(&arom_adj, self.bonds.len());
        let mut on_cycle = vec![false; n];
        for i in 0..n {
            for &(_, bi) in &arom_adj[i] {
                if !bridge[bi] {
                    on_cycle[i] = true;
                    break;
                }
            }
        }
        on_cycle
    }

    /// Bridge flags per bond of the full graph.
    pub fn bridges(&self) -> Vec<bool> {
        bridges_of(&self.adjacency, self.bonds.len())
    }

    /// Atoms that are members of at least one ring.
    pub fn ring_atoms(&self) -> Vec<bool> {
        let bridge = self.bridges();
        let mut member = vec![false; self.atoms.len()];
        for (bi, bond) in self.bonds.iter().enumerate() {
            if !bridge[bi] {
                member[bond.a] = true;
                member[bond.b] = true;
            }
        }
        member
    }
}

/// Bridges of an undirected graph given as an adjacency list of
/// (neighbor, edge index) pairs. Returns a flag per edge index in
/// `0..edge_count`; edges absent from the adjacency are reported as bridges
/// vacuously.
pub fn bridges_of(adjacency: &[Vec<(usize, usize)>], edge_count: usize) -> Vec<bool> {
    let n = adjacency.len();
    let mut bridge = vec![true; edge_count];
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![usize::MAX; n];
    let mut timer = 0usize;
    // Iterative DFS: frames of (vertex, parent edge, neighbor cursor).
    let mut stack: Vec<(usize, usize, usize)> = Vec::new();
    for start in 0..n {
        if disc[start] != usize::MAX {
            continue;
        }
        disc[start] = timer;
        low[start] = timer;
        timer += 1;
        stack.push((start, usize::MAX, 0));
        while !stack.is_empty() {
            let frame = stack.len() - 1;
            let (u, pe, cursor) = stack[frame];
            if cursor < adjacency[u].len() {
                stack[frame].2 += 1;
                let (v, ei) = adjacency[u][cursor];
                if ei == pe {
                    continue;
                }
                if disc[v] == usize::MAX {
                    disc[v] = timer;
                    low[v] = timer;
                    timer += 1;
                    stack.push((v, ei, 0));
                } else {
                    // Back edge: closes a cycle, so it is not a bridge.
                    bridge[ei] = false;
                    low[u] = low[u].min(disc[v]);
                }
            } else {
                stack.pop();
                if let Some(&(p, _, _)) = stack.last() {
                    low[p] = low[p].min(low[u]);
                    if pe != usize::MAX && low[u] <= disc[p] {
                        bridge[pe] = false;
                    }
                }
            }
        }
    }
    bridge
}
