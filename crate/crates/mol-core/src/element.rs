//! Element set and the valence table.

use std::collections::BTreeMap;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Element {
    B,
    C,
    N,
    O,
    F,
    S,
    Cl,
    Br,
}

pub const ALL_ELEMENTS: [Element; 8] = [
    Element::B,
    Element::C,
    Element::N,
    Element::O,
    Element::F,
    Element::S,
    Element::Cl,
    Element::Br,
];

impl Element {
    pub fn symbol(self) -> &'static str {
        match self {
            Element::B => "B",
            Element::C => "C",
            Element::N => "N",
            Element::O => "O",
            Element::F => "F",
            Element::S => "S",
            Element::Cl => "Cl",
            Element::Br => "Br",
        }
    }

    pub fn from_symbol(s: &str) -> Option<Element> {
        Some(match s {
            "B" => Element::B,
            "C" => Element::C,
            "N" => Element::N,
            "O" => Element::O,
            "F" => Element::F,
            "S" => Element::S,
            "Cl" => Element::Cl,
            "Br" => Element::Br,
            _ => return None,
        })
    }

    /// Stable small code, used in hashes and certificates.
    pub fn code(self) -> u8 {
        match self {
            Element::B => 0,
            Element::C => 1,
            Element::N => 2,
            Element::O => 3,
            Element::F => 4,
            Element::S => 5,
            Element::Cl => 6,
            Element::Br => 7,
        }
    }

    /// Elements allowed to carry the aromatic flag.
    pub fn aromatic_capable(self) -> bool {
        matches!(
            self,
            Element::B | Element::C | Element::N | Element::O | Element::S
        )
    }

    /// Neutral aromatic atoms of these elements may donate a lone pair to the
    /// ring, in which case each aromatic bond costs one valence unit instead
    /// of one and a half.
    pub fn lone_pair_donor(self) -> bool {
        matches!(self, Element::N | Element::O | Element::S)
    }
}

/// Allowed total valences per (element, formal charge).
///
/// The default table covers the charge states the corpus uses; other
/// combinations are rejected. The table can be extended or replaced through
/// configuration before parsing.
#[derive(Debug, Clone, PartialEq)]
pub struct ValenceTable {
    entries: BTreeMap<(Element, i8), Vec<u8>>,
}

impl Default for ValenceTable {
    fn default() -> Self {
        let mut entries = BTreeMap::new();
        let mut put = |e: Element, q: i8, v: &[u8]| {
            entries.insert((e, q), v.to_vec());
        };
        put(Element::B, 0, &[3]);
        put(Element::B, -1, &[4]);
        put(Element::C, 0, &[4]);
        put(Element::N, 0, &[3]);
        put(Element::N, 1, &[4]);
        put(Element::O, 0, &[2]);
        put(Element::S, 0, &[2, 4, 6]);
        put(Element::F, 0, &[1]);
        put(Element::Cl, 0, &[1]);
        put(Element::Br, 0, &[1]);
        ValenceTable { entries }
    }
}

impl ValenceTable {
    /// Allowed valences for an element/charge pair, ascending. `None` when
    /// the combination is unsupported.
    pub fn allowed(&self, element: Element, charge: i8) -> Option<&[u8]> {
        self.entries.get(&(element, charge)).map(|v| v.as_slice())
    }

    pub fn max_allowed(&self, element: Element, charge: i8) -> Option<u8> {
        self.allowed(element, charge).and_then(|v| v.last().copied())
    }

    /// Override or add the allowed valences for one element/charge pair.
    pub fn set(&mut self, element: Element, charge: i8, valences: Vec<u8>) {
        let mut v = valences;
        v.sort_unstable();
        v.dedup();
        self.entries.insert((element, charge), v);
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symbols_roundtrip() {
        for e in ALL_ELEMENTS {
            assert_eq!(Element::from_symbol(e.symbol()), Some(e));
        }
        assert_eq!(Element::from_symbol("P"), None);
        assert_eq!(Element::from_symbol("c"), None);
    }

    #[test]
    fn codes_are_distinct() {
        let mut codes: Vec<u8> = ALL_ELEMENTS.iter().map(|e| e.code()).collect();
        codes.sort_unstable();
        codes.dedup();
        assert_eq!(codes.len(), ALL_ELEMENTS.len());
    }

    #[test]
    fn default_table_rows() {
        let t = ValenceTable::default();
        assert_eq!(t.allowed(Element::C, 0), Some(&[4][..]));
        assert_eq!(t.allowed(Element::S, 0), Some(&[2, 4, 6][..]));
        assert_eq!(t.allowed(Element::N, 1), Some(&[4][..]));
        assert_eq!(t.allowed(Element::B, -1), Some(&[4][..]));
        assert_eq!(t.allowed(Element::C, 1), None);
        assert_eq!(t.max_allowed(Element::S, 0), Some(6));
    }

    #[test]
    fn set_sorts_and_dedups() {
        let mut t = ValenceTable::default();
        t.set(Element::N, 0, vec![5, 3, 3]);
        assert_eq!(t.allowed(Element::N, 0), Some(&[3, 5][..]));
    }

    #[test]
    fn halogens_cannot_be_aromatic() {
        assert!(!Element::F.aromatic_capable());
        assert!(!Element::Cl.aromatic_capable());
        assert!(!Element::Br.aromatic_capable());
        assert!(Element::B.aromatic_capable());
        assert!(!Element::B.lone_pair_donor());
        assert!(!Element::C.lone_pair_donor());
        assert!(Element::S.lone_pair_donor());
    }
}
