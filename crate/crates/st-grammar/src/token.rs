//! Token alphabet for sequential molecule construction.

use crate::GrammarError;
use mol_core::element::Element;
use mol_core::graph::{Atom, BondOrder};
use std::fmt;

/// Atom template as it appears in the vocabulary: element, formal charge,
/// aromatic flag and an optional pinned hydrogen count. A pinned count must
/// be met exactly; `None` lets the hydrogen count fall out of the valence
/// rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct AtomDesc {
    pub element: Element,
    pub charge: i8,
    pub aromatic: bool,
    pub explicit_h: Option<u8>,
}

impl AtomDesc {
    pub fn from_atom(a: &Atom) -> AtomDesc {
        AtomDesc {
            element: a.element,
            charge: a.charge,
            aromatic: a.aromatic,
            explicit_h: a.explicit_h,
        }
    }

    pub fn to_atom(self) -> Atom {
        Atom {
            element: self.element,
            charge: self.charge,
            aromatic: self.aromatic,
            explicit_h: self.explicit_h,
        }
    }

    fn bracket(&self) -> bool {
        self.charge != 0 || self.explicit_h.is_some()
    }
}

impl fmt::Display for AtomDesc {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sym = self.element.symbol();
        let cased = if self.aromatic {
            sym.to_ascii_lowercase()
        } else {
            sym.to_string()
        };
        if !self.bracket() {
            return write!(f, "{cased}");
        }
        write!(f, "[{cased}")?;
        match self.explicit_h {
            Some(1) => write!(f, "H")?,
            Some(h) if h > 1 => write!(f, "H{h}")?,
            _ => {}
        }
        match self.charge {
            0 => {}
            1 => write!(f, "+")?,
            -1 => write!(f, "-")?,
            q if q > 0 => write!(f, "+{q}")?,
            q => write!(f, "-{}", -q)?,
        }
        write!(f, "]")
    }
}

impl std::str::FromStr for AtomDesc {
    type Err = GrammarError;

    fn from_str(s: &str) -> Result<AtomDesc, GrammarError> {
        let bad = || GrammarError::UnknownToken(s.to_string());
        let inner = match s.strip_prefix('[') {
            Some(rest) => rest.strip_suffix(']').ok_or_else(bad)?,
            None => {
                // Bare symbol: neutral, derived hydrogens.
                let aromatic = s.chars().next().is_some_and(|c| c.is_ascii_lowercase());
                let sym = capitalize(s);
                let element = Element::from_symbol(&sym).ok_or_else(bad)?;
                return Ok(AtomDesc {
                    element,
                    charge: 0,
                    aromatic,
                    explicit_h: None,
                });
            }
        };
        let bytes = inner.as_bytes();
        let mut i = 0;
        while i < bytes.len() && bytes[i].is_ascii_alphabetic() && bytes[i] != b'H' {
            i += 1;
        }
        // Two-letter symbols keep their lowercase second letter; a lone 'H'
        // after the first letter is the hydrogen marker.
        if i == 0 {
            return Err(bad());
        }
        let sym_str = &inner[..i];
        let aromatic = sym_str.chars().next().is_some_and(|c| c.is_ascii_lowercase());
        let element = Element::from_symbol(&capitalize(sym_str)).ok_or_else(bad)?;
        let mut explicit_h: u8 = 0;
        if i < bytes.len() && bytes[i] == b'H' {
            i += 1;
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            explicit_h = if start == i {
                1
            } else {
                inner[start..i].parse().map_err(|_| bad())?
            };
        }
        let mut charge: i8 = 0;
        if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
            let sign: i8 = if bytes[i] == b'+' { 1 } else { -1 };
            i += 1;
            let start = i;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
            }
            let mag: i8 = if start == i {
                1
            } else {
                inner[start..i].parse().map_err(|_| bad())?
            };
            charge = sign * mag;
        }
        if i != bytes.len() {
            return Err(bad());
        }
        Ok(AtomDesc {
            element,
            charge,
            aromatic,
            explicit_h: Some(explicit_h),
        })
    }
}

fn capitalize(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    let mut chars = s.chars();
    if let Some(c) = chars.next() {
        out.push(c.to_ascii_uppercase());
    }
    out.extend(chars);
    out
}

/// One step of the construction sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Token {
    Bos,
    Eos,
    BranchOpen,
    BranchClose,
    /// Reserve a future ring bond at the focus atom.
    RingOpen,
    /// Bond the focus atom to the k-th currently reserved anchor, counted in
    /// opening order. The bond order is the pending bond if one was issued,
    /// otherwise aromatic when both endpoints are aromatic and single else.
    RingClose(u8),
    /// Set the order of the next bond (to a new atom or a ring closure).
    Bond(BondOrder),
    Atom(AtomDesc),
}

impl fmt::Display for Token {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Token::Bos => write!(f, "<bos>"),
            Token::Eos => write!(f, "<eos>"),
            Token::BranchOpen => write!(f, "("),
            Token::BranchClose => write!(f, ")"),
            Token::RingOpen => write!(f, "<ring>"),
            Token::RingClose(k) => write!(f, "<join{k}>"),
            Token::Bond(BondOrder::Single) => write!(f, "-"),
            Token::Bond(BondOrder::Double) => write!(f, "="),
            Token::Bond(BondOrder::Triple) => write!(f, "#"),
            Token::Bond(BondOrder::Aromatic) => write!(f, ":"),
            Token::Atom(d) => write!(f, "{d}"),
        }
    }
}

impl std::str::FromStr for Token {
    type Err = GrammarError;

    fn from_str(s: &str) -> Result<Token, GrammarError> {
        Ok(match s {
            "<bos>" => Token::Bos,
            "<eos>" => Token::Eos,
            "(" => Token::BranchOpen,
            ")" => Token::BranchClose,
            "<ring>" => Token::RingOpen,
            "-" => Token::Bond(BondOrder::Single),
            "=" => Token::Bond(BondOrder::Double),
            "#" => Token::Bond(BondOrder::Triple),
            ":" => Token::Bond(BondOrder::Aromatic),
            other => {
                if let Some(rest) = other.strip_prefix("<join") {
                    let k = rest
                        .strip_suffix('>')
                        .and_then(|d| d.parse().ok())
                        .ok_or_else(|| GrammarError::UnknownToken(other.to_string()))?;
                    Token::RingClose(k)
                } else {
                    Token::Atom(other.parse()?)
                }
            }
        })
    }
}
