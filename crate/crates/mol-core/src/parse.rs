//! SMILES parser.
//!
//! Supports the element subset B/C/N/O/F/S/Cl/Br, charges -1/0/+1 by
//! default (anything the valence table covers), aromatic lowercase forms,
//! bracket atoms with explicit hydrogen and charge, ring-bond labels `1`-`9`
//! and `%nn` with label reuse, and explicit bond orders `-`, `=`, `#`, `:`.
//! Stereochemistry, isotopes and disconnected structures are rejected with
//! byte-accurate errors.

use std::collections::HashMap;

use crate::element::{Element, ValenceTable};
use crate::error::MolError;
use crate::graph::{Atom, Bond, BondOrder, MolGraph};

/// Attachment site parsed from a `[*:n]` marker: the real atom it was bonded
/// to and the marker number.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Attachment {
    pub atom: usize,
    pub marker: u8,
}

/// Parse a SMILES string against the default valence table.
pub fn parse_smiles(text: &str) -> Result<MolGraph, MolError> {
    parse_with_options(text, &ValenceTable::default(), false).map(|(m, _)| m)
}

pub fn parse_smiles_with_table(text: &str, table: &ValenceTable) -> Result<MolGraph, MolError> {
    parse_with_options(text, table, false).map(|(m, _)| m)
}

/// Parse a SMILES string that may contain `[*:n]` attachment markers. The
/// markers are removed from the graph; each contributes an `Attachment` on
/// the atom it was bonded to. Markers must carry exactly one single bond.
pub fn parse_smiles_with_attachments(
    text: &str,
) -> Result<(MolGraph, Vec<Attachment>), MolError> {
    parse_with_options(text, &ValenceTable::default(), true)
}

#[derive(Debug, Clone, Copy)]
enum NodeKind {
    Atom(Atom),
    Star(u8),
}

struct RingOpen {
    node: usize,
    order: Option<BondOrder>,
    offset: usize,
    label: String,
}

struct RawBond {
    a: usize,
    b: usize,
    order: Option<BondOrder>,
    offset: usize,
}

fn syntax(offset: usize, msg: impl Into<String>) -> MolError {
    MolError::Syntax {
        offset,
        msg: msg.into(),
    }
}

fn parse_with_options(
    text: &str,
    table: &ValenceTable,
    allow_star: bool,
) -> Result<(MolGraph, Vec<Attachment>), MolError> {
    let src = text.as_bytes();
    let mut pos = 0usize;
    let mut nodes: Vec<(NodeKind, usize)> = Vec::new();
    let mut raw_bonds: Vec<RawBond> = Vec::new();
    let mut prev: Option<usize> = None;
    let mut pending: Option<(BondOrder, usize)> = None;
    let mut stack: Vec<usize> = Vec::new();
    let mut rings: HashMap<u16, RingOpen> = HashMap::new();

    let node_aromatic = |nodes: &[(NodeKind, usize)], i: usize| match nodes[i].0 {
        NodeKind::Atom(a) => a.aromatic,
        NodeKind::Star(_) => false,
    };

    while pos < src.len() {
        let c = src[pos];
        match c {
            b'(' => {
                let Some(p) = prev else {
                    return Err(syntax(pos, "branch opened before any atom"));
                };
                if pending.is_some() {
                    return Err(syntax(pos, "bond cannot precede a branch opening"));
                }
                stack.push(p);
                pos += 1;
            }
            b')' => {
                if pending.is_some() {
                    return Err(syntax(pos, "dangling bond before ')'"));
                }
                let Some(p) = stack.pop() else {
                    return Err(syntax(pos, "unmatched ')'"));
                };
                prev = Some(p);
                pos += 1;
            }
            b'-' | b'=' | b'#' | b':' => {
                if prev.is_none() {
                    return Err(syntax(pos, "bond before any atom"));
                }
                if pending.is_some() {
                    return Err(syntax(pos, "two bond symbols in a row"));
                }
                let order = match c {
                    b'-' => BondOrder::Single,
                    b'=' => BondOrder::Double,
                    b'#' => BondOrder::Triple,
                    _ => BondOrder::Aromatic,
                };
                pending = Some((order, pos));
                pos += 1;
            }
            b'/' | b'\\' => {
                return Err(syntax(pos, "stereo bonds are not supported"));
            }
            b'.' => {
                return Err(syntax(pos, "disconnected structures are not supported"));
            }
            b'0'..=b'9' | b'%' => {
                let start = pos;
                let label: u16;
                if c == b'%' {
                    if pos + 2 >= src.len()
                        || !src[pos + 1].is_ascii_digit()
                        || !src[pos + 2].is_ascii_digit()
                    {
                        return Err(syntax(pos, "'%' must be followed by two digits"));
                    }
                    label = u16::from(src[pos + 1] - b'0') * 10 + u16::from(src[pos + 2] - b'0');
                    pos += 3;
                } else {
                    label = u16::from(c - b'0');
                    pos += 1;
                }
                let Some(p) = prev else {
                    return Err(syntax(start, "ring bond before any atom"));
                };
                let taken = pending.take();
                if let Some(open) = rings.remove(&label) {
                    if open.node == p {
                        return Err(syntax(start, "ring bond closes onto its own atom"));
                    }
                    let order = match (open.order, taken.map(|(o, _)| o)) {
                        (Some(a), Some(b)) if a != b => {
                            return Err(syntax(
                                start,
                                "conflicting bond orders on ring closure",
                            ));
                        }
                        (Some(a), _) => Some(a),
                        (None, b) => b,
                    };
                    raw_bonds.push(RawBond {
                        a: open.node,
                        b: p,
                        order,
                        offset: start,
                    });
                } else {
                    rings.insert(
                        label,
                        RingOpen {
                            node: p,
                            order: taken.map(|(o, _)| o),
                            offset: start,
                            label: if c == b'%' {
                                format!("%{label:02}")
                            } else {
                                label.to_string()
                            },
                        },
                    );
                }
            }
            b'[' => {
                let (node, consumed) = parse_bracket(src, pos, allow_star)?;
                let idx = nodes.len();
                nodes.push((node, pos));
                connect(&mut raw_bonds, prev, idx, &mut pending, pos);
                prev = Some(idx);
                pos += consumed;
            }
            _ => {
                let (atom, consumed) = parse_plain_atom(src, pos)?;
                let idx = nodes.len();
                nodes.push((NodeKind::Atom(atom), pos));
                connect(&mut raw_bonds, prev, idx, &mut pending, pos);
                prev = Some(idx);
                pos += consumed;
            }
        }
    }

    if let Some((_, off)) = pending {
        return Err(syntax(off, "dangling bond at end of input"));
    }
    if !stack.is_empty() {
        return Err(syntax(src.len(), "unclosed branch"));
    }
    if !rings.is_empty() {
        let open = rings
            .values()
            .min_by_key(|o| o.offset)
            .expect("non-empty ring map");
        return Err(MolError::UnclosedRing {
            offset: open.offset,
            label: open.label.clone(),
        });
    }
    if nodes.is_empty() {
        return Err(syntax(0, "no atoms"));
    }

    // Resolve default bond orders now that both endpoints are known.
    let mut resolved: Vec<(usize, usize, BondOrder, usize)> = Vec::new();
    for rb in &raw_bonds {
        let order = rb.order.unwrap_or({
            if node_aromatic(&nodes, rb.a) && node_aromatic(&nodes, rb.b) {
                BondOrder::Aromatic
            } else {
                BondOrder::Single
            }
        });
        resolved.push((rb.a, rb.b, order, rb.offset));
    }

    // Strip star nodes, collecting attachments.
    let mut real_index = vec![usize::MAX; nodes.len()];
    let mut atoms: Vec<Atom> = Vec::new();
    let mut atom_offsets: Vec<usize> = Vec::new();
    for (i, (kind, off)) in nodes.iter().enumerate() {
        if let NodeKind::Atom(a) = kind {
            real_index[i] = atoms.len();
            atoms.push(*a);
            atom_offsets.push(*off);
        }
    }
    let mut attachments: Vec<Attachment> = Vec::new();
    let mut bonds: Vec<Bond> = Vec::new();
    let mut star_bond_count: HashMap<usize, usize> = HashMap::new();
    for (a, b, order, offset) in resolved {
        let star_a = matches!(nodes[a].0, NodeKind::Star(_));
        let star_b = matches!(nodes[b].0, NodeKind::Star(_));
        match (star_a, star_b) {
            (false, false) => bonds.push(Bond {
                a: real_index[a],
                b: real_index[b],
                order,
            }),
            (true, true) => {
                return Err(syntax(offset, "attachment markers cannot bond each other"))
            }
            _ => {
                let (star, real) = if star_a { (a, b) } else { (b, a) };
                if order != BondOrder::Single {
                    return Err(syntax(
                        offset,
                        "attachment markers must use single bonds",
                    ));
                }
                *star_bond_count.entry(star).or_insert(0) += 1;
                let NodeKind::Star(marker) = nodes[star].0 else {
                    unreachable!()
                };
                attachments.push(Attachment {
                    atom: real_index[real],
                    marker,
                });
            }
        }
    }
    for (i, (kind, off)) in nodes.iter().enumerate() {
        if matches!(kind, NodeKind::Star(_)) && star_bond_count.get(&i).copied().unwrap_or(0) != 1
        {
            return Err(syntax(*off, "attachment marker must have exactly one bond"));
        }
    }
    attachments.sort_by_key(|a| (a.atom, a.marker));

    let graph = MolGraph::with_table(atoms, bonds, table).map_err(|e| {
        let off = e.atom().map(|i| atom_offsets[i]);
        match off {
            Some(o) => e.with_offset(o),
            None => e,
        }
    })?;
    Ok((graph, attachments))
}

fn connect(
    raw_bonds: &mut Vec<RawBond>,
    prev: Option<usize>,
    new: usize,
    pending: &mut Option<(BondOrder, usize)>,
    offset: usize,
) {
    if let Some(p) = prev {
        let order = pending.take().map(|(o, _)| o);
        raw_bonds.push(RawBond {
            a: p,
            b: new,
            order,
            offset,
        });
    }
}

/// Parse an atom written without brackets. Returns the atom and bytes consumed.
fn parse_plain_atom(src: &[u8], pos: usize) -> Result<(Atom, usize), MolError> {
    let c = src[pos];
    // Two-letter elements first.
    if c == b'C' && src.get(pos + 1) == Some(&b'l') {
        return Ok((Atom::new(Element::Cl), 2));
    }
    if c == b'B' && src.get(pos + 1) == Some(&b'r') {
        return Ok((Atom::new(Element::Br), 2));
    }
    let (element, aromatic) = match c {
        b'B' => (Element::B, false),
        b'C' => (Element::C, false),
        b'N' => (Element::N, false),
        b'O' => (Element::O, false),
        b'F' => (Element::F, false),
        b'S' => (Element::S, false),
        b'b' => (Element::B, true),
        b'c' => (Element::C, true),
        b'n' => (Element::N, true),
        b'o' => (Element::O, true),
        b's' => (Element::S, true),
        _ => {
            let symbol = (c as char).to_string();
            return Err(if c.is_ascii_alphabetic() {
                MolError::UnsupportedElement {
                    offset: pos,
                    symbol,
                }
            } else {
                syntax(pos, format!("unexpected character {:?}", c as char))
            });
        }
    };
    let mut atom = Atom::new(element);
    atom.aromatic = aromatic;
    Ok((atom, 1))
}

/// Parse a bracket expression starting at `pos` (which must hold `[`).
/// Returns the node and total bytes consumed including both brackets.
fn parse_bracket(src: &[u8], pos: usize, allow_star: bool) -> Result<(NodeKind, usize), MolError> {
    let mut i = pos + 1;
    let err_end = || syntax(pos, "unterminated bracket atom");
    if i >= src.len() {
        return Err(err_end());
    }

    if src[i] == b'*' {
        if !allow_star {
            return Err(MolError::UnsupportedElement {
                offset: pos,
                symbol: "*".into(),
            });
        }
        i += 1;
        if src.get(i) != Some(&b':') {
            return Err(syntax(i.min(src.len()), "attachment marker needs ':n'"));
        }
        i += 1;
        let start = i;
        while i < src.len() && src[i].is_ascii_digit() {
            i += 1;
        }
        if start == i {
            return Err(syntax(start.min(src.len()), "attachment marker needs a number"));
        }
        let digits = std::str::from_utf8(&src[start..i]).expect("ascii digits");
        let marker: u8 = digits
            .parse()
            .map_err(|_| syntax(start, "attachment marker number out of range"))?;
        if src.get(i) != Some(&b']') {
            return Err(err_end());
        }
        return Ok((NodeKind::Star(marker), i + 1 - pos));
    }

    if src[i].is_ascii_digit() {
        return Err(syntax(i, "isotopes are not supported"));
    }

    // Element symbol: uppercase (+optional lowercase) or aromatic lowercase.
    let (element, aromatic) = if src[i].is_ascii_uppercase() {
        let two = if i + 1 < src.len() && src[i + 1].is_ascii_lowercase() {
            std::str::from_utf8(&src[i..i + 2]).ok()
        } else {
            None
        };
        // Lowercase continuation belongs to the symbol unless it is an 'H'
        // spec or the bracket content continues with a recognized field.
        if let Some(two_str) = two {
            if let Some(e) = Element::from_symbol(two_str) {
                i += 2;
                (e, false)
            } else {
                return Err(MolError::UnsupportedElement {
                    offset: i,
                    symbol: two_str.to_string(),
                });
            }
        } else {
            let one = std::str::from_utf8(&src[i..i + 1]).expect("ascii");
            match Element::from_symbol(one) {
                Some(e) => {
                    i += 1;
                    (e, false)
                }
                None => {
                    return Err(MolError::UnsupportedElement {
                        offset: i,
                        symbol: one.to_string(),
                    })
                }
            }
        }
    } else {
        let (e, _) = match src[i] {
            b'b' => (Element::B, ()),
            b'c' => (Element::C, ()),
            b'n' => (Element::N, ()),
            b'o' => (Element::O, ()),
            b's' => (Element::S, ()),
            other => {
                return Err(MolError::UnsupportedElement {
                    offset: i,
                    symbol: (other as char).to_string(),
                })
            }
        };
        i += 1;
        (e, true)
    };

    if i < src.len() && src[i] == b'@' {
        return Err(syntax(i, "stereochemistry is not supported"));
    }

    let mut explicit_h: u8 = 0;
    if i < src.len() && src[i] == b'H' {
        i += 1;
        if i < src.len() && src[i].is_ascii_digit() {
            let start = i;
            while i < src.len() && src[i].is_ascii_digit() {
                i += 1;
            }
            let digits = std::str::from_utf8(&src[start..i]).expect("ascii digits");
            explicit_h = digits
                .parse()
                .map_err(|_| syntax(start, "hydrogen count out of range"))?;
        } else {
            explicit_h = 1;
        }
    }

    let mut charge: i8 = 0;
    if i < src.len() && (src[i] == b'+' || src[i] == b'-') {
        let sign: i8 = if src[i] == b'+' { 1 } else { -1 };
        let sign_char = src[i];
        i += 1;
        if i < src.len() && src[i].is_ascii_digit() {
            let start = i;
            while i < src.len() && src[i].is_ascii_digit() {
                i += 1;
            }
            let digits = std::str::from_utf8(&src[start..i]).expect("ascii digits");
            let magnitude: i8 = digits
                .parse()
                .map_err(|_| syntax(start, "charge out of range"))?;
            charge = sign * magnitude;
        } else {
            charge = sign;
            while i < src.len() && src[i] == sign_char {
                charge += sign;
                i += 1;
            }
        }
    }

    if i >= src.len() || src[i] != b']' {
        return Err(if i < src.len() {
            syntax(i, "unexpected character in bracket atom")
        } else {
            err_end()
        });
    }
    i += 1;

    let atom = Atom {
        element,
        charge,
        aromatic,
        explicit_h: Some(explicit_h),
    };
    Ok((NodeKind::Atom(atom), i - pos))
}
