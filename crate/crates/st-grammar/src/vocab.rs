//! Token vocabulary with a stable layout.
//!
//! Structural tokens sit at fixed indices so downstream code can rely on
//! them; atom templates are appended in sorted order. The whole vocabulary
//! must fit in 64 tokens so per-step legality fits one `u64`.

use crate::token::{AtomDesc, Token};
use crate::GrammarError;
use mol_core::graph::{BondOrder, MolGraph};
use std::collections::{BTreeMap, BTreeSet};

/// Upper bound on simultaneously reserved ring anchors.
pub const MAX_OPEN_ANCHORS: usize = 24;

/// Number of tokens before the atom templates: bos, eos, branches, ring
/// open, four bond orders and the closure family.
pub const FIXED_TOKENS: usize = 9 + MAX_OPEN_ANCHORS;

pub const MAX_VOCAB: usize = 64;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Vocab {
    tokens: Vec<Token>,
    index: BTreeMap<Token, u16>,
}

impl Vocab {
    /// Assemble the vocabulary from a set of atom templates.
    pub fn new(descs: BTreeSet<AtomDesc>) -> Result<Vocab, GrammarError> {
        let mut tokens = vec![
            Token::Bos,
            Token::Eos,
            Token::BranchOpen,
            Token::BranchClose,
            Token::RingOpen,
            Token::Bond(BondOrder::Single),
            Token::Bond(BondOrder::Double),
            Token::Bond(BondOrder::Triple),
            Token::Bond(BondOrder::Aromatic),
        ];
        for k in 0..MAX_OPEN_ANCHORS {
            tokens.push(Token::RingClose(k as u8));
        }
        debug_assert_eq!(tokens.len(), FIXED_TOKENS);
        for d in descs {
            tokens.push(Token::Atom(d));
        }
        if tokens.len() > MAX_VOCAB {
            return Err(GrammarError::VocabTooLarge(tokens.len()));
        }
        let index = tokens
            .iter()
            .enumerate()
            .map(|(i, t)| (*t, i as u16))
            .collect();
        Ok(Vocab { tokens, index })
    }

    /// Collect atom templates from molecules and build the vocabulary.
    pub fn from_molecules<'a, I>(mols: I) -> Result<Vocab, GrammarError>
    where
        I: IntoIterator<Item = &'a MolGraph>,
    {
        let mut descs = BTreeSet::new();
        for m in mols {
            for a in m.atoms() {
                descs.insert(AtomDesc::from_atom(a));
            }
        }
        Vocab::new(descs)
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn token(&self, id: u16) -> Option<Token> {
        self.tokens.get(id as usize).copied()
    }

    pub fn id(&self, token: &Token) -> Option<u16> {
        self.index.get(token).copied()
    }

    pub fn bos(&self) -> u16 {
        0
    }

    pub fn eos(&self) -> u16 {
        1
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn atom_descs(&self) -> impl Iterator<Item = AtomDesc> + '_ {
        self.tokens.iter().filter_map(|t| match t {
            Token::Atom(d) => Some(*d),
            _ => None,
        })
    }

    /// Text form, one string per token, for embedding in checkpoints.
    pub fn to_strings(&self) -> Vec<String> {
        self.tokens.iter().map(|t| t.to_string()).collect()
    }

    /// Rebuild from the text form, verifying the fixed layout.
    pub fn from_strings(strings: &[String]) -> Result<Vocab, GrammarError> {
        let mut descs = BTreeSet::new();
        for (i, s) in strings.iter().enumerate() {
            let tok: Token = s.parse()?;
            if i < FIXED_TOKENS {
                continue;
            }
            match tok {
                Token::Atom(d) => {
                    descs.insert(d);
                }
                other => return Err(GrammarError::UnknownToken(other.to_string())),
            }
        }
        let vocab = Vocab::new(descs)?;
        if vocab.to_strings() != strings {
            return Err(GrammarError::UnknownToken(
                "vocabulary layout mismatch".to_string(),
            ));
        }
        Ok(vocab)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use mol_core::parse::parse_smiles;

    #[test]
    fn layout_is_stable() {
        let mols: Vec<MolGraph> = ["c1ccccc1", "CC(=O)N", "F[B-](F)(F)F"]
            .iter()
            .map(|s| parse_smiles(s).unwrap())
            .collect();
        let v = Vocab::from_molecules(&mols).unwrap();
        assert_eq!(v.token(v.bos()), Some(Token::Bos));
        assert_eq!(v.token(v.eos()), Some(Token::Eos));
        assert_eq!(v.token(4), Some(Token::RingOpen));
        assert_eq!(v.token(5), Some(Token::Bond(BondOrder::Single)));
        assert_eq!(
            v.token(9 + 3),
            Some(Token::RingClose(3)),
            "closure block starts after the bonds"
        );
        // Atom templates sit after the fixed block, sorted and deduplicated.
        let descs: Vec<AtomDesc> = v.atom_descs().collect();
        assert!(descs.windows(2).all(|w| w[0] < w[1]));
        assert!(descs.iter().any(|d| d.aromatic));
        assert!(v.len() <= MAX_VOCAB);
    }

    #[test]
    fn string_roundtrip() {
        let mols: Vec<MolGraph> = ["c1cc[nH]c1", "C[N+](C)(C)C"]
            .iter()
            .map(|s| parse_smiles(s).unwrap())
            .collect();
        let v = Vocab::from_molecules(&mols).unwrap();
        let strings = v.to_strings();
        let back = Vocab::from_strings(&strings).unwrap();
        assert_eq!(back, v);
    }

    #[test]
    fn ids_invert_tokens() {
        let mols: Vec<MolGraph> = vec![parse_smiles("CCO").unwrap()];
        let v = Vocab::from_molecules(&mols).unwrap();
        for id in 0..v.len() as u16 {
            let t = v.token(id).unwrap();
            assert_eq!(v.id(&t), Some(id));
        }
        assert_eq!(v.token(v.len() as u16), None);
    }
}
