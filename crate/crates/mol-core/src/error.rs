use thiserror::Error;

/// Errors from parsing, construction and validation of molecular graphs.
///
/// Offsets are byte positions into the source SMILES when the error comes
/// from `parse_smiles`; errors raised during direct graph construction carry
/// atom indices instead and no offset.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum MolError {
    #[error("unsupported element {symbol:?} at byte {offset}")]
    UnsupportedElement { offset: usize, symbol: String },

    #[error("syntax error at byte {offset}: {msg}")]
    Syntax { offset: usize, msg: String },

    #[error("ring bond {label} opened at byte {offset} is never closed")]
    UnclosedRing { offset: usize, label: String },

    #[error("valence violation on atom {atom}{}: {detail}", fmt_offset(.offset))]
    Valence {
        atom: usize,
        offset: Option<usize>,
        detail: String,
    },

    #[error("aromaticity violation on atom {atom}{}: {detail}", fmt_offset(.offset))]
    Aromaticity {
        atom: usize,
        offset: Option<usize>,
        detail: String,
    },

    #[error("bond chemistry violation between atoms {a} and {b}: {detail}")]
    Chemistry { a: usize, b: usize, detail: String },

    #[error("graph structure error: {0}")]
    Structure(String),
}

fn fmt_offset(offset: &Option<usize>) -> String {
    match offset {
        Some(o) => format!(" (byte {o})"),
        None => String::new(),
    }
}

impl MolError {
    /// Attach a byte offset to construction-time errors that lack one.
    pub(crate) fn with_offset(self, off: usize) -> MolError {
        match self {
            MolError::Valence { atom, offset: None, detail } => MolError::Valence {
                atom,
                offset: Some(off),
                detail,
            },
            MolError::Aromaticity { atom, offset: None, detail } => MolError::Aromaticity {
                atom,
                offset: Some(off),
                detail,
            },
            other => other,
        }
    }

    /// Atom index the error refers to, when it refers to one.
    pub fn atom(&self) -> Option<usize> {
        match self {
            MolError::Valence { atom, .. } | MolError::Aromaticity { atom, .. } => Some(*atom),
            _ => None,
        }
    }
}
