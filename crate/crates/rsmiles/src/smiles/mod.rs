//! SMILES reading and writing with explicit control over the traversal.
//!
//! A molecule has many valid SMILES strings: one per choice of root atom and
//! branch order. [`parse`] turns any of them into the same graph, and
//! [`write_rooted`] produces the string for one explicit choice, which is the
//! basis for the reaction alignment built on top of this module.
//! [`write_canonical`] fixes both choices deterministically so that equal
//! graphs give equal strings.

mod parser;
mod ranks;
mod token;
mod write;

pub use parser::parse;
pub use ranks::canonical_ranks;
pub use token::{tokenize, TokenSeq, SPLIT_TOKEN};
pub use write::{
    enumerate_random, write_canonical, write_rooted, write_rooted_traced, WriteOrder,
};

use thiserror::Error;

use crate::molgraph::MolError;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum SmilesError {
    #[error("unrecognized character {found:?} at byte {position}")]
    Tokenize { position: usize, found: char },
    #[error("{kind} at byte {position}")]
    Parse {
        position: usize,
        kind: ParseErrorKind,
    },
    #[error("root atom index {root} is out of range")]
    InvalidRoot { root: usize },
    #[error("more than 99 ring closures open at the same time")]
    RingDigitsExhausted,
    #[error(transparent)]
    Mol(#[from] MolError),
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    #[error("empty SMILES")]
    EmptyInput,
    #[error("unmatched ring closure {0}")]
    UnmatchedRingClosure(u16),
    #[error("unbalanced parenthesis")]
    UnbalancedParenthesis,
    #[error("dangling bond symbol")]
    DanglingBond,
    #[error("malformed bracket atom")]
    MalformedBracket,
    #[error("unexpected token {0:?}")]
    UnexpectedToken(String),
    #[error("unsupported bond symbol {0:?}")]
    UnsupportedBond(String),
    #[error("ring closure bond symbols disagree")]
    ConflictingRingBond,
    #[error("ring closure joins an atom to itself")]
    SelfRingClosure,
    #[error("ring closure duplicates an existing bond")]
    DuplicateRingBond,
    #[error("atom map number {0} appears more than once")]
    DuplicateAtomMap(u32),
}

impl SmilesError {
    pub(crate) fn parse_at(position: usize, kind: ParseErrorKind) -> Self {
        SmilesError::Parse { position, kind }
    }
}
