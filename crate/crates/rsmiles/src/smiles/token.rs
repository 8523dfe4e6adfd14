//! SMILES tokenizer.
//!
//! Token classes: bracket atoms (`[...]`), two-letter halogens, organic
//! subset atoms, aromatic subset atoms, bond symbols (`- = # / \ : ~`),
//! branch parentheses, the dot separator, ring closure digits (`3` or
//! `%12`), and the reserved sequence separator [`SPLIT_TOKEN`]. Every other
//! character is an error carrying its byte position.

use std::fmt;
use std::sync::OnceLock;

use regex::Regex;

use super::SmilesError;

/// Reserved separator token joining the two halves of a composite source
/// sequence. It never appears inside a molecule.
pub const SPLIT_TOKEN: &str = "<split>";

const TOKEN_PATTERN: &str = r"<split>|\[[^\]]*\]|Br|Cl|B|C|N|O|P|S|F|I|b|c|n|o|s|p|\(|\)|\.|-|=|#|/|\\|:|~|%[0-9]{2}|[0-9]";

fn token_regex() -> &'static Regex {
    static RE: OnceLock<Regex> = OnceLock::new();
    RE.get_or_init(|| Regex::new(TOKEN_PATTERN).expect("token pattern compiles"))
}

/// A tokenized SMILES (or composite source) string.
///
/// Invariant: concatenating the tokens reproduces the input exactly.
/// `Display` renders the space-joined form used in token files.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TokenSeq(Vec<String>);

impl TokenSeq {
    pub fn new(tokens: Vec<String>) -> Self {
        TokenSeq(tokens)
    }

    pub fn tokens(&self) -> &[String] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// The original unspaced string.
    pub fn concat(&self) -> String {
        self.0.concat()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, String> {
        self.0.iter()
    }
}

impl fmt::Display for TokenSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0.join(" "))
    }
}

impl IntoIterator for TokenSeq {
    type Item = String;
    type IntoIter = std::vec::IntoIter<String>;
    fn into_iter(self) -> Self::IntoIter {
        self.0.into_iter()
    }
}

/// Split a string into `(byte position, token)` pairs, rejecting any
/// character outside the token grammar.
pub(crate) fn scan(s: &str) -> Result<Vec<(usize, &str)>, SmilesError> {
    let mut out = Vec::new();
    let mut cursor = 0usize;
    for m in token_regex().find_iter(s) {
        if m.start() != cursor {
            return Err(tokenize_error(s, cursor));
        }
        out.push((m.start(), m.as_str()));
        cursor = m.end();
    }
    if cursor != s.len() {
        return Err(tokenize_error(s, cursor));
    }
    Ok(out)
}

fn tokenize_error(s: &str, position: usize) -> SmilesError {
    let found = s[position..].chars().next().unwrap_or('\u{0}');
    SmilesError::Tokenize { position, found }
}

/// Tokenize a SMILES string.
pub fn tokenize(s: &str) -> Result<TokenSeq, SmilesError> {
    Ok(TokenSeq(
        scan(s)?.into_iter().map(|(_, t)| t.to_string()).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::testutil::worked_example;

    #[test]
    fn tokenizes_the_rooted_ester_string() {
        let toks = tokenize(worked_example::PRODUCT_ROOTED).unwrap();
        assert_eq!(toks.to_string(), worked_example::SRC_TOKENS);
        assert_eq!(toks.concat(), worked_example::PRODUCT_ROOTED);
    }

    #[test]
    fn bracket_atom_is_one_token() {
        let toks = tokenize("[Cl:8][C:7]").unwrap();
        assert_eq!(toks.tokens(), ["[Cl:8]", "[C:7]"]);
    }

    #[test]
    fn two_letter_halogens_are_single_tokens() {
        let toks = tokenize("BrCCl").unwrap();
        assert_eq!(toks.tokens(), ["Br", "C", "Cl"]);
    }

    #[test]
    fn percent_ring_closures_are_single_tokens() {
        let toks = tokenize("C%12CC%12").unwrap();
        assert_eq!(toks.tokens(), ["C", "%12", "C", "C", "%12"]);
    }

    #[test]
    fn split_token_is_reserved() {
        let toks = tokenize("CC<split>CO.C").unwrap();
        assert_eq!(toks.tokens(), ["C", "C", "<split>", "C", "O", ".", "C"]);
    }

    #[test]
    fn aromatic_and_bond_tokens() {
        let toks = tokenize("c1ccccc1-c1ccccc1").unwrap();
        assert_eq!(toks.len(), 17);
        let toks = tokenize("C/C=C\\C").unwrap();
        assert_eq!(toks.tokens(), ["C", "/", "C", "=", "C", "\\", "C"]);
    }

    #[test]
    fn rejects_characters_outside_the_grammar() {
        let err = tokenize("CC?C").unwrap_err();
        assert_eq!(
            err,
            SmilesError::Tokenize {
                position: 2,
                found: '?'
            }
        );
        // '@' only exists inside bracket atoms.
        let err = tokenize("C@C").unwrap_err();
        assert_eq!(
            err,
            SmilesError::Tokenize {
                position: 1,
                found: '@'
            }
        );
        // An unterminated bracket atom never matches the bracket class.
        let err = tokenize("C[CH3").unwrap_err();
        assert_eq!(
            err,
            SmilesError::Tokenize {
                position: 1,
                found: '['
            }
        );
    }

    #[test]
    fn empty_input_tokenizes_to_nothing() {
        assert!(tokenize("").unwrap().is_empty());
    }
}
