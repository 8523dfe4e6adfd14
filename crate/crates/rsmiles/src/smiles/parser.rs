//! SMILES parser: token stream to [`Molecule`].

use std::collections::{HashMap, HashSet};

use super::token::{scan, SPLIT_TOKEN};
use super::{ParseErrorKind, SmilesError};
use crate::molgraph::{Atom, Bond, BondOrder, BondStereo, Chirality, Molecule};

/// Parse a SMILES string into a molecule. Dotted strings parse into one
/// molecule holding several fragments.
pub fn parse(s: &str) -> Result<Molecule, SmilesError> {
    let tokens = scan(s)?;
    if tokens.is_empty() {
        return Err(SmilesError::parse_at(0, ParseErrorKind::EmptyInput));
    }

    let mut st = State::default();
    for (pos, tok) in tokens {
        match tok {
            "(" => {
                let Some(prev) = st.prev else {
                    return Err(SmilesError::parse_at(
                        pos,
                        ParseErrorKind::UnexpectedToken(tok.to_string()),
                    ));
                };
                if let Some((_, _, bpos)) = st.pending {
                    return Err(SmilesError::parse_at(bpos, ParseErrorKind::DanglingBond));
                }
                st.stack.push((prev, pos));
            }
            ")" => {
                if let Some((_, _, bpos)) = st.pending {
                    return Err(SmilesError::parse_at(bpos, ParseErrorKind::DanglingBond));
                }
                let Some((prev, _)) = st.stack.pop() else {
                    return Err(SmilesError::parse_at(
                        pos,
                        ParseErrorKind::UnbalancedParenthesis,
                    ));
                };
                st.prev = Some(prev);
            }
            "." => {
                if let Some((_, _, bpos)) = st.pending {
                    return Err(SmilesError::parse_at(bpos, ParseErrorKind::DanglingBond));
                }
                st.prev = None;
            }
            "-" | "=" | "#" | ":" | "/" | "\\" => {
                if st.prev.is_none() || st.pending.is_some() {
                    return Err(SmilesError::parse_at(pos, ParseErrorKind::DanglingBond));
                }
                let (order, stereo) = match tok {
                    "-" => (BondOrder::Single, BondStereo::None),
                    "=" => (BondOrder::Double, BondStereo::None),
                    "#" => (BondOrder::Triple, BondStereo::None),
                    ":" => (BondOrder::Aromatic, BondStereo::None),
                    "/" => (BondOrder::Single, BondStereo::Up),
                    _ => (BondOrder::Single, BondStereo::Down),
                };
                st.pending = Some((order, stereo, pos));
            }
            "~" => {
                return Err(SmilesError::parse_at(
                    pos,
                    ParseErrorKind::UnsupportedBond(tok.to_string()),
                ));
            }
            SPLIT_TOKEN => {
                return Err(SmilesError::parse_at(
                    pos,
                    ParseErrorKind::UnexpectedToken(tok.to_string()),
                ));
            }
            _ if tok.starts_with('%') || tok.len() == 1 && tok.as_bytes()[0].is_ascii_digit() => {
                let digit: u16 = tok.trim_start_matches('%').parse().expect("digit token");
                st.ring_closure(digit, pos)?;
            }
            _ if tok.starts_with('[') => {
                let atom = parse_bracket(&tok[1..tok.len() - 1], pos)?;
                st.add_atom(atom, pos)?;
            }
            _ => {
                let aromatic = tok.chars().next().expect("nonempty").is_lowercase();
                let mut atom = Atom::of(&capitalize(tok));
                atom.aromatic = aromatic;
                st.add_atom(atom, pos)?;
            }
        }
    }

    if let Some((_, _, bpos)) = st.pending {
        return Err(SmilesError::parse_at(bpos, ParseErrorKind::DanglingBond));
    }
    if let Some(&(_, ppos)) = st.stack.last() {
        return Err(SmilesError::parse_at(
            ppos,
            ParseErrorKind::UnbalancedParenthesis,
        ));
    }
    if let Some((&digit, &(_, _, rpos))) = st.ring.iter().min_by_key(|(_, &(_, _, p))| p) {
        return Err(SmilesError::parse_at(
            rpos,
            ParseErrorKind::UnmatchedRingClosure(digit),
        ));
    }
    Ok(Molecule::new(st.atoms, st.bonds)?)
}

type PendingBond = (BondOrder, BondStereo, usize);

#[derive(Default)]
struct State {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    bonded_pairs: HashSet<(usize, usize)>,
    /// Atom awaiting its next neighbor, if any.
    prev: Option<usize>,
    /// Bond symbol read but not yet attached.
    pending: Option<PendingBond>,
    /// Saved `prev` and position of each open `(`.
    stack: Vec<(usize, usize)>,
    /// Open ring closures: digit -> (atom, bond symbol, position).
    ring: HashMap<u16, (usize, Option<(BondOrder, BondStereo)>, usize)>,
    seen_maps: HashMap<u32, usize>,
}

impl State {
    fn add_atom(&mut self, atom: Atom, pos: usize) -> Result<(), SmilesError> {
        if let Some(m) = atom.map_num {
            if self.seen_maps.insert(m, pos).is_some() {
                return Err(SmilesError::parse_at(
                    pos,
                    ParseErrorKind::DuplicateAtomMap(m),
                ));
            }
        }
        let idx = self.atoms.len();
        self.atoms.push(atom);
        if let Some(prev) = self.prev {
            let (order, stereo) = self.take_pending_or_default(prev, idx);
            self.push_bond(prev, idx, order, stereo, pos)?;
        }
        self.prev = Some(idx);
        Ok(())
    }

    fn ring_closure(&mut self, digit: u16, pos: usize) -> Result<(), SmilesError> {
        let Some(here) = self.prev else {
            return Err(SmilesError::parse_at(
                pos,
                ParseErrorKind::UnexpectedToken(digit.to_string()),
            ));
        };
        match self.ring.remove(&digit) {
            None => {
                let sym = self.pending.take().map(|(o, s, _)| (o, s));
                self.ring.insert(digit, (here, sym, pos));
            }
            Some((opener, open_sym, _)) => {
                if opener == here {
                    return Err(SmilesError::parse_at(pos, ParseErrorKind::SelfRingClosure));
                }
                // The closing side's symbol describes the bond walked from
                // `here` towards `opener`; flip its direction tag to store it
                // in opener -> closer orientation like the opening side's.
                let close_sym = self
                    .pending
                    .take()
                    .map(|(o, s, _)| (o, s.flipped()));
                let (order, stereo) = match (open_sym, close_sym) {
                    (None, None) => (self.default_order(opener, here), BondStereo::None),
                    (Some(x), None) => x,
                    (None, Some(y)) => y,
                    (Some((xo, xs)), Some((yo, ys))) => {
                        let stereo = match (xs, ys) {
                            (s, BondStereo::None) | (BondStereo::None, s) => s,
                            (s1, s2) if s1 == s2 => s1,
                            _ => {
                                return Err(SmilesError::parse_at(
                                    pos,
                                    ParseErrorKind::ConflictingRingBond,
                                ))
                            }
                        };
                        if xo != yo {
                            return Err(SmilesError::parse_at(
                                pos,
                                ParseErrorKind::ConflictingRingBond,
                            ));
                        }
                        (xo, stereo)
                    }
                };
                self.push_bond(opener, here, order, stereo, pos)
                    .map_err(|_| {
                        SmilesError::parse_at(pos, ParseErrorKind::DuplicateRingBond)
                    })?;
            }
        }
        Ok(())
    }

    fn take_pending_or_default(&mut self, a: usize, b: usize) -> (BondOrder, BondStereo) {
        match self.pending.take() {
            Some((order, stereo, _)) => (order, stereo),
            None => (self.default_order(a, b), BondStereo::None),
        }
    }

    fn default_order(&self, a: usize, b: usize) -> BondOrder {
        if self.atoms[a].aromatic && self.atoms[b].aromatic {
            BondOrder::Aromatic
        } else {
            BondOrder::Single
        }
    }

    fn push_bond(
        &mut self,
        a: usize,
        b: usize,
        order: BondOrder,
        stereo: BondStereo,
        pos: usize,
    ) -> Result<(), SmilesError> {
        if !self.bonded_pairs.insert((a.min(b), a.max(b))) {
            return Err(SmilesError::parse_at(
                pos,
                ParseErrorKind::DuplicateRingBond,
            ));
        }
        self.bonds.push(Bond {
            a,
            b,
            order,
            stereo,
        });
        Ok(())
    }
}

fn capitalize(sym: &str) -> String {
    let mut chars = sym.chars();
    match chars.next() {
        Some(first) => first.to_uppercase().chain(chars).collect(),
        None => String::new(),
    }
}

/// Parse the inside of a bracket atom:
/// `isotope? symbol chirality? hcount? charge? (':' map)?`.
fn parse_bracket(body: &str, pos: usize) -> Result<Atom, SmilesError> {
    let err = || SmilesError::parse_at(pos, ParseErrorKind::MalformedBracket);
    let bytes = body.as_bytes();
    let mut i = 0usize;

    let take_digits = |i: &mut usize| -> Option<u32> {
        let start = *i;
        while *i < bytes.len() && bytes[*i].is_ascii_digit() {
            *i += 1;
        }
        if *i > start {
            body[start..*i].parse().ok()
        } else {
            None
        }
    };

    let isotope = take_digits(&mut i);

    let (element, aromatic) = if i < bytes.len() && bytes[i].is_ascii_uppercase() {
        let start = i;
        i += 1;
        if i < bytes.len() && bytes[i].is_ascii_lowercase() {
            i += 1;
        }
        (body[start..i].to_string(), false)
    } else if i < bytes.len() && bytes[i].is_ascii_lowercase() {
        if body[i..].starts_with("se") || body[i..].starts_with("as") {
            let sym = capitalize(&body[i..i + 2]);
            i += 2;
            (sym, true)
        } else if matches!(bytes[i], b'b' | b'c' | b'n' | b'o' | b'p' | b's') {
            let sym = capitalize(&body[i..i + 1]);
            i += 1;
            (sym, true)
        } else {
            return Err(err());
        }
    } else {
        return Err(err());
    };

    let chirality = if body[i..].starts_with("@@") {
        i += 2;
        Chirality::Clockwise
    } else if body[i..].starts_with('@') {
        i += 1;
        Chirality::Anticlockwise
    } else {
        Chirality::None
    };

    let explicit_h = if i < bytes.len() && bytes[i] == b'H' {
        i += 1;
        Some(take_digits(&mut i).unwrap_or(1))
    } else {
        None
    };

    let charge = if i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
        let sign: i32 = if bytes[i] == b'+' { 1 } else { -1 };
        let symbol = bytes[i];
        let mut count = 0i32;
        while i < bytes.len() && bytes[i] == symbol {
            count += 1;
            i += 1;
        }
        match take_digits(&mut i) {
            Some(n) if count == 1 => sign * n as i32,
            Some(_) => return Err(err()),
            None => sign * count,
        }
    } else {
        0
    };

    let map_num = if i < bytes.len() && bytes[i] == b':' {
        i += 1;
        match take_digits(&mut i) {
            Some(0) | None => return Err(err()),
            some => some,
        }
    } else {
        None
    };

    if i != bytes.len() {
        return Err(err());
    }

    Ok(Atom {
        element,
        aromatic,
        charge,
        isotope,
        explicit_h,
        chirality,
        map_num,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::molgraph::{heavy_atom_count, split_fragments};
    use crate::testutil::worked_example;

    #[test]
    fn parses_the_mapped_reactants() {
        let m = parse(worked_example::REACTANTS_MAPPED).unwrap();
        assert_eq!(m.n_atoms(), 11);
        assert_eq!(split_fragments(&m).len(), 2);
        assert_eq!(m.bonds().len(), 9);
        // [OH:5] keeps its written hydrogen count and map number.
        let o5 = m
            .atoms()
            .iter()
            .find(|a| a.map_num == Some(5))
            .expect("atom 5 exists");
        assert_eq!(o5.element, "O");
        assert_eq!(o5.explicit_h, Some(1));
    }

    #[test]
    fn parses_rings_through_closure_digits() {
        let m = parse("C1CC1").unwrap();
        assert_eq!(m.n_atoms(), 3);
        assert_eq!(m.bonds().len(), 3);
        let m = parse("C%12CC%12").unwrap();
        assert_eq!(m.bonds().len(), 3);
    }

    #[test]
    fn ring_closure_bond_symbol_may_sit_at_either_end() {
        for smi in ["C=1CCCCC=1", "C=1CCCCC1", "C1CCCCC=1"] {
            let m = parse(smi).unwrap();
            let ring_bond = m.bond_between(0, 5).expect("closure bond");
            assert_eq!(ring_bond.order, BondOrder::Double, "{smi}");
        }
        assert_eq!(
            parse("C=1CCCCC#1").unwrap_err(),
            SmilesError::parse_at(9, ParseErrorKind::ConflictingRingBond)
        );
    }

    #[test]
    fn aromatic_default_bonds_apply_only_between_aromatic_atoms() {
        let m = parse("c1ccccc1").unwrap();
        assert!(m.bonds().iter().all(|b| b.order == BondOrder::Aromatic));
        let biphenyl = parse("c1ccccc1-c1ccccc1").unwrap();
        let link = biphenyl.bond_between(5, 6).expect("link bond");
        assert_eq!(link.order, BondOrder::Single);
        let toluene = parse("Cc1ccccc1").unwrap();
        assert_eq!(toluene.bond_between(0, 1).unwrap().order, BondOrder::Single);
    }

    #[test]
    fn direction_tags_are_stored_on_single_bonds() {
        let m = parse("C/C=C\\C").unwrap();
        assert_eq!(m.bond_between(0, 1).unwrap().stereo, BondStereo::Up);
        assert_eq!(m.bond_between(2, 3).unwrap().stereo, BondStereo::Down);
        assert_eq!(m.bond_between(1, 2).unwrap().order, BondOrder::Double);
    }

    #[test]
    fn bracket_atoms_cover_isotope_chirality_charge_and_map() {
        let m = parse("[13C@@H2+:55]").unwrap();
        let a = m.atom(0);
        assert_eq!(a.isotope, Some(13));
        assert_eq!(a.chirality, Chirality::Clockwise);
        assert_eq!(a.explicit_h, Some(2));
        assert_eq!(a.charge, 1);
        assert_eq!(a.map_num, Some(55));
        assert_eq!(parse("[Fe+2]").unwrap().atom(0).charge, 2);
        assert_eq!(parse("[O--]").unwrap().atom(0).charge, -2);
        assert_eq!(parse("[nH]").unwrap().atom(0).element, "N");
        assert!(parse("[nH]").unwrap().atom(0).aromatic);
        assert_eq!(parse("[se]").unwrap().atom(0).element, "Se");
        assert_eq!(heavy_atom_count(&parse("[H][H]").unwrap()), 0);
    }

    #[test]
    fn rejects_malformed_input() {
        use ParseErrorKind::*;
        let cases: Vec<(&str, usize, ParseErrorKind)> = vec![
            ("", 0, EmptyInput),
            ("C1CC", 1, UnmatchedRingClosure(1)),
            ("C(C", 1, UnbalancedParenthesis),
            ("CC)C", 2, UnbalancedParenthesis),
            ("C=", 1, DanglingBond),
            ("C=.C", 1, DanglingBond),
            ("C==C", 2, DanglingBond),
            ("=CC", 0, DanglingBond),
            ("C=(C)O", 1, DanglingBond),
            ("(C)C", 0, UnexpectedToken("(".to_string())),
            ("1CC1", 0, UnexpectedToken("1".to_string())),
            ("C11", 2, SelfRingClosure),
            ("C12CC12", 6, DuplicateRingBond),
            ("[]", 0, MalformedBracket),
            ("[13]", 0, MalformedBracket),
            ("[CH3:0]", 0, MalformedBracket),
            ("[C+2-]", 0, MalformedBracket),
            ("C~C", 1, UnsupportedBond("~".to_string())),
            ("C<split>C", 1, UnexpectedToken("<split>".to_string())),
            ("[CH3:7].[OH:7]", 8, DuplicateAtomMap(7)),
        ];
        for (smi, pos, kind) in cases {
            match parse(smi) {
                Err(SmilesError::Parse { position, kind: k }) => {
                    assert_eq!((position, k), (pos, kind), "wrong error for {smi:?}");
                }
                other => panic!("expected parse error for {smi:?}, got {other:?}"),
            }
        }
    }

    #[test]
    fn dots_separate_fragments_without_bonds() {
        let m = parse("CC.O").unwrap();
        assert_eq!(m.n_atoms(), 3);
        assert_eq!(m.bonds().len(), 1);
        assert_eq!(split_fragments(&m).len(), 2);
    }
}
