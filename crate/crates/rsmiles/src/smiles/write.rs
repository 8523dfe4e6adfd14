//! Rooted and canonical SMILES writers.
//!
//! Writing is a two-pass process. The first pass runs the depth-first
//! traversal induced by the requested order and records the resulting plan:
//! tree children per atom, and which bonds become ring closures (every bond
//! that reaches an already-visited atom). The second pass renders the plan,
//! assigning each ring closure the lowest digit that is free at the moment
//! it opens. Keeping the two passes on one recorded plan guarantees they
//! agree on every traversal decision.

use std::collections::HashMap;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ranks::canonical_ranks;
use super::SmilesError;
use crate::molgraph::{split_fragments, Atom, Bond, BondOrder, BondStereo, Chirality, Molecule};

/// A write order: the traversal root plus a total order on atoms that
/// decides branch order (children are visited by ascending rank).
#[derive(Debug, Clone)]
pub struct WriteOrder {
    pub root: usize,
    pub neighbor_rank: Vec<usize>,
}

impl WriteOrder {
    /// Canonical order: rank-0 atom as root, canonical ranks as the
    /// neighbor order. Panics on an empty molecule.
    pub fn canonical(m: &Molecule) -> WriteOrder {
        let neighbor_rank = canonical_ranks(m);
        let root = neighbor_rank
            .iter()
            .position(|&r| r == 0)
            .expect("canonical order of a non-empty molecule");
        WriteOrder {
            root,
            neighbor_rank,
        }
    }

    /// Canonical neighbor order with an explicit root atom.
    pub fn rooted(m: &Molecule, root: usize) -> Result<WriteOrder, SmilesError> {
        if root >= m.n_atoms() {
            return Err(SmilesError::InvalidRoot { root });
        }
        Ok(WriteOrder {
            root,
            neighbor_rank: canonical_ranks(m),
        })
    }
}

/// Write a molecule as SMILES starting at `order.root`.
///
/// With `keep_maps` the writer keeps atom map numbers (forcing bracket form
/// on mapped atoms); without it the output is plain SMILES. Written hydrogen
/// counts survive only on chiral atoms, where the `[C@@H]`-style token needs
/// them; elsewhere they are annotations the graph model does not preserve
/// through rewriting.
///
/// Disconnected molecules are written fragment by fragment: first the
/// fragment holding the root, then the remaining fragments, each rooted at
/// its lowest-ranked atom, in ascending order of that rank.
pub fn write_rooted(
    m: &Molecule,
    order: &WriteOrder,
    keep_maps: bool,
) -> Result<String, SmilesError> {
    write_rooted_traced(m, order, keep_maps).map(|(s, _)| s)
}

/// As [`write_rooted`], additionally returning the atom visit order (atom
/// indices in order of first appearance in the string).
pub fn write_rooted_traced(
    m: &Molecule,
    order: &WriteOrder,
    keep_maps: bool,
) -> Result<(String, Vec<usize>), SmilesError> {
    let n = m.n_atoms();
    if n == 0 {
        return Ok((String::new(), Vec::new()));
    }
    if order.root >= n {
        return Err(SmilesError::InvalidRoot { root: order.root });
    }
    assert_eq!(
        order.neighbor_rank.len(),
        n,
        "write order must rank every atom"
    );

    let mut plan = Plan {
        children: vec![Vec::new(); n],
        opens: vec![Vec::new(); n],
        closes: vec![Vec::new(); n],
        trace: Vec::with_capacity(n),
        visited: vec![false; n],
        edge_used: vec![false; m.bonds().len()],
    };
    plan.explore(m, order, order.root);
    loop {
        // Remaining fragments, each from its lowest-ranked unvisited atom.
        let next = (0..n)
            .filter(|&i| !plan.visited[i])
            .min_by_key(|&i| order.neighbor_rank[i]);
        match next {
            Some(root) => plan.explore(m, order, root),
            None => break,
        }
    }

    let roots: Vec<usize> = {
        // Fragment starts are exactly the atoms without a tree parent.
        let mut has_parent = vec![false; n];
        for children in &plan.children {
            for &(c, _) in children {
                has_parent[c] = true;
            }
        }
        plan.trace
            .iter()
            .copied()
            .filter(|&v| !has_parent[v])
            .collect()
    };

    let mut out = String::new();
    let mut renderer = Renderer {
        m,
        plan: &plan,
        keep_maps,
        digits: DigitPool::default(),
        digit_of: HashMap::new(),
    };
    for (i, &root) in roots.iter().enumerate() {
        if i > 0 {
            out.push('.');
        }
        renderer.build(root, &mut out)?;
    }
    Ok((out, plan.trace))
}

struct Plan {
    /// Tree children per atom: `(child, bond)` in traversal order.
    children: Vec<Vec<(usize, usize)>>,
    /// Ring closures opening at an atom: `(closing atom, bond)`.
    opens: Vec<Vec<(usize, usize)>>,
    /// Bonds of ring closures that close at an atom.
    closes: Vec<Vec<usize>>,
    trace: Vec<usize>,
    visited: Vec<bool>,
    edge_used: Vec<bool>,
}

impl Plan {
    fn explore(&mut self, m: &Molecule, order: &WriteOrder, v: usize) {
        self.visited[v] = true;
        self.trace.push(v);
        let mut nbrs: Vec<(usize, usize)> = m.neighbors(v).to_vec();
        nbrs.sort_by_key(|&(w, _)| order.neighbor_rank[w]);
        for (w, bid) in nbrs {
            if self.edge_used[bid] {
                continue;
            }
            self.edge_used[bid] = true;
            if self.visited[w] {
                // Back edge; w was visited first, so w opens the closure
                // and v closes it.
                self.opens[w].push((v, bid));
                self.closes[v].push(bid);
            } else {
                self.children[v].push((w, bid));
                self.explore(m, order, w);
            }
        }
    }
}

struct DigitPool {
    in_use: [bool; 100],
}

impl Default for DigitPool {
    fn default() -> Self {
        DigitPool {
            in_use: [false; 100],
        }
    }
}

impl DigitPool {
    fn alloc(&mut self) -> Result<u16, SmilesError> {
        for d in 1..100u16 {
            if !self.in_use[d as usize] {
                self.in_use[d as usize] = true;
                return Ok(d);
            }
        }
        Err(SmilesError::RingDigitsExhausted)
    }

    fn free(&mut self, d: u16) {
        self.in_use[d as usize] = false;
    }
}

fn digit_str(d: u16) -> String {
    if d < 10 {
        d.to_string()
    } else {
        format!("%{d:02}")
    }
}

struct Renderer<'a> {
    m: &'a Molecule,
    plan: &'a Plan,
    keep_maps: bool,
    digits: DigitPool,
    digit_of: HashMap<usize, u16>,
}

impl Renderer<'_> {
    fn build(&mut self, v: usize, out: &mut String) -> Result<(), SmilesError> {
        out.push_str(&atom_str(self.m.atom(v), self.keep_maps));

        // Closures ending here, lowest digit first.
        let mut closing: Vec<(u16, usize)> = self.plan.closes[v]
            .iter()
            .map(|&bid| (self.digit_of[&bid], bid))
            .collect();
        closing.sort_unstable();
        for (digit, bid) in closing {
            out.push_str(bond_symbol(self.m, self.m.bond(bid), v));
            out.push_str(&digit_str(digit));
            self.digits.free(digit);
        }

        // Closures opening here, in traversal discovery order.
        for &(_, bid) in &self.plan.opens[v] {
            let digit = self.digits.alloc()?;
            self.digit_of.insert(bid, digit);
            out.push_str(bond_symbol(self.m, self.m.bond(bid), v));
            out.push_str(&digit_str(digit));
        }

        let children = &self.plan.children[v];
        for (i, &(c, bid)) in children.iter().enumerate() {
            let sym = bond_symbol(self.m, self.m.bond(bid), v);
            if i + 1 < children.len() {
                out.push('(');
                out.push_str(sym);
                self.build(c, out)?;
                out.push(')');
            } else {
                out.push_str(sym);
                self.build(c, out)?;
            }
        }
        Ok(())
    }
}

/// The bond symbol to emit when traversing `bond` away from atom `from`.
/// Empty when the parser's default for the two endpoints already gives this
/// order back.
fn bond_symbol<'a>(m: &Molecule, bond: &Bond, from: usize) -> &'a str {
    let both_aromatic = m.atom(bond.a).aromatic && m.atom(bond.b).aromatic;
    match bond.order {
        BondOrder::Single => {
            let oriented = if from == bond.a {
                bond.stereo
            } else {
                bond.stereo.flipped()
            };
            match oriented {
                BondStereo::Up => "/",
                BondStereo::Down => "\\",
                BondStereo::None => {
                    if both_aromatic {
                        "-"
                    } else {
                        ""
                    }
                }
            }
        }
        BondOrder::Double => "=",
        BondOrder::Triple => "#",
        BondOrder::Aromatic => {
            if both_aromatic {
                ""
            } else {
                ":"
            }
        }
    }
}

const ORGANIC_SUBSET: [&str; 10] = ["B", "C", "N", "O", "P", "S", "F", "Cl", "Br", "I"];
const AROMATIC_SUBSET: [&str; 6] = ["B", "C", "N", "O", "P", "S"];

fn atom_str(atom: &Atom, keep_maps: bool) -> String {
    let plain_ok = if atom.aromatic {
        AROMATIC_SUBSET.contains(&atom.element.as_str())
    } else {
        ORGANIC_SUBSET.contains(&atom.element.as_str())
    };
    let needs_bracket = !plain_ok
        || atom.isotope.is_some()
        || atom.charge != 0
        || atom.chirality != Chirality::None
        || (keep_maps && atom.map_num.is_some());

    let symbol = if atom.aromatic {
        atom.element.to_lowercase()
    } else {
        atom.element.clone()
    };
    if !needs_bracket {
        return symbol;
    }

    let mut s = String::from("[");
    if let Some(iso) = atom.isotope {
        s.push_str(&iso.to_string());
    }
    s.push_str(&symbol);
    s.push_str(atom.chirality.symbol());
    if atom.chirality != Chirality::None {
        // The hydrogen inside [C@@H] is part of the parity notation; keep it.
        match atom.explicit_h {
            Some(1) => s.push('H'),
            Some(h) if h > 1 => s.push_str(&format!("H{h}")),
            _ => {}
        }
    }
    match atom.charge {
        0 => {}
        1 => s.push('+'),
        -1 => s.push('-'),
        c if c > 0 => s.push_str(&format!("+{c}")),
        c => s.push_str(&c.to_string()),
    }
    if keep_maps {
        if let Some(map) = atom.map_num {
            s.push_str(&format!(":{map}"));
        }
    }
    s.push(']');
    s
}

/// Canonical SMILES: canonical order per fragment, maps stripped, fragments
/// sorted lexicographically and joined with dots. Equal graphs produce equal
/// strings; the function is idempotent over write-parse round trips.
pub fn write_canonical(m: &Molecule) -> String {
    if m.n_atoms() == 0 {
        return String::new();
    }
    let mut parts: Vec<String> = split_fragments(m)
        .iter()
        .map(|frag| {
            write_rooted(frag, &WriteOrder::canonical(frag), false)
                .expect("canonical order is always valid")
        })
        .collect();
    parts.sort();
    parts.join(".")
}

/// Up to `count` distinct rooted rewrites of a molecule.
///
/// Roots are drawn without replacement from a seed-shuffled atom list while
/// atoms remain, then with replacement; duplicate strings are dropped, so
/// the result holds at most `count` distinct strings in draw order. The same
/// `(molecule, count, seed)` triple always yields the same output.
pub fn enumerate_random(m: &Molecule, count: usize, seed: u64) -> Vec<String> {
    let n = m.n_atoms();
    if n == 0 || count == 0 {
        return Vec::new();
    }
    let ranks = canonical_ranks(m);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut roots: Vec<usize> = (0..n).collect();
    roots.shuffle(&mut rng);

    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::new();
    for i in 0..count {
        let root = if i < n {
            roots[i]
        } else {
            roots[rng.gen_range(0..n)]
        };
        let order = WriteOrder {
            root,
            neighbor_rank: ranks.clone(),
        };
        let s = write_rooted(m, &order, false).expect("rooted order is valid");
        if seen.insert(s.clone()) {
            out.push(s);
        }
    }
    out
}
