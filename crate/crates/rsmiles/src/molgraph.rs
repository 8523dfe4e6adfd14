//! Attributed molecular graphs and the graph-level operations the rest of the
//! crate builds on: fragment splitting, ring-bond detection, isomorphism and
//! the bond difference between the two sides of a mapped reaction.

use std::collections::{HashMap, HashSet};

use thiserror::Error;

/// Elements that may carry the aromatic flag (writable in lowercase form).
const AROMATIC_ELEMENTS: [&str; 8] = ["B", "C", "N", "O", "P", "S", "Se", "As"];

#[derive(Debug, Error, PartialEq, Eq)]
pub enum MolError {
    #[error("bond references atom index {0} outside the molecule")]
    BondOutOfRange(usize),
    #[error("bond joins atom {0} to itself")]
    SelfBond(usize),
    #[error("duplicate bond between atoms {0} and {1}")]
    DuplicateBond(usize, usize),
    #[error("atom map number {0} appears more than once")]
    DuplicateMapNum(u32),
    #[error("element {0} cannot carry the aromatic flag")]
    NotAromatic(String),
    #[error("reaction has no product")]
    NoProduct,
    #[error("product atom {atom} has no atom map number")]
    UnmappedProductAtom { atom: usize },
}

/// Tetrahedral parity tag as written in a bracket atom.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, PartialOrd, Ord)]
pub enum Chirality {
    #[default]
    None,
    /// `@` — anticlockwise.
    Anticlockwise,
    /// `@@` — clockwise.
    Clockwise,
}

impl Chirality {
    pub fn symbol(self) -> &'static str {
        match self {
            Chirality::None => "",
            Chirality::Anticlockwise => "@",
            Chirality::Clockwise => "@@",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum BondOrder {
    Single,
    Double,
    Triple,
    Aromatic,
}

impl BondOrder {
    /// Stable small code used when sorting bonds inside canonical-rank keys.
    pub(crate) fn code(self) -> u8 {
        match self {
            BondOrder::Single => 1,
            BondOrder::Double => 2,
            BondOrder::Triple => 3,
            BondOrder::Aromatic => 4,
        }
    }
}

/// Direction tag of a single bond (`/` or `\`), stored relative to the
/// bond's `a -> b` orientation. Writers that traverse the bond from `b`
/// emit the flipped symbol so geometry is preserved verbatim.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum BondStereo {
    #[default]
    None,
    /// `/`
    Up,
    /// `\`
    Down,
}

impl BondStereo {
    pub fn flipped(self) -> Self {
        match self {
            BondStereo::None => BondStereo::None,
            BondStereo::Up => BondStereo::Down,
            BondStereo::Down => BondStereo::Up,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Atom {
    /// Element symbol in its standard capitalisation (`"C"`, `"Cl"`, `"Se"`).
    pub element: String,
    /// True for atoms written in aromatic (lowercase) form.
    pub aromatic: bool,
    pub charge: i32,
    pub isotope: Option<u32>,
    /// Hydrogen count as written in a bracket atom, if any. Carried as an
    /// annotation only: it takes no part in isomorphism or canonical ranking.
    pub explicit_h: Option<u32>,
    pub chirality: Chirality,
    /// Reaction atom map number (`[CH3:1]`), `None` when unmapped.
    pub map_num: Option<u32>,
}

impl Atom {
    /// A plain, uncharged, non-aromatic atom of the given element.
    pub fn of(element: &str) -> Self {
        Atom {
            element: element.to_string(),
            aromatic: false,
            charge: 0,
            isotope: None,
            explicit_h: None,
            chirality: Chirality::None,
            map_num: None,
        }
    }

    pub fn is_heavy(&self) -> bool {
        self.element != "H"
    }

    /// Attribute key compared by the isomorphism matcher. Hydrogen counts and
    /// bond direction tags are deliberately absent: they are annotations the
    /// writers may drop, not part of the graph's identity.
    fn key(&self, with_map: bool) -> (&str, i32, Option<u32>, bool, Chirality, Option<u32>) {
        (
            &self.element,
            self.charge,
            self.isotope,
            self.aromatic,
            self.chirality,
            if with_map { self.map_num } else { None },
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Bond {
    pub a: usize,
    pub b: usize,
    pub order: BondOrder,
    pub stereo: BondStereo,
}

impl Bond {
    pub fn new(a: usize, b: usize, order: BondOrder) -> Self {
        Bond {
            a,
            b,
            order,
            stereo: BondStereo::None,
        }
    }

    /// The endpoint that is not `atom`. Panics if `atom` is not an endpoint.
    pub fn other(&self, atom: usize) -> usize {
        if atom == self.a {
            self.b
        } else {
            debug_assert_eq!(atom, self.b);
            self.a
        }
    }
}

/// An immutable attributed graph: atoms plus bonds, with an adjacency index
/// built once at construction. A `Molecule` may hold several disconnected
/// fragments (a dotted SMILES parses to a single `Molecule`).
#[derive(Debug, Clone)]
pub struct Molecule {
    atoms: Vec<Atom>,
    bonds: Vec<Bond>,
    /// `adj[i]` lists `(neighbor, bond index)` pairs in bond insertion order.
    adj: Vec<Vec<(usize, usize)>>,
}

impl Molecule {
    pub fn new(atoms: Vec<Atom>, bonds: Vec<Bond>) -> Result<Self, MolError> {
        let n = atoms.len();
        for atom in &atoms {
            if atom.aromatic && !AROMATIC_ELEMENTS.contains(&atom.element.as_str()) {
                return Err(MolError::NotAromatic(atom.element.clone()));
            }
        }
        let mut seen_maps = HashSet::new();
        for atom in &atoms {
            if let Some(m) = atom.map_num {
                if !seen_maps.insert(m) {
                    return Err(MolError::DuplicateMapNum(m));
                }
            }
        }
        let mut seen_pairs = HashSet::new();
        let mut adj = vec![Vec::new(); n];
        for (i, bond) in bonds.iter().enumerate() {
            if bond.a >= n {
                return Err(MolError::BondOutOfRange(bond.a));
            }
            if bond.b >= n {
                return Err(MolError::BondOutOfRange(bond.b));
            }
            if bond.a == bond.b {
                return Err(MolError::SelfBond(bond.a));
            }
            let pair = (bond.a.min(bond.b), bond.a.max(bond.b));
            if !seen_pairs.insert(pair) {
                return Err(MolError::DuplicateBond(pair.0, pair.1));
            }
            adj[bond.a].push((bond.b, i));
            adj[bond.b].push((bond.a, i));
        }
        Ok(Molecule { atoms, bonds, adj })
    }

    pub fn n_atoms(&self) -> usize {
        self.atoms.len()
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

    /// `(neighbor, bond index)` pairs of atom `i`.
    pub fn neighbors(&self, i: usize) -> &[(usize, usize)] {
        &self.adj[i]
    }

    pub fn degree(&self, i: usize) -> usize {
        self.adj[i].len()
    }

    pub fn bond_between(&self, a: usize, b: usize) -> Option<&Bond> {
        self.adj[a]
            .iter()
            .find(|(nbr, _)| *nbr == b)
            .map(|&(_, bid)| &self.bonds[bid])
    }

    /// Map number -> atom index for every mapped atom.
    pub fn map_index(&self) -> HashMap<u32, usize> {
        self.atoms
            .iter()
            .enumerate()
            .filter_map(|(i, a)| a.map_num.map(|m| (m, i)))
            .collect()
    }

    /// A copy of the molecule with every atom map number removed.
    pub fn without_maps(&self) -> Molecule {
        let atoms = self
            .atoms
            .iter()
            .map(|a| Atom {
                map_num: None,
                ..a.clone()
            })
            .collect();
        Molecule::new(atoms, self.bonds.clone())
            .expect("dropping map numbers cannot invalidate a molecule")
    }
}

/// Count of non-hydrogen atoms.
pub fn heavy_atom_count(m: &Molecule) -> usize {
    m.atoms().iter().filter(|a| a.is_heavy()).count()
}

/// Indices of all bonds that lie on at least one cycle.
///
/// A bond is on a cycle exactly when it is not a bridge, so one DFS with
/// low-links over each component suffices.
pub fn ring_bond_set(m: &Molecule) -> HashSet<usize> {
    let n = m.n_atoms();
    let mut disc = vec![usize::MAX; n];
    let mut low = vec![0usize; n];
    let mut bridges = HashSet::new();
    let mut timer = 0usize;

    // Iterative DFS; each stack frame remembers which adjacency entry to
    // resume from so low-links propagate on the way back up.
    let mut stack: Vec<(usize, usize, usize)> = Vec::new(); // (atom, parent bond, next adj pos)
    for start in 0..n {
        if disc[start] != usize::MAX {
            continue;
        }
        disc[start] = timer;
        low[start] = timer;
        timer += 1;
        stack.push((start, usize::MAX, 0));
        loop {
            let Some(&(v, pbond, pos)) = stack.last() else {
                break;
            };
            if pos < m.neighbors(v).len() {
                stack.last_mut().expect("frame exists").2 += 1;
                let (w, bid) = m.neighbors(v)[pos];
                if bid == pbond {
                    continue;
                }
                if disc[w] == usize::MAX {
                    disc[w] = timer;
                    low[w] = timer;
                    timer += 1;
                    stack.push((w, bid, 0));
                } else {
                    low[v] = low[v].min(disc[w]);
                }
            } else {
                stack.pop();
                if let Some(&(parent, _, _)) = stack.last() {
                    low[parent] = low[parent].min(low[v]);
                    if low[v] > disc[parent] {
                        bridges.insert(pbond);
                    }
                }
            }
        }
    }

    (0..m.bonds().len())
        .filter(|bid| !bridges.contains(bid))
        .collect()
}

/// Split a molecule into its connected components.
///
/// Components are ordered by their smallest original atom index, and atoms
/// inside each component keep their relative order, so the operation is
/// deterministic and stable.
pub fn split_fragments(m: &Molecule) -> Vec<Molecule> {
    let n = m.n_atoms();
    let mut comp = vec![usize::MAX; n];
    let mut n_comp = 0usize;
    for start in 0..n {
        if comp[start] != usize::MAX {
            continue;
        }
        let mut queue = vec![start];
        comp[start] = n_comp;
        while let Some(v) = queue.pop() {
            for &(w, _) in m.neighbors(v) {
                if comp[w] == usize::MAX {
                    comp[w] = n_comp;
                    queue.push(w);
                }
            }
        }
        n_comp += 1;
    }

    let mut out = Vec::with_capacity(n_comp);
    for c in 0..n_comp {
        let members: Vec<usize> = (0..n).filter(|&i| comp[i] == c).collect();
        let local: HashMap<usize, usize> =
            members.iter().enumerate().map(|(j, &i)| (i, j)).collect();
        let atoms = members.iter().map(|&i| m.atom(i).clone()).collect();
        let bonds = m
            .bonds()
            .iter()
            .filter(|b| comp[b.a] == c)
            .map(|b| Bond {
                a: local[&b.a],
                b: local[&b.b],
                ..*b
            })
            .collect();
        out.push(Molecule::new(atoms, bonds).expect("fragment of a valid molecule is valid"));
    }
    out
}

/// Attribute-aware graph isomorphism.
///
/// Atoms match on (element, charge, isotope, aromatic, chirality) and, when
/// `respect_maps` is set, additionally on the atom map number. Bonds match on
/// order; direction tags and written hydrogen counts never participate.
pub fn is_isomorphic(m1: &Molecule, m2: &Molecule, respect_maps: bool) -> bool {
    let n = m1.n_atoms();
    if n != m2.n_atoms() || m1.bonds().len() != m2.bonds().len() {
        return false;
    }
    if n == 0 {
        return true;
    }

    // Quick reject on the multiset of (atom key, degree, incident orders).
    let profile = |m: &Molecule| {
        let mut v: Vec<_> = (0..m.n_atoms())
            .map(|i| {
                let mut orders: Vec<u8> = m
                    .neighbors(i)
                    .iter()
                    .map(|&(_, bid)| m.bond(bid).order.code())
                    .collect();
                orders.sort_unstable();
                let k = m.atom(i).key(respect_maps);
                (
                    k.0.to_string(),
                    k.1,
                    k.2,
                    k.3,
                    k.4,
                    k.5,
                    m.degree(i),
                    orders,
                )
            })
            .collect();
        v.sort();
        v
    };
    if profile(m1) != profile(m2) {
        return false;
    }

    // Build a search order over m1 in which every atom after the first of its
    // component has an already-placed neighbor, so candidates in m2 stay few.
    let mut order: Vec<(usize, Option<usize>)> = Vec::with_capacity(n); // (atom, anchor atom)
    let mut placed = vec![false; n];
    loop {
        let Some(seed) = (0..n).find(|&i| !placed[i]) else {
            break;
        };
        placed[seed] = true;
        order.push((seed, None));
        let mut frontier = vec![seed];
        while let Some(v) = frontier.pop() {
            for &(w, _) in m1.neighbors(v) {
                if !placed[w] {
                    placed[w] = true;
                    order.push((w, Some(v)));
                    frontier.push(w);
                }
            }
        }
    }

    fn compatible(
        m1: &Molecule,
        m2: &Molecule,
        respect_maps: bool,
        mapping: &[usize],
        v: usize,
        w: usize,
    ) -> bool {
        if m1.atom(v).key(respect_maps) != m2.atom(w).key(respect_maps) {
            return false;
        }
        if m1.degree(v) != m2.degree(w) {
            return false;
        }
        // Every already-mapped m1 neighbor must be bonded identically in m2,
        // and w must not be bonded to any image outside those neighbors.
        let mut expected = 0usize;
        for &(u, bid) in m1.neighbors(v) {
            if mapping[u] != usize::MAX {
                expected += 1;
                match m2.bond_between(w, mapping[u]) {
                    Some(b2) if b2.order == m1.bond(bid).order => {}
                    _ => return false,
                }
            }
        }
        let actual = m2
            .neighbors(w)
            .iter()
            .filter(|&&(u2, _)| mapping.contains(&u2))
            .count();
        expected == actual
    }

    fn search(
        m1: &Molecule,
        m2: &Molecule,
        respect_maps: bool,
        order: &[(usize, Option<usize>)],
        pos: usize,
        mapping: &mut Vec<usize>,
        used: &mut Vec<bool>,
    ) -> bool {
        if pos == order.len() {
            return true;
        }
        let (v, anchor) = order[pos];
        let candidates: Vec<usize> = match anchor {
            Some(a) => m2
                .neighbors(mapping[a])
                .iter()
                .map(|&(w, _)| w)
                .filter(|&w| !used[w])
                .collect(),
            None => (0..m2.n_atoms()).filter(|&w| !used[w]).collect(),
        };
        for w in candidates {
            if compatible(m1, m2, respect_maps, mapping, v, w) {
                mapping[v] = w;
                used[w] = true;
                if search(m1, m2, respect_maps, order, pos + 1, mapping, used) {
                    return true;
                }
                mapping[v] = usize::MAX;
                used[w] = false;
            }
        }
        false
    }

    let mut mapping = vec![usize::MAX; n];
    let mut used = vec![false; n];
    search(m1, m2, respect_maps, &order, 0, &mut mapping, &mut used)
}

/// One side-to-side comparison of a mapped reaction.
#[derive(Debug, Clone)]
pub struct Reaction {
    pub reactants: Vec<Molecule>,
    pub reagents: Vec<Molecule>,
    pub products: Vec<Molecule>,
    pub source_id: Option<String>,
}

impl Reaction {
    pub fn new(reactants: Vec<Molecule>, reagents: Vec<Molecule>, products: Vec<Molecule>) -> Self {
        Reaction {
            reactants,
            reagents,
            products,
            source_id: None,
        }
    }

    /// The single product of a cleaned reaction.
    pub fn product(&self) -> Result<&Molecule, MolError> {
        self.products.first().ok_or(MolError::NoProduct)
    }

    /// A copy with the reagents moved onto the reactant side.
    pub fn with_reagents_mixed(&self) -> Reaction {
        let mut reactants = self.reactants.clone();
        reactants.extend(self.reagents.iter().cloned());
        Reaction {
            reactants,
            reagents: Vec::new(),
            products: self.products.clone(),
            source_id: self.source_id.clone(),
        }
    }
}

/// Bonds that differ between the product and the reactant side.
///
/// `broken` lists product bond indices with no identical counterpart between
/// the same mapped atoms on the reactant side; `formed` lists
/// `(reactant index, bond index)` pairs for reactant bonds between mapped
/// atoms with no identical counterpart in the product. A bond whose order
/// changes appears on both lists.
#[derive(Debug, Clone, Default)]
pub struct BondDiff {
    pub broken: Vec<usize>,
    pub formed: Vec<(usize, usize)>,
}

/// Compare product bonds against reactant bonds through the atom mapping.
///
/// The product must be fully mapped; reactant atoms may be unmapped (bonds
/// touching them are invisible to the diff).
pub fn bond_diff(rxn: &Reaction) -> Result<BondDiff, MolError> {
    let product = rxn.product()?;
    for (i, atom) in product.atoms().iter().enumerate() {
        if atom.map_num.is_none() {
            return Err(MolError::UnmappedProductAtom { atom: i });
        }
    }

    // map number -> (reactant index, atom index)
    let mut reactant_of: HashMap<u32, (usize, usize)> = HashMap::new();
    for (ri, r) in rxn.reactants.iter().enumerate() {
        for (ai, atom) in r.atoms().iter().enumerate() {
            if let Some(m) = atom.map_num {
                reactant_of.entry(m).or_insert((ri, ai));
            }
        }
    }
    let product_map = product.map_index();

    let mut diff = BondDiff::default();
    for (bid, bond) in product.bonds().iter().enumerate() {
        let ma = product.atom(bond.a).map_num.expect("checked above");
        let mb = product.atom(bond.b).map_num.expect("checked above");
        let matched = match (reactant_of.get(&ma), reactant_of.get(&mb)) {
            (Some(&(ra, aa)), Some(&(rb, ab))) if ra == rb => rxn.reactants[ra]
                .bond_between(aa, ab)
                .is_some_and(|b| b.order == bond.order),
            _ => false,
        };
        if !matched {
            diff.broken.push(bid);
        }
    }
    for (ri, r) in rxn.reactants.iter().enumerate() {
        for (bid, bond) in r.bonds().iter().enumerate() {
            let (Some(ma), Some(mb)) = (r.atom(bond.a).map_num, r.atom(bond.b).map_num) else {
                continue;
            };
            let matched = match (product_map.get(&ma), product_map.get(&mb)) {
                (Some(&pa), Some(&pb)) => product
                    .bond_between(pa, pb)
                    .is_some_and(|b| b.order == bond.order),
                _ => false,
            };
            if !matched {
                diff.formed.push((ri, bid));
            }
        }
    }
    Ok(diff)
}

/// Atomic number of a standard element symbol, used to order elements in
/// canonical ranking. Unknown symbols sort after all known ones.
pub(crate) fn atomic_number(symbol: &str) -> Option<u8> {
    const TABLE: [&str; 92] = [
        "H", "He", "Li", "Be", "B", "C", "N", "O", "F", "Ne", "Na", "Mg", "Al", "Si", "P", "S",
        "Cl", "Ar", "K", "Ca", "Sc", "Ti", "V", "Cr", "Mn", "Fe", "Co", "Ni", "Cu", "Zn", "Ga",
        "Ge", "As", "Se", "Br", "Kr", "Rb", "Sr", "Y", "Zr", "Nb", "Mo", "Tc", "Ru", "Rh", "Pd",
        "Ag", "Cd", "In", "Sn", "Sb", "Te", "I", "Xe", "Cs", "Ba", "La", "Ce", "Pr", "Nd", "Pm",
        "Sm", "Eu", "Gd", "Tb", "Dy", "Ho", "Er", "Tm", "Yb", "Lu", "Hf", "Ta", "W", "Re", "Os",
        "Ir", "Pt", "Au", "Hg", "Tl", "Pb", "Bi", "Po", "At", "Rn", "Fr", "Ra", "Ac", "Th", "Pa",
        "U",
    ];
    TABLE
        .iter()
        .position(|&s| s == symbol)
        .map(|i| (i + 1) as u8)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smiles::parse;
    use crate::testutil::{ring_edges_by_cycle_enumeration, worked_example};

    fn perm_isomorphic(m1: &Molecule, m2: &Molecule, respect_maps: bool) -> bool {
        // Brute force over all atom bijections; usable up to ~8 atoms.
        fn extend(
            m1: &Molecule,
            m2: &Molecule,
            respect_maps: bool,
            perm: &mut Vec<usize>,
            used: &mut Vec<bool>,
        ) -> bool {
            let v = perm.len();
            if v == m1.n_atoms() {
                return m1.bonds().iter().all(|b| {
                    m2.bond_between(perm[b.a], perm[b.b])
                        .is_some_and(|b2| b2.order == b.order)
                });
            }
            for w in 0..m2.n_atoms() {
                if used[w] || m1.atom(v).key(respect_maps) != m2.atom(w).key(respect_maps) {
                    continue;
                }
                perm.push(w);
                used[w] = true;
                if extend(m1, m2, respect_maps, perm, used) {
                    return true;
                }
                perm.pop();
                used[w] = false;
            }
            false
        }
        m1.n_atoms() == m2.n_atoms()
            && m1.bonds().len() == m2.bonds().len()
            && extend(
                m1,
                m2,
                respect_maps,
                &mut Vec::new(),
                &mut vec![false; m2.n_atoms()],
            )
    }

    #[test]
    fn benzene_has_six_ring_bonds() {
        let m = parse("c1ccccc1").unwrap();
        assert_eq!(ring_bond_set(&m).len(), 6);
    }

    #[test]
    fn acyclic_molecule_has_no_ring_bonds() {
        let m = parse("CCO").unwrap();
        assert!(ring_bond_set(&m).is_empty());
    }

    #[test]
    fn exocyclic_bond_is_not_a_ring_bond() {
        let m = parse("O1CCC(N)C1O").unwrap();
        let rings = ring_bond_set(&m);
        assert_eq!(rings.len(), 5);
        for bid in &rings {
            let b = m.bond(*bid);
            // No ring bond touches the exocyclic N or O.
            assert!(m.atom(b.a).element != "N" && m.atom(b.b).element != "N");
        }
    }

    #[test]
    fn ring_bonds_match_cycle_enumeration_oracle() {
        for smi in [
            "C1CC1",
            "C1CCC1C",
            "C1CC2CCC1C2", // fused bicycle
            "C1CC1C1CC1",  // two separate rings
            "O1CCC(N)C1O",
            "CC(C)C",
            "c1ccccc1C",
            "C1CC11CC1", // spiro via reused digit
        ] {
            let m = parse(smi).unwrap();
            assert_eq!(
                ring_bond_set(&m),
                ring_edges_by_cycle_enumeration(&m),
                "ring set mismatch for {smi}"
            );
        }
    }

    #[test]
    fn split_preserves_fragments_and_order() {
        let m = parse(worked_example::REACTANTS_MAPPED).unwrap();
        let frags = split_fragments(&m);
        assert_eq!(frags.len(), 2);
        assert_eq!(frags[0].n_atoms(), 5); // Cl[C:1]([CH:2]=[CH2:3])=[O:4]
        assert_eq!(frags[1].n_atoms(), 6);
        // First fragment keeps its own bonds intact.
        assert_eq!(frags[0].bonds().len(), 4);
    }

    #[test]
    fn split_of_connected_molecule_is_identity_shaped() {
        let m = parse("c1ccccc1").unwrap();
        let frags = split_fragments(&m);
        assert_eq!(frags.len(), 1);
        assert_eq!(frags[0].n_atoms(), 6);
    }

    #[test]
    fn split_of_empty_molecule_is_empty() {
        let m = Molecule::new(Vec::new(), Vec::new()).unwrap();
        assert!(split_fragments(&m).is_empty());
    }

    #[test]
    fn isomorphism_ignores_atom_order() {
        let a = parse("OCC").unwrap();
        let b = parse("CCO").unwrap();
        assert!(is_isomorphic(&a, &b, false));
    }

    #[test]
    fn isomorphism_distinguishes_elements() {
        let a = parse("CCO").unwrap();
        let b = parse("CCN").unwrap();
        assert!(!is_isomorphic(&a, &b, false));
    }

    #[test]
    fn isomorphism_distinguishes_bond_orders() {
        let a = parse("C=CC").unwrap();
        let b = parse("CC=C").unwrap(); // same graph, different writing
        assert!(is_isomorphic(&a, &b, false));
        let c = parse("CCC").unwrap();
        assert!(!is_isomorphic(&a, &c, false));
    }

    #[test]
    fn map_respecting_isomorphism_on_rewritten_product() {
        let original = parse(worked_example::PRODUCT_MAPPED).unwrap();
        let rewritten = parse(worked_example::PRODUCT_ROOTED_MAPPED).unwrap();
        assert!(is_isomorphic(&original, &rewritten, true));
        assert!(is_isomorphic(&original, &rewritten, false));
    }

    #[test]
    fn map_respecting_isomorphism_rejects_permuted_maps() {
        let a = parse("[CH3:1][OH:2]").unwrap();
        let b = parse("[CH3:2][OH:1]").unwrap();
        assert!(is_isomorphic(&a, &b, false));
        assert!(!is_isomorphic(&a, &b, true));
    }

    #[test]
    fn matcher_agrees_with_permutation_oracle() {
        let cases = [
            ("CCO", "OCC", true),
            ("CCO", "CCN", false),
            ("C1CCC1", "C1CC1C", false),
            ("CC(C)C", "CCCC", false),
            ("C(F)(Cl)Br", "FC(Br)Cl", true),
            ("[NH4+]", "N", false),
            ("C[13C]C", "C[13C]C", true),
            ("C[13C]C", "CCC", false),
            ("C/C=C/C", "CC=CC", true), // direction tags excluded
            ("C[C@@H](N)O", "C[C@H](N)O", false),
            ("C[C@@H](N)O", "OC(N)C", false), // chirality tag vs none
            ("CC.O", "O.CC", true),
        ];
        for (s1, s2, _expect) in cases {
            let m1 = parse(s1).unwrap();
            let m2 = parse(s2).unwrap();
            for maps in [false, true] {
                assert_eq!(
                    is_isomorphic(&m1, &m2, maps),
                    perm_isomorphic(&m1, &m2, maps),
                    "oracle disagreement on {s1} vs {s2} (maps={maps})"
                );
            }
        }
        // And the expectations themselves hold on the attribute-level matcher.
        for (s1, s2, expect) in cases {
            let m1 = parse(s1).unwrap();
            let m2 = parse(s2).unwrap();
            assert_eq!(is_isomorphic(&m1, &m2, false), expect, "{s1} vs {s2}");
        }
    }

    #[test]
    fn heavy_atoms_ignore_explicit_hydrogen_atoms() {
        assert_eq!(heavy_atom_count(&parse("c1ccccc1").unwrap()), 6);
        assert_eq!(heavy_atom_count(&parse("[H][H]").unwrap()), 0);
        assert_eq!(heavy_atom_count(&parse(worked_example::PRODUCT_MAPPED).unwrap()), 10);
    }

    #[test]
    fn bond_diff_finds_the_single_broken_bond_of_the_ester_reaction() {
        let rxn = worked_example::reaction();
        let diff = bond_diff(&rxn).unwrap();
        assert_eq!(diff.broken.len(), 1);
        let product = rxn.product().unwrap();
        let b = product.bond(diff.broken[0]);
        let maps = (
            product.atom(b.a).map_num.unwrap(),
            product.atom(b.b).map_num.unwrap(),
        );
        assert!(maps == (1, 5) || maps == (5, 1));
        assert!(diff.formed.is_empty());
    }

    #[test]
    fn bond_diff_of_identity_reaction_is_empty() {
        let m = parse("[CH3:1][OH:2]").unwrap();
        let rxn = Reaction::new(vec![m.clone()], Vec::new(), vec![m]);
        let diff = bond_diff(&rxn).unwrap();
        assert!(diff.broken.is_empty());
        assert!(diff.formed.is_empty());
    }

    #[test]
    fn bond_diff_requires_fully_mapped_product() {
        let reactant = parse("[CH3:1]O").unwrap();
        let product = parse("[CH3:1]O").unwrap();
        let rxn = Reaction::new(vec![reactant], Vec::new(), vec![product]);
        assert_eq!(
            bond_diff(&rxn).unwrap_err(),
            MolError::UnmappedProductAtom { atom: 1 }
        );
    }

    #[test]
    fn bond_order_change_counts_on_both_sides() {
        let rxn = Reaction::new(
            vec![parse("[CH3:1][CH3:2]").unwrap()],
            Vec::new(),
            vec![parse("[CH2:1]=[CH2:2]").unwrap()],
        );
        let diff = bond_diff(&rxn).unwrap();
        assert_eq!(diff.broken.len(), 1);
        assert_eq!(diff.formed.len(), 1);
    }

    #[test]
    fn constructor_rejects_broken_input() {
        let a = || Atom::of("C");
        assert_eq!(
            Molecule::new(vec![a()], vec![Bond::new(0, 1, BondOrder::Single)]).unwrap_err(),
            MolError::BondOutOfRange(1)
        );
        assert_eq!(
            Molecule::new(vec![a(), a()], vec![Bond::new(1, 1, BondOrder::Single)]).unwrap_err(),
            MolError::SelfBond(1)
        );
        assert_eq!(
            Molecule::new(
                vec![a(), a()],
                vec![
                    Bond::new(0, 1, BondOrder::Single),
                    Bond::new(1, 0, BondOrder::Double)
                ]
            )
            .unwrap_err(),
            MolError::DuplicateBond(0, 1)
        );
        let mut mapped = Atom::of("C");
        mapped.map_num = Some(7);
        assert_eq!(
            Molecule::new(vec![mapped.clone(), mapped], Vec::new()).unwrap_err(),
            MolError::DuplicateMapNum(7)
        );
        let mut arom_cl = Atom::of("Cl");
        arom_cl.aromatic = true;
        assert_eq!(
            Molecule::new(vec![arom_cl], Vec::new()).unwrap_err(),
            MolError::NotAromatic("Cl".into())
        );
    }
}
