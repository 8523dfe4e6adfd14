//! Shared-root alignment of reaction sides.
//!
//! The alignment idea: write the product from a chosen root atom, then write
//! every other molecule of the reaction from the atom that shares that root's
//! map number — or, when a molecule does not contain the root, from its atom
//! whose map number appears earliest in the product string. Because both
//! sides then traverse the common substructure in the same order, source and
//! target strings agree over long prefixes and differ only around the
//! reaction center, which is what makes the pairs easy to learn from.
//!
//! Four pairings are supported: product→reactants ([`align_p2r`]), product→
//! synthons ([`align_p2s`]), synthons→reactants ([`align_s2r`]), and the
//! forward direction reactants→product ([`align_r2p`]). Synthons are the
//! product fragments left after deleting reaction-center bonds
//! ([`extract_synthons`]).

use std::collections::{HashMap, HashSet};

use thiserror::Error;

use crate::molgraph::{
    bond_diff, heavy_atom_count, split_fragments, MolError, Molecule, Reaction,
};
use crate::smiles::{
    canonical_ranks, tokenize, write_canonical, write_rooted, write_rooted_traced, SmilesError,
    TokenSeq, WriteOrder, SPLIT_TOKEN,
};

/// The four translation directions a pair can encode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Task {
    /// Product to reactants (retrosynthesis).
    P2R,
    /// Product to synthons.
    P2S,
    /// Product plus synthons to reactants.
    S2R,
    /// Reactants to product (forward prediction).
    R2P,
}

impl std::fmt::Display for Task {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Task::P2R => "p2r",
            Task::P2S => "p2s",
            Task::S2R => "s2r",
            Task::R2P => "r2p",
        })
    }
}

/// One training sample: a source and target string pair with provenance.
///
/// Both strings are map-free. `root_map` is the product-side map number the
/// alignment was rooted at; `aug_index` and `seed` record which augmentation
/// draw produced the pair (0 for direct alignment calls).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AlignedPair {
    pub task: Task,
    pub source: String,
    pub target: String,
    pub root_map: u32,
    pub aug_index: usize,
    pub seed: u64,
}

impl AlignedPair {
    /// Token sequence of the source string.
    pub fn source_tokens(&self) -> Result<TokenSeq, SmilesError> {
        tokenize(&self.source)
    }

    /// Token sequence of the target string.
    pub fn target_tokens(&self) -> Result<TokenSeq, SmilesError> {
        tokenize(&self.target)
    }
}

/// Product fragments obtained by deleting the reaction-center bonds.
#[derive(Debug, Clone)]
pub struct SynthonSet {
    /// Connected components of the bond-deleted product, map numbers kept.
    pub synthons: Vec<Molecule>,
    /// Product bond ids that were deleted.
    pub broken_bonds: Vec<usize>,
}

#[derive(Debug, Error, PartialEq)]
pub enum AlignError {
    #[error("root map {map} does not label any product atom")]
    RootNotInProduct { map: u32 },
    #[error("root map {map} is not shared by the product and the largest reactant")]
    RootNotShared { map: u32 },
    #[error("synthon {index} does not correspond to exactly one reactant")]
    SynthonReactantMismatch { index: usize },
    #[error(transparent)]
    Smiles(#[from] SmilesError),
    #[error(transparent)]
    Mol(#[from] MolError),
}

/// A copy of the molecule with every atom map number removed.
pub fn strip_atom_maps(m: &Molecule) -> Molecule {
    m.without_maps()
}

/// Index of the largest molecule: most heavy atoms, then longest canonical
/// string, then lexicographically smallest canonical string.
pub fn largest_fragment_index(mols: &[Molecule]) -> Option<usize> {
    let canons: Vec<String> = mols.iter().map(write_canonical).collect();
    (0..mols.len()).min_by_key(|&i| {
        (
            std::cmp::Reverse(heavy_atom_count(&mols[i])),
            std::cmp::Reverse(canons[i].len()),
            canons[i].clone(),
        )
    })
}

/// Root the product at `root_map` and return the map-free string together
/// with each map number's position in the atom visit order.
fn product_trace(
    product: &Molecule,
    root_map: u32,
) -> Result<(String, HashMap<u32, usize>), AlignError> {
    if let Some(atom) = (0..product.n_atoms()).find(|&i| product.atom(i).map_num.is_none()) {
        return Err(MolError::UnmappedProductAtom { atom }.into());
    }
    let root = *product
        .map_index()
        .get(&root_map)
        .ok_or(AlignError::RootNotInProduct { map: root_map })?;
    let order = WriteOrder::rooted(product, root)?;
    let (source, trace) = write_rooted_traced(product, &order, false)?;
    let mut map_pos = HashMap::new();
    for (pos, &atom) in trace.iter().enumerate() {
        map_pos.insert(
            product.atom(atom).map_num.expect("product fully mapped"),
            pos,
        );
    }
    Ok((source, map_pos))
}

/// For one fragment, the earliest product position among its mapped atoms
/// and the atom holding it.
fn earliest_shared_atom(frag: &Molecule, map_pos: &HashMap<u32, usize>) -> Option<(usize, usize)> {
    (0..frag.n_atoms())
        .filter_map(|i| {
            let map = frag.atom(i).map_num?;
            map_pos.get(&map).map(|&pos| (pos, i))
        })
        .min()
}

/// Write each fragment rooted at its earliest shared atom, order fragments
/// by that position, and append map-free fragments in canonical form sorted
/// lexicographically.
fn align_fragments(
    frags: &[Molecule],
    map_pos: &HashMap<u32, usize>,
) -> Result<String, AlignError> {
    let mut aligned: Vec<(usize, String)> = Vec::new();
    let mut unaligned: Vec<String> = Vec::new();
    for frag in frags {
        match earliest_shared_atom(frag, map_pos) {
            Some((pos, root)) => {
                let order = WriteOrder::rooted(frag, root)?;
                aligned.push((pos, write_rooted(frag, &order, false)?));
            }
            None => unaligned.push(write_canonical(frag)),
        }
    }
    aligned.sort();
    unaligned.sort();
    let parts: Vec<String> = aligned
        .into_iter()
        .map(|(_, s)| s)
        .chain(unaligned)
        .collect();
    Ok(parts.join("."))
}

/// Retrosynthesis pair: product rooted at `root_map` as source; reactants,
/// each rooted at its earliest shared map and ordered by that position, as
/// target. Reactants sharing no map with the product are appended in sorted
/// canonical form.
pub fn align_p2r(rxn: &Reaction, root_map: u32) -> Result<AlignedPair, AlignError> {
    let product = rxn.product()?;
    let (source, map_pos) = product_trace(product, root_map)?;
    let target = align_fragments(&rxn.reactants, &map_pos)?;
    Ok(AlignedPair {
        task: Task::P2R,
        source,
        target,
        root_map,
        aug_index: 0,
        seed: 0,
    })
}

/// Delete the reaction-center (broken) bonds from the product and return the
/// resulting fragments with their map numbers intact.
pub fn extract_synthons(rxn: &Reaction) -> Result<SynthonSet, AlignError> {
    let product = rxn.product()?;
    let diff = bond_diff(rxn)?;
    let broken: HashSet<usize> = diff.broken.iter().copied().collect();
    let kept = product
        .bonds()
        .iter()
        .enumerate()
        .filter(|(i, _)| !broken.contains(i))
        .map(|(_, b)| *b)
        .collect();
    let stripped = Molecule::new(product.atoms().to_vec(), kept)
        .expect("bond-deleted product remains a valid molecule");
    Ok(SynthonSet {
        synthons: split_fragments(&stripped),
        broken_bonds: diff.broken,
    })
}

/// Root map for synthon-anchored tasks: the largest synthon's atom with the
/// lowest product canonical rank.
fn synthon_root_map(product: &Molecule, synthons: &[Molecule]) -> Result<u32, AlignError> {
    let largest = largest_fragment_index(synthons).ok_or(MolError::NoProduct)?;
    let ranks = canonical_ranks(product);
    let product_idx = product.map_index();
    synthons[largest]
        .atoms()
        .iter()
        .filter_map(|a| {
            let map = a.map_num?;
            product_idx.get(&map).map(|&i| (ranks[i], map))
        })
        .min()
        .map(|(_, map)| map)
        .ok_or(MolError::UnmappedProductAtom { atom: 0 }.into())
}

/// As [`align_p2s`] but with a caller-chosen product root.
pub fn align_p2s_rooted(rxn: &Reaction, root_map: u32) -> Result<AlignedPair, AlignError> {
    let product = rxn.product()?;
    let synthons = extract_synthons(rxn)?;
    let (source, map_pos) = product_trace(product, root_map)?;
    let target = align_fragments(&synthons.synthons, &map_pos)?;
    Ok(AlignedPair {
        task: Task::P2S,
        source,
        target,
        root_map,
        aug_index: 0,
        seed: 0,
    })
}

/// Product→synthon pair rooted at the largest synthon: the product root is
/// the largest synthon's atom of lowest product canonical rank, which puts
/// that synthon first in the target.
pub fn align_p2s(rxn: &Reaction) -> Result<AlignedPair, AlignError> {
    let product = rxn.product()?;
    let synthons = extract_synthons(rxn)?;
    let root_map = synthon_root_map(product, &synthons.synthons)?;
    align_p2s_rooted(rxn, root_map)
}

/// As [`align_s2r`] but with a caller-chosen product root.
pub fn align_s2r_rooted(rxn: &Reaction, root_map: u32) -> Result<AlignedPair, AlignError> {
    let product = rxn.product()?;
    let synthons = extract_synthons(rxn)?.synthons;
    let (product_part, map_pos) = product_trace(product, root_map)?;

    // Synthons in target order, each with its chosen root map.
    let mut placed: Vec<(usize, usize, u32)> = Vec::new();
    for (si, synthon) in synthons.iter().enumerate() {
        let (pos, root) = earliest_shared_atom(synthon, &map_pos)
            .expect("synthon atoms are product atoms, so all are placed");
        let map = synthon.atom(root).map_num.expect("product fully mapped");
        placed.push((pos, si, map));
    }
    placed.sort();
    let mut synthon_parts = Vec::new();
    for &(_, si, map) in &placed {
        let root = *synthons[si].map_index().get(&map).expect("map is in synthon");
        let order = WriteOrder::rooted(&synthons[si], root)?;
        synthon_parts.push(write_rooted(&synthons[si], &order, false)?);
    }

    // Each synthon must belong to exactly one reactant; a reactant covered
    // by several synthons (intramolecular split) is written once, rooted and
    // placed by its first synthon.
    let mut reactant_of_map: HashMap<u32, usize> = HashMap::new();
    for (ri, reactant) in rxn.reactants.iter().enumerate() {
        for map in reactant.map_index().keys() {
            reactant_of_map.insert(*map, ri);
        }
    }
    let mut reactant_entry: HashMap<usize, (usize, u32)> = HashMap::new();
    for (order_idx, &(_, si, map)) in placed.iter().enumerate() {
        let owners: HashSet<usize> = synthons[si]
            .atoms()
            .iter()
            .filter_map(|a| a.map_num)
            .filter_map(|m| reactant_of_map.get(&m).copied())
            .collect();
        let owner = match (owners.len(), owners.iter().next()) {
            (1, Some(&ri)) => ri,
            _ => return Err(AlignError::SynthonReactantMismatch { index: si }),
        };
        reactant_entry.entry(owner).or_insert((order_idx, map));
    }
    let mut with_synthon: Vec<(usize, usize, u32)> = reactant_entry
        .into_iter()
        .map(|(ri, (order_idx, map))| (order_idx, ri, map))
        .collect();
    with_synthon.sort();
    let mut reactant_parts = Vec::new();
    let mut covered: HashSet<usize> = HashSet::new();
    for &(_, ri, map) in &with_synthon {
        covered.insert(ri);
        let reactant = &rxn.reactants[ri];
        let root = *reactant.map_index().get(&map).expect("owner holds the map");
        let order = WriteOrder::rooted(reactant, root)?;
        reactant_parts.push(write_rooted(reactant, &order, false)?);
    }
    let mut leftovers: Vec<String> = rxn
        .reactants
        .iter()
        .enumerate()
        .filter(|(ri, _)| !covered.contains(ri))
        .map(|(_, r)| write_canonical(r))
        .collect();
    leftovers.sort();
    reactant_parts.extend(leftovers);

    Ok(AlignedPair {
        task: Task::S2R,
        source: format!(
            "{product_part}{SPLIT_TOKEN}{}",
            synthon_parts.join(".")
        ),
        target: reactant_parts.join("."),
        root_map,
        aug_index: 0,
        seed: 0,
    })
}

/// Synthon-completion pair: source is the product string, the reserved
/// separator token, and the synthon strings; target is the reactants rooted
/// at their synthons' root maps in synthon order.
pub fn align_s2r(rxn: &Reaction) -> Result<AlignedPair, AlignError> {
    let product = rxn.product()?;
    let synthons = extract_synthons(rxn)?;
    let root_map = synthon_root_map(product, &synthons.synthons)?;
    align_s2r_rooted(rxn, root_map)
}

/// Forward pair: reactants as source with the largest reactant first, rooted
/// at `reactant_root_map`; the product rooted at the same map as target. The
/// root map must occur in both the product and the largest reactant.
pub fn align_r2p(rxn: &Reaction, reactant_root_map: u32) -> Result<AlignedPair, AlignError> {
    let product = rxn.product()?;
    let largest = largest_fragment_index(&rxn.reactants)
        .ok_or(AlignError::RootNotShared { map: reactant_root_map })?;
    if !product.map_index().contains_key(&reactant_root_map)
        || !rxn.reactants[largest]
            .map_index()
            .contains_key(&reactant_root_map)
    {
        return Err(AlignError::RootNotShared { map: reactant_root_map });
    }
    let (target, map_pos) = product_trace(product, reactant_root_map)?;

    let largest_mol = &rxn.reactants[largest];
    let root = *largest_mol
        .map_index()
        .get(&reactant_root_map)
        .expect("checked above");
    let order = WriteOrder::rooted(largest_mol, root)?;
    let mut parts = vec![write_rooted(largest_mol, &order, false)?];

    let mut aligned: Vec<(usize, String)> = Vec::new();
    let mut unaligned: Vec<String> = Vec::new();
    for (ri, reactant) in rxn.reactants.iter().enumerate() {
        if ri == largest {
            continue;
        }
        match earliest_shared_atom(reactant, &map_pos) {
            Some((pos, r)) => {
                let order = WriteOrder::rooted(reactant, r)?;
                aligned.push((pos, write_rooted(reactant, &order, false)?));
            }
            None => unaligned.push(write_canonical(reactant)),
        }
    }
    aligned.sort();
    unaligned.sort();
    parts.extend(aligned.into_iter().map(|(_, s)| s));
    parts.extend(unaligned);

    Ok(AlignedPair {
        task: Task::R2P,
        source: parts.join("."),
        target,
        root_map: reactant_root_map,
        aug_index: 0,
        seed: 0,
    })
}
