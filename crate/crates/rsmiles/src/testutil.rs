//! Fixtures and independent oracles shared by the unit tests.

use std::collections::HashSet;

use crate::molgraph::{Molecule, Reaction};
use crate::smiles::parse;

/// The chloroester formation reaction used as the worked alignment example
/// throughout the test-suite (acryloyl chloride + trichloroethanol).
pub mod worked_example {
    use super::*;

    pub const REACTANTS_MAPPED: &str =
        "Cl[C:1]([CH:2]=[CH2:3])=[O:4].[OH:5][CH2:6][C:7]([Cl:8])([Cl:9])[Cl:10]";
    pub const PRODUCT_MAPPED: &str =
        "[C:1]([CH:2]=[CH2:3])(=[O:4])[O:5][CH2:6][C:7]([Cl:8])([Cl:9])[Cl:10]";
    /// Product rewritten from root atom map 8, map numbers kept.
    pub const PRODUCT_ROOTED_MAPPED: &str =
        "[Cl:8][C:7]([Cl:9])([Cl:10])[C:6][O:5][C:1](=[O:4])[C:2]=[C:3]";
    /// Product rewritten from root atom map 8, map numbers removed.
    pub const PRODUCT_ROOTED: &str = "ClC(Cl)(Cl)COC(=O)C=C";
    /// Reactants aligned to the rooted product, map numbers removed.
    pub const REACTANTS_ALIGNED: &str = "ClC(Cl)(Cl)CO.C(=O)(Cl)C=C";
    /// Space-joined token lines of the aligned pair.
    pub const SRC_TOKENS: &str = "Cl C ( Cl ) ( Cl ) C O C ( = O ) C = C";
    pub const TGT_TOKENS: &str = "Cl C ( Cl ) ( Cl ) C O . C ( = O ) ( Cl ) C = C";
    /// Synthons obtained by deleting the broken O5-C1 bond, maps kept.
    pub const SYNTHONS_MAPPED: &str =
        "[C:1]([CH:2]=[CH2:3])=[O:4].[O:5][CH2:6][C:7]([Cl:8])([Cl:9])[Cl:10]";
    /// Synthon side of the synthon-to-reactant source, map numbers removed.
    pub const SYNTHONS_ALIGNED: &str = "ClC(Cl)(Cl)CO.C(=O)C=C";
    /// Unmapped reaction line as it would appear in a raw dataset.
    pub fn reaction_line() -> String {
        format!("{}>>{}", REACTANTS_MAPPED, PRODUCT_MAPPED)
    }

    pub fn reaction() -> Reaction {
        reaction_from_sides(REACTANTS_MAPPED, PRODUCT_MAPPED)
    }
}

/// Hemiacetal ring-opening example: the reactant is a cyclic hemiacetal, the
/// product its open-chain aldehyde form.
pub mod ring_opening {
    use super::*;

    pub const REACTANT_MAPPED: &str = "[CH2:1]1[CH:2]([NH2:3])[CH:4]([OH:5])[O:6][CH2:7]1";
    pub const PRODUCT_MAPPED: &str = "[OH:6][CH2:7][CH2:1][CH:2]([NH2:3])[CH:4]=[O:5]";
    /// Product and reactant rewritten from shared root atom map 6.
    pub const PRODUCT_ROOTED: &str = "OCCC(N)C=O";
    pub const REACTANT_ROOTED: &str = "O1CCC(N)C1O";
    /// The same pair rewritten from root atom map 5, the poorly aligned root.
    pub const PRODUCT_ROOTED_AT_5: &str = "O=CC(N)CCO";
    pub const REACTANT_ROOTED_AT_5: &str = "OC1OCCC1N";

    pub fn reaction() -> Reaction {
        reaction_from_sides(REACTANT_MAPPED, PRODUCT_MAPPED)
    }
}

/// Build a reagent-free reaction from mapped reactant/product SMILES.
pub fn reaction_from_sides(reactants: &str, product: &str) -> Reaction {
    let r = parse(reactants).expect("fixture reactants parse");
    let p = parse(product).expect("fixture product parses");
    Reaction::new(
        crate::molgraph::split_fragments(&r),
        Vec::new(),
        crate::molgraph::split_fragments(&p),
    )
}

/// Oracle for ring-bond detection: enumerate every simple cycle by walking
/// all simple paths and collect the edges they use. Exponential; only for
/// small test molecules.
pub fn ring_edges_by_cycle_enumeration(m: &Molecule) -> HashSet<usize> {
    let mut on_cycle = HashSet::new();
    let n = m.n_atoms();
    for start in 0..n {
        let mut path_atoms = vec![start];
        let mut path_bonds = Vec::new();
        walk(
            m,
            start,
            start,
            &mut path_atoms,
            &mut path_bonds,
            &mut on_cycle,
        );
    }
    return on_cycle;

    fn walk(
        m: &Molecule,
        start: usize,
        v: usize,
        path_atoms: &mut Vec<usize>,
        path_bonds: &mut Vec<usize>,
        on_cycle: &mut HashSet<usize>,
    ) {
        for &(w, bid) in m.neighbors(v) {
            if Some(&bid) == path_bonds.last() {
                continue;
            }
            if w == start && path_bonds.len() >= 2 {
                on_cycle.extend(path_bonds.iter().copied());
                on_cycle.insert(bid);
            } else if !path_atoms.contains(&w) {
                path_atoms.push(w);
                path_bonds.push(bid);
                walk(m, start, w, path_atoms, path_bonds, on_cycle);
                path_atoms.pop();
                path_bonds.pop();
            }
        }
    }
}

/// Oracle for edit distance: uniform-cost search over the edit graph,
/// expanding every partial edit script of increasing cost.
pub fn ucs_edit_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    use std::collections::VecDeque;
    let (n, m) = (a.len(), b.len());
    let mut best = vec![vec![usize::MAX; m + 1]; n + 1];
    let mut queue = VecDeque::new();
    best[0][0] = 0;
    queue.push_back((0usize, 0usize));
    while let Some((i, j)) = queue.pop_front() {
        let cost = best[i][j];
        // Follow free diagonal moves (matches) first.
        if i < n && j < m && a[i] == b[j] && cost < best[i + 1][j + 1] {
            best[i + 1][j + 1] = cost;
            queue.push_front((i + 1, j + 1));
            continue;
        }
        let mut relax = |ni: usize, nj: usize, q: &mut VecDeque<(usize, usize)>| {
            if cost + 1 < best[ni][nj] {
                best[ni][nj] = cost + 1;
                q.push_back((ni, nj));
            }
        };
        if i < n {
            relax(i + 1, j, &mut queue);
        }
        if j < m {
            relax(i, j + 1, &mut queue);
        }
        if i < n && j < m {
            relax(i + 1, j + 1, &mut queue);
        }
    }
    best[n][m]
}
