//! Deterministic synthetic-reaction sample generator.
//!
//! Emits mapped `reactants>>product` lines to stdout: random connected
//! product graphs whose reactants are the two fragments left by deleting one
//! non-ring bond, optionally with an unmapped chlorine closing the opened
//! valence. Every line parses with this crate and survives `clean`
//! unchanged, so the output doubles as a regression corpus.
//!
//! Usage: `cargo run --release --example gen_sample -- [COUNT] [SEED]`
//! (defaults: 1000 records, seed 42). The bundled `data/sample_1k.txt` is
//! exactly the default invocation's output.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use rsmiles::molgraph::{ring_bond_set, split_fragments, Atom, Bond, BondOrder, Molecule};
use rsmiles::smiles::{write_rooted, WriteOrder};

fn pick_element(rng: &mut ChaCha8Rng) -> &'static str {
    match rng.gen_range(0..100u32) {
        0..=63 => "C",
        64..=75 => "N",
        76..=87 => "O",
        88..=91 => "S",
        92..=94 => "F",
        95..=97 => "Cl",
        _ => "Br",
    }
}

fn valence_cap(element: &str) -> u32 {
    match element {
        "C" => 4,
        "N" => 3,
        "O" | "S" => 2,
        _ => 1,
    }
}

/// A random connected molecule with per-element valence budgets: a tree
/// with an optional extra ring edge, every atom mapped `1..=n`.
fn random_product(rng: &mut ChaCha8Rng) -> Molecule {
    'retry: loop {
        let n = rng.gen_range(8..=20usize);
        let mut atoms: Vec<Atom> = (0..n).map(|_| Atom::of(pick_element(rng))).collect();
        let mut free: Vec<u32> = atoms.iter().map(|a| valence_cap(&a.element)).collect();
        let mut bonds = Vec::new();
        for t in 1..n {
            let candidates: Vec<usize> = (0..t).filter(|&p| free[p] >= 1).collect();
            let Some(&parent) = candidates.get(rng.gen_range(0..candidates.len().max(1))) else {
                continue 'retry;
            };
            let order = if free[parent] >= 2
                && valence_cap(&atoms[t].element) >= 2
                && rng.gen_range(0..100u32) < 15
            {
                BondOrder::Double
            } else {
                BondOrder::Single
            };
            let used = if order == BondOrder::Double { 2 } else { 1 };
            free[parent] -= used;
            free[t] -= used;
            bonds.push(Bond::new(parent, t, order));
        }
        if rng.gen_range(0..100u32) < 35 {
            for _ in 0..10 {
                let a = rng.gen_range(0..n);
                let b = rng.gen_range(0..n);
                let adjacent = a == b
                    || bonds
                        .iter()
                        .any(|bond| (bond.a, bond.b) == (a.min(b), a.max(b)));
                if !adjacent && free[a] >= 1 && free[b] >= 1 {
                    free[a] -= 1;
                    free[b] -= 1;
                    bonds.push(Bond::new(a.min(b), a.max(b), BondOrder::Single));
                    break;
                }
            }
        }
        for (i, atom) in atoms.iter_mut().enumerate() {
            atom.map_num = Some(i as u32 + 1);
        }
        return Molecule::new(atoms, bonds).expect("generated graph is well-formed");
    }
}

/// Delete one non-ring bond whose removal leaves two fragments of at least
/// two atoms each; returns the fragments and the deleted bond's endpoint
/// map on the smaller side. `None` when no bond qualifies.
fn break_one_bond(
    product: &Molecule,
    rng: &mut ChaCha8Rng,
) -> Option<(Vec<Molecule>, u32)> {
    let ring_bonds = ring_bond_set(product);
    let mut candidates: Vec<usize> = (0..product.bonds().len())
        .filter(|bid| !ring_bonds.contains(bid))
        .collect();
    while !candidates.is_empty() {
        let pick = rng.gen_range(0..candidates.len());
        let bid = candidates.swap_remove(pick);
        let kept: Vec<Bond> = product
            .bonds()
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != bid)
            .map(|(_, b)| *b)
            .collect();
        let split = Molecule::new(product.atoms().to_vec(), kept).expect("subgraph is valid");
        let fragments = split_fragments(&split);
        if fragments.len() == 2 && fragments.iter().all(|f| f.n_atoms() >= 2) {
            let bond = product.bond(bid);
            let owner_size = |map: u32| {
                fragments
                    .iter()
                    .find(|f| f.atoms().iter().any(|a| a.map_num == Some(map)))
                    .expect("endpoint map is in one fragment")
                    .n_atoms()
            };
            let map_a = product.atom(bond.a).map_num.unwrap();
            let map_b = product.atom(bond.b).map_num.unwrap();
            let small_map = if owner_size(map_a) <= owner_size(map_b) {
                map_a
            } else {
                map_b
            };
            return Some((fragments, small_map));
        }
    }
    None
}

/// Attach an unmapped chlorine to the atom carrying `map`.
fn add_leaving_group(fragment: &Molecule, map: u32) -> Molecule {
    let mut atoms = fragment.atoms().to_vec();
    let mut bonds = fragment.bonds().to_vec();
    let anchor = atoms
        .iter()
        .position(|a| a.map_num == Some(map))
        .expect("broken-bond endpoint is in this fragment");
    atoms.push(Atom::of("Cl"));
    bonds.push(Bond::new(anchor, atoms.len() - 1, BondOrder::Single));
    Molecule::new(atoms, bonds).expect("extended fragment is valid")
}

fn mapped_string(m: &Molecule) -> String {
    write_rooted(m, &WriteOrder::canonical(m), true).expect("canonical root is valid")
}

fn main() {
    let mut args = std::env::args().skip(1);
    let count: usize = args
        .next()
        .map(|a| a.parse().expect("COUNT must be an integer"))
        .unwrap_or(1000);
    let seed: u64 = args
        .next()
        .map(|a| a.parse().expect("SEED must be an integer"))
        .unwrap_or(42);

    for i in 0..count {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ i as u64);
        let product = random_product(&mut rng);
        let reactants = match break_one_bond(&product, &mut rng) {
            Some((mut fragments, small_map)) => {
                if rng.gen_range(0..100u32) < 50 {
                    let owner = fragments
                        .iter()
                        .position(|f| f.atoms().iter().any(|a| a.map_num == Some(small_map)))
                        .expect("endpoint map is in one fragment");
                    fragments[owner] = add_leaving_group(&fragments[owner], small_map);
                }
                fragments
                    .iter()
                    .map(mapped_string)
                    .collect::<Vec<_>>()
                    .join(".")
            }
            None => mapped_string(&product),
        };
        println!("{}>>{}", reactants, mapped_string(&product));
    }
}
