//! Canonical atom ranking by iterative neighborhood refinement.
//!
//! Atoms are first partitioned by local invariants and the partition is then
//! refined with the multiset of (bond order, neighbor class) pairs until it
//! stops changing. Remaining ties are broken by deterministically splitting
//! one atom out of the first tied class and refining again, so the result is
//! a total order. Terminal atoms sort before buried ones (degree leads the
//! invariant) and lighter elements before heavier ones, which makes the
//! canonical root of a fragment a terminal atom of its lightest element.
//!
//! Written hydrogen counts and atom maps take no part in the ranking: the
//! writers may drop both, and two graphs that differ only in those
//! annotations must keep identical canonical strings.

use crate::molgraph::{atomic_number, Chirality, Molecule};

/// Rank every atom; the result assigns each atom a unique value in
/// `0..n_atoms`, with rank 0 the canonical root of its fragment.
pub fn canonical_ranks(m: &Molecule) -> Vec<usize> {
    let n = m.n_atoms();
    if n == 0 {
        return Vec::new();
    }

    type InitKey<'a> = (usize, (u16, &'a str), i32, Option<u32>, bool, Chirality);
    let init: Vec<InitKey> = (0..n)
        .map(|i| {
            let a = m.atom(i);
            (
                m.degree(i),
                (
                    atomic_number(&a.element).map_or(u16::MAX, u16::from),
                    a.element.as_str(),
                ),
                a.charge,
                a.isotope,
                a.aromatic,
                a.chirality,
            )
        })
        .collect();
    let mut rank = dense_ranks(&init);

    loop {
        // Refine with neighborhood information until the partition is stable.
        loop {
            let keys: Vec<(usize, Vec<(u8, usize)>)> = (0..n)
                .map(|i| {
                    let mut nbrs: Vec<(u8, usize)> = m
                        .neighbors(i)
                        .iter()
                        .map(|&(w, bid)| (m.bond(bid).order.code(), rank[w]))
                        .collect();
                    nbrs.sort_unstable();
                    (rank[i], nbrs)
                })
                .collect();
            let next = dense_ranks(&keys);
            if next == rank {
                break;
            }
            rank = next;
        }

        // Fully discrete? With dense class ids that means the top id is n-1.
        if rank.iter().max() == Some(&(n - 1)) {
            break;
        }

        // Split the lowest-index atom out of the first tied class, then
        // refine again so the asymmetry propagates.
        let tied_class = rank
            .iter()
            .copied()
            .filter(|&r| rank.iter().filter(|&&x| x == r).count() > 1)
            .min()
            .expect("a tied class exists");
        let victim = (0..n).find(|&i| rank[i] == tied_class).expect("tied atom");
        let keys: Vec<(usize, bool)> = (0..n).map(|i| (rank[i], i != victim)).collect();
        rank = dense_ranks(&keys);
    }
    rank
}

/// Sort indices by their key and assign dense class ids; equal keys share
/// one id.
fn dense_ranks<K: Ord>(keys: &[K]) -> Vec<usize> {
    let n = keys.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| keys[a].cmp(&keys[b]));
    let mut rank = vec![0usize; n];
    let mut class = 0usize;
    for w in 1..n {
        if keys[order[w]] != keys[order[w - 1]] {
            class += 1;
        }
        rank[order[w]] = class;
    }
    rank[order[0]] = 0;
    rank
}
