//! Evaluation metrics and dataset statistics: string edit distance,
//! exact-match and largest-fragment accuracy, alignment distance summaries,
//! and reaction classification for cohort analysis.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::align::{largest_fragment_index, AlignError, AlignedPair, Task};
use crate::augment::{augment_training, AugmentConfig};
use crate::molgraph::{
    bond_diff, ring_bond_set, split_fragments, MolError, Molecule, Reaction,
};
use crate::smiles::{canonical_ranks, parse, write_canonical, write_rooted, TokenSeq, WriteOrder};

#[derive(Debug, Error, PartialEq)]
pub enum MetricsError {
    #[error("record counts differ: {left} vs {right}")]
    LengthMismatch { left: usize, right: usize },
    #[error(transparent)]
    Mol(#[from] MolError),
    #[error(transparent)]
    Align(#[from] AlignError),
}

fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    if a.is_empty() {
        return b.len();
    }
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut curr = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        curr[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let substitute = prev[j] + usize::from(x != y);
            curr[j + 1] = substitute.min(prev[j + 1] + 1).min(curr[j] + 1);
        }
        std::mem::swap(&mut prev, &mut curr);
    }
    prev[b.len()]
}

/// Character-level Levenshtein distance (insertions, deletions,
/// substitutions, unit cost).
pub fn edit_distance(a: &str, b: &str) -> usize {
    let ac: Vec<char> = a.chars().collect();
    let bc: Vec<char> = b.chars().collect();
    levenshtein(&ac, &bc)
}

/// Levenshtein distance over whole tokens instead of characters, for
/// sensitivity analysis; all headline numbers use [`edit_distance`].
pub fn token_edit_distance(a: &TokenSeq, b: &TokenSeq) -> usize {
    levenshtein(a.tokens(), b.tokens())
}

/// Alignment-distance summary over a record set.
#[derive(Debug, Clone, PartialEq)]
pub struct DatasetStats {
    pub n_records: usize,
    /// Mean canonical product string length, in characters.
    pub mean_product_len: f64,
    /// Mean canonical reactant-side string length, in characters.
    pub mean_reactant_len: f64,
    /// Mean source/target edit distance without alignment: canonical pair
    /// first, independently re-rooted random pairs for later augmentations.
    pub mean_edit_distance_plain: f64,
    /// Mean source/target edit distance of the aligned pairs.
    pub mean_edit_distance_aligned: f64,
}

/// Per-record sums behind [`dataset_stats`], exposed so callers can compute
/// records in parallel and fold them in index order.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RecordDistances {
    pub product_len: usize,
    pub reactant_len: usize,
    pub plain_sum: usize,
    pub aligned_sum: usize,
    pub pairs: usize,
}

fn random_rooted(m: &Molecule, rng: &mut ChaCha8Rng) -> String {
    let order = WriteOrder {
        root: rng.gen_range(0..m.n_atoms()),
        neighbor_rank: canonical_ranks(m),
    };
    write_rooted(m, &order, false).expect("random root is in range")
}

/// Distances for one reaction under both regimes. The caller passes the
/// per-record seed (conventionally `global_seed XOR record_index`).
pub fn record_distances(
    rxn: &Reaction,
    factor: usize,
    seed: u64,
) -> Result<RecordDistances, AlignError> {
    let product = rxn.product()?;
    let product_canon = write_canonical(product);
    let reactant_canon = {
        let mut parts: Vec<String> = rxn.reactants.iter().map(write_canonical).collect();
        parts.sort();
        parts.join(".")
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut plain_sum = 0;
    for i in 0..factor {
        let (src, tgt) = if i == 0 {
            (product_canon.clone(), reactant_canon.clone())
        } else {
            let src = random_rooted(product, &mut rng);
            let tgt = rxn
                .reactants
                .iter()
                .map(|r| random_rooted(r, &mut rng))
                .collect::<Vec<_>>()
                .join(".");
            (src, tgt)
        };
        plain_sum += edit_distance(&src, &tgt);
    }

    let cfg = AugmentConfig::new(Task::P2R, factor, seed);
    let aligned_sum = augment_training(rxn, &cfg)?
        .iter()
        .map(|p| edit_distance(&p.source, &p.target))
        .sum();

    Ok(RecordDistances {
        product_len: product_canon.chars().count(),
        reactant_len: reactant_canon.chars().count(),
        plain_sum,
        aligned_sum,
        pairs: factor,
    })
}

/// Fold per-record distance sums into dataset means, in index order.
pub fn fold_distances(records: &[RecordDistances]) -> DatasetStats {
    let n = records.len();
    let pairs: usize = records.iter().map(|r| r.pairs).sum();
    let div = |sum: usize, by: usize| if by == 0 { 0.0 } else { sum as f64 / by as f64 };
    DatasetStats {
        n_records: n,
        mean_product_len: div(records.iter().map(|r| r.product_len).sum(), n),
        mean_reactant_len: div(records.iter().map(|r| r.reactant_len).sum(), n),
        mean_edit_distance_plain: div(records.iter().map(|r| r.plain_sum).sum(), pairs),
        mean_edit_distance_aligned: div(records.iter().map(|r| r.aligned_sum).sum(), pairs),
    }
}

/// Mean pair edit distance with and without root alignment over a record
/// set. Record `i` draws its randomness from `seed XOR i`.
pub fn dataset_stats(
    rxns: &[Reaction],
    factor: usize,
    seed: u64,
) -> Result<DatasetStats, AlignError> {
    let mut records = Vec::with_capacity(rxns.len());
    for (i, rxn) in rxns.iter().enumerate() {
        records.push(record_distances(rxn, factor, seed ^ i as u64)?);
    }
    Ok(fold_distances(&records))
}

/// Canonical form used for all prediction/truth comparisons; `None` when the
/// string does not parse. Fragment order cannot matter because the canonical
/// writer sorts fragments.
pub fn comparison_form(s: &str) -> Option<String> {
    parse(s).ok().map(|m| write_canonical(&m))
}

/// Canonical form of the largest fragment only.
pub fn maxfrag_form(s: &str) -> Option<String> {
    let frags = split_fragments(&parse(s).ok()?);
    let largest = largest_fragment_index(&frags)?;
    Some(write_canonical(&frags[largest]))
}

fn accuracy_by_form(
    predictions: &[Vec<String>],
    truths: &[String],
    ks: &[usize],
    form: fn(&str) -> Option<String>,
) -> Result<Vec<(usize, f64)>, MetricsError> {
    if predictions.len() != truths.len() {
        return Err(MetricsError::LengthMismatch {
            left: predictions.len(),
            right: truths.len(),
        });
    }
    let mut hits = vec![0usize; ks.len()];
    for (preds, truth) in predictions.iter().zip(truths) {
        let Some(truth_form) = form(truth) else {
            continue;
        };
        // Rank of the first prediction matching the truth, if any.
        let hit_rank = preds
            .iter()
            .position(|p| form(p).as_deref() == Some(truth_form.as_str()))
            .map(|i| i + 1);
        if let Some(rank) = hit_rank {
            for (slot, &k) in hits.iter_mut().zip(ks) {
                if rank <= k {
                    *slot += 1;
                }
            }
        }
    }
    let n = truths.len().max(1);
    Ok(ks
        .iter()
        .zip(hits)
        .map(|(&k, h)| (k, h as f64 / n as f64))
        .collect())
}

/// Fraction of records whose truth appears among the first k predictions,
/// compared as whole canonical strings, for each requested k.
pub fn topk_accuracy(
    predictions: &[Vec<String>],
    truths: &[String],
    ks: &[usize],
) -> Result<Vec<(usize, f64)>, MetricsError> {
    accuracy_by_form(predictions, truths, ks, comparison_form)
}

/// As [`topk_accuracy`] but matching only the largest fragment of truth and
/// prediction.
pub fn maxfrag_accuracy(
    predictions: &[Vec<String>],
    truths: &[String],
    ks: &[usize],
) -> Result<Vec<(usize, f64)>, MetricsError> {
    accuracy_by_form(predictions, truths, ks, maxfrag_form)
}

/// Ring behaviour of a reaction, read in the retro direction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum RingKind {
    NonRing,
    RingOpening,
    RingForming,
}

impl std::fmt::Display for RingKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            RingKind::NonRing => "non_ring",
            RingKind::RingOpening => "ring_opening",
            RingKind::RingForming => "ring_forming",
        })
    }
}

/// Classification label of one reaction.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReactionClass {
    pub kind: RingKind,
    /// Any `@`/`@@` chirality tag anywhere in the reaction.
    pub chirality: bool,
    /// Reactant heavy atoms that do not occur in the product (unmapped or
    /// mapped with a number the product lacks).
    pub new_atom_count: usize,
}

/// Classify one reaction.
///
/// Ring-forming (retro direction): a reaction-center bond that is a ring
/// bond of the product is destroyed going to reactants. Ring-opening: a
/// reactant ring bond between mapped atoms has no product bond at all. When
/// both occur, the side affecting more bonds wins; ties go to ring-forming.
pub fn classify_reaction(rxn: &Reaction) -> Result<ReactionClass, MetricsError> {
    let product = rxn.product()?;
    let diff = bond_diff(rxn)?;
    let product_rings = ring_bond_set(product);
    let product_maps = product.map_index();

    let forming = diff
        .broken
        .iter()
        .filter(|bid| product_rings.contains(bid))
        .count();
    let mut opening = 0;
    for &(ri, bid) in &diff.formed {
        let reactant = &rxn.reactants[ri];
        if !ring_bond_set(reactant).contains(&bid) {
            continue;
        }
        let bond = reactant.bond(bid);
        let pa = reactant.atom(bond.a).map_num.and_then(|m| product_maps.get(&m));
        let pb = reactant.atom(bond.b).map_num.and_then(|m| product_maps.get(&m));
        let in_product = match (pa, pb) {
            (Some(&a), Some(&b)) => product.bond_between(a, b).is_some(),
            _ => false,
        };
        if !in_product {
            opening += 1;
        }
    }
    let kind = match (forming, opening) {
        (0, 0) => RingKind::NonRing,
        (f, o) if f >= o && f > 0 => RingKind::RingForming,
        (_, 0) => RingKind::RingForming,
        _ => RingKind::RingOpening,
    };

    let all = rxn
        .reactants
        .iter()
        .chain(&rxn.reagents)
        .chain(&rxn.products);
    let chirality = all
        .flat_map(|m| m.atoms())
        .any(|a| a.chirality != crate::molgraph::Chirality::None);

    let new_atom_count = rxn
        .reactants
        .iter()
        .flat_map(|r| r.atoms())
        .filter(|a| a.is_heavy())
        .filter(|a| match a.map_num {
            Some(m) => !product_maps.contains_key(&m),
            None => true,
        })
        .count();

    Ok(ReactionClass {
        kind,
        chirality,
        new_atom_count,
    })
}

/// Summary for one cohort bucket.
#[derive(Debug, Clone, PartialEq)]
pub struct CohortStats {
    pub n: usize,
    pub mean_edit_distance: f64,
    pub topk: Vec<(usize, f64)>,
}

/// Cohort breakdown: per ring class and per new-atom count (counts of five
/// and above share one bucket). Buckets without members are absent.
#[derive(Debug, Clone, PartialEq)]
pub struct CohortReport {
    pub by_kind: BTreeMap<RingKind, CohortStats>,
    pub by_new_atoms: BTreeMap<usize, CohortStats>,
}

/// Cap applied to the new-atom bucket key.
pub const NEW_ATOM_BUCKET_MAX: usize = 5;

const COHORT_KS: [usize; 4] = [1, 3, 5, 10];

fn bucket_stats(
    members: &[usize],
    pairs: &[AlignedPair],
    predictions: &[Vec<String>],
) -> Result<CohortStats, MetricsError> {
    let dist_sum: usize = members
        .iter()
        .map(|&i| edit_distance(&pairs[i].source, &pairs[i].target))
        .sum();
    let preds: Vec<Vec<String>> = members.iter().map(|&i| predictions[i].clone()).collect();
    let truths: Vec<String> = members.iter().map(|&i| pairs[i].target.clone()).collect();
    Ok(CohortStats {
        n: members.len(),
        mean_edit_distance: dist_sum as f64 / members.len() as f64,
        topk: topk_accuracy(&preds, &truths, &COHORT_KS)?,
    })
}

/// Group records by reaction class and report mean pair distance and top-K
/// accuracy per bucket. `rxns`, `pairs`, and `predictions` must be indexed
/// identically.
pub fn cohort_report(
    rxns: &[Reaction],
    pairs: &[AlignedPair],
    predictions: &[Vec<String>],
) -> Result<CohortReport, MetricsError> {
    if rxns.len() != pairs.len() {
        return Err(MetricsError::LengthMismatch {
            left: rxns.len(),
            right: pairs.len(),
        });
    }
    if rxns.len() != predictions.len() {
        return Err(MetricsError::LengthMismatch {
            left: rxns.len(),
            right: predictions.len(),
        });
    }
    let mut kind_members: BTreeMap<RingKind, Vec<usize>> = BTreeMap::new();
    let mut atom_members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, rxn) in rxns.iter().enumerate() {
        let class = classify_reaction(rxn)?;
        kind_members.entry(class.kind).or_default().push(i);
        atom_members
            .entry(class.new_atom_count.min(NEW_ATOM_BUCKET_MAX))
            .or_default()
            .push(i);
    }
    let mut by_kind = BTreeMap::new();
    for (kind, members) in kind_members {
        by_kind.insert(kind, bucket_stats(&members, pairs, predictions)?);
    }
    let mut by_new_atoms = BTreeMap::new();
    for (count, members) in atom_members {
        by_new_atoms.insert(count, bucket_stats(&members, pairs, predictions)?);
    }
    Ok(CohortReport {
        by_kind,
        by_new_atoms,
    })
}
