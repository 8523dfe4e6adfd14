//! Data augmentation and masked-corpus generation.
//!
//! Training augmentation multiplies every reaction into `factor` aligned
//! pairs by varying the shared root: the first pair uses the canonical root
//! (lowest canonical rank), the rest draw distinct roots in seeded random
//! order until roots run out, after which roots repeat. Test augmentation
//! does the same for a lone product, emitting raw strings instead of pairs.
//!
//! Masked-corpus generation rewrites token files for denoising pretraining:
//! each token is masked independently with probability `mask_rate`; a masked
//! token becomes the unknown token (80%), a random vocabulary token (10%),
//! or stays unchanged (10%), and every masked position is reported so a
//! trainer can build its labels.

use std::collections::BTreeSet;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::align::{
    align_p2r, align_p2s_rooted, align_r2p, align_s2r_rooted, largest_fragment_index, AlignError,
    AlignedPair, Task,
};
use crate::molgraph::{Molecule, Reaction};
use crate::smiles::{canonical_ranks, write_canonical, write_rooted, TokenSeq, WriteOrder};

/// How many pairs to derive per reaction, and from which side.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AugmentConfig {
    /// Number of pairs (or test strings) per record; must be ≥ 1.
    pub factor: usize,
    pub seed: u64,
    pub task: Task,
}

impl AugmentConfig {
    pub fn new(task: Task, factor: usize, seed: u64) -> Self {
        AugmentConfig { factor, seed, task }
    }
}

/// Masking scheme configuration. The three branch rates must sum to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct MaskConfig {
    /// Per-token masking probability.
    pub mask_rate: f64,
    /// Of the masked tokens: probability of the unknown-token rewrite.
    pub unknown_rate: f64,
    /// Of the masked tokens: probability of a random vocabulary rewrite.
    pub random_rate: f64,
    /// Of the masked tokens: probability of keeping the original token.
    pub keep_rate: f64,
    pub unknown_token: String,
    pub seed: u64,
}

impl Default for MaskConfig {
    fn default() -> Self {
        MaskConfig {
            mask_rate: 0.15,
            unknown_rate: 0.80,
            random_rate: 0.10,
            keep_rate: 0.10,
            unknown_token: "<unk>".to_string(),
            seed: 0,
        }
    }
}

/// One masked position: which line and token it was, and what stood there.
/// Positions that drew the "keep" branch are reported too — they are still
/// prediction targets for a denoising trainer.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MaskLabel {
    pub line: usize,
    pub position: usize,
    pub original: String,
}

#[derive(Debug, Error, PartialEq)]
pub enum AugmentError {
    #[error("corpus holds no tokens, so no vocabulary can be derived")]
    EmptyVocabulary,
    #[error(transparent)]
    Align(#[from] AlignError),
}

/// Product map numbers eligible as roots for a task, sorted by ascending
/// product canonical rank (so the first entry is the canonical root).
fn root_pool(rxn: &Reaction, task: Task) -> Result<Vec<u32>, AlignError> {
    let product = rxn.product()?;
    let ranks = canonical_ranks(product);
    let mut pool: Vec<(usize, u32)> = product
        .atoms()
        .iter()
        .enumerate()
        .filter_map(|(i, a)| a.map_num.map(|m| (ranks[i], m)))
        .collect();
    if task == Task::R2P {
        let largest = largest_fragment_index(&rxn.reactants)
            .ok_or(AlignError::RootNotShared { map: 0 })?;
        let shared = rxn.reactants[largest].map_index();
        pool.retain(|(_, m)| shared.contains_key(m));
    }
    pool.sort_unstable();
    if pool.is_empty() {
        // Either an unmapped product or, for R2P, no map shared with the
        // largest reactant; map 0 marks "no root exists at all".
        return Err(AlignError::RootNotShared { map: 0 });
    }
    Ok(pool.into_iter().map(|(_, m)| m).collect())
}

fn align_at(rxn: &Reaction, task: Task, root_map: u32) -> Result<AlignedPair, AlignError> {
    match task {
        Task::P2R => align_p2r(rxn, root_map),
        Task::P2S => align_p2s_rooted(rxn, root_map),
        Task::S2R => align_s2r_rooted(rxn, root_map),
        Task::R2P => align_r2p(rxn, root_map),
    }
}

/// `cfg.factor` aligned pairs for one reaction. The first pair is rooted at
/// the canonical root; later pairs use seeded random roots, distinct until
/// the pool is exhausted. Reruns with equal configuration are identical.
pub fn augment_training(rxn: &Reaction, cfg: &AugmentConfig) -> Result<Vec<AlignedPair>, AlignError> {
    assert!(cfg.factor >= 1, "augmentation factor must be at least 1");
    let pool = root_pool(rxn, cfg.task)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rest: Vec<u32> = pool[1..].to_vec();
    rest.shuffle(&mut rng);

    let mut pairs = Vec::with_capacity(cfg.factor);
    for aug_index in 0..cfg.factor {
        let root_map = if aug_index == 0 {
            pool[0]
        } else if aug_index <= rest.len() {
            rest[aug_index - 1]
        } else {
            pool[rng.gen_range(0..pool.len())]
        };
        let mut pair = align_at(rxn, cfg.task, root_map)?;
        pair.aug_index = aug_index;
        pair.seed = cfg.seed;
        pairs.push(pair);
    }
    Ok(pairs)
}

/// `cfg.factor` rewrites of a product for test-time augmentation: the
/// canonical string first, then seeded random roots, distinct until atoms
/// run out. Symmetric molecules may repeat a string under distinct roots.
pub fn augment_test(product: &Molecule, cfg: &AugmentConfig) -> Vec<String> {
    assert!(cfg.factor >= 1, "augmentation factor must be at least 1");
    if product.n_atoms() == 0 {
        return vec![String::new(); cfg.factor];
    }
    let ranks = canonical_ranks(product);
    let canonical_root = ranks
        .iter()
        .position(|&r| r == 0)
        .expect("non-empty molecule has a rank-0 atom");
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut rest: Vec<usize> = (0..product.n_atoms())
        .filter(|&i| i != canonical_root)
        .collect();
    rest.shuffle(&mut rng);

    let mut out = Vec::with_capacity(cfg.factor);
    out.push(write_canonical(product));
    for aug_index in 1..cfg.factor {
        let root = if aug_index <= rest.len() {
            rest[aug_index - 1]
        } else {
            rng.gen_range(0..product.n_atoms())
        };
        let order = WriteOrder {
            root,
            neighbor_rank: ranks.clone(),
        };
        out.push(write_rooted(product, &order, false).expect("root index is valid"));
    }
    out
}

/// Apply the masking scheme to a token corpus. Returns the rewritten lines
/// plus one [`MaskLabel`] per masked position. Line `i` is driven by its own
/// generator seeded with `cfg.seed XOR i`, so any per-line parallel
/// execution reproduces the serial output.
pub fn mask_corpus(
    lines: &[TokenSeq],
    cfg: &MaskConfig,
) -> Result<(Vec<TokenSeq>, Vec<MaskLabel>), AugmentError> {
    let split = cfg.unknown_rate + cfg.random_rate + cfg.keep_rate;
    assert!(
        (split - 1.0).abs() < 1e-9,
        "mask branch rates must sum to 1, got {split}"
    );
    let vocab: Vec<String> = lines
        .iter()
        .flat_map(|l| l.tokens().iter().cloned())
        .filter(|t| *t != cfg.unknown_token)
        .collect::<BTreeSet<_>>()
        .into_iter()
        .collect();
    if vocab.is_empty() && cfg.mask_rate > 0.0 {
        return Err(AugmentError::EmptyVocabulary);
    }

    let mut masked_lines = Vec::with_capacity(lines.len());
    let mut labels = Vec::new();
    for (line_no, line) in lines.iter().enumerate() {
        let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ line_no as u64);
        let mut tokens = line.tokens().to_vec();
        for (position, token) in tokens.iter_mut().enumerate() {
            if rng.gen::<f64>() >= cfg.mask_rate {
                continue;
            }
            labels.push(MaskLabel {
                line: line_no,
                position,
                original: token.clone(),
            });
            let branch = rng.gen::<f64>();
            if branch < cfg.unknown_rate {
                *token = cfg.unknown_token.clone();
            } else if branch < cfg.unknown_rate + cfg.random_rate {
                *token = vocab[rng.gen_range(0..vocab.len())].clone();
            }
            // Final branch: keep the original token.
        }
        masked_lines.push(TokenSeq::new(tokens));
    }
    Ok((masked_lines, labels))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::smiles::{parse, tokenize};
    use crate::testutil::worked_example;

    #[test]
    fn factor_one_uses_the_canonical_root() {
        let rxn = worked_example::reaction();
        let cfg = AugmentConfig::new(Task::P2R, 1, 7);
        let pairs = augment_training(&rxn, &cfg).unwrap();
        assert_eq!(pairs.len(), 1);
        // The product's canonical root is the terminal alkene carbon, map 3.
        assert_eq!(pairs[0].root_map, 3);
        assert_eq!(pairs[0].aug_index, 0);
        let direct = align_p2r(&rxn, 3).unwrap();
        assert_eq!(pairs[0].source, direct.source);
        assert_eq!(pairs[0].target, direct.target);
    }

    #[test]
    fn factor_twenty_covers_all_roots_then_repeats() {
        let rxn = worked_example::reaction();
        let cfg = AugmentConfig::new(Task::P2R, 20, 11);
        let pairs = augment_training(&rxn, &cfg).unwrap();
        assert_eq!(pairs.len(), 20);
        let first_ten: BTreeSet<u32> = pairs[..10].iter().map(|p| p.root_map).collect();
        assert_eq!(first_ten.len(), 10, "first ten roots are distinct");
        let product_canon = write_canonical(&rxn.products[0]);
        let reactant_canon = {
            let all = parse(worked_example::REACTANTS_MAPPED).unwrap();
            write_canonical(&all)
        };
        for pair in &pairs {
            assert_eq!(write_canonical(&parse(&pair.source).unwrap()), product_canon);
            assert_eq!(write_canonical(&parse(&pair.target).unwrap()), reactant_canon);
        }
    }

    #[test]
    fn training_augmentation_is_deterministic() {
        let rxn = worked_example::reaction();
        let cfg = AugmentConfig::new(Task::S2R, 5, 123);
        assert_eq!(
            augment_training(&rxn, &cfg).unwrap(),
            augment_training(&rxn, &cfg).unwrap()
        );
    }

    #[test]
    fn forward_roots_stay_within_the_largest_reactant() {
        let rxn = worked_example::reaction();
        let cfg = AugmentConfig::new(Task::R2P, 8, 3);
        let pairs = augment_training(&rxn, &cfg).unwrap();
        assert_eq!(pairs.len(), 8);
        for pair in &pairs {
            assert!(
                [5, 6, 7, 8, 9, 10].contains(&pair.root_map),
                "root {} outside the shared pool",
                pair.root_map
            );
        }
    }

    #[test]
    fn test_augmentation_starts_canonical_and_preserves_the_molecule() {
        let product = parse("C(COC(C=C)=O)(Cl)(Cl)Cl").unwrap();
        let cfg = AugmentConfig::new(Task::P2R, 3, 5);
        let out = augment_test(&product, &cfg);
        assert_eq!(out.len(), 3);
        assert_eq!(out[0], write_canonical(&product));
        for s in &out {
            assert_eq!(write_canonical(&parse(s).unwrap()), out[0]);
        }
    }

    #[test]
    fn test_augmentation_factor_one_is_canonical_only() {
        let product = parse(worked_example::PRODUCT_MAPPED).unwrap();
        let cfg = AugmentConfig::new(Task::P2R, 1, 0);
        assert_eq!(augment_test(&product, &cfg), vec![write_canonical(&product)]);
    }

    #[test]
    fn mask_rate_zero_is_the_identity() {
        let lines = vec![
            tokenize(worked_example::PRODUCT_ROOTED).unwrap(),
            tokenize(worked_example::REACTANTS_ALIGNED).unwrap(),
        ];
        let cfg = MaskConfig {
            mask_rate: 0.0,
            ..MaskConfig::default()
        };
        let (masked, labels) = mask_corpus(&lines, &cfg).unwrap();
        assert_eq!(masked, lines);
        assert!(labels.is_empty());
    }

    #[test]
    fn masking_is_deterministic_and_shape_preserving() {
        let lines: Vec<TokenSeq> = (0..50)
            .map(|_| tokenize(worked_example::PRODUCT_ROOTED).unwrap())
            .collect();
        let cfg = MaskConfig {
            seed: 9,
            ..MaskConfig::default()
        };
        let (a, la) = mask_corpus(&lines, &cfg).unwrap();
        let (b, lb) = mask_corpus(&lines, &cfg).unwrap();
        assert_eq!(a, b);
        assert_eq!(la, lb);
        assert_eq!(a.len(), lines.len());
        for (orig, masked) in lines.iter().zip(&a) {
            assert_eq!(orig.len(), masked.len());
        }
    }

    #[test]
    fn labels_cover_exactly_the_changed_positions() {
        let lines: Vec<TokenSeq> = (0..100)
            .map(|_| tokenize(worked_example::REACTANTS_ALIGNED).unwrap())
            .collect();
        let cfg = MaskConfig {
            seed: 4,
            ..MaskConfig::default()
        };
        let (masked, labels) = mask_corpus(&lines, &cfg).unwrap();
        let labelled: BTreeSet<(usize, usize)> =
            labels.iter().map(|l| (l.line, l.position)).collect();
        assert_eq!(labelled.len(), labels.len(), "labels are unique");
        for (li, (orig, new)) in lines.iter().zip(&masked).enumerate() {
            for (pos, (o, n)) in orig.tokens().iter().zip(new.tokens()).enumerate() {
                if o != n {
                    assert!(labelled.contains(&(li, pos)), "changed but unlabelled");
                }
            }
        }
        for label in &labels {
            assert_eq!(
                lines[label.line].tokens()[label.position],
                label.original
            );
        }
    }

    #[test]
    fn masked_fraction_is_plausible() {
        let lines: Vec<TokenSeq> = (0..200)
            .map(|_| tokenize(worked_example::PRODUCT_ROOTED).unwrap())
            .collect();
        let total: usize = lines.iter().map(|l| l.len()).sum();
        let cfg = MaskConfig::default();
        let (_, labels) = mask_corpus(&lines, &cfg).unwrap();
        let fraction = labels.len() as f64 / total as f64;
        assert!(
            (0.10..=0.20).contains(&fraction),
            "masked fraction {fraction} far from 0.15"
        );
    }

    #[test]
    fn empty_corpus_cannot_build_a_vocabulary() {
        let cfg = MaskConfig::default();
        assert_eq!(
            mask_corpus(&[], &cfg).unwrap_err(),
            AugmentError::EmptyVocabulary
        );
        let no_rate = MaskConfig {
            mask_rate: 0.0,
            ..MaskConfig::default()
        };
        assert!(mask_corpus(&[], &no_rate).is_ok());
    }
}
