//! Aggregation of beam-search outputs across test-time augmentations.
//!
//! Each input variant of one record contributes a ranked prediction list.
//! Every prediction is canonicalized, rank k contributes
//! `1 / (1 + α·(k−1))`, equal canonical forms accumulate across variants and
//! ranks, and the final list is ordered by total score. At α = 1 the rank
//! weight is exactly 1/k; at α = 0 every appearance counts 1 and the
//! aggregation degenerates to occurrence counting.

use std::collections::HashMap;

use thiserror::Error;

use crate::smiles::{parse, write_canonical};

/// Ranked predictions for every augmented variant of one record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BeamOutputs {
    /// One list per input variant, best prediction first, length ≤ `beam`.
    pub predictions: Vec<Vec<String>>,
    /// Beam width the decoder ran with.
    pub beam: usize,
    /// How many leading ranks of each variant are scored.
    pub topk: usize,
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum ScoringError {
    #[error("prediction file has {lines} lines, expected {augmentation} variants x beam {beam}")]
    ShapeMismatch {
        lines: usize,
        augmentation: usize,
        beam: usize,
    },
}

impl BeamOutputs {
    /// Group per-variant lists, checking none exceeds the beam width.
    pub fn new(predictions: Vec<Vec<String>>, beam: usize, topk: usize) -> Self {
        assert!(
            predictions.iter().all(|v| v.len() <= beam),
            "a variant holds more predictions than the beam width"
        );
        BeamOutputs {
            predictions,
            beam,
            topk,
        }
    }

    /// Split a flat variant-major line list (the usual decoder output file
    /// layout: variant 1 ranks 1..beam, then variant 2, ...) into grouped
    /// outputs for one record.
    pub fn from_flat_lines(
        lines: &[String],
        augmentation: usize,
        beam: usize,
        topk: usize,
    ) -> Result<Self, ScoringError> {
        if lines.len() != augmentation * beam {
            return Err(ScoringError::ShapeMismatch {
                lines: lines.len(),
                augmentation,
                beam,
            });
        }
        let predictions = lines.chunks(beam).map(|c| c.to_vec()).collect();
        Ok(BeamOutputs {
            predictions,
            beam,
            topk,
        })
    }

    /// Number of input variants.
    pub fn augmentation(&self) -> usize {
        self.predictions.len()
    }
}

/// Weighting of the score by rank; `topk_out` caps the final list length.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoringConfig {
    pub alpha: f64,
    pub topk_out: usize,
}

impl Default for ScoringConfig {
    fn default() -> Self {
        ScoringConfig {
            alpha: 1.0,
            topk_out: 10,
        }
    }
}

/// A canonicalized prediction with its accumulated score.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredCandidate {
    pub canonical: String,
    pub score: f64,
    /// 1-based position in the final ranking.
    pub final_rank: usize,
}

/// Score contributed by one appearance at rank `k` (1-based).
pub fn score_of_rank(k: usize, alpha: f64) -> f64 {
    assert!(k >= 1, "ranks are 1-based");
    1.0 / (1.0 + alpha * (k - 1) as f64)
}

/// Canonicalize, accumulate, and rank all predictions of one record.
/// Predictions that fail to parse contribute nothing. Ties are broken by
/// lexicographic canonical string, so the result is fully deterministic.
pub fn aggregate(outputs: &BeamOutputs, cfg: &ScoringConfig) -> Vec<ScoredCandidate> {
    let mut scores: HashMap<String, f64> = HashMap::new();
    let mut first_seen: HashMap<String, usize> = HashMap::new();
    for variant in &outputs.predictions {
        for (i, prediction) in variant.iter().take(outputs.topk).enumerate() {
            let Ok(molecule) = parse(prediction) else {
                continue;
            };
            let canonical = write_canonical(&molecule);
            let next_id = first_seen.len();
            first_seen.entry(canonical.clone()).or_insert(next_id);
            *scores.entry(canonical).or_insert(0.0) += score_of_rank(i + 1, cfg.alpha);
        }
    }
    // Accumulation order per candidate is the input order, so float sums are
    // reproducible; the sort below fixes the output order completely.
    let mut ranked: Vec<(String, f64)> = scores.into_iter().collect();
    ranked.sort_by(|a, b| {
        b.1.partial_cmp(&a.1)
            .unwrap_or(std::cmp::Ordering::Equal)
            .then_with(|| a.0.cmp(&b.0))
    });
    ranked
        .into_iter()
        .take(cfg.topk_out)
        .enumerate()
        .map(|(i, (canonical, score))| ScoredCandidate {
            canonical,
            score,
            final_rank: i + 1,
        })
        .collect()
}
