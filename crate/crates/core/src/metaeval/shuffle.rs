//! Word-order robustness: re-score with every candidate's words shuffled.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::{caption_rho_or_zero, CaptionScorer};
use crate::corpus::{AssessmentMatrix, Corpus};
use crate::error::Result;
use crate::textproc::{shuffle_words, tokenize};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShuffleRow {
    pub metric: String,
    pub rho: f64,
    pub shuffled_rho: f64,
    /// `rho - shuffled_rho`
    pub drop: f64,
    /// `drop / |rho|`; 0 when `rho` is 0.
    pub relative_drop: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShuffleReport {
    pub seed: u64,
    pub rows: Vec<ShuffleRow>,
}

impl ShuffleReport {
    pub fn row(&self, metric: &str) -> Option<&ShuffleRow> {
        self.rows.iter().find(|r| r.metric == metric)
    }

    /// Metric with the largest absolute drop; first in row order on ties.
    pub fn most_affected(&self) -> Option<&ShuffleRow> {
        self.rows
            .iter()
            .fold(None, |best: Option<&ShuffleRow>, r| match best {
                Some(b) if b.drop >= r.drop => Some(b),
                _ => Some(r),
            })
    }

    pub fn to_tsv(&self) -> String {
        let mut out = String::from("metric\trho\tshuffled_rho\tdrop\trelative_drop\n");
        for r in &self.rows {
            writeln!(
                out,
                "{}\t{:.4}\t{:.4}\t{:.4}\t{:.4}",
                r.metric, r.rho, r.shuffled_rho, r.drop, r.relative_drop
            )
            .unwrap();
        }
        out
    }
}

/// Copy of `corpus` with each candidate's words permuted. One generator
/// seeded with `seed` hands out a sub-seed per caption in key order.
pub fn shuffle_captions(corpus: &Corpus, seed: u64) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    corpus.map_captions(|_, caption| shuffle_words(&tokenize(caption), rng.random()).joined())
}

/// Caption-level correlations (reference means) before and after shuffling
/// the candidates. References are left untouched. A scorer that becomes
/// constant counts as ρ = 0.
pub fn shuffle_experiment(
    corpus: &Corpus,
    human: &AssessmentMatrix,
    scorers: &[&dyn CaptionScorer],
    seed: u64,
) -> Result<ShuffleReport> {
    let shuffled = shuffle_captions(corpus, seed);
    let mut rows = Vec::with_capacity(scorers.len());
    for s in scorers {
        let rho = caption_rho_or_zero(&s.score_corpus(corpus)?, human)?;
        let shuffled_rho = caption_rho_or_zero(&s.score_corpus(&shuffled)?, human)?;
        let drop = rho - shuffled_rho;
        rows.push(ShuffleRow {
            metric: s.name(),
            rho,
            shuffled_rho,
            drop,
            relative_drop: if rho == 0.0 { 0.0 } else { drop / rho.abs() },
        });
    }
    Ok(ShuffleReport { seed, rows })
}
