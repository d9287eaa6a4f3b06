//! Corpus BLEU and smoothed sentence BLEU.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::textproc::{ngrams_of, TokenSequence};

/// Clipped n-gram statistics of one candidate against its references.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BleuStats {
    pub matches: Vec<usize>,
    pub totals: Vec<usize>,
    pub candidate_len: usize,
    /// Length of the reference closest in length to the candidate (the
    /// shorter one on ties).
    pub reference_len: usize,
}

impl BleuStats {
    fn add(&mut self, other: &BleuStats) {
        for (a, b) in self.matches.iter_mut().zip(&other.matches) {
            *a += b;
        }
        for (a, b) in self.totals.iter_mut().zip(&other.totals) {
            *a += b;
        }
        self.candidate_len += other.candidate_len;
        self.reference_len += other.reference_len;
    }
}

fn closest_ref_len(candidate_len: usize, references: &[TokenSequence]) -> usize {
    references
        .iter()
        .map(TokenSequence::len)
        .min_by_key(|&r| (r.abs_diff(candidate_len), r))
        .unwrap_or(0)
}

/// Counts clipped matches for n = 1..=max_n. Each candidate n-gram count is
/// clipped to its largest count in any single reference.
pub fn bleu_stats(candidate: &TokenSequence, references: &[TokenSequence], max_n: usize) -> BleuStats {
    let mut stats = BleuStats {
        matches: vec![0; max_n],
        totals: vec![0; max_n],
        candidate_len: candidate.len(),
        reference_len: closest_ref_len(candidate.len(), references),
    };
    for n in 1..=max_n {
        let cand = ngrams_of(candidate.tokens(), n);
        let mut max_ref: BTreeMap<&Vec<String>, usize> = BTreeMap::new();
        let ref_bags: Vec<_> = references.iter().map(|r| ngrams_of(r.tokens(), n)).collect();
        for bag in &ref_bags {
            for (g, c) in bag.iter() {
                let e = max_ref.entry(g).or_insert(0);
                *e = (*e).max(c);
            }
        }
        stats.totals[n - 1] = cand.total();
        stats.matches[n - 1] = cand
            .iter()
            .map(|(g, c)| c.min(max_ref.get(g).copied().unwrap_or(0)))
            .sum();
    }
    stats
}

fn brevity_penalty(c: usize, r: usize) -> f64 {
    if c == 0 {
        0.0
    } else if c < r {
        (1.0 - r as f64 / c as f64).exp()
    } else {
        1.0
    }
}

fn check_max_n(max_n: usize) -> Result<()> {
    if max_n == 0 {
        return Err(Error::InvalidArgument("max_n must be >= 1".into()));
    }
    Ok(())
}

/// Corpus-level BLEU: n-gram precisions pooled over all candidates,
/// uniformly weighted geometric mean, times the brevity penalty. Any zero
/// pooled precision gives 0.
pub fn bleu_corpus(
    candidates: &[TokenSequence],
    references: &[Vec<TokenSequence>],
    max_n: usize,
) -> Result<f64> {
    check_max_n(max_n)?;
    if candidates.len() != references.len() {
        return Err(Error::LengthMismatch {
            left: candidates.len(),
            right: references.len(),
        });
    }
    if candidates.is_empty() {
        return Err(Error::InvalidArgument("empty candidate list".into()));
    }
    if references.iter().any(Vec::is_empty) {
        return Err(Error::InvalidArgument("candidate without references".into()));
    }
    let mut total = BleuStats {
        matches: vec![0; max_n],
        totals: vec![0; max_n],
        ..BleuStats::default()
    };
    for (c, refs) in candidates.iter().zip(references) {
        total.add(&bleu_stats(c, refs, max_n));
    }
    Ok(bleu_from_stats(&total))
}

/// Unsmoothed BLEU from accumulated statistics.
pub fn bleu_from_stats(stats: &BleuStats) -> f64 {
    let max_n = stats.matches.len();
    let mut log_sum = 0.0;
    for (&m, &t) in stats.matches.iter().zip(&stats.totals) {
        if m == 0 || t == 0 {
            return 0.0;
        }
        log_sum += (m as f64 / t as f64).ln();
    }
    brevity_penalty(stats.candidate_len, stats.reference_len) * (log_sum / max_n as f64).exp()
}

/// Sentence BLEU with add-one smoothing: every order uses
/// `(matches + 1) / (total + 1)`. Identical texts score exactly 1 and
/// texts without any common word still get a small positive score.
pub fn sent_bleu(candidate: &TokenSequence, references: &[TokenSequence], max_n: usize) -> Result<f64> {
    check_max_n(max_n)?;
    if references.is_empty() {
        return Err(Error::InvalidArgument("sentence BLEU needs references".into()));
    }
    if candidate.is_empty() {
        return Ok(0.0);
    }
    let stats = bleu_stats(candidate, references, max_n);
    let log_sum: f64 = stats
        .matches
        .iter()
        .zip(&stats.totals)
        .map(|(&m, &t)| ((m + 1) as f64 / (t + 1) as f64).ln())
        .sum();
    Ok(brevity_penalty(stats.candidate_len, stats.reference_len) * (log_sum / max_n as f64).exp())
}
