//! METEOR-lite: exact and stem matching stages only (no synonym or
//! paraphrase tables).
//!
//! The alignment keeps as many exact matches as possible, then adds as many
//! stem matches as possible among the remaining words, and among all such
//! alignments picks one with the fewest chunks. The chunk minimization is an
//! exact branch-and-bound search; on pathological inputs it stops after
//! [`SEARCH_BUDGET`] nodes and keeps the best alignment found so far.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::textproc::{stem, TokenSequence};

pub const METEOR_ALPHA_WEIGHT: f64 = 9.0;
pub const METEOR_PENALTY_GAMMA: f64 = 0.5;
pub const METEOR_PENALTY_BETA: f64 = 3.0;
/// Search nodes explored per (candidate, reference) alignment.
pub const SEARCH_BUDGET: usize = 200_000;

/// Result of aligning a candidate with one reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Alignment {
    pub matches: usize,
    pub exact_matches: usize,
    pub chunks: usize,
}

#[derive(Clone, Copy, PartialEq, Eq)]
enum Match {
    Exact,
    Stem,
}

struct Search<'a> {
    /// options[i] = compatible reference positions for candidate word i,
    /// exact matches first.
    options: Vec<Vec<(usize, Match)>>,
    cand: &'a [String],
    cand_stems: Vec<String>,
    reference: &'a [String],
    ref_stems: Vec<String>,
    target_exact: usize,
    target_matches: usize,
    used: Vec<bool>,
    best_links: Option<usize>,
    nodes: usize,
}

impl Search<'_> {
    /// Upper bounds on exact and total matches still reachable from
    /// candidate position `i` given the unused reference words.
    fn reachable(&self, i: usize) -> (usize, usize) {
        let mut cand_exact: BTreeMap<&str, usize> = BTreeMap::new();
        let mut cand_stem: BTreeMap<&str, usize> = BTreeMap::new();
        for k in i..self.cand.len() {
            *cand_exact.entry(&self.cand[k]).or_default() += 1;
            *cand_stem.entry(&self.cand_stems[k]).or_default() += 1;
        }
        let mut ref_exact: BTreeMap<&str, usize> = BTreeMap::new();
        let mut ref_stem: BTreeMap<&str, usize> = BTreeMap::new();
        for (j, used) in self.used.iter().enumerate() {
            if !used {
                *ref_exact.entry(&self.reference[j]).or_default() += 1;
                *ref_stem.entry(&self.ref_stems[j]).or_default() += 1;
            }
        }
        let cap = |a: &BTreeMap<&str, usize>, b: &BTreeMap<&str, usize>| -> usize {
            a.iter().map(|(k, c)| (*c).min(b.get(k).copied().unwrap_or(0))).sum()
        };
        (cap(&cand_exact, &ref_exact), cap(&cand_stem, &ref_stem))
    }

    fn run(&mut self, i: usize, prev: Option<usize>, exact: usize, matches: usize, links: usize) {
        self.nodes += 1;
        if i == self.cand.len() {
            if exact == self.target_exact
                && matches == self.target_matches
                && self.best_links.is_none_or(|b| links > b)
            {
                self.best_links = Some(links);
            }
            return;
        }
        if self.nodes > SEARCH_BUDGET && self.best_links.is_some() {
            return;
        }
        let remaining = self.cand.len() - i;
        if let Some(best) = self.best_links {
            if links + remaining <= best {
                return;
            }
        }
        let (reach_exact, reach_total) = self.reachable(i);
        if exact + reach_exact < self.target_exact || matches + reach_total < self.target_matches {
            return;
        }

        // Extending the current chunk first finds good alignments early.
        let mut order: Vec<(usize, Match)> = self.options[i].clone();
        if let Some(p) = prev {
            if let Some(pos) = order.iter().position(|(j, _)| *j == p + 1) {
                let item = order.remove(pos);
                order.insert(0, item);
            }
        }
        for (j, kind) in order {
            if self.used[j] {
                continue;
            }
            self.used[j] = true;
            let link = usize::from(prev.is_some_and(|p| p + 1 == j));
            self.run(
                i + 1,
                Some(j),
                exact + usize::from(kind == Match::Exact),
                matches + 1,
                links + link,
            );
            self.used[j] = false;
        }
        self.run(i + 1, None, exact, matches, links);
    }
}

fn multiset_overlap<'a>(a: impl Iterator<Item = &'a str>, b: impl Iterator<Item = &'a str>) -> usize {
    let mut counts: BTreeMap<&str, (usize, usize)> = BTreeMap::new();
    for x in a {
        counts.entry(x).or_default().0 += 1;
    }
    for x in b {
        counts.entry(x).or_default().1 += 1;
    }
    counts.values().map(|(p, q)| p.min(q)).sum()
}

/// Aligns `candidate` with `reference` in two stages (exact, then stem)
/// with the fewest chunks.
pub fn align(candidate: &[String], reference: &[String]) -> Alignment {
    let cand_stems: Vec<String> = candidate.iter().map(|t| stem(t)).collect();
    let ref_stems: Vec<String> = reference.iter().map(|t| stem(t)).collect();
    // A stem class contains whole exact classes, so maximizing exact matches
    // first still reaches the maximum total.
    let target_exact = multiset_overlap(
        candidate.iter().map(String::as_str),
        reference.iter().map(String::as_str),
    );
    let target_matches = multiset_overlap(
        cand_stems.iter().map(String::as_str),
        ref_stems.iter().map(String::as_str),
    );
    if target_matches == 0 {
        return Alignment {
            matches: 0,
            exact_matches: 0,
            chunks: 0,
        };
    }
    let options = candidate
        .iter()
        .zip(&cand_stems)
        .map(|(w, s)| {
            let exact = reference
                .iter()
                .enumerate()
                .filter(|(_, r)| *r == w)
                .map(|(j, _)| (j, Match::Exact));
            let stemmed = reference
                .iter()
                .zip(&ref_stems)
                .enumerate()
                .filter(|(_, (r, rs))| *r != w && *rs == s)
                .map(|(j, _)| (j, Match::Stem));
            exact.chain(stemmed).collect()
        })
        .collect();
    let mut search = Search {
        options,
        cand: candidate,
        cand_stems,
        reference,
        ref_stems,
        target_exact,
        target_matches,
        used: vec![false; reference.len()],
        best_links: None,
        nodes: 0,
    };
    search.run(0, None, 0, 0, 0);
    let links = search.best_links.expect("a maximal alignment always exists");
    Alignment {
        matches: target_matches,
        exact_matches: target_exact,
        chunks: target_matches - links,
    }
}

/// Score for a given alignment and sentence lengths.
pub fn meteor_from_alignment(a: &Alignment, candidate_len: usize, reference_len: usize) -> f64 {
    if a.matches == 0 || candidate_len == 0 || reference_len == 0 {
        return 0.0;
    }
    let m = a.matches as f64;
    let p = m / candidate_len as f64;
    let r = m / reference_len as f64;
    let f_mean = (1.0 + METEOR_ALPHA_WEIGHT) * p * r / (r + METEOR_ALPHA_WEIGHT * p);
    let penalty = METEOR_PENALTY_GAMMA * (a.chunks as f64 / m).powf(METEOR_PENALTY_BETA);
    f_mean * (1.0 - penalty)
}

/// METEOR-lite score, best over the references.
pub fn meteor_lite(candidate: &TokenSequence, references: &[TokenSequence]) -> Result<f64> {
    if references.is_empty() {
        return Err(Error::InvalidArgument("METEOR needs references".into()));
    }
    if candidate.is_empty() {
        return Ok(0.0);
    }
    Ok(references
        .iter()
        .map(|r| {
            let a = align(candidate.tokens(), r.tokens());
            meteor_from_alignment(&a, candidate.len(), r.len())
        })
        .fold(0.0, f64::max))
}
