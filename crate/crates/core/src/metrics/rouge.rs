use crate::error::{Error, Result};
use crate::textproc::TokenSequence;

/// Recall weight of the ROUGE-L F-measure.
pub const ROUGE_BETA: f64 = 1.2;

/// Length of the longest common subsequence.
pub fn lcs_len(a: &[String], b: &[String]) -> usize {
    if a.is_empty() || b.is_empty() {
        return 0;
    }
    let mut prev = vec![0usize; b.len() + 1];
    let mut cur = vec![0usize; b.len() + 1];
    for x in a {
        for (j, y) in b.iter().enumerate() {
            cur[j + 1] = if x == y {
                prev[j] + 1
            } else {
                cur[j].max(prev[j + 1])
            };
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

fn rouge_l_single(candidate: &[String], reference: &[String]) -> f64 {
    let lcs = lcs_len(candidate, reference);
    if lcs == 0 {
        return 0.0;
    }
    let p = lcs as f64 / candidate.len() as f64;
    let r = lcs as f64 / reference.len() as f64;
    let b2 = ROUGE_BETA * ROUGE_BETA;
    (1.0 + b2) * p * r / (r + b2 * p)
}

/// ROUGE-L: LCS-based F-measure (beta = 1.2), best over the references.
pub fn rouge_l(candidate: &TokenSequence, references: &[TokenSequence]) -> Result<f64> {
    if references.is_empty() {
        return Err(Error::InvalidArgument("ROUGE-L needs references".into()));
    }
    Ok(references
        .iter()
        .map(|r| rouge_l_single(candidate.tokens(), r.tokens()))
        .fold(0.0, f64::max))
}
