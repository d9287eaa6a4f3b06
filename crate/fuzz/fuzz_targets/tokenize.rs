#![no_main]

use capeval_core::metrics::{meteor_lite, rouge_l, sent_bleu};
use capeval_core::textproc::{stems, tokenize};
use libfuzzer_sys::fuzz_target;

// Candidate and reference separated by a newline.
fuzz_target!(|data: &[u8]| {
    let Ok(text) = std::str::from_utf8(data) else { return };
    let (cand, reference) = text.split_once('\n').unwrap_or((text, ""));
    let c = tokenize(cand);
    let r = [tokenize(reference)];
    assert_eq!(stems(&c).len(), c.len());
    for score in [sent_bleu(&c, &r, 4), rouge_l(&c, &r), meteor_lite(&c, &r)].into_iter().flatten() {
        assert!(score.is_finite() && (0.0..=1.0).contains(&score));
    }
});
