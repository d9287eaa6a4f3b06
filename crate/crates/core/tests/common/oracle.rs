//! Slow, direct implementations used as references by the test suites.
//!
//! Everything here works on plain `&[&str]` slices with linear scans and
//! exhaustive enumeration, sharing no code with the library except the
//! stemmer.

#![allow(dead_code)]

use capeval_core::textproc::stem;
use rand::Rng;

pub const VOCAB: [&str; 20] = [
    "a", "man", "men", "dog", "dogs", "is", "run", "running", "runs", "the", "park", "in", "cat",
    "play", "playing", "ball", "red", "on", "grass", "jumps",
];

/// Random sentence of 1..=max_len words drawn from `VOCAB`.
pub fn random_sentence<R: Rng>(rng: &mut R, max_len: usize) -> Vec<String> {
    let len = rng.random_range(1..=max_len);
    (0..len)
        .map(|_| VOCAB[rng.random_range(0..VOCAB.len())].to_string())
        .collect()
}

fn grams(tokens: &[String], n: usize) -> Vec<Vec<String>> {
    if tokens.len() < n {
        return Vec::new();
    }
    (0..=tokens.len() - n).map(|i| tokens[i..i + n].to_vec()).collect()
}

fn count(list: &[Vec<String>], g: &[String]) -> usize {
    list.iter().filter(|x| x.as_slice() == g).count()
}

fn distinct(list: &[Vec<String>]) -> Vec<Vec<String>> {
    let mut out: Vec<Vec<String>> = Vec::new();
    for g in list {
        if !out.contains(g) {
            out.push(g.clone());
        }
    }
    out
}

/// (clipped matches, candidate n-grams) for one order.
fn modified_precision(cand: &[String], refs: &[Vec<String>], n: usize) -> (usize, usize) {
    let cg = grams(cand, n);
    let mut matched = 0;
    for g in distinct(&cg) {
        let c = count(&cg, &g);
        let max_ref = refs.iter().map(|r| count(&grams(r, n), &g)).max().unwrap_or(0);
        matched += c.min(max_ref);
    }
    (matched, cg.len())
}

fn closest_ref_len(c: usize, refs: &[Vec<String>]) -> usize {
    let mut best = refs[0].len();
    for r in refs {
        let (d, bd) = ((r.len() as i64 - c as i64).abs(), (best as i64 - c as i64).abs());
        if d < bd || (d == bd && r.len() < best) {
            best = r.len();
        }
    }
    best
}

/// Corpus BLEU with uniform weights over orders 1..=max_n.
pub fn bleu(cands: &[Vec<String>], refs: &[Vec<Vec<String>>], max_n: usize) -> f64 {
    let mut m = vec![0usize; max_n];
    let mut t = vec![0usize; max_n];
    let (mut c_len, mut r_len) = (0, 0);
    for (c, rs) in cands.iter().zip(refs) {
        for n in 1..=max_n {
            let (a, b) = modified_precision(c, rs, n);
            m[n - 1] += a;
            t[n - 1] += b;
        }
        c_len += c.len();
        r_len += closest_ref_len(c.len(), rs);
    }
    if c_len == 0 || m.contains(&0) {
        return 0.0;
    }
    let log_p: f64 = (0..max_n).map(|i| (m[i] as f64 / t[i] as f64).ln()).sum::<f64>() / max_n as f64;
    let bp = if c_len < r_len { (1.0 - r_len as f64 / c_len as f64).exp() } else { 1.0 };
    bp * log_p.exp()
}

/// Sentence BLEU with add-one smoothing on every order.
pub fn sent_bleu(cand: &[String], refs: &[Vec<String>], max_n: usize) -> f64 {
    if cand.is_empty() {
        return 0.0;
    }
    let mut log_p = 0.0;
    for n in 1..=max_n {
        let (a, b) = modified_precision(cand, refs, n);
        log_p += ((a as f64 + 1.0) / (b as f64 + 1.0)).ln();
    }
    let c = cand.len();
    let r = closest_ref_len(c, refs);
    let bp = if c < r { (1.0 - r as f64 / c as f64).exp() } else { 1.0 };
    bp * (log_p / max_n as f64).exp()
}

fn is_subsequence(needle: &[&String], hay: &[String]) -> bool {
    let mut it = hay.iter();
    needle.iter().all(|w| it.any(|h| h == *w))
}

/// LCS length by enumerating every subsequence of `a`.
pub fn lcs_brute(a: &[String], b: &[String]) -> usize {
    let mut best = 0;
    for mask in 0u32..(1 << a.len()) {
        let size = mask.count_ones() as usize;
        if size <= best {
            continue;
        }
        let sub: Vec<&String> = (0..a.len()).filter(|i| mask & (1 << i) != 0).map(|i| &a[i]).collect();
        if is_subsequence(&sub, b) {
            best = size;
        }
    }
    best
}

pub fn rouge_l(cand: &[String], refs: &[Vec<String>]) -> f64 {
    let beta2 = 1.2f64 * 1.2;
    refs.iter()
        .map(|r| {
            let l = lcs_brute(cand, r) as f64;
            if l == 0.0 {
                return 0.0;
            }
            let (p, rc) = (l / cand.len() as f64, l / r.len() as f64);
            (1.0 + beta2) * p * rc / (rc + beta2 * p)
        })
        .fold(0.0, f64::max)
}

/// CIDEr with dense vectors over every n-gram seen anywhere.
pub fn cider(cand: &[String], video: usize, corpus_refs: &[Vec<Vec<String>>]) -> f64 {
    let num_docs = corpus_refs.len() as f64;
    let mut total = 0.0;
    for n in 1..=4 {
        let mut space: Vec<Vec<String>> = grams(cand, n);
        for doc in corpus_refs {
            for r in doc {
                space.extend(grams(r, n));
            }
        }
        let space = distinct(&space);
        let idf: Vec<f64> = space
            .iter()
            .map(|g| {
                let df = corpus_refs
                    .iter()
                    .filter(|doc| doc.iter().any(|r| count(&grams(r, n), g) > 0))
                    .count()
                    .max(1);
                (num_docs / df as f64).ln()
            })
            .collect();
        let vec_of = |s: &[String]| -> Vec<f64> {
            let gs = grams(s, n);
            space.iter().zip(&idf).map(|(g, w)| count(&gs, g) as f64 * w).collect()
        };
        let cv = vec_of(cand);
        let refs = &corpus_refs[video];
        let mut sum = 0.0;
        for r in refs {
            let rv = vec_of(r);
            let dot: f64 = cv.iter().zip(&rv).map(|(a, b)| a * b).sum();
            let na = cv.iter().map(|a| a * a).sum::<f64>().sqrt();
            let nb = rv.iter().map(|b| b * b).sum::<f64>().sqrt();
            if na > 0.0 && nb > 0.0 {
                sum += (dot / (na * nb)).clamp(0.0, 1.0);
            }
        }
        total += sum / refs.len() as f64;
    }
    10.0 * total / 4.0
}

/// Every partial one-to-one matching of compatible words; returns the
/// lexicographically best (exact matches, matches, -chunks).
fn best_matching(cand: &[String], reference: &[String]) -> (usize, usize, usize) {
    let cs: Vec<String> = cand.iter().map(|w| stem(w)).collect();
    let rs: Vec<String> = reference.iter().map(|w| stem(w)).collect();
    let mut best: Option<(usize, usize, usize)> = None;
    let mut assign: Vec<Option<usize>> = vec![None; cand.len()];
    let mut used = vec![false; reference.len()];

    fn chunks(assign: &[Option<usize>]) -> usize {
        let mut chunks = 0;
        let mut prev: Option<usize> = None;
        for a in assign {
            match (a, prev) {
                (Some(j), Some(p)) if *j == p + 1 => {}
                (Some(_), _) => chunks += 1,
                _ => {}
            }
            prev = *a;
        }
        chunks
    }

    #[allow(clippy::too_many_arguments)]
    fn rec(
        i: usize,
        cand: &[String],
        reference: &[String],
        cs: &[String],
        rs: &[String],
        assign: &mut Vec<Option<usize>>,
        used: &mut Vec<bool>,
        best: &mut Option<(usize, usize, usize)>,
    ) {
        if i == cand.len() {
            let exact = assign
                .iter()
                .enumerate()
                .filter(|(k, a)| a.is_some_and(|j| cand[*k] == reference[j]))
                .count();
            let m = assign.iter().filter(|a| a.is_some()).count();
            let ch = chunks(assign);
            let better = match best {
                None => true,
                Some((be, bm, bc)) => (exact, m, std::cmp::Reverse(ch)) > (*be, *bm, std::cmp::Reverse(*bc)),
            };
            if better {
                *best = Some((exact, m, ch));
            }
            return;
        }
        rec(i + 1, cand, reference, cs, rs, assign, used, best);
        for j in 0..reference.len() {
            if !used[j] && (cand[i] == reference[j] || cs[i] == rs[j]) {
                used[j] = true;
                assign[i] = Some(j);
                rec(i + 1, cand, reference, cs, rs, assign, used, best);
                assign[i] = None;
                used[j] = false;
            }
        }
    }

    rec(0, cand, reference, &cs, &rs, &mut assign, &mut used, &mut best);
    best.unwrap()
}

pub fn meteor(cand: &[String], refs: &[Vec<String>]) -> f64 {
    refs.iter()
        .map(|r| {
            let (_, m, ch) = best_matching(cand, r);
            if m == 0 {
                return 0.0;
            }
            let (p, rc) = (m as f64 / cand.len() as f64, m as f64 / r.len() as f64);
            let f = 10.0 * p * rc / (rc + 9.0 * p);
            f * (1.0 - 0.5 * (ch as f64 / m as f64).powi(3))
        })
        .fold(0.0, f64::max)
}

/// Pearson from raw sums.
pub fn pearson(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let (sx, sy) = (x.iter().sum::<f64>(), y.iter().sum::<f64>());
    let sxx: f64 = x.iter().map(|a| a * a).sum();
    let syy: f64 = y.iter().map(|b| b * b).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| a * b).sum();
    (n * sxy - sx * sy) / ((n * sxx - sx * sx).sqrt() * (n * syy - sy * sy).sqrt())
}

fn ln_gamma(x: f64) -> f64 {
    // Lanczos, g = 7, n = 9.
    const C: [f64; 9] = [
        0.999_999_999_999_809_9,
        676.520_368_121_885_1,
        -1_259.139_216_722_402_8,
        771.323_428_777_653_1,
        -176.615_029_162_140_6,
        12.507_343_278_686_905,
        -0.138_571_095_265_720_12,
        9.984_369_578_019_572e-6,
        1.505_632_735_149_311_6e-7,
    ];
    if x < 0.5 {
        return (std::f64::consts::PI / (std::f64::consts::PI * x).sin()).ln() - ln_gamma(1.0 - x);
    }
    let x = x - 1.0;
    let mut a = C[0];
    let t = x + 7.5;
    for (i, c) in C.iter().enumerate().skip(1) {
        a += c / (x + i as f64);
    }
    0.5 * (2.0 * std::f64::consts::PI).ln() + (x + 0.5) * t.ln() - t + a.ln()
}

fn t_density(x: f64, df: f64) -> f64 {
    let c = ln_gamma((df + 1.0) / 2.0) - ln_gamma(df / 2.0) - 0.5 * (df * std::f64::consts::PI).ln();
    (c - (df + 1.0) / 2.0 * (1.0 + x * x / df).ln()).exp()
}

/// P(T > t) by 10-point Gauss-Legendre quadrature of the density on
/// [0, |t|] in short panels.
pub fn t_upper_tail(t: f64, df: f64) -> f64 {
    const NODES: [f64; 5] = [
        0.148_874_338_981_631_2,
        0.433_395_394_129_247_2,
        0.679_409_568_299_024_4,
        0.865_063_366_688_984_5,
        0.973_906_528_517_171_7,
    ];
    const WEIGHTS: [f64; 5] = [
        0.295_524_224_714_752_9,
        0.269_266_719_309_996_4,
        0.219_086_362_515_982,
        0.149_451_349_150_580_6,
        0.066_671_344_308_688_1,
    ];
    let end = t.abs();
    let panels = ((end / 0.02).ceil() as usize).max(1);
    let h = end / panels as f64;
    let mut integral = 0.0;
    for k in 0..panels {
        let mid = (k as f64 + 0.5) * h;
        for (x, w) in NODES.iter().zip(WEIGHTS) {
            let d = x * h / 2.0;
            integral += w * (t_density(mid - d, df) + t_density(mid + d, df)) * h / 2.0;
        }
    }
    if t >= 0.0 { 0.5 - integral } else { 0.5 + integral }
}

/// Williams statistic with the textbook determinant expression.
pub fn williams(r12: f64, r13: f64, r23: f64, n: usize) -> (f64, f64) {
    let n = n as f64;
    let k = 1.0 - r12.powi(2) - r13.powi(2) - r23.powi(2) + 2.0 * r12 * r13 * r23;
    let num = (r13 - r23) * ((n - 1.0) * (1.0 + r12)).sqrt();
    let den = (2.0 * k * (n - 1.0) / (n - 3.0) + (r23 + r13).powi(2) / 4.0 * (1.0 - r12).powi(3)).sqrt();
    let t = num / den;
    (t, t_upper_tail(t, n - 3.0))
}
