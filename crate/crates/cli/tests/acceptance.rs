//! Acceptance gate: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

#[path = "../../core/tests/common/oracle.rs"]
mod oracle;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::process::Command;
use std::time::{Duration, Instant};

use capeval_core::corpus::io::{corpus_from_jsonl, to_jsonl};
use capeval_core::corpus::{
    filter_annotators, generate_synthetic, leave_one_year_out, standardize, AssessmentMatrix,
    AssessmentMode, ControlKind, Corpus, DatasetTag, RawAnnotation, StandardizeOptions,
    SynthConfig,
};
use capeval_core::fusion::{fit_fusion, FusionData};
use capeval_core::learned::{score_pairs, train_baseline, training_pairs, BaselineScorer, DEFAULT_RIDGE_LAMBDA};
use capeval_core::metaeval::{
    caption_level, caption_rho_or_zero, pearson, shuffle_experiment, williams_test, CaptionScorer,
};
use capeval_core::metrics::{
    bleu_corpus, meteor_lite, rouge_l, score_all, sent_bleu, CiderModel, Metric, ScoreMatrix,
};
use capeval_core::qualitative::{
    char_width, render_cloud, top_pairs, word_frequencies, CloudConfig, FrequencyTable, ScoredPair,
    Side,
};
use capeval_core::metrics::ScoreKey;
use capeval_core::textproc::{StopWords, TokenSequence};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

macro_rules! ensure {
    ($cond:expr, $($fmt:tt)+) => {
        let holds: bool = $cond;
        if !holds {
            return Err(format!($($fmt)+));
        }
    };
}

fn seq(words: &[String]) -> TokenSequence {
    TokenSequence::from_tokens(words.iter().cloned())
}

fn synthetic(n_videos: usize, seed: u64) -> (Corpus, AssessmentMatrix) {
    let (c, anns) = generate_synthetic(&SynthConfig {
        n_videos,
        seed,
        ..SynthConfig::default()
    })
    .expect("synthetic corpus");
    let kept = filter_annotators(&anns, 50.0, 50.0).expect("filter").kept;
    let h = standardize(&kept, &StandardizeOptions::new(AssessmentMode::Sa)).expect("standardize");
    (c, h)
}

fn metric_oracles() -> Outcome {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut worst = 0.0f64;
    for _ in 0..200 {
        let cand = oracle::random_sentence(&mut rng, 12);
        let refs: Vec<Vec<String>> =
            (0..rng.random_range(1..=4)).map(|_| oracle::random_sentence(&mut rng, 12)).collect();
        let c = seq(&cand);
        let r: Vec<TokenSequence> = refs.iter().map(|x| seq(x)).collect();
        let pairs = [
            ("bleu4", bleu_corpus(std::slice::from_ref(&c), std::slice::from_ref(&r), 4).unwrap(),
             oracle::bleu(std::slice::from_ref(&cand), std::slice::from_ref(&refs), 4)),
            ("sentbleu", sent_bleu(&c, &r, 4).unwrap(), oracle::sent_bleu(&cand, &refs, 4)),
            ("rouge_l", rouge_l(&c, &r).unwrap(), oracle::rouge_l(&cand, &refs)),
            ("meteor_lite", meteor_lite(&c, &r).unwrap(), oracle::meteor(&cand, &refs)),
        ];
        for (name, got, want) in pairs {
            let d = (got - want).abs();
            ensure!(d <= 1e-9, "{name} differs by {d:e} on {cand:?} / {refs:?}");
            worst = worst.max(d);
        }
    }
    // CIDEr needs a corpus: 200 candidates spread over 20 random corpora.
    for _ in 0..20 {
        let docs: Vec<Vec<Vec<String>>> = (0..rng.random_range(2..=6))
            .map(|_| (0..rng.random_range(1..=5)).map(|_| oracle::random_sentence(&mut rng, 12)).collect())
            .collect();
        let token_docs: Vec<Vec<TokenSequence>> =
            docs.iter().map(|d| d.iter().map(|r| seq(r)).collect()).collect();
        let model = CiderModel::fit(token_docs.iter().map(Vec::as_slice)).unwrap();
        for _ in 0..10 {
            let video = rng.random_range(0..docs.len());
            let cand = oracle::random_sentence(&mut rng, 12);
            let d = (model.score(&seq(&cand), &token_docs[video]) - oracle::cider(&cand, video, &docs)).abs();
            ensure!(d <= 1e-9, "cider differs by {d:e}");
            worst = worst.max(d);
        }
    }
    let elapsed = start.elapsed();
    ensure!(elapsed < Duration::from_secs(10), "took {elapsed:?}");
    Ok(format!("5 metrics x 200 instances, max |diff| {worst:.1e}, {elapsed:.2?}"))
}

fn stats_oracles() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let normal = Normal::new(0.0, 1.0).unwrap();
    let (mut worst_r, mut worst_t, mut worst_p) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let n = rng.random_range(8..150);
        let (a, b) = (rng.random_range(0.0..2.0), rng.random_range(0.0..2.0));
        let h: Vec<f64> = (0..n).map(|_| normal.sample(&mut rng)).collect();
        let m1: Vec<f64> = h.iter().map(|x| a * x + normal.sample(&mut rng)).collect();
        let m2: Vec<f64> = h.iter().map(|x| b * x + normal.sample(&mut rng)).collect();
        let r12 = pearson(&m1, &m2).map_err(|e| e.to_string())?;
        let r13 = pearson(&m1, &h).map_err(|e| e.to_string())?;
        let r23 = pearson(&m2, &h).map_err(|e| e.to_string())?;
        worst_r = worst_r.max((r13 - oracle::pearson(&m1, &h)).abs());
        let w = williams_test(r12, r13, r23, n).map_err(|e| e.to_string())?;
        let (t, p) = oracle::williams(r12, r13, r23, n);
        worst_t = worst_t.max((w.t - t).abs());
        worst_p = worst_p.max((w.p - p).abs());
        let back = williams_test(r12, r23, r13, n).map_err(|e| e.to_string())?;
        ensure!(back.t == -w.t, "antisymmetry broken: {} vs {}", w.t, back.t);
        ensure!(back.p + w.p == 1.0, "p(a,b) + p(b,a) = {}", back.p + w.p);
    }
    ensure!(worst_r <= 1e-6 && worst_t <= 1e-6 && worst_p <= 1e-6,
        "max diffs rho {worst_r:e}, t {worst_t:e}, p {worst_p:e}");
    Ok(format!("100 triples, max diffs rho {worst_r:.1e}, t {worst_t:.1e}, p {worst_p:.1e}"))
}

fn standardization() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut anns = Vec::new();
    let mut owner: BTreeMap<(String, String), String> = BTreeMap::new();
    for v in 0..120 {
        let annotator = format!("w{}", v % 6);
        let key = (format!("v{v}"), "s".to_string());
        owner.insert(key.clone(), annotator.clone());
        let raw_score = if annotator == "w5" { 70.0 } else { rng.random_range(0..=100) as f64 };
        anns.push(RawAnnotation {
            video_id: key.0,
            system_id: key.1,
            annotator_id: annotator,
            raw_score,
            control: ControlKind::System,
        });
    }
    let m = standardize(&anns, &StandardizeOptions::new(AssessmentMode::Sa)).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for w in 0..5 {
        let zs: Vec<f64> = m
            .entries()
            .iter()
            .filter(|(k, _)| owner[*k] == format!("w{w}"))
            .map(|(_, z)| *z)
            .collect();
        let n = zs.len() as f64;
        let mean = zs.iter().sum::<f64>() / n;
        let sd = (zs.iter().map(|z| (z - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt();
        worst = worst.max(mean.abs()).max((sd - 1.0).abs());
    }
    ensure!(worst <= 1e-9, "mean/sd off by {worst:e}");
    let constant_zero = m.entries().iter().filter(|(k, _)| owner[*k] == "w5").all(|(_, z)| *z == 0.0);
    ensure!(constant_zero, "zero-variance annotator not mapped to 0");
    ensure!(m.warnings().iter().any(|w| w.contains("w5")), "no zero-variance warning");
    Ok(format!("5 annotators within {worst:.1e}; constant annotator -> 0 with warning"))
}

fn shuffle() -> Outcome {
    let (c, h) = synthetic(100, 7);
    let scorers: Vec<&dyn CaptionScorer> = Metric::ALL.iter().map(|m| m as &dyn CaptionScorer).collect();
    let mut summary = Vec::new();
    for seed in 1..=5u64 {
        let r = shuffle_experiment(&c, &h, &scorers, seed).map_err(|e| e.to_string())?;
        let bleu = r.row("bleu4").ok_or("no bleu4 row")?;
        let top = r.most_affected().ok_or("empty report")?;
        ensure!(top.metric == "bleu4", "seed {seed}: {} dropped most ({:.3} vs bleu4 {:.3})",
            top.metric, top.drop, bleu.drop);
        ensure!(bleu.drop > 0.5 * bleu.rho, "seed {seed}: bleu4 drop {:.3} of rho {:.3}", bleu.drop, bleu.rho);
        let second = r.rows.iter().filter(|x| x.metric != "bleu4").map(|x| x.drop).fold(f64::MIN, f64::max);
        summary.push(format!("{:.0}%/{:.3}", 100.0 * bleu.relative_drop, second));
    }
    Ok(format!("bleu4 relative drop / next-largest drop per seed: {}", summary.join(", ")))
}

fn fusion() -> Outcome {
    let (c, _) = synthetic(200, 7);
    let (ms, _) = score_all(&c, &Metric::ALL).map_err(|e| e.to_string())?;
    let refs: Vec<&ScoreMatrix> = ms.iter().collect();
    let planted = [0.4, -0.3, 0.8, 0.2, 0.05];
    let means: Vec<BTreeMap<(String, String), f64>> = ms.iter().map(|m| m.caption_means()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    let noise = Normal::new(0.0, 0.1).unwrap();
    let mut exact = BTreeMap::new();
    let mut noisy = BTreeMap::new();
    for (k, _) in c.candidates() {
        let y: f64 = 0.1 + planted.iter().zip(&means).map(|(w, m)| w * m[k]).sum::<f64>();
        exact.insert(k.clone(), y);
        noisy.insert(k.clone(), y + noise.sample(&mut rng));
    }

    let data = FusionData::from_matrices(&c, &refs, &AssessmentMatrix::from_entries(exact))
        .map_err(|e| e.to_string())?;
    let (model, report) = fit_fusion(&data, 7).map_err(|e| e.to_string())?;
    let (w, _) = model.raw_weights();
    let err = w.iter().zip(planted).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    ensure!(err <= 1e-6, "planted weights off by {err:e}");
    let test_rho = report.test_rho.ok_or("no test correlation")?;
    ensure!(test_rho >= 0.999, "held-out rho {test_rho}");

    let data = FusionData::from_matrices(&c, &refs, &AssessmentMatrix::from_entries(noisy))
        .map_err(|e| e.to_string())?;
    let (_, report) = fit_fusion(&data, 7).map_err(|e| e.to_string())?;
    for (m, r) in &report.metric_train_rho {
        ensure!(report.train_rho >= r.abs(), "fused {:.4} < {m} {:.4}", report.train_rho, r);
    }
    let best = report.metric_train_rho.iter().map(|(_, r)| r.abs()).fold(0.0, f64::max);
    Ok(format!(
        "weights within {err:.1e}, held-out rho {test_rho:.6}; noisy fused train rho {:.4} >= best single {best:.4}",
        report.train_rho
    ))
}

fn baseline() -> Outcome {
    let (c, h) = synthetic(200, 7);
    let mut lines = Vec::new();
    for year in c.years() {
        let split = leave_one_year_out(&c, &h, year).map_err(|e| e.to_string())?;
        let (pairs, targets) = training_pairs(&split.train.0, &split.train.1);
        let scorer = train_baseline(&pairs, &targets, DEFAULT_RIDGE_LAMBDA).map_err(|e| e.to_string())?;
        let again = train_baseline(&pairs, &targets, DEFAULT_RIDGE_LAMBDA).map_err(|e| e.to_string())?;
        ensure!(scorer == again, "training is not deterministic");
        let (test_c, test_h) = &split.test;
        let trained = caption_rho_or_zero(&score_pairs(&scorer, test_c), test_h).map_err(|e| e.to_string())?;
        let zero = caption_rho_or_zero(&score_pairs(&BaselineScorer::constant(scorer.bias), test_c), test_h)
            .map_err(|e| e.to_string())?;
        ensure!(trained - zero >= 0.2, "{year}: trained {trained:.3} vs zero-weight {zero:.3}");
        lines.push(format!("{year} {trained:.3}"));
    }
    Ok(format!("held-out caption rho (zero-weight scorer 0): {}", lines.join(", ")))
}

fn multi_reference() -> Outcome {
    let (one, anns) = generate_synthetic(&SynthConfig { n_videos: 60, n_refs: 1, ..SynthConfig::default() })
        .map_err(|e| e.to_string())?;
    let kept = filter_annotators(&anns, 50.0, 50.0).map_err(|e| e.to_string())?.kept;
    let h = standardize(&kept, &StandardizeOptions::new(AssessmentMode::Sa)).map_err(|e| e.to_string())?;
    let single_ref = [Metric::SentBleu, Metric::RougeL, Metric::MeteorLite];
    let (ms, _) = score_all(&one, &single_ref).map_err(|e| e.to_string())?;
    for m in &ms {
        let a = caption_level(m, &h, true).map_err(|e| e.to_string())?.rho;
        let b = caption_level(m, &h, false).map_err(|e| e.to_string())?.rho;
        ensure!(a == b, "{}: M'=1 multiref {a} != single {b}", m.metric());
    }

    let mut refs = Vec::new();
    for r in one.reference_records() {
        for j in 1..=5 {
            let mut copy = r.clone();
            copy.ref_id = format!("r{j}");
            refs.push(copy);
        }
    }
    let (five, _) = corpus_from_jsonl(&to_jsonl(&one.caption_records()), &to_jsonl(&refs), "", DatasetTag::Synthetic)
        .map_err(|e| e.to_string())?;
    let (ms5, _) = score_all(&five, &single_ref).map_err(|e| e.to_string())?;
    let mut worst = 0.0f64;
    for (m1, m5) in ms.iter().zip(&ms5) {
        let means = m5.caption_means();
        for (k, x) in m1.entries() {
            worst = worst.max((means[&k.caption()] - x).abs());
        }
        let a = caption_level(m5, &h, true).map_err(|e| e.to_string())?.rho;
        let b = caption_level(m1, &h, false).map_err(|e| e.to_string())?.rho;
        worst = worst.max((a - b).abs());
    }
    ensure!(worst <= 1e-12, "five identical references differ by {worst:e}");
    Ok(format!("M'=1 exact; five identical references within {worst:.1e}"))
}

/// Boxes of the `<text>` elements of an emitted SVG.
fn svg_boxes(svg: &str) -> Vec<(String, f64, f64, f64, f64)> {
    let attr = |line: &str, name: &str| -> f64 {
        let key = format!(" {name}=\"");
        let start = line.find(&key).expect("attribute") + key.len();
        let end = start + line[start..].find('"').unwrap();
        line[start..end].parse().unwrap()
    };
    svg.lines()
        .filter(|l| l.trim_start().starts_with("<text"))
        .map(|l| {
            let (x, y, size) = (attr(l, "x"), attr(l, "y"), attr(l, "font-size"));
            let word = &l[l.find('>').unwrap() + 1..l.rfind("</text>").unwrap()];
            let word = word
                .replace("&lt;", "<")
                .replace("&gt;", ">")
                .replace("&quot;", "\"")
                .replace("&apos;", "'")
                .replace("&amp;", "&");
            let width = size * word.chars().map(char_width).sum::<f64>();
            (word, x - width / 2.0, y - size / 2.0, x + width / 2.0, y + size / 2.0)
        })
        .collect()
}

fn qualitative() -> Outcome {
    let pair = ScoredPair {
        key: ScoreKey::new("v1", Some("r1"), "s1"),
        score: 1.0,
        candidate: "a man talking".into(),
        references: vec!["a man dancing".into()],
    };
    let table = word_frequencies("m", &[pair], &StopWords::english(), Side::Both);
    let expected = vec![("man".to_string(), 2), ("dancing".to_string(), 1), ("talking".to_string(), 1)];
    ensure!(table.entries == expected, "hand count gave {:?}", table.entries);

    let (c, _) = synthetic(200, 7);
    let (ms, _) = score_all(&c, &[Metric::Cider]).map_err(|e| e.to_string())?;
    let (top, _) = top_pairs(&ms[0], &c, 10).map_err(|e| e.to_string())?;
    let cloud_table = word_frequencies("cider", &top, &StopWords::english(), Side::Both);
    let twenty = FrequencyTable::from_counts(
        "t",
        (0..20).map(|i| (format!("word{i}"), 1 + (i * 7) % 9)).collect(),
    );
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut checked = 0;
    for (name, t) in [("cider", &cloud_table), ("twenty", &twenty)] {
        let (a, b) = (dir.path().join(format!("{name}_a.svg")), dir.path().join(format!("{name}_b.svg")));
        render_cloud(t, &a, &CloudConfig::default()).map_err(|e| e.to_string())?;
        render_cloud(t, &b, &CloudConfig::default()).map_err(|e| e.to_string())?;
        let (sa, sb) = (std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
        ensure!(sa == sb, "{name}: SVG differs between runs");
        let boxes = svg_boxes(&String::from_utf8(sa).unwrap());
        ensure!(boxes.len() == t.len(), "{name}: {} words drawn of {}", boxes.len(), t.len());
        for i in 0..boxes.len() {
            for j in i + 1..boxes.len() {
                let (p, q) = (&boxes[i], &boxes[j]);
                let overlap = p.1 < q.3 && q.1 < p.3 && p.2 < q.4 && q.2 < p.4;
                ensure!(!overlap, "{name}: {} overlaps {}", p.0, q.0);
                checked += 1;
            }
        }
    }
    Ok(format!("hand count exact; {checked} box pairs disjoint; SVGs byte-identical"))
}

fn run(bin: &str, args: &[&str]) -> Result<(), String> {
    let out = Command::new(bin).args(args).output().map_err(|e| e.to_string())?;
    ensure!(out.status.success(), "capeval {} failed: {}", args[0], String::from_utf8_lossy(&out.stderr));
    Ok(())
}

fn pipeline(bin: &str, root: &Path) -> Result<Duration, String> {
    let start = Instant::now();
    let p = |s: &str| root.join(s).to_string_lossy().into_owned();
    let data = p("data");
    let caps = format!("{data}/captions.jsonl");
    let refs = format!("{data}/references.jsonl");
    let anns = format!("{data}/assessments.jsonl");
    let scores = format!("{}/scores.jsonl", p("score"));
    let corpus = ["--captions", caps.as_str(), "--references", refs.as_str()];
    let human = ["--assessments", anns.as_str()];
    run(bin, &["synth", "--seed", "7", "--videos", "200", "--out", &data])?;
    run(bin, &[&["score"][..], &corpus, &["--out", &p("score")]].concat())?;
    run(bin, &[&["correlate"][..], &corpus, &human, &["--scores", &scores, "--out", &p("correlate")]].concat())?;
    run(bin, &[&["williams"][..], &corpus, &human, &["--scores", &scores, "--level", "both", "--out", &p("williams")]].concat())?;
    run(bin, &[&["fuse"][..], &corpus, &human, &["--scores", &scores, "--target", "sa", "--seed", "7", "--out", &p("fuse")]].concat())?;
    run(bin, &[&["wordcloud"][..], &corpus, &["--scores", &scores, "--out", &p("wordcloud")]].concat())?;
    Ok(start.elapsed())
}

fn files(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    let mut out = BTreeMap::new();
    for dir in std::fs::read_dir(root).unwrap() {
        let dir = dir.unwrap().path();
        for f in std::fs::read_dir(&dir).unwrap() {
            let f = f.unwrap().path();
            if f.file_name().unwrap() != "run_config.json" {
                out.insert(f.strip_prefix(root).unwrap().to_path_buf(), std::fs::read(&f).unwrap());
            }
        }
    }
    out
}

fn end_to_end() -> Outcome {
    let bin = env!("CARGO_BIN_EXE_capeval");
    let (a, b) = (tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap());
    let ta = pipeline(bin, a.path())?;
    let tb = pipeline(bin, b.path())?;
    let (fa, fb) = (files(a.path()), files(b.path()));
    ensure!(fa.keys().eq(fb.keys()), "different file sets");
    for (k, v) in &fa {
        ensure!(&fb[k] == v, "{} differs between runs", k.display());
    }
    for name in ["correlate/correlation_system.tsv", "williams/williams_system_2016.tsv",
                 "fuse/fusion_model.json", "wordcloud/cloud_cider.svg"] {
        ensure!(fa.contains_key(Path::new(name)), "missing {name}");
    }
    let limit = Duration::from_secs(60);
    ensure!(ta < limit && tb < limit, "pipeline took {ta:?} / {tb:?}");
    Ok(format!("{} files byte-identical; runs took {ta:.2?} and {tb:.2?}", fa.len()))
}

fn main() {
    let criteria: [Criterion; 9] = [
        ("metric oracle suite", metric_oracles),
        ("statistics oracle suite", stats_oracles),
        ("standardization", standardization),
        ("shuffle experiment", shuffle),
        ("fusion", fusion),
        ("trained baseline scorer", baseline),
        ("multi-reference identity", multi_reference),
        ("qualitative", qualitative),
        ("end-to-end determinism", end_to_end),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        match std::panic::catch_unwind(f) {
            Ok(Ok(detail)) => println!("PASS  {name}: {detail}"),
            Ok(Err(why)) => {
                failed += 1;
                println!("FAIL  {name}: {why}");
            }
            Err(_) => {
                failed += 1;
                println!("FAIL  {name}: panicked");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
    println!("all acceptance criteria passed");
}
