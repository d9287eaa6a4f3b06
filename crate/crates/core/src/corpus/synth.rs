//! Seeded synthetic corpus.
//!
//! Every video gets a latent scene (adjective, subject, action, object,
//! place). References describe the scene through varied templates. Each
//! system has a latent quality `q`; each slot of its caption is correct with
//! probability `q`. Annotators score a caption from the fraction of correct
//! slots plus a personal bias and noise, so overlap metrics correlate with
//! the human scores by construction.

use rand::seq::index;
use rand::seq::{IndexedRandom, SliceRandom};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use super::io::{CaptionRecord, ReferenceRecord};
use super::{ControlKind, Corpus, DatasetTag, RawAnnotation, MAX_REFERENCES};
use crate::error::{Error, Result};

const ADJECTIVES: &[&str] = &[
    "young", "old", "tall", "small", "happy", "little", "blond", "bearded",
];
const SUBJECTS: &[&str] = &[
    "man", "woman", "boy", "girl", "dog", "child", "person", "player", "chef", "dancer",
    "teenager", "worker",
];
/// (progressive, third person)
const ACTIONS: &[(&str, &str)] = &[
    ("dancing with", "dances with"),
    ("walking with", "walks with"),
    ("running after", "runs after"),
    ("cooking", "cooks"),
    ("talking about", "talks about"),
    ("playing with", "plays with"),
    ("singing to", "sings to"),
    ("riding", "rides"),
    ("holding", "holds"),
    ("reading", "reads"),
    ("jumping over", "jumps over"),
    ("cleaning", "cleans"),
    ("painting", "paints"),
    ("carrying", "carries"),
];
const OBJECTS: &[&str] = &[
    "a ball", "a guitar", "a bike", "a book", "some food", "a car", "a phone", "a horse",
    "a cup", "a box", "the door", "a rope",
];
const PLACES: &[&str] = &[
    "park", "kitchen", "street", "room", "field", "stage", "beach", "pool", "garden", "road",
    "forest", "office",
];
const TEMPLATES: usize = 6;

const HUMAN_CONTROL_SYSTEM: &str = "human-control";
const DEGRADED_CONTROL_SYSTEM: &str = "degraded-control";

#[derive(Debug, Clone, PartialEq)]
pub struct SynthConfig {
    pub n_videos: usize,
    pub n_systems: usize,
    /// References per video, at most 5.
    pub n_refs: usize,
    /// Spread of latent system quality around 0.5; 0 makes all systems equal.
    pub quality_spread: f64,
    pub seed: u64,
    /// Videos are assigned round-robin to this many year labels from 2016.
    pub n_years: usize,
    pub n_annotators: usize,
    /// Annotations per caption: 1 mimics SA data, 15 or more MA data.
    pub annotations_per_item: usize,
    /// The last `bad_annotators` annotators score at random and fail their
    /// control items.
    pub bad_annotators: usize,
    /// Human and degraded control items given to every annotator (each).
    pub controls_per_annotator: usize,
    /// Standard deviation of per-score noise, in raw 0-100 points.
    pub noise_sd: f64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            n_videos: 20,
            n_systems: 5,
            n_refs: 5,
            quality_spread: 0.8,
            seed: 7,
            n_years: 5,
            n_annotators: 10,
            annotations_per_item: 1,
            bad_annotators: 0,
            controls_per_annotator: 4,
            noise_sd: 10.0,
        }
    }
}

#[derive(Debug, Clone, Copy)]
struct Scene {
    adjective: usize,
    subject: usize,
    action: usize,
    object: usize,
    place: usize,
}

impl Scene {
    fn random(rng: &mut impl Rng) -> Self {
        Scene {
            adjective: rng.random_range(0..ADJECTIVES.len()),
            subject: rng.random_range(0..SUBJECTS.len()),
            action: rng.random_range(0..ACTIONS.len()),
            object: rng.random_range(0..OBJECTS.len()),
            place: rng.random_range(0..PLACES.len()),
        }
    }

    fn render(&self, template: usize) -> String {
        let adj = ADJECTIVES[self.adjective];
        let subj = SUBJECTS[self.subject];
        let (ving, v3) = ACTIONS[self.action];
        let obj = OBJECTS[self.object];
        let place = PLACES[self.place];
        match template {
            0 => format!("a {adj} {subj} is {ving} {obj} in the {place}"),
            1 => format!("a {subj} {v3} {obj} in a {place}"),
            2 => format!("in the {place} a {adj} {subj} is {ving} {obj}"),
            3 => format!("the {subj} is {ving} {obj} at the {place}"),
            4 => format!("there is a {adj} {subj} {ving} {obj} in the {place}"),
            _ => format!("a {subj} in the {place} {v3} {obj}"),
        }
    }
}

fn perturb(value: usize, len: usize, keep_prob: f64, rng: &mut impl Rng) -> (usize, bool) {
    if rng.random_bool(keep_prob) {
        (value, true)
    } else {
        let other = (value + rng.random_range(1..len)) % len;
        (other, false)
    }
}

fn system_quality(t: usize, n_systems: usize, spread: f64) -> f64 {
    let pos = if n_systems == 1 {
        0.5
    } else {
        t as f64 / (n_systems - 1) as f64
    };
    (0.5 + spread * (pos - 0.5)).clamp(0.02, 0.98)
}

fn raw_from_quality(quality: f64, bias: f64, noise: f64) -> f64 {
    (100.0 * (0.1 + 0.8 * quality) + bias + noise).round().clamp(0.0, 100.0)
}

/// Generates a deterministic corpus and its raw annotations.
pub fn generate_synthetic(cfg: &SynthConfig) -> Result<(Corpus, Vec<RawAnnotation>)> {
    if cfg.n_videos == 0 || cfg.n_systems == 0 || cfg.n_refs == 0 || cfg.n_years == 0 {
        return Err(Error::InvalidArgument(
            "videos, systems, references and years must all be >= 1".into(),
        ));
    }
    if cfg.n_refs > MAX_REFERENCES {
        return Err(Error::InvalidArgument(format!(
            "at most {MAX_REFERENCES} references per video"
        )));
    }
    if cfg.annotations_per_item == 0 || cfg.annotations_per_item > cfg.n_annotators {
        return Err(Error::InvalidArgument(format!(
            "annotations per item must be in 1..={}",
            cfg.n_annotators
        )));
    }
    if cfg.bad_annotators > cfg.n_annotators {
        return Err(Error::InvalidArgument(
            "more bad annotators than annotators".into(),
        ));
    }
    if !cfg.quality_spread.is_finite() || cfg.quality_spread < 0.0 || cfg.noise_sd.is_nan() || cfg.noise_sd < 0.0 {
        return Err(Error::InvalidArgument(
            "quality spread and noise must be finite and non-negative".into(),
        ));
    }

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let noise = Normal::new(0.0, cfg.noise_sd).expect("validated sd");
    let bias_dist = Normal::new(0.0, 5.0).expect("constant sd");

    let video_ids: Vec<String> = (0..cfg.n_videos).map(|i| format!("v{:04}", i + 1)).collect();
    let years: Vec<String> = (0..cfg.n_videos)
        .map(|i| (2016 + i % cfg.n_years).to_string())
        .collect();
    let system_ids: Vec<String> = (0..cfg.n_systems).map(|t| format!("sys{:02}", t + 1)).collect();
    let annotator_ids: Vec<String> = (0..cfg.n_annotators)
        .map(|a| format!("w{:02}", a + 1))
        .collect();
    let first_bad = cfg.n_annotators - cfg.bad_annotators;
    let biases: Vec<f64> = annotator_ids.iter().map(|_| bias_dist.sample(&mut rng)).collect();

    let mut references = Vec::new();
    let mut captions = Vec::new();
    let mut qualities = Vec::new();
    for (i, vid) in video_ids.iter().enumerate() {
        let scene = Scene::random(&mut rng);
        let mut templates: Vec<usize> = (0..TEMPLATES).collect();
        templates.shuffle(&mut rng);
        for (j, &tpl) in templates.iter().take(cfg.n_refs).enumerate() {
            let mut described = scene;
            // annotators of references disagree on the adjective now and then
            if rng.random_bool(0.3) {
                described.adjective = rng.random_range(0..ADJECTIVES.len());
            }
            references.push(ReferenceRecord {
                video_id: vid.clone(),
                ref_id: format!("r{}", j + 1),
                year: years[i].clone(),
                text: described.render(tpl),
            });
        }
        for (t, sid) in system_ids.iter().enumerate() {
            let q = system_quality(t, cfg.n_systems, cfg.quality_spread);
            let (adjective, a_ok) = perturb(scene.adjective, ADJECTIVES.len(), q, &mut rng);
            let (subject, s_ok) = perturb(scene.subject, SUBJECTS.len(), q, &mut rng);
            let (action, v_ok) = perturb(scene.action, ACTIONS.len(), q, &mut rng);
            let (object, o_ok) = perturb(scene.object, OBJECTS.len(), q, &mut rng);
            let (place, p_ok) = perturb(scene.place, PLACES.len(), q, &mut rng);
            let said = Scene {
                adjective,
                subject,
                action,
                object,
                place,
            };
            let correct = [a_ok, s_ok, v_ok, o_ok, p_ok].iter().filter(|&&b| b).count();
            qualities.push(correct as f64 / 5.0);
            captions.push(CaptionRecord {
                video_id: vid.clone(),
                system_id: sid.clone(),
                year: years[i].clone(),
                caption: said.render(rng.random_range(0..TEMPLATES)),
            });
        }
    }

    let mut annotations = Vec::new();
    for (cap, &quality) in captions.iter().zip(&qualities) {
        let mut chosen = index::sample(&mut rng, cfg.n_annotators, cfg.annotations_per_item).into_vec();
        chosen.sort_unstable();
        for a in chosen {
            let raw = if a >= first_bad {
                rng.random_range(0..=100) as f64
            } else {
                raw_from_quality(quality, biases[a], noise.sample(&mut rng))
            };
            annotations.push(RawAnnotation {
                video_id: cap.video_id.clone(),
                system_id: cap.system_id.clone(),
                annotator_id: annotator_ids[a].clone(),
                raw_score: raw,
                control: ControlKind::System,
            });
        }
    }
    for (a, annotator) in annotator_ids.iter().enumerate() {
        let bad = a >= first_bad;
        for _ in 0..cfg.controls_per_annotator {
            for (kind, system_id, quality) in [
                (ControlKind::Human, HUMAN_CONTROL_SYSTEM, 1.0),
                (ControlKind::Degraded, DEGRADED_CONTROL_SYSTEM, 0.2),
            ] {
                let video = video_ids.choose(&mut rng).expect("n_videos >= 1");
                let raw = match (bad, kind) {
                    (true, ControlKind::Human) => rng.random_range(0..=40) as f64,
                    (true, _) => rng.random_range(60..=100) as f64,
                    (false, _) => raw_from_quality(quality, biases[a], noise.sample(&mut rng)),
                };
                annotations.push(RawAnnotation {
                    video_id: video.clone(),
                    system_id: system_id.to_string(),
                    annotator_id: annotator.clone(),
                    raw_score: raw,
                    control: kind,
                });
            }
        }
    }

    let corpus = Corpus::from_records(&captions, &references, DatasetTag::Synthetic)?;
    Ok((corpus, annotations))
}
