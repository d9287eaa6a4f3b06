//! Linear fusion of several metrics into one score.
//!
//! Each year's captions are split 80/20 with a seeded shuffle, the training
//! parts are pooled, every metric is min-max normalized on the training
//! rows and an unregularized least-squares fit maps the normalized metrics
//! to the human scores.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::corpus::io::{read, write};
use crate::corpus::{AssessmentMatrix, CaptionKey, Corpus};
use crate::error::{Error, Result};
use crate::linalg::fit_ridge;
use crate::metaeval::pearson;
use crate::metrics::{ScoreKey, ScoreMatrix};

pub const FUSION_METRIC: &str = "fusion";
pub const TRAIN_FRACTION: f64 = 0.8;

/// Published regression coefficients of a five-metric fusion, kept to
/// exercise report formatting.
pub const REFERENCE_COEFFICIENTS: [(&str, f64); 5] = [
    ("bertha", 0.0525),
    ("bleu4", -0.1373),
    ("cider", 0.0315),
    ("meteor", 0.2810),
    ("rouge", -0.0779),
];

/// One caption: its metric values in `metric_order` and its human score.
#[derive(Debug, Clone, PartialEq)]
pub struct FusionRow {
    pub key: CaptionKey,
    pub year: String,
    pub values: Vec<f64>,
    pub target: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FusionData {
    pub metric_order: Vec<String>,
    pub rows: Vec<FusionRow>,
}

impl FusionData {
    /// Caption-level rows (reference means) for the captions every matrix
    /// and the human matrix cover.
    pub fn from_matrices(
        corpus: &Corpus,
        matrices: &[&ScoreMatrix],
        human: &AssessmentMatrix,
    ) -> Result<Self> {
        if matrices.len() < 2 {
            return Err(Error::InvalidArgument("fusion needs at least two metrics".into()));
        }
        let means: Vec<BTreeMap<CaptionKey, f64>> =
            matrices.iter().map(|m| m.caption_means()).collect();
        let rows = human
            .entries()
            .iter()
            .filter_map(|(key, &target)| {
                let values: Option<Vec<f64>> = means.iter().map(|m| m.get(key).copied()).collect();
                let year = corpus.year_of(&key.0)?;
                Some(FusionRow {
                    key: key.clone(),
                    year: year.to_string(),
                    values: values?,
                    target,
                })
            })
            .collect();
        Ok(FusionData {
            metric_order: matrices.iter().map(|m| m.metric().to_string()).collect(),
            rows,
        })
    }
}

/// Row indices of the training and test parts; every year contributes
/// `round(0.8 n)` training rows.
pub fn split_rows(data: &FusionData, seed: u64) -> (Vec<usize>, Vec<usize>) {
    let mut by_year: BTreeMap<&str, Vec<usize>> = BTreeMap::new();
    for (i, r) in data.rows.iter().enumerate() {
        by_year.entry(&r.year).or_default().push(i);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (mut train, mut test) = (Vec::new(), Vec::new());
    for (_, mut idx) in by_year {
        idx.shuffle(&mut rng);
        let cut = ((idx.len() as f64 * TRAIN_FRACTION).round() as usize).clamp(1, idx.len());
        train.extend_from_slice(&idx[..cut]);
        test.extend_from_slice(&idx[cut..]);
    }
    train.sort_unstable();
    test.sort_unstable();
    (train, test)
}

/// Range seen on the training rows.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MinMax {
    pub min: f64,
    pub max: f64,
}

impl MinMax {
    pub fn fit(values: impl Iterator<Item = f64>) -> Option<Self> {
        values.fold(None, |acc, v| match acc {
            None => Some(MinMax { min: v, max: v }),
            Some(m) => Some(MinMax { min: m.min.min(v), max: m.max.max(v) }),
        })
    }

    pub fn is_constant(&self) -> bool {
        self.max <= self.min
    }

    /// Maps into [0, 1]; the flag is set when `v` had to be clamped.
    pub fn apply(&self, v: f64) -> (f64, bool) {
        if self.is_constant() {
            return (0.0, v != self.min);
        }
        let x = (v - self.min) / (self.max - self.min);
        let c = x.clamp(0.0, 1.0);
        (c, c != x)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionModel {
    pub metric_order: Vec<String>,
    /// Weights on the normalized metrics.
    pub weights: Vec<f64>,
    pub bias: f64,
    pub normalization: Vec<MinMax>,
    pub split_seed: u64,
}

impl FusionModel {
    pub fn normalize(&self, values: &[f64]) -> (Vec<f64>, usize) {
        let mut clamped = 0;
        let out = values
            .iter()
            .zip(&self.normalization)
            .map(|(v, n)| {
                let (x, c) = n.apply(*v);
                clamped += usize::from(c);
                x
            })
            .collect();
        (out, clamped)
    }

    pub fn predict(&self, values: &[f64]) -> f64 {
        let (x, _) = self.normalize(values);
        self.bias + self.weights.iter().zip(&x).map(|(w, v)| w * v).sum::<f64>()
    }

    /// Weights and bias in the metrics' own units (valid inside the
    /// training range, where no clamping happens).
    pub fn raw_weights(&self) -> (Vec<f64>, f64) {
        let mut bias = self.bias;
        let weights = self
            .weights
            .iter()
            .zip(&self.normalization)
            .map(|(w, n)| {
                if n.is_constant() {
                    return 0.0;
                }
                let span = n.max - n.min;
                bias -= w * n.min / span;
                w / span
            })
            .collect();
        (weights, bias)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serializable") + "\n"
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let m: FusionModel = serde_json::from_str(text).map_err(|e| Error::Parse {
            file: "fusion model".into(),
            line: e.line(),
            message: e.to_string(),
        })?;
        let k = m.metric_order.len();
        if m.weights.len() != k || m.normalization.len() != k {
            return Err(Error::InvalidArgument(format!(
                "fusion model has {k} metrics but {} weights and {} ranges",
                m.weights.len(),
                m.normalization.len()
            )));
        }
        Ok(m)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        write(path, &self.to_json())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&read(path)?)
    }
}

/// Test-split correlation of one year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YearResult {
    pub year: String,
    pub n: usize,
    /// `None` when the year has fewer than three test rows or a constant
    /// side.
    pub rho: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FusionReport {
    pub train_rows: usize,
    pub test_rows: usize,
    pub train_rho: f64,
    /// Train-split ρ of each normalized metric on its own.
    pub metric_train_rho: Vec<(String, f64)>,
    pub test_rho: Option<f64>,
    pub per_year: Vec<YearResult>,
    /// Test values that fell outside their training range.
    pub clamped: usize,
}

impl FusionReport {
    pub fn to_tsv(&self) -> String {
        let fmt = |r: Option<f64>| r.map_or("NA".to_string(), |x| format!("{x:.4}"));
        let mut out = String::from("split\tn\trho\n");
        writeln!(out, "train\t{}\t{:.4}", self.train_rows, self.train_rho).unwrap();
        writeln!(out, "test\t{}\t{}", self.test_rows, fmt(self.test_rho)).unwrap();
        for y in &self.per_year {
            writeln!(out, "test_{}\t{}\t{}", y.year, y.n, fmt(y.rho)).unwrap();
        }
        for (m, r) in &self.metric_train_rho {
            writeln!(out, "train_{m}\t{}\t{r:.4}", self.train_rows).unwrap();
        }
        out
    }
}

/// Fits normalization and weights on `rows`.
pub fn fit_model(
    metric_order: &[String],
    rows: &[(&[f64], f64)],
    split_seed: u64,
) -> Result<FusionModel> {
    let k = metric_order.len();
    let mut normalization = Vec::with_capacity(k);
    for (j, name) in metric_order.iter().enumerate() {
        let mm = MinMax::fit(rows.iter().map(|(v, _)| v[j])).ok_or_else(|| Error::TooFewSamples {
            what: "fusion training rows".into(),
            needed: k + 1,
            got: 0,
        })?;
        if mm.is_constant() {
            return Err(Error::Singular(format!(
                "metric {name} is constant on the training rows; drop it from the fusion"
            )));
        }
        normalization.push(mm);
    }
    let x: Vec<Vec<f64>> = rows
        .iter()
        .map(|(v, _)| v.iter().zip(&normalization).map(|(x, n)| n.apply(*x).0).collect())
        .collect();
    let y: Vec<f64> = rows.iter().map(|(_, t)| *t).collect();
    let fit = fit_ridge(&x, &y, 0.0).map_err(|e| match e {
        Error::Singular(_) => Error::Singular(
            "fusion design matrix is singular; drop one of the collinear metrics".into(),
        ),
        other => other,
    })?;
    Ok(FusionModel {
        metric_order: metric_order.to_vec(),
        weights: fit.weights,
        bias: fit.bias,
        normalization,
        split_seed,
    })
}

fn rho_or_none(x: &[f64], y: &[f64]) -> Option<f64> {
    pearson(x, y).ok()
}

/// Splits, fits on the pooled training parts and evaluates on each year's
/// test part.
pub fn fit_fusion(data: &FusionData, split_seed: u64) -> Result<(FusionModel, FusionReport)> {
    if data.metric_order.len() < 2 {
        return Err(Error::InvalidArgument("fusion needs at least two metrics".into()));
    }
    let (train, test) = split_rows(data, split_seed);
    let rows: Vec<(&[f64], f64)> = train
        .iter()
        .map(|&i| (data.rows[i].values.as_slice(), data.rows[i].target))
        .collect();
    let model = fit_model(&data.metric_order, &rows, split_seed)?;

    let train_y: Vec<f64> = rows.iter().map(|(_, t)| *t).collect();
    let train_pred: Vec<f64> = rows.iter().map(|(v, _)| model.predict(v)).collect();
    let train_rho = pearson(&train_pred, &train_y)?;
    let metric_train_rho = data
        .metric_order
        .iter()
        .enumerate()
        .map(|(j, name)| {
            let col: Vec<f64> = rows
                .iter()
                .map(|(v, _)| model.normalization[j].apply(v[j]).0)
                .collect();
            Ok((name.clone(), pearson(&col, &train_y)?))
        })
        .collect::<Result<_>>()?;

    let mut clamped = 0;
    let mut by_year: BTreeMap<&str, (Vec<f64>, Vec<f64>)> = BTreeMap::new();
    for &i in &test {
        let r = &data.rows[i];
        clamped += model.normalize(&r.values).1;
        let e = by_year.entry(&r.year).or_default();
        e.0.push(model.predict(&r.values));
        e.1.push(r.target);
    }
    let (all_pred, all_y): (Vec<f64>, Vec<f64>) = test
        .iter()
        .map(|&i| (model.predict(&data.rows[i].values), data.rows[i].target))
        .unzip();
    let per_year = by_year
        .into_iter()
        .map(|(year, (p, y))| YearResult {
            year: year.to_string(),
            n: p.len(),
            rho: rho_or_none(&p, &y),
        })
        .collect();
    let report = FusionReport {
        train_rows: train.len(),
        test_rows: test.len(),
        train_rho,
        metric_train_rho,
        test_rho: rho_or_none(&all_pred, &all_y),
        per_year,
        clamped,
    };
    Ok((model, report))
}

/// Fused caption scores for every caption all model metrics cover, and the
/// number of clamped values.
pub fn apply_fusion(model: &FusionModel, matrices: &[&ScoreMatrix]) -> Result<(ScoreMatrix, usize)> {
    let columns: Vec<BTreeMap<CaptionKey, f64>> = model
        .metric_order
        .iter()
        .map(|name| {
            matrices
                .iter()
                .find(|m| m.metric() == name)
                .map(|m| m.caption_means())
                .ok_or_else(|| Error::MissingMetric(name.clone()))
        })
        .collect::<Result<_>>()?;
    let keys: Vec<&CaptionKey> = columns[0]
        .keys()
        .filter(|k| columns.iter().all(|c| c.contains_key(*k)))
        .collect();
    let fused: Vec<(f64, usize)> = keys
        .par_iter()
        .map(|k| {
            let values: Vec<f64> = columns.iter().map(|c| c[*k]).collect();
            (model.predict(&values), model.normalize(&values).1)
        })
        .collect();
    let mut out = ScoreMatrix::new(FUSION_METRIC);
    let mut clamped = 0;
    for (k, (x, c)) in keys.into_iter().zip(fused) {
        out.insert(ScoreKey::new(&k.0, None, &k.1), x);
        clamped += c;
    }
    Ok((out, clamped))
}

/// Two-column table of metric names and weights.
pub fn weights_table(pairs: &[(&str, f64)]) -> String {
    let width = pairs.iter().map(|(m, _)| m.len()).max().unwrap_or(0).max("metric".len());
    let mut out = format!("{:<width$}  weight\n", "metric");
    for (m, w) in pairs {
        writeln!(out, "{m:<width$}  {w:>7.4}").unwrap();
    }
    out
}

impl FusionModel {
    pub fn weights_table(&self) -> String {
        let mut pairs: Vec<(&str, f64)> = self
            .metric_order
            .iter()
            .map(String::as_str)
            .zip(self.weights.iter().copied())
            .collect();
        pairs.push(("bias", self.bias));
        weights_table(&pairs)
    }
}
