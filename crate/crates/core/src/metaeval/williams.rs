//! Williams test for two dependent correlations sharing one variable.
//!
//! Variable 3 is the human score; 1 and 2 are the two metrics. The one-sided
//! p-value tests whether metric 1 correlates with humans better than
//! metric 2.

use std::fmt::Write as _;

use rayon::prelude::*;
use serde::Serialize;
use statrs::distribution::{ContinuousCDF, StudentsT};

use super::{pearson, AlignedSamples};
use crate::error::{Error, Result};

/// How far below zero the determinant term may fall through rounding.
const K_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WilliamsResult {
    pub t: f64,
    pub p: f64,
}

/// Williams' t and its one-sided p-value on `n - 3` degrees of freedom.
pub fn williams_test(r12: f64, r13: f64, r23: f64, n: usize) -> Result<WilliamsResult> {
    if n < 4 {
        return Err(Error::TooFewSamples {
            what: "Williams test samples".into(),
            needed: 4,
            got: n,
        });
    }
    for r in [r12, r13, r23] {
        if r.is_nan() || r.abs() > 1.0 {
            return Err(Error::InvalidArgument(format!("correlation {r} outside [-1, 1]")));
        }
    }
    if r13 == r23 {
        return Ok(WilliamsResult { t: 0.0, p: 0.5 });
    }
    // Symmetric in r13 and r23 so that swapping them negates t exactly.
    let sq = r13 * r13 + r23 * r23;
    let mut k = 1.0 - r12 * r12 - sq + 2.0 * r12 * (r13 * r23);
    if k < 0.0 {
        if k < -K_TOLERANCE {
            return Err(Error::InvalidArgument(format!(
                "inconsistent correlations (r12={r12}, r13={r13}, r23={r23})"
            )));
        }
        k = 0.0;
    }
    let nf = n as f64;
    let denom = (2.0 * k * (nf - 1.0) / (nf - 3.0)
        + ((r13 + r23) * (r13 + r23) / 4.0) * (1.0 - r12).powi(3))
    .sqrt();
    let t = (r13 - r23) * ((nf - 1.0) * (1.0 + r12)).sqrt() / denom;
    if !t.is_finite() {
        return Err(Error::InvalidArgument(format!(
            "Williams statistic undefined (r12={r12}, r13={r13}, r23={r23})"
        )));
    }
    let dist = StudentsT::new(0.0, 1.0, nf - 3.0).expect("df > 0");
    let upper = dist.sf(t.abs());
    let p = if t >= 0.0 { upper } else { 1.0 - upper };
    Ok(WilliamsResult { t, p })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WilliamsCell {
    pub row: String,
    pub col: String,
    pub t: f64,
    pub p: f64,
    pub n: usize,
}

/// Pairwise Williams tests; `cells[i][j]` tests row `i` against column `j`,
/// the diagonal is `None`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct WilliamsMatrix {
    pub metrics: Vec<String>,
    pub cells: Vec<Vec<Option<WilliamsCell>>>,
}

impl WilliamsMatrix {
    pub fn cell(&self, row: &str, col: &str) -> Option<&WilliamsCell> {
        let i = self.metrics.iter().position(|m| m == row)?;
        let j = self.metrics.iter().position(|m| m == col)?;
        self.cells[i][j].as_ref()
    }

    /// Grid of p-values, rows tested against columns; blank diagonal.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("row\\col");
        for m in &self.metrics {
            write!(out, "\t{m}").unwrap();
        }
        out.push('\n');
        for (m, row) in self.metrics.iter().zip(&self.cells) {
            out.push_str(m);
            for c in row {
                match c {
                    Some(c) => write!(out, "\t{:.6}", c.p).unwrap(),
                    None => out.push('\t'),
                }
            }
            out.push('\n');
        }
        out
    }
}

/// Tests every ordered metric pair on absolute correlations with humans.
/// The inter-metric correlation is sign-adjusted so that it refers to the
/// same orientation as the absolute values.
pub fn williams_matrix(samples: &AlignedSamples) -> Result<WilliamsMatrix> {
    let k = samples.metrics.len();
    if k < 2 {
        return Err(Error::InvalidArgument(
            "Williams matrix needs at least two metrics".into(),
        ));
    }
    let n = samples.human.len();
    for (name, v) in &samples.metrics {
        if v.len() != n {
            return Err(Error::InvalidArgument(format!(
                "{name} has {} samples, human scores have {n}",
                v.len()
            )));
        }
    }
    let with_human: Vec<f64> = samples
        .metrics
        .iter()
        .map(|(_, v)| pearson(v, &samples.human))
        .collect::<Result<_>>()?;
    let pairs: Vec<(usize, usize)> = (0..k)
        .flat_map(|i| (0..k).filter(move |&j| j != i).map(move |j| (i, j)))
        .collect();
    let results: Vec<((usize, usize), WilliamsCell)> = pairs
        .par_iter()
        .map(|&(i, j)| {
            let (a, b) = (&samples.metrics[i], &samples.metrics[j]);
            let (ra, rb) = (with_human[i], with_human[j]);
            let r12 = ra.signum() * rb.signum() * pearson(&a.1, &b.1)?;
            let w = williams_test(r12, ra.abs(), rb.abs(), n)?;
            Ok((
                (i, j),
                WilliamsCell {
                    row: a.0.clone(),
                    col: b.0.clone(),
                    t: w.t,
                    p: w.p,
                    n,
                },
            ))
        })
        .collect::<Result<_>>()?;
    let mut cells = vec![vec![None; k]; k];
    for ((i, j), c) in results {
        cells[i][j] = Some(c);
    }
    Ok(WilliamsMatrix {
        metrics: samples.metrics.iter().map(|(m, _)| m.clone()).collect(),
        cells,
    })
}
