//! Closed-form (ridge) least squares with an unpenalized intercept.

use nalgebra::{DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Smallest eigenvalue of the normal matrix, relative to the largest, that
/// is still treated as non-singular.
const CONDITION_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearFit {
    pub weights: Vec<f64>,
    pub bias: f64,
}

impl LinearFit {
    pub fn predict(&self, x: &[f64]) -> f64 {
        self.bias + self.weights.iter().zip(x).map(|(w, v)| w * v).sum::<f64>()
    }
}

/// Centered design, centered targets and the column means.
pub(crate) struct Centered {
    pub x: DMatrix<f64>,
    pub y: DVector<f64>,
    pub x_mean: DVector<f64>,
    pub y_mean: f64,
}

pub(crate) fn center(rows: &[Vec<f64>], targets: &[f64]) -> Result<Centered> {
    if rows.len() != targets.len() {
        return Err(Error::LengthMismatch {
            left: rows.len(),
            right: targets.len(),
        });
    }
    let n = rows.len();
    let p = rows.first().map_or(0, Vec::len);
    if let Some(bad) = rows.iter().find(|r| r.len() != p) {
        return Err(Error::LengthMismatch {
            left: p,
            right: bad.len(),
        });
    }
    if rows.iter().flatten().chain(targets).any(|v| !v.is_finite()) {
        return Err(Error::InvalidArgument("non-finite value in regression data".into()));
    }
    let x = DMatrix::from_fn(n, p, |i, j| rows[i][j]);
    let y = DVector::from_column_slice(targets);
    let x_mean = DVector::from_fn(p, |j, _| x.column(j).mean());
    let y_mean = y.mean();
    let mut xc = x;
    for j in 0..p {
        let m = x_mean[j];
        xc.column_mut(j).add_scalar_mut(-m);
    }
    let yc = y.add_scalar(-y_mean);
    Ok(Centered {
        x: xc,
        y: yc,
        x_mean,
        y_mean,
    })
}

/// Normal matrix `XcᵀXc / n + λI` and right-hand side `Xcᵀyc / n`.
pub(crate) fn normal_equations(c: &Centered, lambda: f64) -> (DMatrix<f64>, DVector<f64>) {
    let n = c.x.nrows() as f64;
    let p = c.x.ncols();
    let a = c.x.transpose() * &c.x / n + DMatrix::identity(p, p) * lambda;
    let b = c.x.transpose() * &c.y / n;
    (a, b)
}

/// Minimizes `mean((y - Xw - b)²) + λ‖w‖²`.
pub fn fit_ridge(rows: &[Vec<f64>], targets: &[f64], lambda: f64) -> Result<LinearFit> {
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::InvalidArgument(format!("ridge lambda {lambda} must be >= 0")));
    }
    let c = center(rows, targets)?;
    let p = c.x.ncols();
    if rows.len() < p + 1 {
        return Err(Error::TooFewSamples {
            what: "training rows".into(),
            needed: p + 1,
            got: rows.len(),
        });
    }
    let (a, b) = normal_equations(&c, lambda);
    let eig = SymmetricEigen::new(a.clone());
    let max = eig.eigenvalues.max();
    let min = eig.eigenvalues.min();
    if p > 0 && !(max > 0.0 && min > CONDITION_FLOOR * max) {
        return Err(Error::Singular(
            "normal matrix is singular (collinear or constant columns)".into(),
        ));
    }
    let w = if p == 0 {
        DVector::zeros(0)
    } else {
        a.cholesky()
            .ok_or_else(|| Error::Singular("normal matrix is not positive definite".into()))?
            .solve(&b)
    };
    let bias = c.y_mean - w.dot(&c.x_mean);
    Ok(LinearFit {
        weights: w.iter().copied().collect(),
        bias,
    })
}

/// Mean squared error of `fit` on the data plus `λ‖w‖²`.
pub fn ridge_objective(fit: &LinearFit, rows: &[Vec<f64>], targets: &[f64], lambda: f64) -> f64 {
    let mse = rows
        .iter()
        .zip(targets)
        .map(|(x, y)| (y - fit.predict(x)).powi(2))
        .sum::<f64>()
        / rows.len().max(1) as f64;
    mse + lambda * fit.weights.iter().map(|w| w * w).sum::<f64>()
}

/// Largest absolute entry of the normal-equation residual of `fit`.
pub fn normal_equation_residual(fit: &LinearFit, rows: &[Vec<f64>], targets: &[f64], lambda: f64) -> Result<f64> {
    let c = center(rows, targets)?;
    let (a, b) = normal_equations(&c, lambda);
    let w = DVector::from_column_slice(&fit.weights);
    Ok((a * w - b).amax())
}
