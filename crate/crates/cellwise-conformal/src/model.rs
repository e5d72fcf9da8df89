//! Prediction models fitted on the training split: ordinary least squares
//! for the absolute-residual score, a quantile-regression pair for the CQR
//! score, and the l1-sensitivity witness used by the adversarial-width
//! analysis.

use crate::data::LabeledDataset;
use crate::error::{Error, Result};
use crate::linalg::ridge_least_squares;
use crate::stats::sample_sd;

/// Affine predictor x -> beta'x + intercept.
#[derive(Debug, Clone, PartialEq)]
pub struct LinearModel {
    pub beta: Vec<f64>,
    pub intercept: f64,
}

/// Lower/upper quantile regression models at levels alpha/2 and 1-alpha/2.
#[derive(Debug, Clone, PartialEq)]
pub struct QuantilePair {
    pub lower: LinearModel,
    pub upper: LinearModel,
    pub lower_level: f64,
    pub upper_level: f64,
}

/// Least squares via ridge-jittered normal equations (relative jitter
/// 1e-8), solved by Cholesky. The jitter guarantees solvability even for
/// rank-deficient designs.
pub fn fit_ols(train: &LabeledDataset) -> Result<LinearModel> {
    let d = train.dim();
    if train.len() < d + 1 {
        return Err(Error::TooFewRows {
            what: "least squares rows",
            need: d + 1,
            got: train.len(),
        });
    }
    let rows = (0..train.len()).map(|i| train.features.row(i));
    let coefs = ridge_least_squares(rows, &train.labels, true, 1e-8)?;
    Ok(LinearModel {
        beta: coefs[..d].to_vec(),
        intercept: coefs[d],
    })
}

/// Evaluate beta'x + intercept.
pub fn predict(m: &LinearModel, x: &[f64]) -> Result<f64> {
    if x.len() != m.beta.len() {
        return Err(Error::DimensionMismatch {
            expected: m.beta.len(),
            got: x.len(),
        });
    }
    Ok(m.beta.iter().zip(x).map(|(b, v)| b * v).sum::<f64>() + m.intercept)
}

/// The l1-sensitivity of an affine predictor: sum of |beta_j|. Changing
/// the input by at most 1 in l1 norm moves the prediction by at most this.
pub fn l1_sensitivity(m: &LinearModel) -> f64 {
    m.beta.iter().map(|b| b.abs()).sum()
}

/// Mean pinball loss of `theta` (d slopes then intercept) at level `q`.
fn pinball_loss(train: &LabeledDataset, theta: &[f64], q: f64) -> f64 {
    let d = train.dim();
    let n = train.len();
    let mut total = 0.0;
    for i in 0..n {
        let row = train.features.row(i);
        let pred: f64 = row.iter().zip(&theta[..d]).map(|(x, b)| x * b).sum::<f64>() + theta[d];
        let u = train.labels[i] - pred;
        total += u * (q - f64::from(u < 0.0));
    }
    total / n as f64
}

/// Fit one quantile regression at level `q` by deterministic subgradient
/// descent: initialize at the least-squares solution, take 2000 steps of
/// size sd(y)/sqrt(t), and keep the iterate with the smallest pinball loss.
fn fit_quantile_level(train: &LabeledDataset, q: f64, init: &LinearModel) -> LinearModel {
    let d = train.dim();
    let n = train.len();
    let mut theta: Vec<f64> = init.beta.iter().copied().chain([init.intercept]).collect();
    let scale = sample_sd(&train.labels).unwrap_or(0.0);
    let mut best = theta.clone();
    let mut best_loss = pinball_loss(train, &theta, q);
    let mut grad = vec![0.0; d + 1];
    for t in 1..=2000usize {
        grad.iter_mut().for_each(|g| *g = 0.0);
        for i in 0..n {
            let row = train.features.row(i);
            let pred: f64 =
                row.iter().zip(&theta[..d]).map(|(x, b)| x * b).sum::<f64>() + theta[d];
            // subgradient of the pinball loss at this point
            let w = q - f64::from(train.labels[i] < pred);
            for (g, x) in grad[..d].iter_mut().zip(row) {
                *g += x * w;
            }
            grad[d] += w;
        }
        let step = scale / (t as f64).sqrt() / n as f64;
        for (th, g) in theta.iter_mut().zip(&grad) {
            *th += step * g;
        }
        let loss = pinball_loss(train, &theta, q);
        if loss < best_loss {
            best_loss = loss;
            best.copy_from_slice(&theta);
        }
    }
    LinearModel {
        beta: best[..d].to_vec(),
        intercept: best[d],
    }
}

/// Fit the lower/upper quantile pair at levels alpha/2 and 1-alpha/2.
pub fn fit_quantile_pair(train: &LabeledDataset, alpha: f64) -> Result<QuantilePair> {
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(Error::InvalidParam {
            name: "alpha",
            value: alpha,
            range: "(0, 1)",
        });
    }
    let init = fit_ols(train)?;
    let lower_level = alpha / 2.0;
    let upper_level = 1.0 - alpha / 2.0;
    Ok(QuantilePair {
        lower: fit_quantile_level(train, lower_level, &init),
        upper: fit_quantile_level(train, upper_level, &init),
        lower_level,
        upper_level,
    })
}
