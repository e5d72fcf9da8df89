//! Imputation procedures I(x, O): given a feature vector and a mask of
//! suspect coordinates, fill the masked cells from the observed ones using
//! statistics fitted on the training split. Observed coordinates always
//! pass through untouched, and no imputer ever reads the masked entries'
//! input values — the fill depends on {x_l : l not in O} only.

use std::sync::atomic::{AtomicUsize, Ordering};

use crate::data::{CellMask, FeatureMatrix};
use crate::error::{Error, Result};
use crate::linalg::ridge_least_squares;
use crate::stats::mean;

/// Default neighbor count for the kNN imputer.
pub const DEFAULT_KNN_K: usize = 5;

/// Default number of chained-regression sweeps for the MICE-lite imputer.
pub const DEFAULT_MICE_SWEEPS: usize = 10;

/// Which fill rule an imputer applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ImputerKind {
    Mean,
    Knn,
    Mice,
}

/// Tuning knobs for [`fit_imputer`]; the defaults match the experiment
/// harness defaults.
#[derive(Debug, Clone, Copy)]
pub struct ImputerParams {
    pub knn_k: usize,
    pub mice_sweeps: usize,
}

impl Default for ImputerParams {
    fn default() -> Self {
        ImputerParams {
            knn_k: DEFAULT_KNN_K,
            mice_sweeps: DEFAULT_MICE_SWEEPS,
        }
    }
}

/// Immutable fitted imputer. The only interior state is a diagnostic
/// counter of full-mask calls that had to fall back to mean imputation.
#[derive(Debug)]
pub struct FittedImputer {
    kind: ImputerKind,
    /// Per-coordinate training means (used by every kind as the fallback).
    means: Vec<f64>,
    /// kNN: retained training matrix.
    train: Option<FeatureMatrix>,
    knn_k: usize,
    /// MICE: per-coordinate coefficients of column j on all other columns
    /// plus intercept (length d, intercept at position d-1 of the reduced
    /// design, i.e. coefs[j] has length d: d-1 slopes then the intercept).
    mice_coefs: Vec<Vec<f64>>,
    mice_sweeps: usize,
    full_mask_fallbacks: AtomicUsize,
}

impl Clone for FittedImputer {
    fn clone(&self) -> Self {
        FittedImputer {
            kind: self.kind,
            means: self.means.clone(),
            train: self.train.clone(),
            knn_k: self.knn_k,
            mice_coefs: self.mice_coefs.clone(),
            mice_sweeps: self.mice_sweeps,
            full_mask_fallbacks: AtomicUsize::new(self.full_mask_fallbacks.load(Ordering::Relaxed)),
        }
    }
}

impl FittedImputer {
    pub fn kind(&self) -> ImputerKind {
        self.kind
    }

    /// Feature dimension.
    pub fn dim(&self) -> usize {
        self.means.len()
    }

    /// How many impute calls arrived with every coordinate masked and fell
    /// back to mean imputation (only possible for kNN and MICE).
    pub fn fallback_count(&self) -> usize {
        self.full_mask_fallbacks.load(Ordering::Relaxed)
    }
}

/// Fit an imputer of the requested kind on the training features.
pub fn fit_imputer(
    kind: ImputerKind,
    train: &FeatureMatrix,
    params: &ImputerParams,
) -> Result<FittedImputer> {
    let d = train.cols();
    let means: Vec<f64> = (0..d).map(|j| mean(&train.col(j))).collect::<Result<_>>()?;
    let mut imp = FittedImputer {
        kind,
        means,
        train: None,
        knn_k: params.knn_k,
        mice_coefs: Vec::new(),
        mice_sweeps: params.mice_sweeps,
        full_mask_fallbacks: AtomicUsize::new(0),
    };
    match kind {
        ImputerKind::Mean => {}
        ImputerKind::Knn => {
            if params.knn_k == 0 || params.knn_k > train.rows() {
                return Err(Error::InvalidParam {
                    name: "knn_k",
                    value: params.knn_k as f64,
                    range: "1..=rows",
                });
            }
            imp.train = Some(train.clone());
        }
        ImputerKind::Mice => {
            if d < 2 {
                return Err(Error::TooFewRows {
                    what: "mice imputer columns",
                    need: 2,
                    got: d,
                });
            }
            // regress each column on all the others (with intercept),
            // ridge-regularized so collinear designs stay solvable
            let n = train.rows();
            for j in 0..d {
                let others: Vec<usize> = (0..d).filter(|&k| k != j).collect();
                let reduced: Vec<Vec<f64>> = (0..n)
                    .map(|i| others.iter().map(|&k| train.get(i, k)).collect())
                    .collect();
                let y = train.col(j);
                let coefs = ridge_least_squares(
                    reduced.iter().map(|r| r.as_slice()),
                    &y,
                    true,
                    1e-6,
                )?;
                imp.mice_coefs.push(coefs);
            }
        }
    }
    Ok(imp)
}

/// Fill the masked coordinates of `x`; observed coordinates pass through
/// bitwise. A fully masked input falls back to the training means for kNN
/// and MICE (counted via [`FittedImputer::fallback_count`]).
pub fn impute(imp: &FittedImputer, x: &[f64], mask: &CellMask) -> Result<Vec<f64>> {
    let d = imp.means.len();
    if x.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: x.len(),
        });
    }
    if mask.iter().any(|j| j >= d) {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: mask.iter().max().unwrap_or(0) + 1,
        });
    }
    if mask.is_empty() {
        return Ok(x.to_vec());
    }
    let full_mask = mask.len() == d;
    let effective_kind = if full_mask && imp.kind != ImputerKind::Mean {
        imp.full_mask_fallbacks.fetch_add(1, Ordering::Relaxed);
        ImputerKind::Mean
    } else {
        imp.kind
    };
    match effective_kind {
        ImputerKind::Mean => {
            let mut out = x.to_vec();
            for j in mask.iter() {
                out[j] = imp.means[j];
            }
            Ok(out)
        }
        ImputerKind::Knn => {
            let train = imp.train.as_ref().expect("knn imputer retains training data");
            let observed: Vec<usize> = (0..d).filter(|j| !mask.contains(*j)).collect();
            // scaled Euclidean distance over observed coordinates only
            let mut dists: Vec<(f64, usize)> = (0..train.rows())
                .map(|i| {
                    let row = train.row(i);
                    let ss: f64 = observed
                        .iter()
                        .map(|&j| (x[j] - row[j]) * (x[j] - row[j]))
                        .sum();
                    ((ss / observed.len() as f64).sqrt(), i)
                })
                .collect();
            dists.sort_by(|a, b| a.partial_cmp(b).unwrap());
            let k = imp.knn_k.min(dists.len());
            let mut out = x.to_vec();
            for j in mask.iter() {
                let fill: f64 = dists[..k]
                    .iter()
                    .map(|&(_, i)| train.get(i, j))
                    .sum::<f64>()
                    / k as f64;
                out[j] = fill;
            }
            Ok(out)
        }
        ImputerKind::Mice => {
            // start masked cells at the column means, then chained sweeps
            let mut cur = x.to_vec();
            for j in mask.iter() {
                cur[j] = imp.means[j];
            }
            for _ in 0..imp.mice_sweeps {
                for j in mask.iter() {
                    let coefs = &imp.mice_coefs[j];
                    let mut pred = coefs[d - 1]; // intercept
                    let mut slot = 0;
                    for k in 0..d {
                        if k == j {
                            continue;
                        }
                        pred += coefs[slot] * cur[k];
                        slot += 1;
                    }
                    cur[j] = pred;
                }
            }
            Ok(cur)
        }
    }
}
