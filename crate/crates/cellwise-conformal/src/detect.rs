//! Cellwise outlier detectors fitted on the training split.
//!
//! Two detectors are provided. The Z-score detector is *isolated*: the
//! score of coordinate j reads only x_j, which is the structural property
//! the detect-then-impute theory leans on. DDC-lite is *non-isolated*: it
//! predicts each cell from correlated columns and flags large standardized
//! residuals, so a cell can be flagged (or spared) because of its
//! neighbors.

use crate::data::{CellMask, FeatureMatrix};
use crate::error::{Error, Result};
use crate::stats::{chi2_quantile, mad, mean, median, sample_sd, wrap, MAD_CONSISTENCY};

/// Threshold used when a plain |z| > 3 rule is wanted.
pub const DEFAULT_Z_THRESHOLD: f64 = 3.0;

/// Correlation magnitude above which two columns are treated as connected
/// in DDC-lite.
pub const DEFAULT_CORR_CUTOFF: f64 = 0.5;

/// Which detection rule a [`FittedDetector`] applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DetectorKind {
    ZScore,
    Ddc,
}

/// Immutable fitted detector: per-coordinate location/scale, per-coordinate
/// thresholds, and (for DDC-lite) each column's connected predictors.
#[derive(Debug, Clone)]
pub struct FittedDetector {
    kind: DetectorKind,
    loc: Vec<f64>,
    scale: Vec<f64>,
    thresholds: Vec<f64>,
    /// Per column: (predictor column, slope) for every connected column.
    neighbors: Vec<Vec<(usize, f64)>>,
    /// Per column: robust scale of the training residuals u_j - pred_j.
    resid_scale: Vec<f64>,
}

/// Result of running a detector on one feature vector.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DetectionOutput {
    pub mask: CellMask,
}

impl FittedDetector {
    pub fn kind(&self) -> DetectorKind {
        self.kind
    }

    /// Feature dimension the detector was fitted on.
    pub fn dim(&self) -> usize {
        self.loc.len()
    }

    /// Per-coordinate thresholds tau_j.
    pub fn thresholds(&self) -> &[f64] {
        &self.thresholds
    }
}

/// Fit the isolated Z-score detector: per-column sample mean and sd, with
/// tau_j = z_threshold for every coordinate.
pub fn fit_zscore(train: &FeatureMatrix, z_threshold: f64) -> Result<FittedDetector> {
    if train.rows() < 2 {
        return Err(Error::TooFewRows {
            what: "z-score detector",
            need: 2,
            got: train.rows(),
        });
    }
    if !(z_threshold > 0.0) {
        return Err(Error::InvalidParam {
            name: "z_threshold",
            value: z_threshold,
            range: "(0, inf)",
        });
    }
    let d = train.cols();
    let mut loc = Vec::with_capacity(d);
    let mut scale = Vec::with_capacity(d);
    for j in 0..d {
        let col = train.col(j);
        let sd = sample_sd(&col)?;
        if sd == 0.0 {
            return Err(Error::ZeroVarianceColumn { col: j });
        }
        loc.push(mean(&col)?);
        scale.push(sd);
    }
    Ok(FittedDetector {
        kind: DetectorKind::ZScore,
        loc,
        scale,
        thresholds: vec![z_threshold; d],
        neighbors: vec![Vec::new(); d],
        resid_scale: vec![1.0; d],
    })
}

/// Fit DDC-lite with the default connection cutoff of 0.5.
pub fn fit_ddc(train: &FeatureMatrix, chi2_prob: f64) -> Result<FittedDetector> {
    fit_ddc_with_cutoff(train, chi2_prob, DEFAULT_CORR_CUTOFF)
}

/// Fit DDC-lite: robust per-column standardization (median and 1.4826*MAD),
/// robust pairwise correlations by the standardized-product median
/// estimator, and per-column predictions from columns whose correlation
/// magnitude exceeds `corr_cutoff`. The per-coordinate threshold is
/// sqrt(chi2 quantile at `chi2_prob`, 1 dof), identical across columns.
pub fn fit_ddc_with_cutoff(
    train: &FeatureMatrix,
    chi2_prob: f64,
    corr_cutoff: f64,
) -> Result<FittedDetector> {
    if train.rows() < 10 {
        return Err(Error::TooFewRows {
            what: "ddc detector rows",
            need: 10,
            got: train.rows(),
        });
    }
    if train.cols() < 2 {
        return Err(Error::TooFewRows {
            what: "ddc detector columns",
            need: 2,
            got: train.cols(),
        });
    }
    if !(0.0 < chi2_prob && chi2_prob < 1.0) {
        return Err(Error::InvalidParam {
            name: "chi2_prob",
            value: chi2_prob,
            range: "(0, 1)",
        });
    }
    if !(0.0 < corr_cutoff && corr_cutoff < 1.0) {
        return Err(Error::InvalidParam {
            name: "corr_cutoff",
            value: corr_cutoff,
            range: "(0, 1)",
        });
    }
    let n = train.rows();
    let d = train.cols();
    let mut loc = Vec::with_capacity(d);
    let mut scale = Vec::with_capacity(d);
    for j in 0..d {
        let col = train.col(j);
        let m = median(&col)?;
        let dev = mad(&col)?;
        if dev == 0.0 {
            return Err(Error::ZeroMadColumn { col: j });
        }
        loc.push(m);
        scale.push(MAD_CONSISTENCY * dev);
    }

    // standardized training matrix, column-major for pairwise work
    let u: Vec<Vec<f64>> = (0..d)
        .map(|j| {
            (0..n)
                .map(|i| (train.get(i, j) - loc[j]) / scale[j])
                .collect()
        })
        .collect();

    // robust correlation of standardized columns: for standard normal
    // pairs the median of the product has expectation corr/2.198 at
    // corr = 1, so scaling by 1.4826^2 = 2.198 makes identical columns
    // score exactly 1 after clamping.
    let corr = |a: &[f64], b: &[f64]| -> Result<f64> {
        let prods: Vec<f64> = a.iter().zip(b).map(|(x, y)| x * y).collect();
        let c = MAD_CONSISTENCY * MAD_CONSISTENCY * median(&prods)?;
        Ok(c.clamp(-1.0, 1.0))
    };

    let mut neighbors: Vec<Vec<(usize, f64)>> = vec![Vec::new(); d];
    for j in 0..d {
        for k in (j + 1)..d {
            let c = corr(&u[j], &u[k])?;
            if c.abs() > corr_cutoff {
                neighbors[j].push((k, c));
                neighbors[k].push((j, c));
            }
        }
    }

    // robust scale of the training residuals per connected column; floored
    // at 1 so exactly collinear pairs (zero residual spread) do not turn
    // every future residual into a detection
    let predict_cell = |j: usize, row_u: &dyn Fn(usize) -> f64| -> f64 {
        let mut num = 0.0;
        let mut den = 0.0;
        for &(k, c) in &neighbors[j] {
            num += c.abs() * (c * wrap(row_u(k)));
            den += c.abs();
        }
        num / den
    };
    let mut resid_scale = vec![1.0; d];
    for j in 0..d {
        if neighbors[j].is_empty() {
            continue;
        }
        let residuals: Vec<f64> = (0..n)
            .map(|i| u[j][i] - predict_cell(j, &|k| u[k][i]))
            .collect();
        resid_scale[j] = (MAD_CONSISTENCY * mad(&residuals)?).max(1.0);
    }

    let tau = chi2_quantile(chi2_prob, 1.0)?.sqrt();
    Ok(FittedDetector {
        kind: DetectorKind::Ddc,
        loc,
        scale,
        thresholds: vec![tau; d],
        neighbors,
        resid_scale,
    })
}

/// Per-coordinate detection scores s_j(x) for one feature vector.
pub fn scores(det: &FittedDetector, x: &[f64]) -> Result<Vec<f64>> {
    let d = det.loc.len();
    if x.len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: x.len(),
        });
    }
    if x.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { what: "detector input" });
    }
    match det.kind {
        DetectorKind::ZScore => Ok((0..d)
            .map(|j| (x[j] - det.loc[j]).abs() / det.scale[j])
            .collect()),
        DetectorKind::Ddc => {
            let u: Vec<f64> = (0..d).map(|j| (x[j] - det.loc[j]) / det.scale[j]).collect();
            Ok((0..d)
                .map(|j| {
                    if det.neighbors[j].is_empty() {
                        u[j].abs()
                    } else {
                        let mut num = 0.0;
                        let mut den = 0.0;
                        for &(k, c) in &det.neighbors[j] {
                            num += c.abs() * (c * wrap(u[k]));
                            den += c.abs();
                        }
                        (u[j] - num / den).abs() / det.resid_scale[j]
                    }
                })
                .collect())
        }
    }
}

/// Run the detector: the mask is {j : s_j(x) > tau_j}.
pub fn detect(det: &FittedDetector, x: &[f64]) -> Result<DetectionOutput> {
    let s = scores(det, x)?;
    let mask = s
        .iter()
        .enumerate()
        .filter(|(j, &v)| v > det.thresholds[*j])
        .map(|(j, _)| j)
        .collect();
    Ok(DetectionOutput { mask })
}
