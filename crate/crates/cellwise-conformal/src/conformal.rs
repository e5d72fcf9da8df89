//! Conformal interval constructors over a fitted detector/imputer/model
//! triple: plain split conformal (SCP), weighted conformal (WCP), the
//! oracle-masked baseline, naive detect-impute, oracle detect-impute (ODI),
//! the proxy detect-impute method (PDI), its Jackknife+ variant (JDI), and
//! the conservative union-mask variant (C-JDI). Every constructor exists in
//! an absolute-residual mode and a CQR mode, chosen by the context's score
//! kind.
//!
//! Notation used in the doc comments: x-tilde is the observed (possibly
//! contaminated) test feature vector, O-tilde = detect(x-tilde) its
//! detected mask, O-hat_i = detect(X_i) the detected mask of calibration
//! point i, and O* the true contamination mask (simulation only).

use crate::data::{CellMask, FeatureMatrix, LabeledDataset, PredictionInterval};
use crate::detect::{detect, FittedDetector};
use crate::error::{Error, Result};
use crate::impute::{impute, FittedImputer};
use crate::model::{predict, LinearModel, QuantilePair};
use crate::quantile::{quantile_hi, quantile_lo};

/// The fitted predictor a context carries: a point model for the
/// absolute-residual score or a quantile pair for the CQR score.
#[derive(Debug, Clone)]
pub enum ModelKind {
    Point(LinearModel),
    Quantile(QuantilePair),
}

/// Which nonconformity score the context computes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreKind {
    AbsResidual,
    Cqr,
}

/// Everything an interval constructor needs, assembled once: the fitted
/// model, detector, and imputer (all from the training split), the
/// calibration set, and the miscoverage level. Detection masks of the
/// calibration points are precomputed since every detect-impute
/// constructor reuses them.
#[derive(Debug, Clone)]
pub struct ConformalContext {
    model: ModelKind,
    detector: FittedDetector,
    imputer: FittedImputer,
    calib: LabeledDataset,
    alpha: f64,
    score_kind: ScoreKind,
    cal_masks: Vec<CellMask>,
}

impl ConformalContext {
    pub fn new(
        model: ModelKind,
        detector: FittedDetector,
        imputer: FittedImputer,
        calib: LabeledDataset,
        alpha: f64,
        score_kind: ScoreKind,
    ) -> Result<Self> {
        if !(0.0 < alpha && alpha < 1.0) {
            return Err(Error::InvalidParam {
                name: "alpha",
                value: alpha,
                range: "(0, 1)",
            });
        }
        if calib.is_empty() {
            return Err(Error::EmptyResiduals);
        }
        let d = calib.dim();
        match (&model, score_kind) {
            (ModelKind::Point(_), ScoreKind::AbsResidual) => {}
            (ModelKind::Quantile(_), ScoreKind::Cqr) => {}
            (ModelKind::Point(_), ScoreKind::Cqr) => {
                return Err(Error::ScoreKindMismatch {
                    fitted: "point model",
                    requested: "cqr",
                })
            }
            (ModelKind::Quantile(_), ScoreKind::AbsResidual) => {
                return Err(Error::ScoreKindMismatch {
                    fitted: "quantile-pair model",
                    requested: "abs_residual",
                })
            }
        }
        let model_dim = match &model {
            ModelKind::Point(m) => m.beta.len(),
            ModelKind::Quantile(p) => {
                if p.lower.beta.len() != p.upper.beta.len() {
                    return Err(Error::DimensionMismatch {
                        expected: p.lower.beta.len(),
                        got: p.upper.beta.len(),
                    });
                }
                p.lower.beta.len()
            }
        };
        for (what, got) in [
            ("model", model_dim),
            ("detector", detector.dim()),
            ("imputer", imputer.dim()),
        ] {
            if got != d {
                let _ = what;
                return Err(Error::DimensionMismatch { expected: d, got });
            }
        }
        let cal_masks = (0..calib.len())
            .map(|i| Ok(detect(&detector, calib.features.row(i))?.mask))
            .collect::<Result<Vec<_>>>()?;
        Ok(ConformalContext {
            model,
            detector,
            imputer,
            calib,
            alpha,
            score_kind,
            cal_masks,
        })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn score_kind(&self) -> ScoreKind {
        self.score_kind
    }

    pub fn calib(&self) -> &LabeledDataset {
        &self.calib
    }

    pub fn detector(&self) -> &FittedDetector {
        &self.detector
    }

    pub fn imputer(&self) -> &FittedImputer {
        &self.imputer
    }

    pub fn model(&self) -> &ModelKind {
        &self.model
    }

    /// Detected mask of each calibration point (precomputed at build time).
    pub fn detected_calibration_masks(&self) -> &[CellMask] {
        &self.cal_masks
    }

    /// Feature dimension.
    pub fn dim(&self) -> usize {
        self.calib.dim()
    }

    fn check_x(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "test features" });
        }
        Ok(())
    }
}

/// One test point: the observed features, plus the clean features, true
/// contamination mask, and true label when a simulation knows them.
#[derive(Debug, Clone, PartialEq)]
pub struct TestCase {
    pub x_clean: Option<Vec<f64>>,
    pub x_observed: Vec<f64>,
    pub true_mask: Option<CellMask>,
    pub y_true: Option<f64>,
}

impl TestCase {
    /// A test case carrying only what deployment would see.
    pub fn from_observed(x_observed: Vec<f64>) -> Self {
        TestCase {
            x_clean: None,
            x_observed,
            true_mask: None,
            y_true: None,
        }
    }

    /// Full simulation-side constructor; checks that the observed vector
    /// agrees with the clean one outside the true mask.
    pub fn new(
        x_clean: Option<Vec<f64>>,
        x_observed: Vec<f64>,
        true_mask: Option<CellMask>,
        y_true: Option<f64>,
    ) -> Result<Self> {
        if let Some(clean) = &x_clean {
            if clean.len() != x_observed.len() {
                return Err(Error::DimensionMismatch {
                    expected: clean.len(),
                    got: x_observed.len(),
                });
            }
            let empty = CellMask::empty();
            let mask = true_mask.as_ref().unwrap_or(&empty);
            for j in 0..clean.len() {
                if !mask.contains(j) && clean[j].to_bits() != x_observed[j].to_bits() {
                    return Err(Error::data(format!(
                        "observed features disagree with clean features at unmasked coordinate {j}"
                    )));
                }
            }
        }
        Ok(TestCase {
            x_clean,
            x_observed,
            true_mask,
            y_true,
        })
    }
}

/// Build an interval from possibly crossed endpoints: crossed endpoints
/// (possible for CQR extrapolation or Jackknife+ order statistics at large
/// alpha) collapse to their midpoint rather than violating lo <= hi.
fn interval_from(lo: f64, hi: f64) -> PredictionInterval {
    if lo > hi {
        let mid = 0.5 * (lo + hi);
        PredictionInterval::new(mid, mid)
    } else {
        PredictionInterval::new(lo, hi)
    }
}

/// Shared split-form core: mask calibration point i by `cal_mask(i)` and
/// the test point by `test_mask`, score, take the conformal quantile.
fn split_form(
    ctx: &ConformalContext,
    x_observed: &[f64],
    test_mask: &CellMask,
    cal_mask: impl Fn(usize) -> CellMask,
) -> Result<PredictionInterval> {
    ctx.check_x(x_observed)?;
    let n = ctx.calib.len();
    let xt = impute(&ctx.imputer, x_observed, test_mask)?;
    match &ctx.model {
        ModelKind::Point(m) => {
            let mut residuals = Vec::with_capacity(n);
            for i in 0..n {
                let xi = impute(&ctx.imputer, ctx.calib.features.row(i), &cal_mask(i))?;
                residuals.push((ctx.calib.labels[i] - predict(m, &xi)?).abs());
            }
            let hw = quantile_hi(&residuals, ctx.alpha)?;
            let center = predict(m, &xt)?;
            Ok(interval_from(center - hw, center + hw))
        }
        ModelKind::Quantile(pair) => {
            let mut scores = Vec::with_capacity(n);
            for i in 0..n {
                let xi = impute(&ctx.imputer, ctx.calib.features.row(i), &cal_mask(i))?;
                let y = ctx.calib.labels[i];
                scores.push((predict(&pair.lower, &xi)? - y).max(y - predict(&pair.upper, &xi)?));
            }
            let q = quantile_hi(&scores, ctx.alpha)?;
            Ok(interval_from(
                predict(&pair.lower, &xt)? - q,
                predict(&pair.upper, &xt)? + q,
            ))
        }
    }
}

/// Split conformal on the raw features: center at the model prediction of
/// the observed test point, half-width the conformal quantile of the raw
/// calibration residuals. No detection, no imputation.
pub fn scp_interval(ctx: &ConformalContext, x_observed: &[f64]) -> Result<PredictionInterval> {
    let empty = CellMask::empty();
    split_form(ctx, x_observed, &empty, |_| CellMask::empty())
}

/// Oracle-masked baseline: both the calibration features and the test
/// features are masked by the *true* contamination set O* and imputed.
/// Only available when the test case carries the oracle mask.
pub fn baseline_interval(ctx: &ConformalContext, test: &TestCase) -> Result<PredictionInterval> {
    let o_star = test.true_mask.as_ref().ok_or(Error::MissingOracleMask)?;
    split_form(ctx, &test.x_observed, o_star, |_| o_star.clone())
}

/// Naive detect-impute: detect on the test point only and mask *every*
/// feature vector (calibration and test) by that one detected set.
/// Undetected calibration-side contamination is the reason this
/// undercovers, which is exactly what the proxy method repairs.
pub fn naive_di_interval(ctx: &ConformalContext, x_observed: &[f64]) -> Result<PredictionInterval> {
    ctx.check_x(x_observed)?;
    let o_tilde = detect(&ctx.detector, x_observed)?.mask;
    split_form(ctx, x_observed, &o_tilde, |_| o_tilde.clone())
}

/// Oracle detect-impute: calibration point i is masked by
/// detect(X_i) union O* (the true mask), while the test point is masked by
/// its detected set. Requires the oracle mask; simulation only.
pub fn odi_interval(ctx: &ConformalContext, test: &TestCase) -> Result<PredictionInterval> {
    let o_star = test.true_mask.as_ref().ok_or(Error::MissingOracleMask)?;
    ctx.check_x(&test.x_observed)?;
    let o_tilde = detect(&ctx.detector, &test.x_observed)?.mask;
    split_form(ctx, &test.x_observed, &o_tilde, |i| {
        ctx.cal_masks[i].union(o_star)
    })
}

/// Proxy detect-impute: calibration point i is masked by
/// detect(X_i) union detect(x-tilde), the test point by detect(x-tilde);
/// the interval is the model prediction of the imputed test point plus or
/// minus the conformal quantile of the masked residuals.
pub fn pdi_interval(ctx: &ConformalContext, x_observed: &[f64]) -> Result<PredictionInterval> {
    ctx.check_x(x_observed)?;
    let o_tilde = detect(&ctx.detector, x_observed)?.mask;
    split_form(ctx, x_observed, &o_tilde, |i| {
        ctx.cal_masks[i].union(&o_tilde)
    })
}

/// The proxy method's calibration score vector (absolute residuals, or CQR
/// scores in CQR mode), exposed for diagnostics and for checking that the
/// Jackknife+ variant computes the identical quantities.
pub fn pdi_residuals(ctx: &ConformalContext, x_observed: &[f64]) -> Result<Vec<f64>> {
    ctx.check_x(x_observed)?;
    let o_tilde = detect(&ctx.detector, x_observed)?.mask;
    let n = ctx.calib.len();
    let mut out = Vec::with_capacity(n);
    for i in 0..n {
        let mask = ctx.cal_masks[i].union(&o_tilde);
        let xi = impute(&ctx.imputer, ctx.calib.features.row(i), &mask)?;
        let y = ctx.calib.labels[i];
        out.push(match &ctx.model {
            ModelKind::Point(m) => (y - predict(m, &xi)?).abs(),
            ModelKind::Quantile(p) => {
                (predict(&p.lower, &xi)? - y).max(y - predict(&p.upper, &xi)?)
            }
        });
    }
    Ok(out)
}

/// Per-calibration-point pieces of the Jackknife+ variant: the lo-score
/// and hi-score vectors whose conformal quantiles become the endpoints,
/// plus the shared residual vector.
fn jdi_scores(
    ctx: &ConformalContext,
    x_observed: &[f64],
) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>)> {
    ctx.check_x(x_observed)?;
    let o_tilde = detect(&ctx.detector, x_observed)?.mask;
    let n = ctx.calib.len();
    let mut lo_scores = Vec::with_capacity(n);
    let mut hi_scores = Vec::with_capacity(n);
    let mut residuals = Vec::with_capacity(n);
    for i in 0..n {
        let mask = ctx.cal_masks[i].union(&o_tilde);
        let xi = impute(&ctx.imputer, ctx.calib.features.row(i), &mask)?;
        let xt = impute(&ctx.imputer, x_observed, &mask)?;
        let y = ctx.calib.labels[i];
        match &ctx.model {
            ModelKind::Point(m) => {
                let r = (y - predict(m, &xi)?).abs();
                let c = predict(m, &xt)?;
                lo_scores.push(c - r);
                hi_scores.push(c + r);
                residuals.push(r);
            }
            ModelKind::Quantile(p) => {
                let s = (predict(&p.lower, &xi)? - y).max(y - predict(&p.upper, &xi)?);
                lo_scores.push(predict(&p.lower, &xt)? - s);
                hi_scores.push(predict(&p.upper, &xt)? + s);
                residuals.push(s);
            }
        }
    }
    Ok((lo_scores, hi_scores, residuals))
}

/// Jackknife+-style detect-impute: for each calibration point i the pair
/// mask M_i = detect(X_i) union detect(x-tilde) is applied to *both* X_i
/// and the test point, giving one center and one residual per i; the
/// endpoints are the lower/upper conformal quantiles of center -/+
/// residual.
pub fn jdi_interval(ctx: &ConformalContext, x_observed: &[f64]) -> Result<PredictionInterval> {
    let (lo_scores, hi_scores, _) = jdi_scores(ctx, x_observed)?;
    let lo = quantile_lo(&lo_scores, ctx.alpha)?;
    let hi = quantile_hi(&hi_scores, ctx.alpha)?;
    Ok(interval_from(lo, hi))
}

/// Conservative variant: one joint mask — the union of every calibration
/// point's detected set and the test point's — applied to all features,
/// then plain split conformal on the jointly masked data.
pub fn cjdi_interval(ctx: &ConformalContext, x_observed: &[f64]) -> Result<PredictionInterval> {
    ctx.check_x(x_observed)?;
    let o_tilde = detect(&ctx.detector, x_observed)?.mask;
    let mut joint = o_tilde;
    for m in &ctx.cal_masks {
        joint = joint.union(m);
    }
    split_form(ctx, x_observed, &joint, |_| joint.clone())
}

/// Logistic classifier on standardized features, used by WCP to turn
/// "calibration vs observed test batch" separability into covariate-shift
/// weights w(x) = p(x) / (1 - p(x)), clipped to [1e-6, 1e6].
#[derive(Debug, Clone)]
pub struct WeightModel {
    /// d slopes then an intercept, acting on standardized features.
    theta: Vec<f64>,
    means: Vec<f64>,
    scales: Vec<f64>,
}

impl WeightModel {
    /// The trivial model: probability 1/2 everywhere, weight exactly 1.
    pub fn uniform(d: usize) -> WeightModel {
        WeightModel {
            theta: vec![0.0; d + 1],
            means: vec![0.0; d],
            scales: vec![1.0; d],
        }
    }

    /// Feature dimension.
    pub fn dim(&self) -> usize {
        self.means.len()
    }

    /// Estimated probability that `x` comes from the test batch.
    pub fn probability(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: x.len(),
            });
        }
        let mut t = self.theta[self.dim()];
        for j in 0..self.dim() {
            t += self.theta[j] * (x[j] - self.means[j]) / self.scales[j];
        }
        Ok(1.0 / (1.0 + (-t).exp()))
    }

    /// Odds-ratio weight, clipped to [1e-6, 1e6].
    pub fn weight(&self, x: &[f64]) -> Result<f64> {
        let p = self.probability(x)?;
        Ok((p / (1.0 - p)).clamp(1e-6, 1e6))
    }
}

/// Fit the WCP weight classifier: class 0 = calibration features, class 1
/// = a batch of observed test features. Deterministic full-batch gradient
/// descent (500 steps, unit step) on the mean logistic loss over
/// standardized features.
pub fn fit_weight_model(
    calibration: &FeatureMatrix,
    test_batch: &FeatureMatrix,
) -> Result<WeightModel> {
    let d = calibration.cols();
    if test_batch.cols() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: test_batch.cols(),
        });
    }
    let n0 = calibration.rows();
    let n1 = test_batch.rows();
    let m = n0 + n1;
    let row = |i: usize| -> &[f64] {
        if i < n0 {
            calibration.row(i)
        } else {
            test_batch.row(i - n0)
        }
    };
    let mut means = vec![0.0; d];
    for i in 0..m {
        for (mj, v) in means.iter_mut().zip(row(i)) {
            *mj += v;
        }
    }
    means.iter_mut().for_each(|v| *v /= m as f64);
    let mut scales = vec![0.0; d];
    for i in 0..m {
        for j in 0..d {
            let c = row(i)[j] - means[j];
            scales[j] += c * c;
        }
    }
    for s in scales.iter_mut() {
        *s = (*s / (m as f64 - 1.0).max(1.0)).sqrt();
        if *s == 0.0 {
            *s = 1.0;
        }
    }
    let mut theta = vec![0.0; d + 1];
    let mut grad = vec![0.0; d + 1];
    for _ in 0..500 {
        grad.iter_mut().for_each(|g| *g = 0.0);
        for i in 0..m {
            let r = row(i);
            let mut t = theta[d];
            for j in 0..d {
                t += theta[j] * (r[j] - means[j]) / scales[j];
            }
            let p = 1.0 / (1.0 + (-t).exp());
            let err = p - f64::from(i >= n0);
            for j in 0..d {
                grad[j] += err * (r[j] - means[j]) / scales[j];
            }
            grad[d] += err;
        }
        for (th, g) in theta.iter_mut().zip(&grad) {
            *th -= g / m as f64;
        }
    }
    Ok(WeightModel {
        theta,
        means,
        scales,
    })
}

/// Weighted conformal quantile with the point mass at +infinity: the
/// smallest residual r such that the normalized weights of residuals <= r
/// reach 1 - alpha; +infinity when even the full calibration mass falls
/// short (i.e. the test point's own mass exceeds alpha).
pub fn weighted_quantile_hi(
    residuals: &[f64],
    cal_weights: &[f64],
    test_weight: f64,
    alpha: f64,
) -> Result<f64> {
    if residuals.is_empty() {
        return Err(Error::EmptyResiduals);
    }
    if residuals.len() != cal_weights.len() {
        return Err(Error::DimensionMismatch {
            expected: residuals.len(),
            got: cal_weights.len(),
        });
    }
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(Error::InvalidParam {
            name: "alpha",
            value: alpha,
            range: "(0, 1)",
        });
    }
    if residuals.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { what: "residuals" });
    }
    if cal_weights
        .iter()
        .chain([&test_weight])
        .any(|w| !w.is_finite() || *w <= 0.0)
    {
        return Err(Error::NonFiniteWeight);
    }
    let total: f64 = cal_weights.iter().sum::<f64>() + test_weight;
    let mut order: Vec<usize> = (0..residuals.len()).collect();
    order.sort_by(|&a, &b| residuals[a].partial_cmp(&residuals[b]).unwrap());
    let mut cum = 0.0;
    for i in order {
        cum += cal_weights[i] / total;
        // the 1e-9 slack absorbs accumulation error so that exactly
        // attainable levels (e.g. equal weights) are not pushed to +inf
        if cum >= 1.0 - alpha - 1e-9 {
            return Ok(residuals[i]);
        }
    }
    Ok(f64::INFINITY)
}

/// Weighted split conformal on the raw features: like [`scp_interval`] but
/// the calibration residuals are weighted by the covariate-shift weights
/// w(X_i), with the test point's own weight as the mass at +infinity.
pub fn wcp_interval(
    ctx: &ConformalContext,
    x_observed: &[f64],
    weights: &WeightModel,
) -> Result<PredictionInterval> {
    ctx.check_x(x_observed)?;
    let n = ctx.calib.len();
    let mut cal_weights = Vec::with_capacity(n);
    for i in 0..n {
        cal_weights.push(weights.weight(ctx.calib.features.row(i))?);
    }
    let test_weight = weights.weight(x_observed)?;
    match &ctx.model {
        ModelKind::Point(m) => {
            let mut residuals = Vec::with_capacity(n);
            for i in 0..n {
                residuals
                    .push((ctx.calib.labels[i] - predict(m, ctx.calib.features.row(i))?).abs());
            }
            let hw = weighted_quantile_hi(&residuals, &cal_weights, test_weight, ctx.alpha)?;
            let center = predict(m, x_observed)?;
            Ok(interval_from(center - hw, center + hw))
        }
        ModelKind::Quantile(pair) => {
            let mut scores = Vec::with_capacity(n);
            for i in 0..n {
                let xi = ctx.calib.features.row(i);
                let y = ctx.calib.labels[i];
                scores.push((predict(&pair.lower, xi)? - y).max(y - predict(&pair.upper, xi)?));
            }
            let q = weighted_quantile_hi(&scores, &cal_weights, test_weight, ctx.alpha)?;
            Ok(interval_from(
                predict(&pair.lower, x_observed)? - q,
                predict(&pair.upper, x_observed)? + q,
            ))
        }
    }
}
