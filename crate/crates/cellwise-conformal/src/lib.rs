//! Prediction intervals for regression when test-time features carry
//! cellwise outliers — individual contaminated coordinates rather than
//! wholly corrupted rows.
//!
//! The pipeline is *detect then impute*: a cellwise detector flags suspect
//! coordinates, an imputer fills them from the clean training
//! distribution, and a conformal calibration step turns the repaired
//! predictions into intervals with finite-sample coverage guarantees.
//! Plain split conformal breaks under this kind of contamination because
//! the test points are no longer exchangeable with calibration; the
//! constructors here restore validity by applying the same
//! detect-impute channel to the calibration points.
//!
//! # Interval constructors ([`conformal`])
//!
//! * `scp_interval` — classical split conformal on raw features (the
//!   baseline that loses coverage under contamination).
//! * `wcp_interval` — likelihood-ratio-weighted split conformal, a
//!   covariate-shift correction.
//! * `baseline_interval` — an oracle given the true outlier cells of both
//!   calibration and test points.
//! * `naive_di_interval` — masks every point by the test detection only
//!   (no validity guarantee; kept as a cautionary comparator).
//! * `odi_interval` — oracle detect-impute: calibration masks are the
//!   union of detected and true cells; valid under sure detection.
//! * `pdi_interval` — proxy detect-impute: fully data-driven masks; the
//!   practical default.
//! * `jdi_interval` — joint detect-impute with pairwise
//!   (jackknife+-style) order statistics; worst-case 1−2α coverage with
//!   no detector assumptions.
//! * `cjdi_interval` — a conservative single-mask variant of JDI.
//!
//! Every constructor supports absolute-residual scores around a point
//! model and quantile-pair (CQR) scores.
//!
//! # Supporting modules
//!
//! * [`detect`] — Z-score and DDC-style cellwise detectors.
//! * [`impute`] — mean, kNN, and chained-ridge imputers.
//! * [`model`] — least squares and pinball-loss quantile pairs.
//! * [`quantile`] — the finite-sample conformal quantile with its +∞
//!   convention.
//! * [`simulate`] — synthetic settings, cellwise contamination, and the
//!   adversarial construction showing imputation error is unbounded.
//! * [`metrics`] — coverage, length, TPR/FDR, Jaccard similarity.
//! * [`harness`] — config-driven experiment runner with CSV/SVG reports.
//!
//! # Example
//!
//! ```
//! use cellwise_conformal::*;
//!
//! // train/calibrate on clean synthetic data
//! let spec = SettingSpec::setting_a(vec![1.0, -1.0, 0.5, 2.0]);
//! let data = generate(&spec, 120, 7)?;
//! let (train, calib) = split(&data, SplitIndex::half(data.len())?)?;
//! let model = ModelKind::Point(fit_ols(&train)?);
//! let detector = fit_zscore(&train.features, 3.0)?;
//! let imputer = fit_imputer(ImputerKind::Mean, &train.features, &ImputerParams::default())?;
//! let ctx = ConformalContext::new(model, detector, imputer, calib, 0.1, ScoreKind::AbsResidual)?;
//!
//! // a test point with one wildly contaminated cell
//! let interval = pdi_interval(&ctx, &[0.2, 40.0, -0.3, 1.1])?;
//! assert!(interval.lo < interval.hi);
//! # Ok::<(), cellwise_conformal::Error>(())
//! ```

pub mod conformal;
pub mod data;
pub mod detect;
pub mod error;
pub mod harness;
pub mod impute;
mod linalg;
pub mod metrics;
pub mod model;
pub mod quantile;
pub mod simulate;
pub mod stats;

pub use conformal::{
    baseline_interval, cjdi_interval, fit_weight_model, jdi_interval, naive_di_interval,
    odi_interval, pdi_interval, pdi_residuals, scp_interval, wcp_interval, weighted_quantile_hi,
    ConformalContext, ModelKind, ScoreKind, TestCase, WeightModel,
};
pub use data::{split, CellMask, FeatureMatrix, LabeledDataset, PredictionInterval, SplitIndex};
pub use detect::{
    detect, fit_ddc, fit_ddc_with_cutoff, fit_zscore, scores, DetectionOutput, DetectorKind,
    FittedDetector, DEFAULT_CORR_CUTOFF, DEFAULT_Z_THRESHOLD,
};
pub use error::{Error, Result};
pub use harness::{
    emit_report, load_csv, method_interval, run_experiment, simulate_dataset, write_dataset_csv,
    DetectorChoice, ExperimentConfig, GroupSummary, Method, ResultRow, ResultsTable,
    RESULTS_HEADER,
};
pub use impute::{
    fit_imputer, impute, FittedImputer, ImputerKind, ImputerParams, DEFAULT_KNN_K,
    DEFAULT_MICE_SWEEPS,
};
pub use metrics::{average_length, coverage, jaccard, tpr_fdr, DetectionRecord, PointRecord, TrialResult};
pub use model::{
    fit_ols, fit_quantile_pair, l1_sensitivity, predict, LinearModel, QuantilePair,
};
pub use quantile::{quantile_hi, quantile_lo};
pub use simulate::{
    adversarial_case, contaminate, contaminate_with, draw_outlier_law, generate,
    ContaminationSpec, OutlierLaw, Setting, SettingSpec,
};
