//! Experiment orchestration: flat key=value configuration, the trial loop
//! (generate → split → fit → contaminate → intervals → metrics), external
//! CSV ingestion, and CSV/SVG report emission.
//!
//! Every run is deterministic in (config, seed): per-trial seeds are mixed
//! from the master seed and the (epsilon, trial) indices, never from
//! execution order, so trials can run in parallel and still reproduce
//! byte-identical results.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::conformal::{
    baseline_interval, cjdi_interval, fit_weight_model, jdi_interval, naive_di_interval,
    odi_interval, pdi_interval, scp_interval, wcp_interval, ConformalContext, ModelKind,
    ScoreKind, TestCase, WeightModel,
};
use crate::data::{FeatureMatrix, LabeledDataset, PredictionInterval, SplitIndex};
use crate::detect::{detect, fit_ddc_with_cutoff, fit_zscore, FittedDetector};
use crate::error::{Error, Result};
use crate::impute::{fit_imputer, ImputerKind, ImputerParams};
use crate::metrics::{tpr_fdr, TrialResult};
use crate::model::{fit_ols, fit_quantile_pair};
use crate::simulate::{
    contaminate_with, draw_outlier_law, generate, ContaminationSpec, Setting, SettingSpec,
};

/// Interval-construction methods the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Baseline,
    Scp,
    Wcp,
    NaiveDi,
    Odi,
    Pdi,
    Jdi,
    Cjdi,
}

impl Method {
    pub const ALL: [Method; 8] = [
        Method::Baseline,
        Method::Scp,
        Method::Wcp,
        Method::NaiveDi,
        Method::Odi,
        Method::Pdi,
        Method::Jdi,
        Method::Cjdi,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Method::Baseline => "baseline",
            Method::Scp => "scp",
            Method::Wcp => "wcp",
            Method::NaiveDi => "naive_di",
            Method::Odi => "odi",
            Method::Pdi => "pdi",
            Method::Jdi => "jdi",
            Method::Cjdi => "cjdi",
        }
    }

    pub fn parse(s: &str) -> Result<Method> {
        match s.trim() {
            "baseline" => Ok(Method::Baseline),
            "scp" => Ok(Method::Scp),
            "wcp" => Ok(Method::Wcp),
            "naive_di" => Ok(Method::NaiveDi),
            "odi" => Ok(Method::Odi),
            "pdi" => Ok(Method::Pdi),
            "jdi" => Ok(Method::Jdi),
            "cjdi" => Ok(Method::Cjdi),
            other => Err(Error::config(format!("unknown method `{other}`"))),
        }
    }

    /// Methods that need the true outlier set of each test point.
    pub fn needs_oracle(self) -> bool {
        matches!(self, Method::Baseline | Method::Odi)
    }
}

/// Detector configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DetectorChoice {
    Ddc { p: f64, corr_cutoff: f64 },
    ZScore { threshold: f64 },
}

/// Full experiment description. Defaults mirror the reference protocol:
/// 200 labeled rows split in half, 100 test points, 200 trials, alpha 0.1,
/// dimension 15.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub setting: Setting,
    pub dataset: Option<PathBuf>,
    pub d: usize,
    pub n_labeled: usize,
    pub n_test: usize,
    pub n_trials: usize,
    pub alpha: f64,
    pub epsilons: Vec<f64>,
    pub methods: Vec<Method>,
    pub detector: DetectorChoice,
    pub imputer_kind: ImputerKind,
    pub imputer_params: ImputerParams,
    pub score: ScoreKind,
    pub seed: u64,
    pub outdir: PathBuf,
    pub outlier_mu: (f64, f64),
    pub outlier_sigma: (f64, f64),
    pub outlier_value: Option<f64>,
    /// Inject synthetic outliers into an external dataset's test rows
    /// (required for oracle methods on external data).
    pub inject: bool,
    /// Columns to log-transform right after loading an external dataset.
    pub log_columns: Vec<usize>,
    /// Keep only the top-k variance feature columns of an external
    /// dataset (0 disables screening).
    pub max_features: usize,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            setting: Setting::A,
            dataset: None,
            d: 15,
            n_labeled: 200,
            n_test: 100,
            n_trials: 200,
            alpha: 0.1,
            epsilons: vec![0.1],
            methods: Method::ALL.to_vec(),
            detector: DetectorChoice::Ddc { p: 0.95, corr_cutoff: 0.5 },
            imputer_kind: ImputerKind::Mean,
            imputer_params: ImputerParams::default(),
            score: ScoreKind::AbsResidual,
            seed: 0,
            outdir: PathBuf::from("out"),
            outlier_mu: (0.0, 10.0),
            outlier_sigma: (0.0, 10.0),
            outlier_value: None,
            inject: false,
            log_columns: Vec::new(),
            max_features: 0,
        }
    }
}

fn parse_usize(key: &str, v: &str) -> Result<usize> {
    v.parse()
        .map_err(|_| Error::config(format!("{key}: expected a nonnegative integer, got `{v}`")))
}

fn parse_u64(key: &str, v: &str) -> Result<u64> {
    v.parse()
        .map_err(|_| Error::config(format!("{key}: expected an integer seed, got `{v}`")))
}

fn parse_f64(key: &str, v: &str) -> Result<f64> {
    v.parse()
        .map_err(|_| Error::config(format!("{key}: expected a number, got `{v}`")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "1" => Ok(true),
        "false" | "0" => Ok(false),
        _ => Err(Error::config(format!("{key}: expected true/false, got `{v}`"))),
    }
}

fn parse_range(key: &str, v: &str) -> Result<(f64, f64)> {
    let parts: Vec<&str> = v.split(',').map(str::trim).collect();
    if parts.len() != 2 {
        return Err(Error::config(format!("{key}: expected `lo,hi`, got `{v}`")));
    }
    let lo = parse_f64(key, parts[0])?;
    let hi = parse_f64(key, parts[1])?;
    if !(lo <= hi) {
        return Err(Error::config(format!("{key}: lo must not exceed hi in `{v}`")));
    }
    Ok((lo, hi))
}

impl ExperimentConfig {
    /// Parse a flat key=value config text. Lines starting with `#` and
    /// blank lines are skipped; later keys override earlier ones; unknown
    /// keys are errors.
    pub fn parse(text: &str) -> Result<ExperimentConfig> {
        let mut cfg = ExperimentConfig::default();
        let mut detector_kind = "ddc".to_string();
        let mut detector_p = 0.95;
        let mut corr_cutoff = 0.5;
        let mut z_threshold = 3.0;
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let Some((key, value)) = line.split_once('=') else {
                return Err(Error::config(format!(
                    "line {}: expected `key = value`, got `{line}`",
                    lineno + 1
                )));
            };
            let key = key.trim();
            let value = value.trim();
            match key {
                "setting" => {
                    cfg.setting = match value.to_ascii_lowercase().as_str() {
                        "a" => Setting::A,
                        "b" => Setting::B,
                        "c" => Setting::C,
                        _ => {
                            return Err(Error::config(format!(
                                "setting: expected a, b, or c, got `{value}`"
                            )))
                        }
                    };
                }
                "dataset" => cfg.dataset = Some(PathBuf::from(value)),
                "d" => cfg.d = parse_usize(key, value)?,
                "n_labeled" => cfg.n_labeled = parse_usize(key, value)?,
                "n_test" => cfg.n_test = parse_usize(key, value)?,
                "n_trials" => cfg.n_trials = parse_usize(key, value)?,
                "alpha" => cfg.alpha = parse_f64(key, value)?,
                "epsilon" => {
                    cfg.epsilons = value
                        .split(',')
                        .map(|s| parse_f64(key, s.trim()))
                        .collect::<Result<_>>()?;
                }
                "methods" => {
                    let mut methods = Vec::new();
                    for part in value.split(',') {
                        let m = Method::parse(part)?;
                        if !methods.contains(&m) {
                            methods.push(m);
                        }
                    }
                    cfg.methods = methods;
                }
                "detector" => detector_kind = value.to_ascii_lowercase(),
                "detector_p" => detector_p = parse_f64(key, value)?,
                "corr_cutoff" => corr_cutoff = parse_f64(key, value)?,
                "z_threshold" => z_threshold = parse_f64(key, value)?,
                "imputer" => {
                    cfg.imputer_kind = match value.to_ascii_lowercase().as_str() {
                        "mean" => ImputerKind::Mean,
                        "knn" => ImputerKind::Knn,
                        "mice" => ImputerKind::Mice,
                        _ => {
                            return Err(Error::config(format!(
                                "imputer: expected mean, knn, or mice, got `{value}`"
                            )))
                        }
                    };
                }
                "knn_k" => cfg.imputer_params.knn_k = parse_usize(key, value)?,
                "mice_sweeps" => cfg.imputer_params.mice_sweeps = parse_usize(key, value)?,
                "score" => {
                    cfg.score = match value.to_ascii_lowercase().as_str() {
                        "abs" | "abs_residual" => ScoreKind::AbsResidual,
                        "cqr" => ScoreKind::Cqr,
                        _ => {
                            return Err(Error::config(format!(
                                "score: expected abs or cqr, got `{value}`"
                            )))
                        }
                    };
                }
                "seed" => cfg.seed = parse_u64(key, value)?,
                "outdir" => cfg.outdir = PathBuf::from(value),
                "outlier_mu" => cfg.outlier_mu = parse_range(key, value)?,
                "outlier_sigma" => cfg.outlier_sigma = parse_range(key, value)?,
                "outlier_value" => cfg.outlier_value = Some(parse_f64(key, value)?),
                "inject" => cfg.inject = parse_bool(key, value)?,
                "log_columns" => {
                    cfg.log_columns = value
                        .split(',')
                        .map(|s| parse_usize(key, s.trim()))
                        .collect::<Result<_>>()?;
                }
                "max_features" => cfg.max_features = parse_usize(key, value)?,
                other => return Err(Error::config(format!("unknown config key `{other}`"))),
            }
        }
        cfg.detector = match detector_kind.as_str() {
            "ddc" => DetectorChoice::Ddc { p: detector_p, corr_cutoff },
            "zscore" => DetectorChoice::ZScore { threshold: z_threshold },
            other => {
                return Err(Error::config(format!(
                    "detector: expected ddc or zscore, got `{other}`"
                )))
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read config {}: {e}", path.display())))?;
        ExperimentConfig::parse(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.d == 0 {
            return Err(Error::config("d must be positive"));
        }
        if self.n_labeled < 4 {
            return Err(Error::config("n_labeled must be at least 4"));
        }
        if self.n_test == 0 || self.n_trials == 0 {
            return Err(Error::config("n_test and n_trials must be positive"));
        }
        if !(0.0 < self.alpha && self.alpha < 1.0) {
            return Err(Error::config("alpha must lie strictly between 0 and 1"));
        }
        if self.epsilons.is_empty() {
            return Err(Error::config("epsilon list must be nonempty"));
        }
        for &e in &self.epsilons {
            if !(0.0..=1.0).contains(&e) {
                return Err(Error::config(format!("epsilon {e} outside [0, 1]")));
            }
        }
        for i in 0..self.epsilons.len() {
            for j in i + 1..self.epsilons.len() {
                if self.epsilons[i] == self.epsilons[j] {
                    return Err(Error::config(format!(
                        "duplicate epsilon {}",
                        self.epsilons[i]
                    )));
                }
            }
        }
        if self.methods.is_empty() {
            return Err(Error::config("methods list must be nonempty"));
        }
        match self.detector {
            DetectorChoice::Ddc { p, corr_cutoff } => {
                if !(0.0 < p && p < 1.0) {
                    return Err(Error::config("detector_p must lie strictly between 0 and 1"));
                }
                if !(0.0 < corr_cutoff && corr_cutoff < 1.0) {
                    return Err(Error::config("corr_cutoff must lie strictly between 0 and 1"));
                }
            }
            DetectorChoice::ZScore { threshold } => {
                if !(threshold > 0.0) {
                    return Err(Error::config("z_threshold must be positive"));
                }
            }
        }
        if self.imputer_params.knn_k == 0 {
            return Err(Error::config("knn_k must be positive"));
        }
        if self.imputer_params.mice_sweeps == 0 {
            return Err(Error::config("mice_sweeps must be positive"));
        }
        if self.dataset.is_some() && !self.inject {
            if let Some(m) = self.methods.iter().find(|m| m.needs_oracle()) {
                return Err(Error::config(format!(
                    "method `{}` needs known outlier cells; on an external dataset set inject = true",
                    m.name()
                )));
            }
        }
        Ok(())
    }

    /// The resolved configuration as flat key=value text (the config echo
    /// written into every output directory).
    pub fn echo(&self) -> String {
        let mut s = String::new();
        if let Some(p) = &self.dataset {
            let _ = writeln!(s, "dataset = {}", p.display());
        } else {
            let _ = writeln!(
                s,
                "setting = {}",
                match self.setting {
                    Setting::A => "a",
                    Setting::B => "b",
                    Setting::C => "c",
                }
            );
        }
        let _ = writeln!(s, "d = {}", self.d);
        let _ = writeln!(s, "n_labeled = {}", self.n_labeled);
        let _ = writeln!(s, "n_test = {}", self.n_test);
        let _ = writeln!(s, "n_trials = {}", self.n_trials);
        let _ = writeln!(s, "alpha = {}", self.alpha);
        let eps: Vec<String> = self.epsilons.iter().map(|e| e.to_string()).collect();
        let _ = writeln!(s, "epsilon = {}", eps.join(","));
        let names: Vec<&str> = self.methods.iter().map(|m| m.name()).collect();
        let _ = writeln!(s, "methods = {}", names.join(","));
        match self.detector {
            DetectorChoice::Ddc { p, corr_cutoff } => {
                let _ = writeln!(s, "detector = ddc");
                let _ = writeln!(s, "detector_p = {p}");
                let _ = writeln!(s, "corr_cutoff = {corr_cutoff}");
            }
            DetectorChoice::ZScore { threshold } => {
                let _ = writeln!(s, "detector = zscore");
                let _ = writeln!(s, "z_threshold = {threshold}");
            }
        }
        let _ = writeln!(
            s,
            "imputer = {}",
            match self.imputer_kind {
                ImputerKind::Mean => "mean",
                ImputerKind::Knn => "knn",
                ImputerKind::Mice => "mice",
            }
        );
        let _ = writeln!(s, "knn_k = {}", self.imputer_params.knn_k);
        let _ = writeln!(s, "mice_sweeps = {}", self.imputer_params.mice_sweeps);
        let _ = writeln!(
            s,
            "score = {}",
            match self.score {
                ScoreKind::AbsResidual => "abs",
                ScoreKind::Cqr => "cqr",
            }
        );
        let _ = writeln!(s, "seed = {}", self.seed);
        let _ = writeln!(s, "outdir = {}", self.outdir.display());
        let _ = writeln!(s, "outlier_mu = {},{}", self.outlier_mu.0, self.outlier_mu.1);
        let _ = writeln!(s, "outlier_sigma = {},{}", self.outlier_sigma.0, self.outlier_sigma.1);
        if let Some(v) = self.outlier_value {
            let _ = writeln!(s, "outlier_value = {v}");
        }
        if self.dataset.is_some() {
            let _ = writeln!(s, "inject = {}", self.inject);
            if !self.log_columns.is_empty() {
                let cols: Vec<String> = self.log_columns.iter().map(|c| c.to_string()).collect();
                let _ = writeln!(s, "log_columns = {}", cols.join(","));
            }
            let _ = writeln!(s, "max_features = {}", self.max_features);
        }
        s
    }

    fn contamination(&self, epsilon: f64) -> ContaminationSpec {
        ContaminationSpec {
            epsilon,
            mu_range: self.outlier_mu,
            sigma_range: self.outlier_sigma,
            fixed_value: self.outlier_value,
        }
    }
}

/// One results row, keyed by (method, setting, epsilon, trial).
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    pub method: String,
    pub setting: String,
    pub epsilon: f64,
    pub trial: usize,
    pub coverage: f64,
    pub avg_length: f64,
    pub inf_frac: f64,
    pub tpr: f64,
    pub fdr: f64,
}

pub const RESULTS_HEADER: &str =
    "method,setting,epsilon,trial,coverage,avg_length,inf_frac,tpr,fdr";

/// All trial results of one experiment.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct ResultsTable {
    pub rows: Vec<ResultRow>,
}

/// Per-(method, setting, epsilon) aggregates. Length, TPR, and FDR means
/// skip NaN trials (a NaN marks "undefined for this trial": all-infinite
/// intervals or nothing to detect).
#[derive(Debug, Clone)]
pub struct GroupSummary {
    pub method: String,
    pub setting: String,
    pub epsilon: f64,
    pub n_trials: usize,
    pub mean_coverage: f64,
    pub sd_coverage: f64,
    pub mean_length: f64,
    pub sd_length: f64,
    pub mean_inf_frac: f64,
    pub mean_tpr: f64,
    pub mean_fdr: f64,
}

fn nan_skipping_mean(values: impl Iterator<Item = f64>) -> (f64, usize) {
    let mut sum = 0.0;
    let mut n = 0usize;
    for v in values {
        if !v.is_nan() {
            sum += v;
            n += 1;
        }
    }
    if n == 0 {
        (f64::NAN, 0)
    } else {
        (sum / n as f64, n)
    }
}

fn sd_or_zero(values: &[f64]) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    crate::stats::sample_sd(values).unwrap_or(f64::NAN)
}

impl ResultsTable {
    /// Rows matching the given filters (None = any).
    pub fn select(
        &self,
        method: Option<&str>,
        setting: Option<&str>,
        epsilon: Option<f64>,
    ) -> Vec<&ResultRow> {
        self.rows
            .iter()
            .filter(|r| method.map_or(true, |m| r.method == m))
            .filter(|r| setting.map_or(true, |s| r.setting == s))
            .filter(|r| epsilon.map_or(true, |e| r.epsilon == e))
            .collect()
    }

    /// Aggregate the rows matching the filters into one summary.
    pub fn summary_for(
        &self,
        method: &str,
        setting: Option<&str>,
        epsilon: Option<f64>,
    ) -> Result<GroupSummary> {
        let rows = self.select(Some(method), setting, epsilon);
        if rows.is_empty() {
            return Err(Error::data(format!(
                "no result rows for method `{method}` with the given filters"
            )));
        }
        let coverages: Vec<f64> = rows.iter().map(|r| r.coverage).collect();
        let finite_lengths: Vec<f64> =
            rows.iter().map(|r| r.avg_length).filter(|v| !v.is_nan()).collect();
        let (mean_length, _) = nan_skipping_mean(rows.iter().map(|r| r.avg_length));
        let (mean_tpr, _) = nan_skipping_mean(rows.iter().map(|r| r.tpr));
        let (mean_fdr, _) = nan_skipping_mean(rows.iter().map(|r| r.fdr));
        Ok(GroupSummary {
            method: method.to_string(),
            setting: setting.unwrap_or("*").to_string(),
            epsilon: epsilon.unwrap_or(f64::NAN),
            n_trials: rows.len(),
            mean_coverage: crate::stats::mean(&coverages)?,
            sd_coverage: sd_or_zero(&coverages),
            mean_length,
            sd_length: sd_or_zero(&finite_lengths),
            mean_inf_frac: crate::stats::mean(
                &rows.iter().map(|r| r.inf_frac).collect::<Vec<f64>>(),
            )?,
            mean_tpr,
            mean_fdr,
        })
    }

    /// Summaries for every (method, setting, epsilon) group, in first
    /// appearance order.
    pub fn summaries(&self) -> Vec<GroupSummary> {
        let mut keys: Vec<(String, String, f64)> = Vec::new();
        for r in &self.rows {
            let key = (r.method.clone(), r.setting.clone(), r.epsilon);
            if !keys.contains(&key) {
                keys.push(key);
            }
        }
        keys.into_iter()
            .map(|(m, s, e)| self.summary_for(&m, Some(&s), Some(e)).expect("key came from rows"))
            .collect()
    }

    /// Distinct (setting, epsilon) pairs in first appearance order.
    pub fn panels(&self) -> Vec<(String, f64)> {
        let mut keys: Vec<(String, f64)> = Vec::new();
        for r in &self.rows {
            let key = (r.setting.clone(), r.epsilon);
            if !keys.contains(&key) {
                keys.push(key);
            }
        }
        keys
    }

    /// Methods present, in first appearance order.
    pub fn methods(&self) -> Vec<String> {
        let mut names: Vec<String> = Vec::new();
        for r in &self.rows {
            if !names.iter().any(|n| *n == r.method) {
                names.push(r.method.clone());
            }
        }
        names
    }

    pub fn to_csv_string(&self) -> String {
        let mut s = String::with_capacity(64 * (self.rows.len() + 1));
        s.push_str(RESULTS_HEADER);
        s.push('\n');
        for r in &self.rows {
            let _ = writeln!(
                s,
                "{},{},{},{},{},{},{},{},{}",
                r.method,
                r.setting,
                r.epsilon,
                r.trial,
                r.coverage,
                r.avg_length,
                r.inf_frac,
                r.tpr,
                r.fdr
            );
        }
        s
    }

    pub fn from_csv_str(text: &str) -> Result<ResultsTable> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::data("results csv is empty"))?;
        if header.trim() != RESULTS_HEADER {
            return Err(Error::data(format!(
                "results csv header mismatch: expected `{RESULTS_HEADER}`, got `{}`",
                header.trim()
            )));
        }
        let mut rows = Vec::new();
        for (i, line) in lines.enumerate() {
            if line.trim().is_empty() {
                continue;
            }
            let parts: Vec<&str> = line.split(',').collect();
            if parts.len() != 9 {
                return Err(Error::data(format!(
                    "results csv row {}: expected 9 fields, got {}",
                    i + 2,
                    parts.len()
                )));
            }
            let num = |k: usize| -> Result<f64> {
                parts[k].trim().parse::<f64>().map_err(|_| {
                    Error::data(format!(
                        "results csv row {}: non-numeric field `{}`",
                        i + 2,
                        parts[k]
                    ))
                })
            };
            rows.push(ResultRow {
                method: parts[0].trim().to_string(),
                setting: parts[1].trim().to_string(),
                epsilon: num(2)?,
                trial: parts[3].trim().parse().map_err(|_| {
                    Error::data(format!("results csv row {}: bad trial index", i + 2))
                })?,
                coverage: num(4)?,
                avg_length: num(5)?,
                inf_frac: num(6)?,
                tpr: num(7)?,
                fdr: num(8)?,
            });
        }
        Ok(ResultsTable { rows })
    }

    pub fn from_csv_file(path: &Path) -> Result<ResultsTable> {
        let text = std::fs::read_to_string(path)?;
        ResultsTable::from_csv_str(&text)
    }
}

/// splitmix-style avalanche mix.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-trial seed, a pure function of (master seed, epsilon index, trial
/// index) — never of execution order.
pub(crate) fn trial_seed(master: u64, stream: u64, trial: u64) -> u64 {
    mix(mix(mix(master) ^ stream) ^ trial)
}

/// Load a labeled dataset from CSV: header row, numeric cells, last
/// column is the label, row order preserved.
pub fn load_csv(path: &Path) -> Result<LabeledDataset> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| Error::data(format!("cannot open {}: {e}", path.display())))?;
    let width = reader
        .headers()
        .map_err(|e| Error::data(format!("{}: bad header: {e}", path.display())))?
        .len();
    if width < 2 {
        return Err(Error::data(format!(
            "{}: need at least one feature column and one label column",
            path.display()
        )));
    }
    let mut rows: Vec<Vec<f64>> = Vec::new();
    let mut labels: Vec<f64> = Vec::new();
    for (i, record) in reader.records().enumerate() {
        let record =
            record.map_err(|e| Error::data(format!("{}: data row {}: {e}", path.display(), i + 1)))?;
        let mut row = Vec::with_capacity(width - 1);
        for (j, cell) in record.iter().enumerate() {
            let v: f64 = cell.parse().map_err(|_| {
                Error::data(format!(
                    "{}: non-numeric cell at data row {}, column {}: `{cell}`",
                    path.display(),
                    i + 1,
                    j + 1
                ))
            })?;
            if j + 1 == width {
                labels.push(v);
            } else {
                row.push(v);
            }
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::data(format!("{}: no data rows", path.display())));
    }
    let features = FeatureMatrix::from_rows(&rows)?;
    LabeledDataset::new(features, labels)
}

/// Write a labeled dataset as CSV (`x1..xd,y` header). Values print in
/// shortest round-trip form, so a write/read cycle is bitwise faithful.
pub fn write_dataset_csv(data: &LabeledDataset, path: &Path) -> Result<()> {
    let d = data.dim();
    let mut s = String::new();
    for j in 0..d {
        let _ = write!(s, "x{},", j + 1);
    }
    s.push_str("y\n");
    for i in 0..data.len() {
        for v in data.features.row(i) {
            let _ = write!(s, "{v},");
        }
        let _ = writeln!(s, "{}", data.labels[i]);
    }
    std::fs::write(path, s)?;
    Ok(())
}

fn fit_detector(choice: DetectorChoice, train: &FeatureMatrix) -> Result<FittedDetector> {
    match choice {
        DetectorChoice::Ddc { p, corr_cutoff } => fit_ddc_with_cutoff(train, p, corr_cutoff),
        DetectorChoice::ZScore { threshold } => fit_zscore(train, threshold),
    }
}

/// Compute one method's interval for one test case.
pub fn method_interval(
    method: Method,
    ctx: &ConformalContext,
    case: &TestCase,
    weights: Option<&WeightModel>,
) -> Result<PredictionInterval> {
    match method {
        Method::Baseline => baseline_interval(ctx, case),
        Method::Scp => scp_interval(ctx, &case.x_observed),
        Method::Wcp => {
            let w = weights
                .ok_or_else(|| Error::data("wcp needs a fitted weight model for the test batch"))?;
            wcp_interval(ctx, &case.x_observed, w)
        }
        Method::NaiveDi => naive_di_interval(ctx, &case.x_observed),
        Method::Odi => odi_interval(ctx, case),
        Method::Pdi => pdi_interval(ctx, &case.x_observed),
        Method::Jdi => jdi_interval(ctx, &case.x_observed),
        Method::Cjdi => cjdi_interval(ctx, &case.x_observed),
    }
}

/// Apply log transforms and variance screening to an external dataset.
fn prepare_external(cfg: &ExperimentConfig, mut data: LabeledDataset) -> Result<LabeledDataset> {
    if !cfg.log_columns.is_empty() {
        let d = data.dim();
        let n = data.len();
        let mut rows: Vec<Vec<f64>> = (0..n).map(|i| data.features.row(i).to_vec()).collect();
        for &j in &cfg.log_columns {
            if j >= d {
                return Err(Error::config(format!(
                    "log_columns: column {j} out of range for {d} features"
                )));
            }
            for (i, row) in rows.iter_mut().enumerate() {
                if row[j] <= 0.0 {
                    return Err(Error::data(format!(
                        "log_columns: nonpositive value {} at row {}, column {j}",
                        row[j], i
                    )));
                }
                row[j] = row[j].ln();
            }
        }
        data = LabeledDataset::new(FeatureMatrix::from_rows(&rows)?, data.labels)?;
    }
    if cfg.max_features > 0 && data.dim() > cfg.max_features {
        let d = data.dim();
        let mut variances: Vec<(f64, usize)> = (0..d)
            .map(|j| {
                let col = data.features.col(j);
                let sd = crate::stats::sample_sd(&col).unwrap_or(0.0);
                (sd * sd, j)
            })
            .collect();
        variances
            .sort_by(|a, b| b.0.partial_cmp(&a.0).unwrap_or(std::cmp::Ordering::Equal));
        let mut keep: Vec<usize> =
            variances.into_iter().take(cfg.max_features).map(|(_, j)| j).collect();
        keep.sort_unstable();
        data = LabeledDataset::new(data.features.select_columns(&keep)?, data.labels)?;
    }
    Ok(data)
}

struct TrialData {
    labeled: LabeledDataset,
    test_features: FeatureMatrix,
    test_labels: Vec<f64>,
}

/// Draw the trial-level data-generating spec (coefficients or spline
/// structure) from the trial stream, the way the experiment loop does.
fn build_spec(cfg: &ExperimentConfig, rng: &mut ChaCha8Rng) -> SettingSpec {
    match cfg.setting {
        Setting::A => {
            let beta: Vec<f64> = (0..cfg.d).map(|_| crate::simulate::std_normal(rng)).collect();
            SettingSpec::setting_a(beta)
        }
        Setting::B => SettingSpec::setting_b(cfg.d, rng.gen()),
        Setting::C => {
            let beta: Vec<f64> = (0..cfg.d).map(|_| crate::simulate::std_normal(rng)).collect();
            SettingSpec::setting_c(beta)
        }
    }
}

/// Deterministically materialize one synthetic dataset from a config, the
/// way trial 0 of an experiment would (used by the `simulate` subcommand).
pub fn simulate_dataset(cfg: &ExperimentConfig, n: usize, seed: u64) -> Result<LabeledDataset> {
    let mut rng = ChaCha8Rng::seed_from_u64(trial_seed(seed, 0, 0));
    let spec = build_spec(cfg, &mut rng);
    generate(&spec, n, rng.gen())
}

fn materialize_trial(
    cfg: &ExperimentConfig,
    base: Option<&LabeledDataset>,
    rng: &mut ChaCha8Rng,
) -> Result<TrialData> {
    match base {
        None => {
            let spec = build_spec(cfg, rng);
            let labeled = generate(&spec, cfg.n_labeled, rng.gen())?;
            let test = generate(&spec, cfg.n_test, rng.gen())?;
            Ok(TrialData {
                labeled,
                test_features: test.features,
                test_labels: test.labels,
            })
        }
        Some(ds) => {
            let need = cfg.n_labeled + cfg.n_test;
            if ds.len() < need {
                return Err(Error::config(format!(
                    "dataset has {} rows but n_labeled + n_test = {need}",
                    ds.len()
                )));
            }
            let mut order: Vec<usize> = (0..ds.len()).collect();
            // Fisher-Yates with the trial stream
            for i in (1..order.len()).rev() {
                let j = rng.gen_range(0..=i);
                order.swap(i, j);
            }
            let take = |idx: &[usize]| -> Result<LabeledDataset> {
                let rows: Vec<Vec<f64>> =
                    idx.iter().map(|&i| ds.features.row(i).to_vec()).collect();
                let labels: Vec<f64> = idx.iter().map(|&i| ds.labels[i]).collect();
                LabeledDataset::new(FeatureMatrix::from_rows(&rows)?, labels)
            };
            let labeled = take(&order[..cfg.n_labeled])?;
            let test = take(&order[cfg.n_labeled..need])?;
            Ok(TrialData {
                labeled,
                test_features: test.features,
                test_labels: test.labels,
            })
        }
    }
}

fn run_trial(
    cfg: &ExperimentConfig,
    base: Option<&LabeledDataset>,
    setting_label: &str,
    eps_idx: usize,
    epsilon: f64,
    trial: usize,
) -> Result<Vec<ResultRow>> {
    let seed = trial_seed(cfg.seed, eps_idx as u64, trial as u64);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let data = materialize_trial(cfg, base, &mut rng)?;
    let split_ix = SplitIndex::half(data.labeled.len())?;
    let (train, calib) = crate::data::split(&data.labeled, split_ix)?;
    let model = match cfg.score {
        ScoreKind::AbsResidual => ModelKind::Point(fit_ols(&train)?),
        ScoreKind::Cqr => ModelKind::Quantile(fit_quantile_pair(&train, cfg.alpha)?),
    };
    let detector = fit_detector(cfg.detector, &train.features)?;
    let imputer = fit_imputer(cfg.imputer_kind, &train.features, &cfg.imputer_params)?;
    let ctx = ConformalContext::new(model, detector, imputer, calib, cfg.alpha, cfg.score)?;

    let inject = base.is_none() || cfg.inject;
    let n_test = data.test_features.rows();
    let mut cases = Vec::with_capacity(n_test);
    if inject {
        let law = draw_outlier_law(&cfg.contamination(epsilon), ctx.dim(), &mut rng)?;
        for i in 0..n_test {
            let mut case = contaminate_with(&law, data.test_features.row(i), &mut rng)?;
            case.y_true = Some(data.test_labels[i]);
            cases.push(case);
        }
    } else {
        for i in 0..n_test {
            let mut case = TestCase::from_observed(data.test_features.row(i).to_vec());
            case.y_true = Some(data.test_labels[i]);
            cases.push(case);
        }
    }

    // detection quality is a property of the trial (detector + data), so
    // the same tpr/fdr is reported on every method's row
    let (tpr, fdr) = if inject {
        let mut detected = Vec::with_capacity(n_test);
        let mut truth = Vec::with_capacity(n_test);
        for case in &cases {
            detected.push(detect(ctx.detector(), &case.x_observed)?.mask);
            truth.push(case.true_mask.clone().expect("injected cases carry their mask"));
        }
        tpr_fdr(&detected, &truth)?
    } else {
        (f64::NAN, f64::NAN)
    };

    let weights = if cfg.methods.contains(&Method::Wcp) {
        let observed: Vec<Vec<f64>> = cases.iter().map(|c| c.x_observed.clone()).collect();
        Some(fit_weight_model(
            &ctx.calib().features,
            &FeatureMatrix::from_rows(&observed)?,
        )?)
    } else {
        None
    };

    let mut out = Vec::with_capacity(cfg.methods.len());
    for &method in &cfg.methods {
        let mut tr = TrialResult::new(method.name());
        for case in &cases {
            let interval = method_interval(method, &ctx, case, weights.as_ref())?;
            tr.record_interval(&interval, case.y_true.expect("labels attached above"));
        }
        let (avg_length, inf_frac) = tr.length_stats();
        out.push(ResultRow {
            method: method.name().to_string(),
            setting: setting_label.to_string(),
            epsilon,
            trial,
            coverage: tr.coverage()?,
            avg_length,
            inf_frac,
            tpr,
            fdr,
        });
    }
    Ok(out)
}

fn sanitize_label(s: &str) -> String {
    s.chars()
        .map(|c| if c.is_ascii_alphanumeric() || c == '.' || c == '-' || c == '_' { c } else { '_' })
        .collect()
}

/// Run the full experiment grid (epsilon × trial × method). Trials run in
/// parallel; the result order is (epsilon, trial, method) regardless of
/// scheduling.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<ResultsTable> {
    cfg.validate()?;
    let base = match &cfg.dataset {
        Some(path) => Some(prepare_external(cfg, load_csv(path)?)?),
        None => None,
    };
    let setting_label = match &cfg.dataset {
        Some(path) => sanitize_label(
            &path
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| "data".to_string()),
        ),
        None => match cfg.setting {
            Setting::A => "a".to_string(),
            Setting::B => "b".to_string(),
            Setting::C => "c".to_string(),
        },
    };
    let mut rows = Vec::new();
    for (eps_idx, &epsilon) in cfg.epsilons.iter().enumerate() {
        let trial_rows: Vec<Result<Vec<ResultRow>>> = (0..cfg.n_trials)
            .into_par_iter()
            .map(|trial| run_trial(cfg, base.as_ref(), &setting_label, eps_idx, epsilon, trial))
            .collect();
        for r in trial_rows {
            rows.extend(r?);
        }
    }
    Ok(ResultsTable { rows })
}

fn summary_csv(table: &ResultsTable) -> String {
    let mut s = String::from(
        "method,setting,epsilon,n_trials,mean_coverage,sd_coverage,mean_length,sd_length,mean_inf_frac,mean_tpr,mean_fdr\n",
    );
    for g in table.summaries() {
        let _ = writeln!(
            s,
            "{},{},{},{},{},{},{},{},{},{},{}",
            g.method,
            g.setting,
            g.epsilon,
            g.n_trials,
            g.mean_coverage,
            g.sd_coverage,
            g.mean_length,
            g.sd_length,
            g.mean_inf_frac,
            g.mean_tpr,
            g.mean_fdr
        );
    }
    s
}

fn quartiles(sorted: &[f64]) -> (f64, f64, f64) {
    let q = |p: f64| -> f64 {
        let h = (sorted.len() - 1) as f64 * p;
        let lo = h.floor() as usize;
        let hi = h.ceil() as usize;
        sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
    };
    (q(0.25), q(0.5), q(0.75))
}

/// Render one coverage panel: a box-and-whisker plot per method plus a
/// dashed reference line at the target coverage 1 - alpha (marked with
/// `data-role="target-coverage"` and its data coordinate in
/// `data-target`).
fn render_coverage_svg(
    methods: &[String],
    samples: &[Vec<f64>],
    alpha: f64,
    title: &str,
) -> String {
    let target = 1.0 - alpha;
    let k = methods.len().max(1);
    let (x0, y0) = (70.0, 40.0);
    let band = 90.0;
    let plot_w = band * k as f64;
    let plot_h = 320.0;
    let width = x0 + plot_w + 40.0;
    let height = y0 + plot_h + 60.0;
    let mut lo = target;
    let mut hi = target;
    for vs in samples {
        for &v in vs {
            lo = lo.min(v);
            hi = hi.max(v);
        }
    }
    let y_min = ((lo - 0.05).max(0.0) * 20.0).floor() / 20.0;
    let y_max = ((hi + 0.02).min(1.0) * 20.0).ceil() / 20.0;
    let span = (y_max - y_min).max(1e-9);
    let y_of = |v: f64| y0 + plot_h * (1.0 - (v - y_min) / span);

    let mut s = String::new();
    let _ = writeln!(
        s,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}" viewBox="0 0 {width} {height}">"#
    );
    let _ = writeln!(s, r#"<rect width="{width}" height="{height}" fill="white"/>"#);
    let _ = writeln!(
        s,
        r#"<text x="{}" y="24" font-family="sans-serif" font-size="15" text-anchor="middle">{title}</text>"#,
        x0 + plot_w / 2.0
    );
    // axes
    let _ = writeln!(
        s,
        r#"<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{}" stroke="black"/>"#,
        y0 + plot_h
    );
    let _ = writeln!(
        s,
        r#"<line x1="{x0}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
        y0 + plot_h,
        x0 + plot_w,
        y0 + plot_h
    );
    // y ticks every 0.05
    let mut tick = y_min;
    while tick <= y_max + 1e-9 {
        let y = y_of(tick);
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{y}" x2="{x0}" y2="{y}" stroke="black"/>"#,
            x0 - 5.0
        );
        let _ = writeln!(
            s,
            r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" text-anchor="end">{tick:.2}</text>"#,
            x0 - 8.0,
            y + 4.0
        );
        tick += 0.05;
    }
    // boxes
    for (m, (name, vs)) in methods.iter().zip(samples).enumerate() {
        if vs.is_empty() {
            continue;
        }
        let mut sorted = vs.clone();
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap_or(std::cmp::Ordering::Equal));
        let (q1, med, q3) = quartiles(&sorted);
        let (min, max) = (sorted[0], sorted[sorted.len() - 1]);
        let cx = x0 + band * (m as f64 + 0.5);
        let half = band * 0.3;
        let _ = writeln!(
            s,
            r#"<line x1="{cx}" y1="{}" x2="{cx}" y2="{}" stroke="black"/>"#,
            y_of(max),
            y_of(q3)
        );
        let _ = writeln!(
            s,
            r#"<line x1="{cx}" y1="{}" x2="{cx}" y2="{}" stroke="black"/>"#,
            y_of(q1),
            y_of(min)
        );
        for v in [min, max] {
            let _ = writeln!(
                s,
                r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black"/>"#,
                cx - half / 2.0,
                y_of(v),
                cx + half / 2.0,
                y_of(v)
            );
        }
        let _ = writeln!(
            s,
            r#"<rect x="{}" y="{}" width="{}" height="{}" fill="lightsteelblue" stroke="black"/>"#,
            cx - half,
            y_of(q3),
            2.0 * half,
            (y_of(q1) - y_of(q3)).max(0.5)
        );
        let _ = writeln!(
            s,
            r#"<line x1="{}" y1="{}" x2="{}" y2="{}" stroke="black" stroke-width="2"/>"#,
            cx - half,
            y_of(med),
            cx + half,
            y_of(med)
        );
        let _ = writeln!(
            s,
            r#"<text x="{cx}" y="{}" font-family="sans-serif" font-size="12" text-anchor="middle">{name}</text>"#,
            y0 + plot_h + 20.0
        );
    }
    // target coverage reference line, in data coordinates
    let ty = y_of(target);
    let _ = writeln!(
        s,
        r#"<line x1="{x0}" y1="{ty}" x2="{}" y2="{ty}" stroke="crimson" stroke-dasharray="5 4" data-role="target-coverage" data-target="{target}"/>"#,
        x0 + plot_w
    );
    let _ = writeln!(
        s,
        r#"<text x="{}" y="{}" font-family="sans-serif" font-size="11" fill="crimson">{target}</text>"#,
        x0 + plot_w + 4.0,
        ty + 4.0
    );
    s.push_str("</svg>\n");
    s
}

/// Write results.csv, summary.csv, one coverage SVG per (setting,
/// epsilon) panel, and (when given) the resolved config echo. Returns the
/// paths written.
pub fn emit_report(
    table: &ResultsTable,
    outdir: &Path,
    alpha: f64,
    config_echo: Option<&str>,
) -> Result<Vec<PathBuf>> {
    if table.rows.is_empty() {
        return Err(Error::data("refusing to report an empty results table"));
    }
    std::fs::create_dir_all(outdir)?;
    let mut written = Vec::new();

    let results_path = outdir.join("results.csv");
    std::fs::write(&results_path, table.to_csv_string())?;
    written.push(results_path);

    let summary_path = outdir.join("summary.csv");
    std::fs::write(&summary_path, summary_csv(table))?;
    written.push(summary_path);

    let methods = table.methods();
    for (setting, epsilon) in table.panels() {
        let samples: Vec<Vec<f64>> = methods
            .iter()
            .map(|m| {
                table
                    .select(Some(m), Some(&setting), Some(epsilon))
                    .iter()
                    .map(|r| r.coverage)
                    .collect()
            })
            .collect();
        let title = format!("coverage by method (setting {setting}, epsilon {epsilon})");
        let svg = render_coverage_svg(&methods, &samples, alpha, &title);
        let name = format!("coverage_{}_eps{}.svg", sanitize_label(&setting), epsilon);
        let path = outdir.join(name);
        std::fs::write(&path, svg)?;
        written.push(path);
    }

    if let Some(echo) = config_echo {
        let cfg_path = outdir.join("config.txt");
        std::fs::write(&cfg_path, echo)?;
        written.push(cfg_path);
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::Setting;

    fn tiny_config() -> ExperimentConfig {
        ExperimentConfig {
            n_labeled: 40,
            n_test: 10,
            ..ExperimentConfig::default()
        }
    }

    #[test]
    fn config_defaults_and_roundtrip() {
        let cfg = ExperimentConfig::parse("").unwrap();
        assert_eq!(cfg.n_labeled, 200);
        assert_eq!(cfg.n_test, 100);
        assert_eq!(cfg.n_trials, 200);
        assert_eq!(cfg.alpha, 0.1);
        assert_eq!(cfg.d, 15);
        assert_eq!(cfg.methods.len(), 8);
        // the echo reparses to the same resolved config
        let echoed = ExperimentConfig::parse(&cfg.echo()).unwrap();
        assert_eq!(format!("{cfg:?}"), format!("{echoed:?}"));
    }

    #[test]
    fn config_rejects_unknown_keys_and_bad_values() {
        assert!(matches!(
            ExperimentConfig::parse("banana = 1").unwrap_err(),
            Error::Config(_)
        ));
        assert!(ExperimentConfig::parse("alpha = 1.5").is_err());
        assert!(ExperimentConfig::parse("alpha = zero").is_err());
        assert!(ExperimentConfig::parse("epsilon = 0.1,0.1").is_err());
        assert!(ExperimentConfig::parse("methods = scp,teleport").is_err());
        assert!(ExperimentConfig::parse("no_equals_here").is_err());
        assert!(ExperimentConfig::parse("detector = maxent").is_err());
    }

    #[test]
    fn config_parses_a_full_file() {
        let text = "
# comment
setting = b
d = 6
n_labeled = 80
n_test = 20
n_trials = 3
alpha = 0.2
epsilon = 0.0, 0.1
methods = scp, pdi, jdi
detector = zscore
z_threshold = 2.5
imputer = knn
knn_k = 3
score = cqr
seed = 7
outdir = /tmp/somewhere
outlier_mu = -1, 1
";
        let cfg = ExperimentConfig::parse(text).unwrap();
        assert_eq!(cfg.setting, Setting::B);
        assert_eq!(cfg.d, 6);
        assert_eq!(cfg.epsilons, vec![0.0, 0.1]);
        assert_eq!(cfg.methods, vec![Method::Scp, Method::Pdi, Method::Jdi]);
        assert_eq!(cfg.detector, DetectorChoice::ZScore { threshold: 2.5 });
        assert_eq!(cfg.imputer_kind, ImputerKind::Knn);
        assert_eq!(cfg.imputer_params.knn_k, 3);
        assert_eq!(cfg.score, ScoreKind::Cqr);
        assert_eq!(cfg.seed, 7);
        assert_eq!(cfg.outlier_mu, (-1.0, 1.0));
    }

    #[test]
    fn oracle_methods_on_external_data_require_injection() {
        let mut cfg = ExperimentConfig::default();
        cfg.dataset = Some(PathBuf::from("whatever.csv"));
        cfg.inject = false;
        let err = cfg.validate().unwrap_err();
        assert!(matches!(err, Error::Config(_)));
        cfg.methods = vec![Method::Scp, Method::Pdi];
        assert!(cfg.validate().is_ok());
        cfg.methods = vec![Method::Odi];
        assert!(cfg.validate().is_err());
        cfg.inject = true;
        assert!(cfg.validate().is_ok());
    }

    #[test]
    fn trial_seeds_differ_across_indices_and_agree_across_calls() {
        assert_eq!(trial_seed(1, 2, 3), trial_seed(1, 2, 3));
        assert_ne!(trial_seed(1, 2, 3), trial_seed(1, 2, 4));
        assert_ne!(trial_seed(1, 2, 3), trial_seed(1, 3, 3));
        assert_ne!(trial_seed(1, 2, 3), trial_seed(2, 2, 3));
    }

    #[test]
    fn small_experiment_runs_and_is_deterministic() {
        let mut cfg = tiny_config();
        cfg.n_trials = 3;
        cfg.d = 4;
        cfg.epsilons = vec![0.0, 0.3];
        cfg.methods = vec![Method::Scp, Method::Pdi, Method::Jdi, Method::Odi];
        cfg.seed = 42;
        let t1 = run_experiment(&cfg).unwrap();
        let t2 = run_experiment(&cfg).unwrap();
        assert_eq!(t1.to_csv_string(), t2.to_csv_string());
        // 2 epsilons x 3 trials x 4 methods
        assert_eq!(t1.rows.len(), 24);
        // row order is (epsilon, trial, method)
        assert_eq!(t1.rows[0].method, "scp");
        assert_eq!(t1.rows[0].epsilon, 0.0);
        assert_eq!(t1.rows[0].trial, 0);
        assert_eq!(t1.rows[4].trial, 1);
        assert_eq!(t1.rows[12].epsilon, 0.3);
        // coverages are proper fractions
        assert!(t1.rows.iter().all(|r| (0.0..=1.0).contains(&r.coverage)));
        // a different seed changes something
        cfg.seed = 43;
        let t3 = run_experiment(&cfg).unwrap();
        assert_ne!(t1.to_csv_string(), t3.to_csv_string());
    }

    #[test]
    fn results_csv_round_trips() {
        let mut cfg = tiny_config();
        cfg.n_trials = 2;
        cfg.d = 3;
        cfg.methods = vec![Method::Scp, Method::Pdi];
        let table = run_experiment(&cfg).unwrap();
        let text = table.to_csv_string();
        let back = ResultsTable::from_csv_str(&text).unwrap();
        assert_eq!(back.to_csv_string(), text);
    }

    #[test]
    fn dataset_round_trip_is_bitwise() {
        let spec = SettingSpec::setting_a(vec![1.0, -0.5, 0.25]);
        let data = generate(&spec, 20, 9).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("data.csv");
        write_dataset_csv(&data, &path).unwrap();
        let back = load_csv(&path).unwrap();
        assert_eq!(back, data);
    }

    #[test]
    fn load_csv_names_bad_cells() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("bad.csv");
        std::fs::write(&path, "x1,x2,y\n1.0,2.0,3.0\n1.0,NA,0.5\n").unwrap();
        let err = load_csv(&path).unwrap_err();
        let msg = err.to_string();
        assert!(msg.contains("row 2"), "message was: {msg}");
        assert!(msg.contains("column 2"), "message was: {msg}");
        // ragged row
        std::fs::write(&path, "x1,x2,y\n1.0,2.0\n").unwrap();
        assert!(load_csv(&path).is_err());
        // well-formed 2-row file
        std::fs::write(&path, "x1,x2,y\n1.0,2.0,3.0\n4.0,5.0,6.0\n").unwrap();
        let ds = load_csv(&path).unwrap();
        assert_eq!(ds.len(), 2);
        assert_eq!(ds.dim(), 2);
    }

    #[test]
    fn report_writes_expected_files() {
        let table = ResultsTable {
            rows: vec![ResultRow {
                method: "scp".into(),
                setting: "a".into(),
                epsilon: 0.1,
                trial: 0,
                coverage: 0.9,
                avg_length: 3.0,
                inf_frac: 0.0,
                tpr: f64::NAN,
                fdr: 0.0,
            }],
        };
        let dir = tempfile::tempdir().unwrap();
        let files = emit_report(&table, dir.path(), 0.1, None).unwrap();
        // single-row table: results.csv, summary.csv, one SVG
        assert_eq!(files.len(), 3);
        let svg =
            std::fs::read_to_string(dir.path().join("coverage_a_eps0.1.svg")).unwrap();
        assert_eq!(svg.matches("data-role=\"target-coverage\"").count(), 1);
        assert!(svg.contains("data-target=\"0.9\""));
        // summary means equal flat recomputation from results.csv
        let summary = std::fs::read_to_string(dir.path().join("summary.csv")).unwrap();
        let line = summary.lines().nth(1).unwrap();
        assert!(line.starts_with("scp,a,0.1,1,0.9,0,3,0,0,"));
    }

    #[test]
    fn summary_matches_flat_recompute() {
        let mut cfg = tiny_config();
        cfg.n_trials = 4;
        cfg.d = 3;
        cfg.methods = vec![Method::Scp, Method::Jdi];
        cfg.epsilons = vec![0.2];
        let table = run_experiment(&cfg).unwrap();
        for g in table.summaries() {
            let rows = table.select(Some(&g.method), Some(&g.setting), Some(g.epsilon));
            let flat: f64 =
                rows.iter().map(|r| r.coverage).sum::<f64>() / rows.len() as f64;
            assert!((g.mean_coverage - flat).abs() < 1e-15);
        }
    }

    #[test]
    fn external_dataset_mode_runs_without_oracle_methods() {
        let spec = SettingSpec::setting_a(vec![2.0, -1.0, 0.5, 0.0]);
        let data = generate(&spec, 80, 123).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("ext.csv");
        write_dataset_csv(&data, &path).unwrap();
        let mut cfg = ExperimentConfig::default();
        cfg.dataset = Some(path.clone());
        cfg.n_labeled = 50;
        cfg.n_test = 20;
        cfg.n_trials = 2;
        cfg.methods = vec![Method::Scp, Method::Pdi];
        cfg.epsilons = vec![0.0];
        let table = run_experiment(&cfg).unwrap();
        assert_eq!(table.rows.len(), 4);
        assert_eq!(table.rows[0].setting, "ext");
        // without injection there is no detection truth
        assert!(table.rows[0].tpr.is_nan());
        assert!(table.rows[0].fdr.is_nan());
        // with injection the oracle methods work and tpr is defined
        cfg.inject = true;
        cfg.epsilons = vec![0.5];
        cfg.outlier_value = Some(50.0);
        cfg.methods = vec![Method::Odi, Method::Baseline];
        let table = run_experiment(&cfg).unwrap();
        assert_eq!(table.rows.len(), 4);
        assert!(table.rows[0].tpr >= 0.0);
    }

    #[test]
    fn variance_screening_keeps_top_columns() {
        // column 1 has tiny variance; max_features = 2 should drop it
        let rows = vec![
            vec![10.0, 0.001, -5.0],
            vec![-10.0, 0.002, 5.0],
            vec![20.0, 0.001, -15.0],
            vec![-20.0, 0.002, 15.0],
        ];
        let data = LabeledDataset::new(
            FeatureMatrix::from_rows(&rows).unwrap(),
            vec![1.0, 2.0, 3.0, 4.0],
        )
        .unwrap();
        let mut cfg = ExperimentConfig::default();
        cfg.max_features = 2;
        let prepared = prepare_external(&cfg, data).unwrap();
        assert_eq!(prepared.dim(), 2);
        assert_eq!(prepared.features.get(0, 0), 10.0);
        assert_eq!(prepared.features.get(0, 1), -5.0);
    }

    #[test]
    fn log_columns_transform_and_reject_nonpositive() {
        let rows = vec![vec![1.0, 2.0], vec![std::f64::consts::E, 4.0]];
        let data = LabeledDataset::new(
            FeatureMatrix::from_rows(&rows).unwrap(),
            vec![0.0, 1.0],
        )
        .unwrap();
        let mut cfg = ExperimentConfig::default();
        cfg.log_columns = vec![0];
        let prepared = prepare_external(&cfg, data.clone()).unwrap();
        assert_eq!(prepared.features.get(0, 0), 0.0);
        assert!((prepared.features.get(1, 0) - 1.0).abs() < 1e-15);
        assert_eq!(prepared.features.get(1, 1), 4.0);
        cfg.log_columns = vec![5];
        assert!(prepare_external(&cfg, data.clone()).is_err());
        let neg = LabeledDataset::new(
            FeatureMatrix::from_rows(&[vec![-1.0, 2.0]]).unwrap(),
            vec![0.0],
        )
        .unwrap();
        cfg.log_columns = vec![0];
        assert!(prepare_external(&cfg, neg).is_err());
    }
}
