//! Synthetic data: three regression settings of increasing difficulty, a
//! cellwise contamination injector, and the adversarial single-point
//! construction that witnesses unbounded detect-impute error.
//!
//! All samplers are deterministic given their seeds and depend only on the
//! ChaCha stream, so datasets are bitwise reproducible across platforms.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::conformal::TestCase;
use crate::data::{CellMask, FeatureMatrix, LabeledDataset};
use crate::error::{Error, Result};
use crate::model::LinearModel;

/// Which synthetic regression setting to generate.
///
/// * `A` — linear signal, independent standard normal features, standard
///   normal noise (light tails, homoscedastic).
/// * `B` — additive sum of per-coordinate cubic B-splines, t(2) noise
///   (heavy tails).
/// * `C` — skewed/discrete feature mixture with sequential autocorrelation
///   and heteroskedastic t(2) noise scaled by the signal magnitude.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Setting {
    A,
    B,
    C,
}

/// Full description of a data-generating process. `seed` fixes the
/// *structure* (the spline coefficients of Setting B); the data draws take
/// a separate seed at [`generate`] time so one structure can produce many
/// independent datasets.
#[derive(Debug, Clone)]
pub struct SettingSpec {
    pub setting: Setting,
    pub d: usize,
    /// Linear coefficients (Settings A and C).
    pub beta: Vec<f64>,
    /// Per-coordinate knot grids, boundary knots included (Setting B).
    pub spline_knots: Vec<Vec<f64>>,
    /// Structure seed (Setting B spline coefficients).
    pub seed: u64,
}

/// The default knot grid: five interior knots equally spaced on [-3, 3].
fn default_grid() -> Vec<f64> {
    vec![-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0]
}

impl SettingSpec {
    /// Linear setting with the given coefficients.
    pub fn setting_a(beta: Vec<f64>) -> Self {
        SettingSpec {
            setting: Setting::A,
            d: beta.len(),
            beta,
            spline_knots: Vec::new(),
            seed: 0,
        }
    }

    /// Additive-spline setting in dimension `d`; `seed` fixes the spline
    /// coefficients.
    pub fn setting_b(d: usize, seed: u64) -> Self {
        SettingSpec {
            setting: Setting::B,
            d,
            beta: Vec::new(),
            spline_knots: (0..d).map(|_| default_grid()).collect(),
            seed,
        }
    }

    /// Mixture-feature setting with the given linear coefficients.
    pub fn setting_c(beta: Vec<f64>) -> Self {
        SettingSpec {
            setting: Setting::C,
            d: beta.len(),
            beta,
            spline_knots: Vec::new(),
            seed: 0,
        }
    }
}

/// How test-feature cells get contaminated: each cell independently with
/// probability `epsilon`, replaced either by `fixed_value` or by a draw
/// from N(mu_j, sigma_j) whose per-coordinate parameters are themselves
/// drawn once per trial from the given uniform ranges.
#[derive(Debug, Clone)]
pub struct ContaminationSpec {
    pub epsilon: f64,
    pub mu_range: (f64, f64),
    pub sigma_range: (f64, f64),
    pub fixed_value: Option<f64>,
}

impl ContaminationSpec {
    /// Random-outlier contamination with the default U(0,10) parameter
    /// ranges.
    pub fn random(epsilon: f64) -> Self {
        ContaminationSpec {
            epsilon,
            mu_range: (0.0, 10.0),
            sigma_range: (0.0, 10.0),
            fixed_value: None,
        }
    }

    /// Constant-value contamination (every outlying cell becomes `value`).
    pub fn fixed(epsilon: f64, value: f64) -> Self {
        ContaminationSpec {
            epsilon,
            mu_range: (0.0, 10.0),
            sigma_range: (0.0, 10.0),
            fixed_value: Some(value),
        }
    }

    fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.epsilon) {
            return Err(Error::InvalidParam {
                name: "epsilon",
                value: self.epsilon,
                range: "[0, 1]",
            });
        }
        for (name, (lo, hi)) in [("mu_range", self.mu_range), ("sigma_range", self.sigma_range)] {
            if !(lo <= hi) || !lo.is_finite() || !hi.is_finite() {
                return Err(Error::InvalidParam {
                    name,
                    value: lo,
                    range: "finite lo <= hi",
                });
            }
        }
        if let Some(v) = self.fixed_value {
            if !v.is_finite() {
                return Err(Error::NonFinite { what: "fixed_value" });
            }
        }
        Ok(())
    }
}

/// The per-trial realization of the contamination law: one (mu_j, sigma_j)
/// pair per coordinate (or the fixed value), shared by every test point of
/// the trial.
#[derive(Debug, Clone)]
pub struct OutlierLaw {
    epsilon: f64,
    fixed: Option<f64>,
    params: Vec<(f64, f64)>,
}

/// Draw the trial-level outlier-law parameters.
pub fn draw_outlier_law<R: Rng>(
    spec: &ContaminationSpec,
    d: usize,
    rng: &mut R,
) -> Result<OutlierLaw> {
    spec.validate()?;
    let params = (0..d)
        .map(|_| {
            let mu = spec.mu_range.0 + (spec.mu_range.1 - spec.mu_range.0) * rng.gen::<f64>();
            let sigma =
                spec.sigma_range.0 + (spec.sigma_range.1 - spec.sigma_range.0) * rng.gen::<f64>();
            (mu, sigma)
        })
        .collect();
    Ok(OutlierLaw {
        epsilon: spec.epsilon,
        fixed: spec.fixed_value,
        params,
    })
}

/// Contaminate one clean feature vector under an already-drawn trial law:
/// each cell independently with probability epsilon gets the outlier value.
pub fn contaminate_with<R: Rng>(
    law: &OutlierLaw,
    x_clean: &[f64],
    rng: &mut R,
) -> Result<TestCase> {
    if x_clean.len() != law.params.len() {
        return Err(Error::DimensionMismatch {
            expected: law.params.len(),
            got: x_clean.len(),
        });
    }
    let mut observed = x_clean.to_vec();
    let mut masked = Vec::new();
    for j in 0..x_clean.len() {
        if rng.gen::<f64>() < law.epsilon {
            masked.push(j);
            observed[j] = match law.fixed {
                Some(v) => v,
                None => {
                    let (mu, sigma) = law.params[j];
                    mu + sigma * std_normal(rng)
                }
            };
        }
    }
    TestCase::new(
        Some(x_clean.to_vec()),
        observed,
        Some(CellMask::from_indices(masked)),
        None,
    )
}

/// One-shot convenience wrapper: derive the trial law and contaminate a
/// single point, all from one seed.
pub fn contaminate(x_clean: &[f64], spec: &ContaminationSpec, seed: u64) -> Result<TestCase> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let law = draw_outlier_law(spec, x_clean.len(), &mut rng)?;
    contaminate_with(&law, x_clean, &mut rng)
}

/// Standard normal via Box-Muller (two uniforms per draw, no cached
/// state, so the stream position is predictable).
pub(crate) fn std_normal<R: Rng>(rng: &mut R) -> f64 {
    let u1: f64 = 1.0 - rng.gen::<f64>(); // in (0, 1]
    let u2: f64 = rng.gen();
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Student t with 2 degrees of freedom: N(0,1) / sqrt(chi2_2 / 2) with
/// chi2_2 = -2 ln U.
pub(crate) fn t2<R: Rng>(rng: &mut R) -> f64 {
    let z = std_normal(rng);
    let u: f64 = 1.0 - rng.gen::<f64>();
    let chi2 = -2.0 * u.ln();
    z / (chi2 / 2.0).sqrt()
}

/// Skew normal SN(0, 1, shape) via the two-normal representation
/// delta |Z1| + sqrt(1 - delta^2) Z2.
pub(crate) fn skew_normal<R: Rng>(rng: &mut R, shape: f64) -> f64 {
    let delta = shape / (1.0 + shape * shape).sqrt();
    let z1 = std_normal(rng);
    let z2 = std_normal(rng);
    delta * z1.abs() + (1.0 - delta * delta).sqrt() * z2
}

/// The Setting C per-cell feature law: an equal-weight mixture of N(0,1),
/// SN(0,1,5), and Bernoulli(1/2).
pub(crate) fn mixture_draw<R: Rng>(rng: &mut R) -> f64 {
    let u: f64 = rng.gen();
    if u < 1.0 / 3.0 {
        std_normal(rng)
    } else if u < 2.0 / 3.0 {
        skew_normal(rng, 5.0)
    } else {
        f64::from(rng.gen::<f64>() < 0.5)
    }
}

/// Sequential equal-weight smoothing over up to three previous
/// coordinates: x_j <- mean(x_j, x_{j-1}, x_{j-2}, x_{j-3}) over the lags
/// that exist, applied left to right using already-updated values.
fn smooth_row(row: &mut [f64]) {
    for j in 0..row.len() {
        let lo = j.saturating_sub(3);
        let count = (j - lo + 1) as f64;
        let sum: f64 = row[lo..=j].iter().sum();
        row[j] = sum / count;
    }
}

/// All cubic B-spline basis functions over `grid` (boundary knots
/// included) evaluated at `x`, via Cox-de Boor with the boundary knots
/// repeated to full multiplicity. Values outside the grid evaluate to 0.
pub(crate) fn bspline_basis(grid: &[f64], x: f64) -> Vec<f64> {
    const DEGREE: usize = 3;
    let g = grid.len();
    debug_assert!(g >= 2);
    // padded knot vector: first and last knots repeated DEGREE extra times
    let mut knots = Vec::with_capacity(g + 2 * DEGREE);
    for _ in 0..DEGREE {
        knots.push(grid[0]);
    }
    knots.extend_from_slice(grid);
    for _ in 0..DEGREE {
        knots.push(grid[g - 1]);
    }
    let n_basis = knots.len() - DEGREE - 1; // = g + 2 for cubic
    // degree-0 indicators
    let mut b = vec![0.0; knots.len() - 1];
    for (i, v) in b.iter_mut().enumerate() {
        let closed_right = i + 2 == knots.len() || knots[i + 1] == knots[knots.len() - 1];
        *v = if (knots[i] <= x && x < knots[i + 1]) || (closed_right && x == knots[i + 1]) {
            1.0
        } else {
            0.0
        };
    }
    // Cox-de Boor recursion
    for k in 1..=DEGREE {
        for i in 0..knots.len() - k - 1 {
            let left_den = knots[i + k] - knots[i];
            let right_den = knots[i + k + 1] - knots[i + 1];
            let left = if left_den > 0.0 {
                (x - knots[i]) / left_den * b[i]
            } else {
                0.0
            };
            let right = if right_den > 0.0 {
                (knots[i + k + 1] - x) / right_den * b[i + 1]
            } else {
                0.0
            };
            b[i] = left + right;
        }
    }
    b.truncate(n_basis);
    b
}

/// The additive spline signal: sum over coordinates of the coordinate's
/// basis expansion dotted with its coefficients.
pub(crate) fn spline_signal(knots: &[Vec<f64>], coefs: &[Vec<f64>], x: &[f64]) -> f64 {
    let mut total = 0.0;
    for j in 0..x.len() {
        let basis = bspline_basis(&knots[j], x[j]);
        total += basis.iter().zip(&coefs[j]).map(|(b, c)| b * c).sum::<f64>();
    }
    total
}

/// Per-coordinate spline coefficients for Setting B, drawn N(0,1) from the
/// structure seed.
fn spline_coefs(spec: &SettingSpec) -> Vec<Vec<f64>> {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    spec.spline_knots
        .iter()
        .map(|grid| {
            let n_basis = grid.len() + 2;
            (0..n_basis).map(|_| std_normal(&mut rng)).collect()
        })
        .collect()
}

fn linear_signal(beta: &[f64], x: &[f64]) -> f64 {
    beta.iter().zip(x).map(|(b, v)| b * v).sum()
}

/// Generate `n` labeled rows from the setting, deterministically in
/// (spec, n, seed).
pub fn generate(spec: &SettingSpec, n: usize, seed: u64) -> Result<LabeledDataset> {
    if n == 0 {
        return Err(Error::TooFewRows {
            what: "generated dataset",
            need: 1,
            got: 0,
        });
    }
    let d = spec.d;
    if d == 0 {
        return Err(Error::DimensionMismatch { expected: 1, got: 0 });
    }
    match spec.setting {
        Setting::A | Setting::C => {
            if spec.beta.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: spec.beta.len(),
                });
            }
        }
        Setting::B => {
            if spec.spline_knots.len() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: spec.spline_knots.len(),
                });
            }
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    match spec.setting {
        Setting::A => {
            let mut values = Vec::with_capacity(n * d);
            for _ in 0..n * d {
                values.push(std_normal(&mut rng));
            }
            let features = FeatureMatrix::new(n, d, values)?;
            let labels = (0..n)
                .map(|i| linear_signal(&spec.beta, features.row(i)) + std_normal(&mut rng))
                .collect();
            LabeledDataset::new(features, labels)
        }
        Setting::B => {
            let coefs = spline_coefs(spec);
            let mut values = Vec::with_capacity(n * d);
            for _ in 0..n * d {
                values.push(std_normal(&mut rng));
            }
            let features = FeatureMatrix::new(n, d, values)?;
            let labels = (0..n)
                .map(|i| spline_signal(&spec.spline_knots, &coefs, features.row(i)) + t2(&mut rng))
                .collect();
            LabeledDataset::new(features, labels)
        }
        Setting::C => {
            let draw_row = |rng: &mut ChaCha8Rng| {
                let mut row: Vec<f64> = (0..d).map(|_| mixture_draw(rng)).collect();
                smooth_row(&mut row);
                row
            };
            let rows: Vec<Vec<f64>> = (0..n).map(|_| draw_row(&mut rng)).collect();
            // scale normalizer E|f(X)|^3 from fresh clean draws
            let est_n = 10_000;
            let mut e_abs3 = 0.0;
            for _ in 0..est_n {
                let row = draw_row(&mut rng);
                e_abs3 += linear_signal(&spec.beta, &row).abs().powi(3);
            }
            e_abs3 /= est_n as f64;
            let features = FeatureMatrix::from_rows(&rows)?;
            let labels = (0..n)
                .map(|i| {
                    let f = linear_signal(&spec.beta, features.row(i));
                    let scale = if e_abs3 > 0.0 {
                        1.0 + 2.0 * f.abs().powi(3) / e_abs3
                    } else {
                        1.0
                    };
                    f + t2(&mut rng) * scale
                })
                .collect();
            LabeledDataset::new(features, labels)
        }
    }
}

/// The two-coordinate adversarial test point: coordinate 2 is contaminated
/// with a value crafted against the given affine model so that the model's
/// error at the observed point is at least M no matter how large M grows.
/// The crafted value absorbs the model's intercept, keeping the guarantee
/// for every affine model (for intercept 0 it reduces to the reference
/// construction). The clean point is (1/2, 1/2) with label 1 (the signal is
/// x_1 + x_2, noiseless).
pub fn adversarial_case(m_target: f64, model: &LinearModel) -> Result<TestCase> {
    if model.beta.len() != 2 {
        return Err(Error::DimensionMismatch {
            expected: 2,
            got: model.beta.len(),
        });
    }
    if !(m_target > 0.0) {
        return Err(Error::InvalidParam {
            name: "m_target",
            value: m_target,
            range: "(0, inf)",
        });
    }
    let b1 = model.beta[0];
    let b2 = model.beta[1];
    if b2 == 0.0 {
        return Err(Error::InvalidParam {
            name: "beta[1]",
            value: 0.0,
            range: "nonzero (construction undefined)",
        });
    }
    let value = if b1 >= 1.0 {
        (m_target + 1.0 - model.intercept) / b2
    } else {
        (m_target - b1 + 2.0 - model.intercept) / b2
    };
    TestCase::new(
        Some(vec![0.5, 0.5]),
        vec![0.5, value],
        Some(CellMask::from_indices(vec![1])),
        Some(1.0),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::predict;
    use crate::stats::{mean, sample_sd};

    #[test]
    fn setting_a_with_zero_beta_is_pure_noise() {
        let spec = SettingSpec::setting_a(vec![0.0; 4]);
        let data = generate(&spec, 10_000, 5).unwrap();
        let m = mean(&data.labels).unwrap();
        assert!(m.abs() < 0.05, "label mean {m}");
        let sd = sample_sd(&data.labels).unwrap();
        assert!((sd - 1.0).abs() < 0.05, "label sd {sd}");
    }

    #[test]
    fn setting_a_columns_are_standard_normal() {
        let spec = SettingSpec::setting_a(vec![1.0; 15]);
        let data = generate(&spec, 10_000, 11).unwrap();
        for j in 0..15 {
            let col = data.features.col(j);
            assert!(mean(&col).unwrap().abs() < 0.05, "column {j} mean");
            assert!((sample_sd(&col).unwrap() - 1.0).abs() < 0.05, "column {j} sd");
        }
    }

    #[test]
    fn generation_is_bitwise_deterministic_in_the_seed() {
        for spec in [
            SettingSpec::setting_a(vec![1.0, -2.0, 0.5]),
            SettingSpec::setting_b(3, 42),
            SettingSpec::setting_c(vec![1.0, -2.0, 0.5]),
        ] {
            let a = generate(&spec, 50, 99).unwrap();
            let b = generate(&spec, 50, 99).unwrap();
            assert_eq!(a, b);
            let c = generate(&spec, 50, 100).unwrap();
            assert_ne!(a, c);
        }
    }

    #[test]
    fn bspline_basis_is_a_partition_of_unity_inside_the_grid() {
        let grid = default_grid();
        for i in 0..=60 {
            let x = -3.0 + 6.0 * i as f64 / 60.0;
            let basis = bspline_basis(&grid, x);
            assert_eq!(basis.len(), grid.len() + 2);
            let total: f64 = basis.iter().sum();
            assert!((total - 1.0).abs() < 1e-12, "sum {total} at x = {x}");
            assert!(basis.iter().all(|&v| v >= 0.0));
        }
        // outside the grid everything vanishes
        assert!(bspline_basis(&grid, 4.0).iter().all(|&v| v == 0.0));
        assert!(bspline_basis(&grid, -3.5).iter().all(|&v| v == 0.0));
    }

    #[test]
    fn additive_signal_with_one_active_coordinate_ignores_the_rest() {
        let knots = vec![default_grid(), default_grid(), default_grid()];
        let mut coefs = vec![vec![0.0; 9], vec![0.0; 9], vec![0.0; 9]];
        coefs[1] = (0..9).map(|k| (k as f64) - 4.0).collect();
        let base = spline_signal(&knots, &coefs, &[0.3, 1.2, -0.7]);
        for (j, shift) in [(0usize, 2.0), (2usize, -1.5)] {
            let mut x = [0.3, 1.2, -0.7];
            x[j] += shift;
            assert_eq!(spline_signal(&knots, &coefs, &x), base);
        }
        let mut x = [0.3, 1.2, -0.7];
        x[1] += 0.5;
        assert_ne!(spline_signal(&knots, &coefs, &x), base);
    }

    #[test]
    fn setting_c_first_column_matches_an_independent_mixture_sampler() {
        // column 0 is untouched by the sequential smoothing, so its
        // marginal is the raw mixture; compare third moments against a
        // direct sampler written with its own stream
        let spec = SettingSpec::setting_c(vec![1.0, 1.0, 1.0]);
        let data = generate(&spec, 100_000, 3).unwrap();
        let col0 = data.features.col(0);
        let m3 = col0.iter().map(|v| v.powi(3)).sum::<f64>() / col0.len() as f64;
        let mut rng = ChaCha8Rng::seed_from_u64(777);
        let mut ref_m3 = 0.0;
        let n_ref = 100_000;
        for _ in 0..n_ref {
            ref_m3 += mixture_draw(&mut rng).powi(3);
        }
        ref_m3 /= n_ref as f64;
        assert!((m3 - ref_m3).abs() < 0.08, "third moments {m3} vs {ref_m3}");
    }

    #[test]
    fn smoothing_averages_available_lags_sequentially() {
        let mut row = [8.0, 4.0, 0.0, 12.0, 4.0];
        smooth_row(&mut row);
        // j=0 untouched; j=1 averages the updated x0
        assert_eq!(row[0], 8.0);
        assert_eq!(row[1], 6.0);
        assert_eq!(row[2], (0.0 + 6.0 + 8.0) / 3.0);
        assert_eq!(row[3], (12.0 + row[2] + 6.0 + 8.0) / 4.0);
        assert_eq!(row[4], (4.0 + row[3] + row[2] + 6.0) / 4.0);
    }

    #[test]
    fn contaminate_edge_epsilons() {
        let x = vec![1.0, 2.0, 3.0];
        let none = contaminate(&x, &ContaminationSpec::random(0.0), 9).unwrap();
        assert_eq!(none.x_observed, x);
        assert!(none.true_mask.as_ref().unwrap().is_empty());
        let all = contaminate(&x, &ContaminationSpec::random(1.0), 9).unwrap();
        assert_eq!(all.true_mask.as_ref().unwrap().len(), 3);
    }

    #[test]
    fn contaminated_fraction_matches_the_binomial_rate() {
        let d = 15;
        let x = vec![0.0; d];
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for (epsilon, lower_claim) in [(0.2, 0.46), (0.05, 0.46)] {
            let spec = ContaminationSpec::random(epsilon);
            let trials = 10_000;
            let mut nonempty = 0usize;
            let mut cells = 0usize;
            let law = draw_outlier_law(&spec, d, &mut rng).unwrap();
            for _ in 0..trials {
                let t = contaminate_with(&law, &x, &mut rng).unwrap();
                let k = t.true_mask.as_ref().unwrap().len();
                cells += k;
                if k > 0 {
                    nonempty += 1;
                }
            }
            let frac = nonempty as f64 / trials as f64;
            let want = 1.0 - (1.0 - epsilon).powi(d as i32);
            let se = (want * (1.0 - want) / trials as f64).sqrt();
            assert!(
                (frac - want).abs() < 3.0 * se + 1e-9,
                "eps {epsilon}: nonempty fraction {frac} vs {want}"
            );
            // at both epsilons well over 46% of points carry an outlier
            assert!(frac > lower_claim);
            // mean masked-cell rate is epsilon
            let rate = cells as f64 / (trials * d) as f64;
            let cell_se = (epsilon * (1.0 - epsilon) / (trials * d) as f64).sqrt();
            assert!((rate - epsilon).abs() < 3.0 * cell_se + 1e-9);
        }
    }

    #[test]
    fn fixed_value_contamination_writes_the_constant() {
        let x = vec![0.0; 6];
        let t = contaminate(&x, &ContaminationSpec::fixed(1.0, 10.0), 4).unwrap();
        assert!(t.x_observed.iter().all(|&v| v == 10.0));
        // observed equals clean off the mask, exactly
        let partial = contaminate(&x, &ContaminationSpec::fixed(0.4, 10.0), 4).unwrap();
        let mask = partial.true_mask.as_ref().unwrap();
        for j in 0..6 {
            if mask.contains(j) {
                assert_eq!(partial.x_observed[j], 10.0);
            } else {
                assert_eq!(partial.x_observed[j], x[j]);
            }
        }
    }

    #[test]
    fn adversarial_values_match_the_two_branches() {
        let m1 = LinearModel { beta: vec![1.0, 1.0], intercept: 0.0 };
        let t = adversarial_case(10.0, &m1).unwrap();
        assert_eq!(t.x_observed, vec![0.5, 11.0]);
        assert_eq!(t.true_mask.as_ref().unwrap(), &CellMask::from_indices(vec![1]));
        let m2 = LinearModel { beta: vec![0.5, 2.0], intercept: 0.0 };
        let t = adversarial_case(10.0, &m2).unwrap();
        assert_eq!(t.x_observed[1], 5.75);
    }

    #[test]
    fn adversarial_error_exceeds_the_target() {
        for m_target in [10.0, 100.0] {
            for beta in [vec![1.0, 1.0], vec![0.5, 2.0], vec![2.0, -1.0]] {
                for intercept in [0.0, 1.7, -2.3] {
                    let model = LinearModel { beta: beta.clone(), intercept };
                    let t = adversarial_case(m_target, &model).unwrap();
                    let err = (t.y_true.unwrap() - predict(&model, &t.x_observed).unwrap()).abs();
                    assert!(
                        err >= m_target,
                        "error {err} below target {m_target} (intercept {intercept})"
                    );
                }
            }
        }
    }

    #[test]
    fn adversarial_rejects_zero_second_coefficient() {
        let model = LinearModel { beta: vec![1.0, 0.0], intercept: 0.0 };
        assert!(matches!(
            adversarial_case(10.0, &model).unwrap_err(),
            Error::InvalidParam { name: "beta[1]", .. }
        ));
    }

    #[test]
    fn t2_and_skew_normal_have_sane_moments() {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let n = 50_000;
        // t(2) is symmetric: the median should be near 0
        let mut draws: Vec<f64> = (0..n).map(|_| t2(&mut rng)).collect();
        draws.sort_by(|a, b| a.partial_cmp(b).unwrap());
        assert!(draws[n / 2].abs() < 0.02);
        // SN(0,1,5) has mean delta * sqrt(2/pi)
        let sn_mean = (0..n).map(|_| skew_normal(&mut rng, 5.0)).sum::<f64>() / n as f64;
        let delta = 5.0 / 26f64.sqrt();
        let want = delta * (2.0 / std::f64::consts::PI).sqrt();
        assert!((sn_mean - want).abs() < 0.02, "skew mean {sn_mean} vs {want}");
    }
}
