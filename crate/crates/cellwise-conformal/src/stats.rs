//! Small numeric toolbox: robust location/scale, moments, the regularized
//! incomplete gamma function, chi-square quantiles, and the bounded
//! redescending transform used when pooling neighbor information in the
//! correlation-based detector.

use crate::error::{Error, Result};

/// Consistency factor making median absolute deviation estimate the
/// standard deviation at the normal distribution (1 / Phi^-1(0.75)).
pub const MAD_CONSISTENCY: f64 = 1.4826;

/// Arithmetic mean. Empty input returns NaN-free 0 is wrong, so error.
pub fn mean(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyResiduals);
    }
    Ok(values.iter().sum::<f64>() / values.len() as f64)
}

/// Sample standard deviation with the n-1 denominator.
pub fn sample_sd(values: &[f64]) -> Result<f64> {
    if values.len() < 2 {
        return Err(Error::TooFewRows {
            what: "sample standard deviation",
            need: 2,
            got: values.len(),
        });
    }
    let m = mean(values)?;
    let ss: f64 = values.iter().map(|v| (v - m) * (v - m)).sum();
    Ok((ss / (values.len() - 1) as f64).sqrt())
}

/// Median by full sort; averages the two central order statistics at even n.
pub fn median(values: &[f64]) -> Result<f64> {
    if values.is_empty() {
        return Err(Error::EmptyResiduals);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let n = sorted.len();
    Ok(if n % 2 == 1 {
        sorted[n / 2]
    } else {
        0.5 * (sorted[n / 2 - 1] + sorted[n / 2])
    })
}

/// Raw median absolute deviation (no consistency factor).
pub fn mad(values: &[f64]) -> Result<f64> {
    let m = median(values)?;
    let devs: Vec<f64> = values.iter().map(|v| (v - m).abs()).collect();
    median(&devs)
}

/// Robust scale 1.4826 * MAD, the usual normal-consistent estimate.
pub fn robust_scale(values: &[f64]) -> Result<f64> {
    Ok(MAD_CONSISTENCY * mad(values)?)
}

/// ln Gamma(x) via the Lanczos approximation (g = 7, 9 coefficients);
/// accurate to ~1e-13 over the positive axis, with reflection below 0.5.
pub fn ln_gamma(x: f64) -> f64 {
    const COEFFS: [f64; 9] = [
        0.99999999999980993,
        676.5203681218851,
        -1259.1392167224028,
        771.32342877765313,
        -176.61502916214059,
        12.507343278686905,
        -0.13857109526572012,
        9.9843695780195716e-6,
        1.5056327351493116e-7,
    ];
    use std::f64::consts::PI;
    if x < 0.5 {
        // reflection formula keeps the series in its accurate range
        return PI.ln() - (PI * x).sin().abs().ln() - ln_gamma(1.0 - x);
    }
    let z = x - 1.0;
    let mut acc = COEFFS[0];
    for (i, &c) in COEFFS.iter().enumerate().skip(1) {
        acc += c / (z + i as f64);
    }
    let t = z + 7.5;
    0.5 * (2.0 * PI).ln() + (z + 0.5) * t.ln() - t + acc.ln()
}

/// Regularized lower incomplete gamma P(a, x) = gamma(a, x) / Gamma(a),
/// series expansion below a + 1, Lentz continued fraction above.
pub fn reg_gamma_lower(a: f64, x: f64) -> f64 {
    debug_assert!(a > 0.0 && x >= 0.0);
    if x == 0.0 {
        return 0.0;
    }
    let log_prefix = a * x.ln() - x - ln_gamma(a);
    if x < a + 1.0 {
        // ascending series: sum_k x^k / (a(a+1)..(a+k))
        let mut term = 1.0 / a;
        let mut sum = term;
        let mut denom = a;
        for _ in 0..500 {
            denom += 1.0;
            term *= x / denom;
            sum += term;
            if term.abs() < sum.abs() * 1e-15 {
                break;
            }
        }
        (log_prefix.exp() * sum).min(1.0)
    } else {
        // Lentz's algorithm for the upper-tail continued fraction
        const TINY: f64 = 1e-300;
        let mut b = x + 1.0 - a;
        let mut c = 1.0 / TINY;
        let mut d = 1.0 / b;
        let mut h = d;
        for i in 1..500 {
            let an = -(i as f64) * (i as f64 - a);
            b += 2.0;
            d = an * d + b;
            if d.abs() < TINY {
                d = TINY;
            }
            c = b + an / c;
            if c.abs() < TINY {
                c = TINY;
            }
            d = 1.0 / d;
            let delta = d * c;
            h *= delta;
            if (delta - 1.0).abs() < 1e-15 {
                break;
            }
        }
        (1.0 - log_prefix.exp() * h).max(0.0)
    }
}

/// Chi-square quantile: the x with P(dof/2, x/2) = p, found by bisection.
pub fn chi2_quantile(p: f64, dof: f64) -> Result<f64> {
    if !(0.0 < p && p < 1.0) {
        return Err(Error::InvalidParam {
            name: "p",
            value: p,
            range: "(0, 1)",
        });
    }
    if !(dof > 0.0) {
        return Err(Error::InvalidParam {
            name: "dof",
            value: dof,
            range: "(0, inf)",
        });
    }
    let cdf = |x: f64| reg_gamma_lower(dof / 2.0, x / 2.0);
    let mut hi = 1.0;
    while cdf(hi) < p {
        hi *= 2.0;
        if hi > 1e9 {
            break;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if cdf(mid) < p {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Bounded redescending transform: identity inside [-1.5, 1.5], a smooth
/// tanh taper down to zero on 1.5 < |z| <= 4, and exactly zero beyond 4.
/// The constants make the curve continuous at |z| = 1.5.
pub fn wrap(z: f64) -> f64 {
    const B: f64 = 1.5;
    const C: f64 = 4.0;
    const Q1: f64 = 1.540793;
    const Q2: f64 = 0.8622731;
    let a = z.abs();
    if a <= B {
        z
    } else if a <= C {
        Q1 * (Q2 * (C - a)).tanh() * z.signum()
    } else {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn median_and_mad_match_hand_values() {
        assert_eq!(median(&[1.0, 3.0, 2.0]).unwrap(), 2.0);
        assert_eq!(median(&[1.0, 2.0, 3.0, 4.0]).unwrap(), 2.5);
        let nine: Vec<f64> = (1..=9).map(|v| v as f64).collect();
        assert_eq!(mad(&nine).unwrap(), 2.0);
        assert!((robust_scale(&nine).unwrap() - 2.9652).abs() < 1e-12);
    }

    #[test]
    fn moments_match_hand_values() {
        assert_eq!(mean(&[1.0, 2.0, 6.0]).unwrap(), 3.0);
        assert!((sample_sd(&[0.0, 2.0]).unwrap() - 2f64.sqrt()).abs() < 1e-15);
        assert!(mean(&[]).is_err());
        assert!(sample_sd(&[1.0]).is_err());
    }

    #[test]
    fn ln_gamma_matches_factorials_and_half_integers() {
        // Gamma(n) = (n-1)!
        assert!((ln_gamma(5.0) - 24f64.ln()).abs() < 1e-12);
        assert!((ln_gamma(1.0)).abs() < 1e-13);
        // Gamma(1/2) = sqrt(pi)
        assert!((ln_gamma(0.5) - 0.5 * std::f64::consts::PI.ln()).abs() < 1e-12);
        // Gamma(3/2) = sqrt(pi)/2
        let want = 0.5 * std::f64::consts::PI.ln() - 2f64.ln();
        assert!((ln_gamma(1.5) - want).abs() < 1e-12);
    }

    #[test]
    fn incomplete_gamma_matches_exponential_cdf() {
        // P(1, x) = 1 - exp(-x) exactly
        for &x in &[0.1, 0.5, 1.0, 2.0, 5.0, 10.0] {
            let want = 1.0 - (-x as f64).exp();
            assert!((reg_gamma_lower(1.0, x) - want).abs() < 1e-12, "x={x}");
        }
        assert_eq!(reg_gamma_lower(0.5, 0.0), 0.0);
    }

    #[test]
    fn chi2_quantiles_match_reference_values() {
        // reference values for 1 degree of freedom
        let cases = [
            (0.5, 0.454936423119572),
            (0.90, 2.705543454095404),
            (0.95, 3.841458820694124),
            (0.99, 6.634896601021213),
        ];
        for (p, want) in cases {
            let got = chi2_quantile(p, 1.0).unwrap();
            assert!((got - want).abs() < 1e-4, "p={p}: got {got}, want {want}");
        }
        // the detection thresholds the experiments rely on
        assert!((chi2_quantile(0.95, 1.0).unwrap().sqrt() - 1.9600).abs() < 1e-3);
        assert!((chi2_quantile(0.99, 1.0).unwrap().sqrt() - 2.5758).abs() < 1e-3);
        // 2 degrees of freedom is exactly -2 ln(1-p)
        let got = chi2_quantile(0.95, 2.0).unwrap();
        assert!((got - (-2.0 * 0.05f64.ln())).abs() < 1e-6);
    }

    #[test]
    fn wrap_is_identity_inside_and_zero_outside() {
        assert_eq!(wrap(0.7), 0.7);
        assert_eq!(wrap(-1.5), -1.5);
        assert_eq!(wrap(4.1), 0.0);
        assert_eq!(wrap(-10.0), 0.0);
        // continuity at the inner knot
        assert!((wrap(1.5 + 1e-9) - 1.5).abs() < 1e-5);
        // continuity at the outer knot
        assert!(wrap(4.0).abs() < 1e-12);
    }

    proptest! {
        #[test]
        fn chi2_quantile_inverts_the_cdf(p in 0.01f64..0.995, dof in 0.5f64..20.0) {
            let x = chi2_quantile(p, dof).unwrap();
            prop_assert!((reg_gamma_lower(dof / 2.0, x / 2.0) - p).abs() < 1e-9);
        }

        #[test]
        fn wrap_is_odd_and_bounded(z in -50.0f64..50.0) {
            prop_assert!((wrap(-z) + wrap(z)).abs() < 1e-12);
            prop_assert!(wrap(z).abs() <= 1.5 + 1e-9);
            // the transform never increases magnitude
            prop_assert!(wrap(z).abs() <= z.abs() + 1e-9);
        }

        #[test]
        fn median_between_min_and_max(values in proptest::collection::vec(-1e6f64..1e6, 1..50)) {
            let m = median(&values).unwrap();
            let lo = values.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = values.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            prop_assert!(lo <= m && m <= hi);
        }

        #[test]
        fn mad_is_translation_invariant(values in proptest::collection::vec(-1e3f64..1e3, 2..40), shift in -1e3f64..1e3) {
            let base = mad(&values).unwrap();
            let shifted: Vec<f64> = values.iter().map(|v| v + shift).collect();
            prop_assert!((mad(&shifted).unwrap() - base).abs() < 1e-7);
        }
    }
}
