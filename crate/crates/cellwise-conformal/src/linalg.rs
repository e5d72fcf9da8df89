//! Minimal dense linear algebra: symmetric positive-definite solves for
//! ridge-regularized normal equations. Everything here is crate-private
//! plumbing for the model and imputation modules.

use crate::error::{Error, Result};

/// Solve A x = b for symmetric positive-definite A (row-major n*n) by an
/// in-place Cholesky factorization. Fails only if a pivot is not strictly
/// positive, which the ridge term rules out for well-formed inputs.
pub(crate) fn solve_spd(mut a: Vec<f64>, mut b: Vec<f64>, n: usize) -> Result<Vec<f64>> {
    debug_assert_eq!(a.len(), n * n);
    debug_assert_eq!(b.len(), n);
    // factor A = L L^T, storing L in the lower triangle
    for j in 0..n {
        let mut diag = a[j * n + j];
        for k in 0..j {
            diag -= a[j * n + k] * a[j * n + k];
        }
        if !(diag > 0.0) || !diag.is_finite() {
            return Err(Error::DegenerateConstruction);
        }
        let diag = diag.sqrt();
        a[j * n + j] = diag;
        for i in (j + 1)..n {
            let mut v = a[i * n + j];
            for k in 0..j {
                v -= a[i * n + k] * a[j * n + k];
            }
            a[i * n + j] = v / diag;
        }
    }
    // forward solve L y = b
    for i in 0..n {
        let mut v = b[i];
        for k in 0..i {
            v -= a[i * n + k] * b[k];
        }
        b[i] = v / a[i * n + i];
    }
    // back solve L^T x = y
    for i in (0..n).rev() {
        let mut v = b[i];
        for k in (i + 1)..n {
            v -= a[k * n + i] * b[k];
        }
        b[i] = v / a[i * n + i];
    }
    Ok(b)
}

/// Ridge-regularized least squares of y on the given rows (optionally with
/// an appended intercept column of ones). The ridge term is
/// `lambda_rel * trace(A'A) / p` on every diagonal entry, which keeps the
/// regularization scale-free. Returns the p coefficients (intercept last
/// when requested).
pub(crate) fn ridge_least_squares<'a, I>(
    rows: I,
    y: &[f64],
    add_intercept: bool,
    lambda_rel: f64,
) -> Result<Vec<f64>>
where
    I: Iterator<Item = &'a [f64]> + Clone,
{
    let d = rows.clone().next().map_or(0, |r| r.len());
    let p = d + usize::from(add_intercept);
    if p == 0 {
        return Err(Error::DegenerateConstruction);
    }
    let mut gram = vec![0.0; p * p];
    let mut rhs = vec![0.0; p];
    let mut count = 0usize;
    for (row, &yi) in rows.zip(y) {
        debug_assert_eq!(row.len(), d);
        let aug = |j: usize| if j < d { row[j] } else { 1.0 };
        for j in 0..p {
            let xj = aug(j);
            rhs[j] += xj * yi;
            for k in j..p {
                gram[j * p + k] += xj * aug(k);
            }
        }
        count += 1;
    }
    if count == 0 {
        return Err(Error::EmptyResiduals);
    }
    // mirror the upper triangle and add the ridge term
    let trace: f64 = (0..p).map(|j| gram[j * p + j]).sum();
    let lambda = lambda_rel * trace / p as f64;
    for j in 0..p {
        gram[j * p + j] += lambda;
        for k in (j + 1)..p {
            gram[k * p + j] = gram[j * p + k];
        }
    }
    solve_spd(gram, rhs, p)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn solves_a_known_spd_system() {
        // A = [[4,2],[2,3]], b = [10, 9] -> x = [1.5, 2]
        let x = solve_spd(vec![4.0, 2.0, 2.0, 3.0], vec![10.0, 9.0], 2).unwrap();
        assert!((x[0] - 1.5).abs() < 1e-12);
        assert!((x[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_indefinite_matrices() {
        let err = solve_spd(vec![1.0, 2.0, 2.0, 1.0], vec![1.0, 1.0], 2).unwrap_err();
        assert!(matches!(err, Error::DegenerateConstruction));
    }

    #[test]
    fn ridge_recovers_exact_linear_coefficients() {
        // y = 2 x0 - x1 + 1 with no noise
        let rows: Vec<Vec<f64>> = (0..50)
            .map(|i| vec![(i % 7) as f64, (i % 5) as f64 - 2.0])
            .collect();
        let y: Vec<f64> = rows.iter().map(|r| 2.0 * r[0] - r[1] + 1.0).collect();
        let beta = ridge_least_squares(rows.iter().map(|r| r.as_slice()), &y, true, 1e-8).unwrap();
        assert!((beta[0] - 2.0).abs() < 1e-6);
        assert!((beta[1] + 1.0).abs() < 1e-6);
        assert!((beta[2] - 1.0).abs() < 1e-6);
    }

    #[test]
    fn ridge_survives_exact_collinearity() {
        // second column is twice the first; plain normal equations are
        // singular, the ridge term must keep the solve finite
        let rows: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64, 2.0 * i as f64]).collect();
        let y: Vec<f64> = rows.iter().map(|r| r[0] + r[1]).collect();
        let beta = ridge_least_squares(rows.iter().map(|r| r.as_slice()), &y, true, 1e-6).unwrap();
        assert!(beta.iter().all(|b| b.is_finite()));
        // predictions still reproduce the targets
        let pred = 5.0 * beta[0] + 10.0 * beta[1] + beta[2];
        assert!((pred - 15.0).abs() < 1e-3);
    }
}
