//! Finite-sample conformal quantiles.
//!
//! For scores r_1..r_n and miscoverage level alpha, the upper conformal
//! quantile is the ceil((1-alpha)(n+1))-th smallest value, defined as +inf
//! when that rank exceeds n; the lower quantile is the ceil(alpha(n+1))-th
//! smallest, -inf when the rank is below 1. These are the exact quantities
//! that make split conformal intervals valid at level 1-alpha.

use crate::error::{Error, Result};

/// ceil(x) computed so that values within 1e-9 of an integer snap to it.
/// (1-alpha)(n+1) is mathematically an integer for many common alpha/n
/// pairs but lands just above it in floating point, e.g. 0.9 * 110 =
/// 99.00000000000001; a raw ceil would then demand rank 100 and return
/// +inf where the exact rank is 99.
fn nudged_ceil(x: f64) -> f64 {
    let nearest = x.round();
    if (x - nearest).abs() < 1e-9 {
        nearest
    } else {
        x.ceil()
    }
}

fn validate(scores: &[f64], alpha: f64) -> Result<()> {
    if scores.is_empty() {
        return Err(Error::EmptyResiduals);
    }
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(Error::InvalidParam {
            name: "alpha",
            value: alpha,
            range: "(0, 1)",
        });
    }
    if scores.iter().any(|v| !v.is_finite()) {
        return Err(Error::NonFinite { what: "scores" });
    }
    Ok(())
}

/// k-th smallest (1-based) of the values, by full sort.
fn kth_smallest(scores: &[f64], k: usize) -> f64 {
    let mut sorted = scores.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
    sorted[k - 1]
}

/// Upper conformal quantile: the ceil((1-alpha)(n+1))-th smallest score,
/// +inf when the rank exceeds n.
pub fn quantile_hi(scores: &[f64], alpha: f64) -> Result<f64> {
    validate(scores, alpha)?;
    let n = scores.len();
    let rank = nudged_ceil((1.0 - alpha) * (n as f64 + 1.0));
    if rank > n as f64 {
        return Ok(f64::INFINITY);
    }
    Ok(kth_smallest(scores, rank as usize))
}

/// Lower conformal quantile: the ceil(alpha(n+1))-th smallest score,
/// -inf when the rank is below 1 and +inf when it exceeds n (the rank can
/// reach n+1 when alpha > n/(n+1); both ends follow the same augmented
/// multiset convention as [`quantile_hi`]).
pub fn quantile_lo(scores: &[f64], alpha: f64) -> Result<f64> {
    validate(scores, alpha)?;
    let n = scores.len();
    let rank = nudged_ceil(alpha * (n as f64 + 1.0));
    if rank < 1.0 {
        return Ok(f64::NEG_INFINITY);
    }
    if rank > n as f64 {
        return Ok(f64::INFINITY);
    }
    Ok(kth_smallest(scores, rank as usize))
}
