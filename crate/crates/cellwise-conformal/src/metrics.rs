//! Evaluation statistics: empirical coverage, average finite length plus
//! the infinite-width fraction, detection TPR/FDR, and the Jaccard
//! similarity diagnostic for false-discovery sets.

use crate::data::{CellMask, PredictionInterval};
use crate::error::{Error, Result};

/// One test point's interval outcome.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PointRecord {
    pub covered: bool,
    /// Interval length; may be `f64::INFINITY`.
    pub length: f64,
}

/// One test point's detection outcome against the known truth.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct DetectionRecord {
    /// |detected ∩ truth|
    pub true_positives: usize,
    /// |detected \ truth|
    pub false_positives: usize,
    /// |truth|
    pub n_true_outliers: usize,
}

impl DetectionRecord {
    pub fn from_masks(detected: &CellMask, truth: &CellMask) -> Self {
        let tp = detected.intersection(truth).len();
        DetectionRecord {
            true_positives: tp,
            false_positives: detected.len() - tp,
            n_true_outliers: truth.len(),
        }
    }
}

/// Accumulated outcomes of one method over one trial's test batch.
#[derive(Debug, Clone, Default)]
pub struct TrialResult {
    pub method: String,
    pub points: Vec<PointRecord>,
    pub detections: Vec<DetectionRecord>,
    /// Optional per-point Jaccard similarities between false-discovery
    /// sets (a diagnostic, not part of the standard report).
    pub jaccard_samples: Option<Vec<f64>>,
}

impl TrialResult {
    pub fn new(method: impl Into<String>) -> Self {
        TrialResult {
            method: method.into(),
            ..TrialResult::default()
        }
    }

    pub fn record_interval(&mut self, interval: &PredictionInterval, y: f64) {
        self.points.push(PointRecord {
            covered: interval.covers(y),
            length: interval.length(),
        });
    }

    pub fn record_detection(&mut self, detected: &CellMask, truth: &CellMask) {
        self.detections.push(DetectionRecord::from_masks(detected, truth));
    }

    pub fn coverage(&self) -> Result<f64> {
        coverage(&self.points)
    }

    /// (average finite length — NaN when every interval is infinite,
    ///  fraction of infinite intervals)
    pub fn length_stats(&self) -> (f64, f64) {
        average_length(&self.points)
    }

    pub fn tpr_fdr(&self) -> (f64, f64) {
        tpr_fdr_records(&self.detections)
    }

    /// Merge another batch of records into this one (same method).
    pub fn absorb(&mut self, other: &TrialResult) {
        self.points.extend_from_slice(&other.points);
        self.detections.extend_from_slice(&other.detections);
        if let Some(xs) = &other.jaccard_samples {
            self.jaccard_samples
                .get_or_insert_with(Vec::new)
                .extend_from_slice(xs);
        }
    }
}

/// Fraction of recorded points whose interval covered the label.
/// Intervals with an infinite endpoint always cover, so they count.
pub fn coverage(records: &[PointRecord]) -> Result<f64> {
    if records.is_empty() {
        return Err(Error::data("coverage of an empty record set"));
    }
    let hits = records.iter().filter(|r| r.covered).count();
    Ok(hits as f64 / records.len() as f64)
}

/// Average length over finite intervals only (NaN when none are finite),
/// together with the fraction of infinite intervals.
pub fn average_length(records: &[PointRecord]) -> (f64, f64) {
    let mut finite_sum = 0.0;
    let mut finite_n = 0usize;
    let mut infinite = 0usize;
    for r in records {
        if r.length.is_finite() {
            finite_sum += r.length;
            finite_n += 1;
        } else {
            infinite += 1;
        }
    }
    let avg = if finite_n > 0 {
        finite_sum / finite_n as f64
    } else {
        f64::NAN
    };
    let frac = if records.is_empty() {
        0.0
    } else {
        infinite as f64 / records.len() as f64
    };
    (avg, frac)
}

/// Detection quality over aligned (detected, truth) mask lists.
///
/// TPR = |detected ∩ truth| / |truth| averaged over points with a
/// nonempty truth set (NaN when no such point exists). FDR =
/// |detected \ truth| / max(|detected|, 1) averaged over all points.
pub fn tpr_fdr(detected: &[CellMask], truth: &[CellMask]) -> Result<(f64, f64)> {
    if detected.len() != truth.len() {
        return Err(Error::DimensionMismatch {
            expected: truth.len(),
            got: detected.len(),
        });
    }
    if detected.is_empty() {
        return Err(Error::data("tpr_fdr of an empty record set"));
    }
    let records: Vec<DetectionRecord> = detected
        .iter()
        .zip(truth)
        .map(|(d, t)| DetectionRecord::from_masks(d, t))
        .collect();
    Ok(tpr_fdr_records(&records))
}

fn tpr_fdr_records(records: &[DetectionRecord]) -> (f64, f64) {
    let mut tpr_sum = 0.0;
    let mut tpr_n = 0usize;
    let mut fdr_sum = 0.0;
    for r in records {
        if r.n_true_outliers > 0 {
            tpr_sum += r.true_positives as f64 / r.n_true_outliers as f64;
            tpr_n += 1;
        }
        let detected = r.true_positives + r.false_positives;
        fdr_sum += r.false_positives as f64 / detected.max(1) as f64;
    }
    let tpr = if tpr_n > 0 {
        tpr_sum / tpr_n as f64
    } else {
        f64::NAN
    };
    let fdr = if records.is_empty() {
        f64::NAN
    } else {
        fdr_sum / records.len() as f64
    };
    (tpr, fdr)
}

/// Jaccard similarity |a∩b| / |a∪b|, with the convention that two empty
/// sets are perfectly similar (value 1).
pub fn jaccard(a: &CellMask, b: &CellMask) -> f64 {
    let union = a.union(b).len();
    if union == 0 {
        return 1.0;
    }
    a.intersection(b).len() as f64 / union as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::PredictionInterval;

    fn mask(idx: &[usize]) -> CellMask {
        CellMask::from_indices(idx.to_vec())
    }

    #[test]
    fn coverage_edges_and_arithmetic() {
        let all: Vec<PointRecord> = (0..10)
            .map(|_| PointRecord { covered: true, length: 1.0 })
            .collect();
        assert_eq!(coverage(&all).unwrap(), 1.0);
        let none: Vec<PointRecord> = (0..10)
            .map(|_| PointRecord { covered: false, length: 1.0 })
            .collect();
        assert_eq!(coverage(&none).unwrap(), 0.0);
        let mut mixed = Vec::new();
        for i in 0..100 {
            mixed.push(PointRecord { covered: i < 90, length: 1.0 });
        }
        assert_eq!(coverage(&mixed).unwrap(), 0.9);
        assert!(coverage(&[]).is_err());
    }

    #[test]
    fn coverage_matches_brute_force_recount() {
        let mut tr = TrialResult::new("scp");
        let intervals = [
            PredictionInterval::new(0.0, 1.0),
            PredictionInterval::new(-2.0, -1.0),
            PredictionInterval::new(f64::NEG_INFINITY, f64::INFINITY),
            PredictionInterval::new(3.0, 4.0),
        ];
        let ys = [0.5, 0.0, 100.0, 3.0];
        for (iv, y) in intervals.iter().zip(ys) {
            tr.record_interval(iv, y);
        }
        let brute = ys
            .iter()
            .zip(&intervals)
            .filter(|(y, iv)| iv.lo <= **y && **y <= iv.hi)
            .count() as f64
            / ys.len() as f64;
        assert_eq!(tr.coverage().unwrap(), brute);
        assert_eq!(brute, 0.75);
    }

    #[test]
    fn infinite_intervals_count_as_covered_but_not_in_length() {
        let mut tr = TrialResult::new("scp");
        tr.record_interval(&PredictionInterval::new(0.0, 2.0), 1.0);
        tr.record_interval(&PredictionInterval::new(f64::NEG_INFINITY, f64::INFINITY), 9.9);
        tr.record_interval(&PredictionInterval::new(0.0, 4.0), 5.0);
        assert_eq!(tr.coverage().unwrap(), 2.0 / 3.0);
        let (avg, inf_frac) = tr.length_stats();
        assert_eq!(avg, 3.0);
        assert_eq!(inf_frac, 1.0 / 3.0);
    }

    #[test]
    fn all_infinite_lengths_yield_nan_average() {
        let recs = [PointRecord { covered: true, length: f64::INFINITY }];
        let (avg, frac) = average_length(&recs);
        assert!(avg.is_nan());
        assert_eq!(frac, 1.0);
        let (empty_avg, empty_frac) = average_length(&[]);
        assert!(empty_avg.is_nan());
        assert_eq!(empty_frac, 0.0);
    }

    #[test]
    fn perfect_detection_scores_one_zero() {
        let truth = [mask(&[0, 2]), mask(&[1])];
        let (tpr, fdr) = tpr_fdr(&truth, &truth).unwrap();
        assert_eq!((tpr, fdr), (1.0, 0.0));
    }

    #[test]
    fn empty_detection_with_nonempty_truth_scores_zero_zero() {
        let detected = [mask(&[]), mask(&[])];
        let truth = [mask(&[0, 2]), mask(&[1])];
        assert_eq!(tpr_fdr(&detected, &truth).unwrap(), (0.0, 0.0));
    }

    #[test]
    fn one_extra_discovery_over_three_true() {
        let truth = [mask(&[0, 1, 2])];
        let detected = [mask(&[0, 1, 2, 7])];
        let (tpr, fdr) = tpr_fdr(&detected, &truth).unwrap();
        assert_eq!(tpr, 1.0);
        assert_eq!(fdr, 0.25);
    }

    #[test]
    fn points_with_empty_truth_are_excluded_from_tpr_only() {
        let truth = [mask(&[]), mask(&[0, 1])];
        let detected = [mask(&[3]), mask(&[0])];
        let (tpr, fdr) = tpr_fdr(&detected, &truth).unwrap();
        // TPR averages only the second point: 1/2
        assert_eq!(tpr, 0.5);
        // FDR averages both: (1/1 + 0/1) / 2
        assert_eq!(fdr, 0.5);
    }

    #[test]
    fn all_empty_truth_gives_nan_tpr() {
        let truth = [mask(&[]), mask(&[])];
        let detected = [mask(&[]), mask(&[2])];
        let (tpr, fdr) = tpr_fdr(&detected, &truth).unwrap();
        assert!(tpr.is_nan());
        assert_eq!(fdr, 0.5);
    }

    #[test]
    fn jaccard_examples() {
        assert_eq!(jaccard(&mask(&[1, 2]), &mask(&[1, 2])), 1.0);
        assert_eq!(jaccard(&mask(&[1]), &mask(&[2])), 0.0);
        let v = jaccard(&mask(&[1, 2]), &mask(&[2, 3]));
        assert!((v - 1.0 / 3.0).abs() < 1e-15);
        assert_eq!(jaccard(&mask(&[]), &mask(&[])), 1.0);
        assert_eq!(jaccard(&mask(&[]), &mask(&[4])), 0.0);
    }

    #[test]
    fn jaccard_is_symmetric_and_bounded() {
        let cases = [
            (mask(&[]), mask(&[])),
            (mask(&[0]), mask(&[0, 1, 2])),
            (mask(&[5, 9]), mask(&[1, 5])),
            (mask(&[1, 2, 3]), mask(&[4])),
        ];
        for (a, b) in &cases {
            let ab = jaccard(a, b);
            assert_eq!(ab, jaccard(b, a));
            assert!((0.0..=1.0).contains(&ab));
        }
    }

    #[test]
    fn pooled_records_match_weighted_triad_aggregation() {
        // two trials of different sizes: pooling the raw records equals
        // the count-weighted mean of per-trial coverages
        let mut t1 = TrialResult::new("m");
        for i in 0..4 {
            t1.record_interval(&PredictionInterval::new(0.0, 1.0), if i < 3 { 0.5 } else { 2.0 });
        }
        let mut t2 = TrialResult::new("m");
        for i in 0..6 {
            t2.record_interval(&PredictionInterval::new(0.0, 1.0), if i < 3 { 0.5 } else { 2.0 });
        }
        let c1 = t1.coverage().unwrap();
        let c2 = t2.coverage().unwrap();
        let weighted = (c1 * 4.0 + c2 * 6.0) / 10.0;
        let mut pooled = TrialResult::new("m");
        pooled.absorb(&t1);
        pooled.absorb(&t2);
        assert!((pooled.coverage().unwrap() - weighted).abs() < 1e-15);
    }
}
