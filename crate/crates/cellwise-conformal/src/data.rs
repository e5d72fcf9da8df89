//! Core data types: feature matrices, labeled datasets, cell masks,
//! train/calibration splits, and prediction intervals.
//!
//! Coordinates are 0-based throughout the crate. A [`CellMask`] holds the
//! set of coordinates currently treated as suspect/masked in one feature
//! vector — the object written O*, Ô_i, or Õ in the standard notation for
//! cellwise contamination.

use crate::error::{Error, Result};

/// Dense row-major n×d matrix of finite feature values.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    n: usize,
    d: usize,
    values: Vec<f64>,
}

impl FeatureMatrix {
    /// Build a matrix from row-major values. Every entry must be finite.
    pub fn new(n: usize, d: usize, values: Vec<f64>) -> Result<Self> {
        if n == 0 || d == 0 {
            return Err(Error::DimensionMismatch {
                expected: 1,
                got: 0,
            });
        }
        if values.len() != n * d {
            return Err(Error::DimensionMismatch {
                expected: n * d,
                got: values.len(),
            });
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "feature matrix" });
        }
        Ok(FeatureMatrix { n, d, values })
    }

    /// Build from a slice of rows (each of length d).
    pub fn from_rows(rows: &[Vec<f64>]) -> Result<Self> {
        let n = rows.len();
        let d = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != d) {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: rows.iter().map(|r| r.len()).find(|&l| l != d).unwrap_or(d),
            });
        }
        FeatureMatrix::new(n, d, rows.concat())
    }

    /// Number of rows.
    pub fn rows(&self) -> usize {
        self.n
    }

    /// Number of columns (the feature dimension d).
    pub fn cols(&self) -> usize {
        self.d
    }

    /// Borrow row `i` as a slice of length d.
    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.d..(i + 1) * self.d]
    }

    /// Copy column `j` out as a vector of length n.
    pub fn col(&self, j: usize) -> Vec<f64> {
        (0..self.n).map(|i| self.values[i * self.d + j]).collect()
    }

    /// Single entry.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.d + j]
    }

    /// Keep only the listed columns, in the given order.
    pub fn select_columns(&self, keep: &[usize]) -> Result<Self> {
        let mut values = Vec::with_capacity(self.n * keep.len());
        for i in 0..self.n {
            let row = self.row(i);
            for &j in keep {
                if j >= self.d {
                    return Err(Error::DimensionMismatch {
                        expected: self.d,
                        got: j + 1,
                    });
                }
                values.push(row[j]);
            }
        }
        FeatureMatrix::new(self.n, keep.len(), values)
    }
}

/// Features paired with one real-valued label per row.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledDataset {
    pub features: FeatureMatrix,
    pub labels: Vec<f64>,
}

impl LabeledDataset {
    /// Pair features and labels; counts must agree and labels be finite.
    pub fn new(features: FeatureMatrix, labels: Vec<f64>) -> Result<Self> {
        if labels.len() != features.rows() {
            return Err(Error::LabelCount {
                rows: features.rows(),
                labels: labels.len(),
            });
        }
        if labels.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { what: "labels" });
        }
        Ok(LabeledDataset { features, labels })
    }

    /// Number of labeled rows.
    pub fn len(&self) -> usize {
        self.labels.len()
    }

    /// True when there are no rows (unreachable through the constructor).
    pub fn is_empty(&self) -> bool {
        self.labels.is_empty()
    }

    /// Feature dimension.
    pub fn dim(&self) -> usize {
        self.features.cols()
    }
}

/// 1-based split point: rows 1..n0-1 train, rows n0..n calibrate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SplitIndex {
    n0: usize,
}

impl SplitIndex {
    /// Validate `1 < n0 <= n` so both blocks are nonempty.
    pub fn new(n0: usize, n: usize) -> Result<Self> {
        if n0 <= 1 || n0 > n {
            return Err(Error::InvalidSplit { n0, n });
        }
        Ok(SplitIndex { n0 })
    }

    /// The raw 1-based index.
    pub fn n0(&self) -> usize {
        self.n0
    }

    /// The default half split n0 = floor(n/2) + 1 (equal halves at even n).
    pub fn half(n: usize) -> Result<Self> {
        SplitIndex::new(n / 2 + 1, n)
    }
}

/// Order-preserving partition into training rows {1..n0-1} and
/// calibration rows {n0..n} (1-based, per the split-index convention).
pub fn split(data: &LabeledDataset, n0: SplitIndex) -> Result<(LabeledDataset, LabeledDataset)> {
    let n = data.len();
    let cut = n0.n0() - 1; // number of training rows
    if cut >= n {
        return Err(Error::InvalidSplit { n0: n0.n0(), n });
    }
    let d = data.dim();
    let take = |lo: usize, hi: usize| -> Result<LabeledDataset> {
        let mut values = Vec::with_capacity((hi - lo) * d);
        for i in lo..hi {
            values.extend_from_slice(data.features.row(i));
        }
        LabeledDataset::new(
            FeatureMatrix::new(hi - lo, d, values)?,
            data.labels[lo..hi].to_vec(),
        )
    };
    Ok((take(0, cut)?, take(cut, n)?))
}

/// Sorted duplicate-free set of masked coordinate indices.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct CellMask {
    indices: Vec<usize>,
}

impl CellMask {
    /// The empty mask.
    pub fn empty() -> Self {
        CellMask::default()
    }

    /// Build from arbitrary indices; sorts and deduplicates.
    pub fn from_indices(mut indices: Vec<usize>) -> Self {
        indices.sort_unstable();
        indices.dedup();
        CellMask { indices }
    }

    /// The full mask {0..d-1}.
    pub fn full(d: usize) -> Self {
        CellMask {
            indices: (0..d).collect(),
        }
    }

    /// Membership test.
    pub fn contains(&self, j: usize) -> bool {
        self.indices.binary_search(&j).is_ok()
    }

    /// Number of masked coordinates.
    pub fn len(&self) -> usize {
        self.indices.len()
    }

    /// True when nothing is masked.
    pub fn is_empty(&self) -> bool {
        self.indices.is_empty()
    }

    /// Iterate masked coordinates in increasing order.
    pub fn iter(&self) -> impl Iterator<Item = usize> + '_ {
        self.indices.iter().copied()
    }

    /// Set union.
    pub fn union(&self, other: &CellMask) -> CellMask {
        let mut merged = Vec::with_capacity(self.indices.len() + other.indices.len());
        merged.extend_from_slice(&self.indices);
        merged.extend_from_slice(&other.indices);
        CellMask::from_indices(merged)
    }

    /// Set intersection.
    pub fn intersection(&self, other: &CellMask) -> CellMask {
        CellMask {
            indices: self
                .indices
                .iter()
                .copied()
                .filter(|j| other.contains(*j))
                .collect(),
        }
    }

    /// Set difference self \ other.
    pub fn difference(&self, other: &CellMask) -> CellMask {
        CellMask {
            indices: self
                .indices
                .iter()
                .copied()
                .filter(|j| !other.contains(*j))
                .collect(),
        }
    }

    /// True when every index is inside `other`.
    pub fn is_subset_of(&self, other: &CellMask) -> bool {
        self.indices.iter().all(|&j| other.contains(j))
    }
}

impl FromIterator<usize> for CellMask {
    fn from_iter<T: IntoIterator<Item = usize>>(iter: T) -> Self {
        CellMask::from_indices(iter.into_iter().collect())
    }
}

/// Closed interval on the label axis; `hi = +inf` (or `lo = -inf`) encodes
/// the infinite-width fallback of conformal quantiles past the sample.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PredictionInterval {
    pub lo: f64,
    pub hi: f64,
}

impl PredictionInterval {
    /// Construct, keeping the `lo <= hi` invariant.
    pub fn new(lo: f64, hi: f64) -> Self {
        debug_assert!(lo <= hi, "interval endpoints out of order: [{lo}, {hi}]");
        PredictionInterval { lo, hi }
    }

    /// Width hi − lo (possibly +inf).
    pub fn length(&self) -> f64 {
        self.hi - self.lo
    }

    /// Whether `y` lies inside. Infinite endpoints always cover their side.
    pub fn covers(&self, y: f64) -> bool {
        self.lo <= y && y <= self.hi
    }

    /// True when either endpoint is infinite.
    pub fn is_infinite(&self) -> bool {
        self.lo.is_infinite() || self.hi.is_infinite()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn toy() -> LabeledDataset {
        let x = FeatureMatrix::from_rows(&[
            vec![1.0, 2.0],
            vec![3.0, 4.0],
            vec![5.0, 6.0],
        ])
        .unwrap();
        LabeledDataset::new(x, vec![10.0, 20.0, 30.0]).unwrap()
    }

    #[test]
    fn matrix_rejects_non_finite_entries() {
        let err = FeatureMatrix::new(1, 2, vec![1.0, f64::NAN]).unwrap_err();
        assert!(matches!(err, Error::NonFinite { .. }));
    }

    #[test]
    fn matrix_rejects_wrong_value_count() {
        let err = FeatureMatrix::new(2, 2, vec![1.0, 2.0, 3.0]).unwrap_err();
        assert!(matches!(err, Error::DimensionMismatch { expected: 4, got: 3 }));
    }

    #[test]
    fn labels_must_match_rows() {
        let x = FeatureMatrix::new(2, 1, vec![0.0, 1.0]).unwrap();
        let err = LabeledDataset::new(x, vec![1.0]).unwrap_err();
        assert!(matches!(err, Error::LabelCount { rows: 2, labels: 1 }));
    }

    #[test]
    fn split_200_at_101_gives_equal_halves() {
        let x = FeatureMatrix::new(200, 1, (0..200).map(|v| v as f64).collect()).unwrap();
        let data = LabeledDataset::new(x, (0..200).map(|v| v as f64).collect()).unwrap();
        let (train, calib) = split(&data, SplitIndex::new(101, 200).unwrap()).unwrap();
        assert_eq!(train.len(), 100);
        assert_eq!(calib.len(), 100);
        // order-preserving, disjoint
        assert_eq!(train.labels[99], 99.0);
        assert_eq!(calib.labels[0], 100.0);
    }

    #[test]
    fn split_small_cases() {
        let x = FeatureMatrix::new(3, 1, vec![0.0, 1.0, 2.0]).unwrap();
        let data = LabeledDataset::new(x, vec![0.0, 1.0, 2.0]).unwrap();
        let (t, c) = split(&data, SplitIndex::new(2, 3).unwrap()).unwrap();
        assert_eq!((t.len(), c.len()), (1, 2));
        let (t, c) = split(&data, SplitIndex::new(3, 3).unwrap()).unwrap();
        assert_eq!((t.len(), c.len()), (2, 1));
    }

    #[test]
    fn split_index_range_checks() {
        assert!(SplitIndex::new(1, 5).is_err());
        assert!(SplitIndex::new(6, 5).is_err());
        assert!(SplitIndex::new(5, 5).is_ok());
        assert_eq!(SplitIndex::half(200).unwrap().n0(), 101);
    }

    #[test]
    fn mask_set_algebra() {
        let a = CellMask::from_indices(vec![2, 0, 2, 1]);
        let b = CellMask::from_indices(vec![1, 3]);
        assert_eq!(a.len(), 3);
        assert_eq!(a.union(&b), CellMask::from_indices(vec![0, 1, 2, 3]));
        assert_eq!(a.intersection(&b), CellMask::from_indices(vec![1]));
        assert_eq!(a.difference(&b), CellMask::from_indices(vec![0, 2]));
        assert!(CellMask::empty().is_subset_of(&a));
        assert!(a.intersection(&b).is_subset_of(&a));
        assert!(a.contains(2) && !a.contains(3));
    }

    #[test]
    fn interval_length_and_coverage() {
        let fin = PredictionInterval::new(-1.0, 3.0);
        assert_eq!(fin.length(), 4.0);
        assert!(fin.covers(3.0) && fin.covers(-1.0) && !fin.covers(3.1));
        assert!(!fin.is_infinite());
        let inf = PredictionInterval::new(f64::NEG_INFINITY, f64::INFINITY);
        assert!(inf.covers(1e300) && inf.is_infinite());
        assert_eq!(inf.length(), f64::INFINITY);
    }

    #[test]
    fn select_columns_projects_and_orders() {
        let data = toy();
        let sel = data.features.select_columns(&[1]).unwrap();
        assert_eq!(sel.cols(), 1);
        assert_eq!(sel.col(0), vec![2.0, 4.0, 6.0]);
        assert!(data.features.select_columns(&[5]).is_err());
    }
}
