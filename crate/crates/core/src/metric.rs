//! Heterogeneous distance over mixed numeric/categorical columns.
//!
//! Numeric columns contribute `|a - b| / range` capped at 1, categorical
//! columns contribute 0 or 1 (overlap), and the per-column terms are
//! aggregated as a Euclidean norm over the selected columns.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{Dataset, FeatureKind, FeatureMask, InstanceMask};
use crate::error::{RcgError, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DistanceSpec {
    pub normalize: bool,
    kinds: Vec<FeatureKind>,
    /// Frozen numeric ranges, one `(min, max)` per column.
    ranges: Vec<(f64, f64)>,
}

impl DistanceSpec {
    /// Freezes numeric ranges over the rows alive in `rows`.
    pub fn fit(ds: &Dataset, rows: &InstanceMask, normalize: bool) -> Self {
        let ranges = (0..ds.n_features())
            .map(|j| {
                rows.indices().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), i| {
                    let v = ds.value(i, j);
                    (lo.min(v), hi.max(v))
                })
            })
            .collect();
        DistanceSpec { normalize, kinds: ds.features().iter().map(|f| f.kind).collect(), ranges }
    }

    /// Uses the ranges observed over the whole dataset.
    pub fn from_dataset(ds: &Dataset) -> Self {
        DistanceSpec {
            normalize: true,
            kinds: ds.features().iter().map(|f| f.kind).collect(),
            ranges: ds.features().iter().map(|f| (f.min, f.max)).collect(),
        }
    }

    #[inline]
    pub fn feature_difference(&self, col: usize, a: f64, b: f64) -> f64 {
        match self.kinds[col] {
            FeatureKind::Categorical => {
                if a == b {
                    0.0
                } else {
                    1.0
                }
            }
            FeatureKind::Numeric if self.normalize => {
                let (lo, hi) = self.ranges[col];
                let range = hi - lo;
                if range > 0.0 {
                    ((a - b).abs() / range).min(1.0)
                } else {
                    0.0
                }
            }
            FeatureKind::Numeric => (a - b).abs(),
        }
    }

    /// Distance between two raw feature vectors over the selected columns.
    pub fn between(&self, a: &[f64], b: &[f64], cols: &[usize]) -> f64 {
        cols.iter()
            .map(|&j| {
                let d = self.feature_difference(j, a[j], b[j]);
                d * d
            })
            .sum::<f64>()
            .sqrt()
    }
}

fn selected(fmask: &FeatureMask) -> Result<Vec<usize>> {
    if fmask.selected_count() == 0 {
        return Err(RcgError::EmptyFeatureMask);
    }
    Ok(fmask.indices().collect())
}

pub fn distance(ds: &Dataset, a: usize, b: usize, fmask: &FeatureMask, spec: &DistanceSpec) -> Result<f64> {
    let cols = selected(fmask)?;
    Ok(spec.between(ds.row(a), ds.row(b), &cols))
}

/// Dense symmetric distance matrix over the alive rows of a mask. Entries are
/// addressed by *local* index `0..m`, where local index `i` is the `i`-th
/// alive row in ascending row order.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    rows: Vec<usize>,
    data: Vec<f64>,
}

impl DistanceMatrix {
    pub fn compute(ds: &Dataset, imask: &InstanceMask, fmask: &FeatureMask, spec: &DistanceSpec) -> Result<Self> {
        let cols = selected(fmask)?;
        let rows: Vec<usize> = imask.indices().collect();
        let m = rows.len();
        let data: Vec<f64> = rows
            .par_iter()
            .flat_map_iter(|&a| {
                let ra = ds.row(a);
                let cols = &cols;
                rows.iter().map(move |&b| if a == b { 0.0 } else { spec.between(ra, ds.row(b), cols) })
            })
            .collect();
        debug_assert_eq!(data.len(), m * m);
        Ok(DistanceMatrix { rows, data })
    }

    /// Builds a matrix directly from values, for tests and callers with their
    /// own metric. `data` is row-major `m x m`.
    pub fn from_raw(rows: Vec<usize>, data: Vec<f64>) -> Result<Self> {
        let m = rows.len();
        if data.len() != m * m {
            return Err(RcgError::invalid("distance data is not m x m"));
        }
        Ok(DistanceMatrix { rows, data })
    }

    pub fn size(&self) -> usize {
        self.rows.len()
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.rows.len() + j]
    }

    /// Dataset row of local index `i`.
    pub fn row_id(&self, i: usize) -> usize {
        self.rows[i]
    }

    pub fn row_ids(&self) -> &[usize] {
        &self.rows
    }

    pub fn local_index(&self, row: usize) -> Option<usize> {
        self.rows.binary_search(&row).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::FeatureMeta;
    use proptest::prelude::*;

    fn mixed() -> Dataset {
        let features = vec![FeatureMeta::numeric("x"), FeatureMeta::categorical("color", vec!["r".into(), "g".into()])];
        Dataset::new(
            vec![0.0, 0.0, 10.0, 0.0, 2.0, 1.0, 7.0, 0.0, 2.0, 0.0],
            features,
            vec![0, 1, 0, 1, 0],
            vec!["a".into(), "b".into()],
            "class",
        )
        .unwrap()
    }

    #[test]
    fn identity_is_zero() {
        let ds = mixed();
        let spec = DistanceSpec::from_dataset(&ds);
        assert_eq!(distance(&ds, 3, 3, &FeatureMask::full(2), &spec).unwrap(), 0.0);
    }

    #[test]
    fn categorical_overlap_contributes_one() {
        let ds = mixed();
        let spec = DistanceSpec::from_dataset(&ds);
        // rows 2 and 4 share x = 2 and differ only in color
        assert_eq!(distance(&ds, 2, 4, &FeatureMask::full(2), &spec).unwrap(), 1.0);
    }

    #[test]
    fn numeric_is_range_normalized() {
        let ds = mixed();
        let spec = DistanceSpec::from_dataset(&ds);
        let only_x = FeatureMask::from_indices(2, [0]);
        assert_eq!(distance(&ds, 2, 3, &only_x, &spec).unwrap(), 0.5);
    }

    #[test]
    fn empty_mask_is_an_error() {
        let ds = mixed();
        let spec = DistanceSpec::from_dataset(&ds);
        assert!(matches!(distance(&ds, 0, 1, &FeatureMask::empty(2), &spec), Err(RcgError::EmptyFeatureMask)));
    }

    #[test]
    fn constant_column_and_clamping() {
        let ds = Dataset::from_numeric(&[vec![1.0, 0.0], vec![1.0, 1.0], vec![1.0, 0.5]], &[0, 1, 0]).unwrap();
        let train = InstanceMask::from_indices(3, [0, 2]);
        let spec = DistanceSpec::fit(&ds, &train, true);
        assert_eq!(spec.feature_difference(0, 1.0, 1.0), 0.0);
        assert_eq!(spec.feature_difference(0, 1.0, 5.0), 0.0);
        // trained range of column 1 is [0, 0.5]; an outside value caps at 1
        assert_eq!(spec.feature_difference(1, 0.0, 1.0), 1.0);
        let raw = DistanceSpec::fit(&ds, &train, false);
        assert_eq!(raw.feature_difference(1, 0.0, 3.0), 3.0);
    }

    #[test]
    fn single_row_matrix() {
        let ds = mixed();
        let m = DistanceMatrix::compute(&ds, &InstanceMask::from_indices(5, [3]), &FeatureMask::full(2), &DistanceSpec::from_dataset(&ds))
            .unwrap();
        assert_eq!(m.size(), 1);
        assert_eq!(m.get(0, 0), 0.0);
    }

    #[test]
    fn collinear_points() {
        let ds = Dataset::from_numeric(&[vec![0.0], vec![1.0], vec![2.0]], &[0, 1, 0]).unwrap();
        let m = DistanceMatrix::compute(&ds, &InstanceMask::full(3), &FeatureMask::full(1), &DistanceSpec::from_dataset(&ds))
            .unwrap();
        assert_eq!(m.get(0, 1), 0.5);
        assert_eq!(m.get(0, 2), 1.0);
        assert_eq!(m.get(1, 2), 0.5);
    }

    fn random_dataset(seed: u64, n: usize, p: usize) -> Dataset {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
        let rows: Vec<Vec<f64>> = (0..n).map(|_| (0..p).map(|_| rng.gen_range(-3.0..3.0)).collect()).collect();
        let labels: Vec<usize> = (0..n).map(|i| i % 2).collect();
        Dataset::from_numeric(&rows, &labels).unwrap()
    }

    #[test]
    fn matrix_matches_double_loop() {
        let ds = random_dataset(17, 20, 5);
        let fmask = FeatureMask::from_indices(5, [0, 2, 3]);
        let spec = DistanceSpec::from_dataset(&ds);
        let m = DistanceMatrix::compute(&ds, &InstanceMask::full(20), &fmask, &spec).unwrap();
        for a in 0..20 {
            for b in 0..20 {
                let mut acc = 0.0;
                for j in [0, 2, 3] {
                    let f = &ds.features()[j];
                    let d = (ds.value(a, j) - ds.value(b, j)).abs() / (f.max - f.min);
                    acc += d * d;
                }
                assert!((m.get(a, b) - acc.sqrt()).abs() < 1e-12);
            }
        }
    }

    proptest! {
        #[test]
        fn symmetric_and_monotone_in_features(seed in 0u64..1000, extra in 0usize..4) {
            let ds = random_dataset(seed, 12, 4);
            let spec = DistanceSpec::from_dataset(&ds);
            let small = FeatureMask::from_indices(4, [(extra + 1) % 4]);
            let mut big = small.clone();
            big.insert(extra);
            let ms = DistanceMatrix::compute(&ds, &InstanceMask::full(12), &small, &spec).unwrap();
            let mb = DistanceMatrix::compute(&ds, &InstanceMask::full(12), &big, &spec).unwrap();
            for a in 0..12 {
                prop_assert_eq!(ms.get(a, a), 0.0);
                for b in 0..12 {
                    prop_assert_eq!(ms.get(a, b), ms.get(b, a));
                    prop_assert!(mb.get(a, b) >= ms.get(a, b));
                }
            }
        }

        #[test]
        fn per_feature_difference_is_bounded(a in -100.0f64..100.0, b in -100.0f64..100.0) {
            let ds = random_dataset(1, 6, 1);
            let spec = DistanceSpec::from_dataset(&ds);
            let d = spec.feature_difference(0, a, b);
            prop_assert!((0.0..=1.0).contains(&d));
        }
    }
}
