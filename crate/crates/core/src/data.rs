//! Labeled datasets, reduction masks, label noise and train/test splits.

use std::collections::{BTreeSet, HashMap};
use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{RcgError, Result};
use crate::rng::{substream, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FeatureKind {
    Numeric,
    Categorical,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureMeta {
    pub name: String,
    pub kind: FeatureKind,
    /// Observed range over all rows; meaningful for numeric columns only.
    pub min: f64,
    pub max: f64,
    /// Category dictionary; empty for numeric columns. Categorical cells
    /// store the index into this list.
    pub categories: Vec<String>,
}

impl FeatureMeta {
    pub fn numeric(name: impl Into<String>) -> Self {
        FeatureMeta {
            name: name.into(),
            kind: FeatureKind::Numeric,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
            categories: Vec::new(),
        }
    }

    pub fn categorical(name: impl Into<String>, categories: Vec<String>) -> Self {
        FeatureMeta {
            name: name.into(),
            kind: FeatureKind::Categorical,
            min: 0.0,
            max: categories.len().saturating_sub(1) as f64,
            categories,
        }
    }
}

/// An immutable labeled sample: `n` rows, `p` feature columns, `c` classes.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    values: Vec<f64>,
    n: usize,
    features: Vec<FeatureMeta>,
    labels: Vec<usize>,
    class_names: Vec<String>,
    class_column: String,
}

impl Dataset {
    /// Builds a dataset from row-major `values` (`labels.len()` rows).
    /// Numeric ranges in `features` are recomputed from the data.
    pub fn new(
        values: Vec<f64>,
        mut features: Vec<FeatureMeta>,
        labels: Vec<usize>,
        class_names: Vec<String>,
        class_column: impl Into<String>,
    ) -> Result<Self> {
        let n = labels.len();
        let p = features.len();
        if p == 0 {
            return Err(RcgError::data("dataset has no feature columns (p >= 1 violated)"));
        }
        if n < 2 {
            return Err(RcgError::data(format!("dataset has {n} rows (n >= 2 violated)")));
        }
        if values.len() != n * p {
            return Err(RcgError::data(format!(
                "expected {} values for {n} rows x {p} columns, got {}",
                n * p,
                values.len()
            )));
        }
        let c = class_names.len();
        if let Some(bad) = labels.iter().find(|&&y| y >= c) {
            return Err(RcgError::data(format!("label id {bad} out of range for {c} classes")));
        }
        let present: BTreeSet<usize> = labels.iter().copied().collect();
        if c < 2 || present.len() < 2 {
            return Err(RcgError::degenerate(format!(
                "{} distinct class(es) observed (c >= 2 violated)",
                present.len()
            )));
        }
        for (j, meta) in features.iter_mut().enumerate() {
            match meta.kind {
                FeatureKind::Numeric => {
                    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
                    for i in 0..n {
                        let v = values[i * p + j];
                        if !v.is_finite() {
                            return Err(RcgError::data(format!(
                                "non-finite value in column '{}' row {i}",
                                meta.name
                            )));
                        }
                        lo = lo.min(v);
                        hi = hi.max(v);
                    }
                    meta.min = lo;
                    meta.max = hi;
                }
                FeatureKind::Categorical => {
                    let size = meta.categories.len();
                    for i in 0..n {
                        let v = values[i * p + j];
                        if v < 0.0 || v.fract() != 0.0 || v as usize >= size {
                            return Err(RcgError::data(format!(
                                "value {v} in column '{}' row {i} is not in its dictionary",
                                meta.name
                            )));
                        }
                    }
                }
            }
        }
        Ok(Dataset { values, n, features, labels, class_names, class_column: class_column.into() })
    }

    /// All-numeric dataset with classes named `"0".."c-1"`, where `c` is one
    /// more than the largest label.
    pub fn from_numeric(rows: &[Vec<f64>], labels: &[usize]) -> Result<Self> {
        let p = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != p) {
            return Err(RcgError::data("ragged rows"));
        }
        if rows.len() != labels.len() {
            return Err(RcgError::data("row and label counts differ"));
        }
        let c = labels.iter().max().map_or(0, |m| m + 1);
        let features = (0..p).map(|j| FeatureMeta::numeric(format!("x{j}"))).collect();
        let classes = (0..c).map(|j| j.to_string()).collect();
        Dataset::new(rows.concat(), features, labels.to_vec(), classes, "class")
    }

    pub fn n_rows(&self) -> usize {
        self.n
    }

    pub fn n_features(&self) -> usize {
        self.features.len()
    }

    pub fn n_classes(&self) -> usize {
        self.class_names.len()
    }

    #[inline]
    pub fn value(&self, row: usize, col: usize) -> f64 {
        self.values[row * self.features.len() + col]
    }

    pub fn row(&self, row: usize) -> &[f64] {
        let p = self.features.len();
        &self.values[row * p..(row + 1) * p]
    }

    pub fn label(&self, row: usize) -> usize {
        self.labels[row]
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn features(&self) -> &[FeatureMeta] {
        &self.features
    }

    pub fn class_names(&self) -> &[String] {
        &self.class_names
    }

    pub fn class_column(&self) -> &str {
        &self.class_column
    }

    /// Copy of this dataset with different labels (same class dictionary).
    pub fn with_labels(&self, labels: Vec<usize>) -> Result<Self> {
        if labels.len() != self.n {
            return Err(RcgError::data("label count differs from row count"));
        }
        if labels.iter().any(|&y| y >= self.n_classes()) {
            return Err(RcgError::data("label id out of range"));
        }
        Ok(Dataset { labels, ..self.clone() })
    }

    /// Writes the rows alive in `rows` restricted to the columns selected in
    /// `cols`, followed by the class column.
    pub fn write_csv<W: Write>(&self, out: W, rows: &InstanceMask, cols: &FeatureMask) -> Result<()> {
        let mut w = csv::Writer::from_writer(out);
        let selected: Vec<usize> = cols.indices().collect();
        let mut header: Vec<&str> = selected.iter().map(|&j| self.features[j].name.as_str()).collect();
        header.push(&self.class_column);
        w.write_record(&header)?;
        for i in rows.indices() {
            let mut record: Vec<String> = selected
                .iter()
                .map(|&j| {
                    let v = self.value(i, j);
                    match self.features[j].kind {
                        FeatureKind::Numeric => format!("{v}"),
                        FeatureKind::Categorical => self.features[j].categories[v as usize].clone(),
                    }
                })
                .collect();
            record.push(self.class_names[self.labels[i]].clone());
            w.write_record(&record)?;
        }
        w.flush().map_err(|source| RcgError::Io { path: "<csv output>".into(), source })?;
        Ok(())
    }
}

/// Options for [`load_csv`].
#[derive(Debug, Clone, Default)]
pub struct CsvOptions {
    pub kind_overrides: HashMap<String, FeatureKind>,
}

pub fn load_csv(path: impl AsRef<Path>, class_column: &str, opts: &CsvOptions) -> Result<Dataset> {
    let path = path.as_ref();
    let file = File::open(path).map_err(|source| RcgError::Io { path: path.to_path_buf(), source })?;
    read_csv(file, class_column, opts)
}

fn is_missing(cell: &str) -> bool {
    cell.is_empty() || cell == "?"
}

/// Parses CSV text with a header row. Kinds are inferred per column (every
/// cell parses as a finite number means numeric) unless overridden.
pub fn read_csv<R: Read>(input: R, class_column: &str, opts: &CsvOptions) -> Result<Dataset> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).trim(csv::Trim::All).from_reader(input);
    let header: Vec<String> = reader.headers()?.iter().map(str::to_owned).collect();
    let class_idx = header
        .iter()
        .position(|h| h == class_column)
        .ok_or_else(|| RcgError::data(format!("class column '{class_column}' not found in header")))?;
    for name in opts.kind_overrides.keys() {
        if !header.contains(name) || name == class_column {
            return Err(RcgError::data(format!("kind override names unknown feature column '{name}'")));
        }
    }

    let mut cells: Vec<Vec<String>> = Vec::new();
    for (line, record) in reader.records().enumerate() {
        let record = record.map_err(|e| match e.kind() {
            csv::ErrorKind::UnequalLengths { .. } => RcgError::data(format!("ragged row at data line {}", line + 1)),
            _ => RcgError::Csv(e),
        })?;
        let row: Vec<String> = record.iter().map(str::to_owned).collect();
        if let Some(col) = row.iter().position(|c| is_missing(c)) {
            return Err(RcgError::data(format!(
                "missing value in column '{}' at data line {}",
                header[col],
                line + 1
            )));
        }
        cells.push(row);
    }
    if cells.is_empty() {
        return Err(RcgError::data("empty dataset"));
    }

    let class_names: Vec<String> =
        cells.iter().map(|r| r[class_idx].clone()).collect::<BTreeSet<_>>().into_iter().collect();
    let labels: Vec<usize> =
        cells.iter().map(|r| class_names.binary_search(&r[class_idx]).expect("class seen")).collect();

    let feature_cols: Vec<usize> = (0..header.len()).filter(|&j| j != class_idx).collect();
    let p = feature_cols.len();
    let n = cells.len();
    let mut values = vec![0.0; n * p];
    let mut features = Vec::with_capacity(p);
    for (fj, &col) in feature_cols.iter().enumerate() {
        let name = &header[col];
        let parsed: Option<Vec<f64>> = cells
            .iter()
            .map(|r| r[col].parse::<f64>().ok().filter(|v| v.is_finite()))
            .collect();
        let kind = opts.kind_overrides.get(name).copied().unwrap_or(if parsed.is_some() {
            FeatureKind::Numeric
        } else {
            FeatureKind::Categorical
        });
        match kind {
            FeatureKind::Numeric => {
                let parsed = parsed.ok_or_else(|| {
                    RcgError::data(format!("column '{name}' declared numeric but holds non-numeric cells"))
                })?;
                for (i, v) in parsed.into_iter().enumerate() {
                    values[i * p + fj] = v;
                }
                features.push(FeatureMeta::numeric(name.clone()));
            }
            FeatureKind::Categorical => {
                let dict: Vec<String> =
                    cells.iter().map(|r| r[col].clone()).collect::<BTreeSet<_>>().into_iter().collect();
                for (i, r) in cells.iter().enumerate() {
                    values[i * p + fj] = dict.binary_search(&r[col]).expect("category seen") as f64;
                }
                features.push(FeatureMeta::categorical(name.clone(), dict));
            }
        }
    }
    Dataset::new(values, features, labels, class_names, class_column)
}

macro_rules! bool_mask {
    ($(#[$doc:meta])* $name:ident, $count:ident) => {
        $(#[$doc])*
        #[derive(Debug, Clone, PartialEq, Eq, Hash)]
        pub struct $name {
            bits: Vec<bool>,
            count: usize,
        }

        impl $name {
            pub fn full(len: usize) -> Self {
                $name { bits: vec![true; len], count: len }
            }

            pub fn empty(len: usize) -> Self {
                $name { bits: vec![false; len], count: 0 }
            }

            pub fn from_indices(len: usize, indices: impl IntoIterator<Item = usize>) -> Self {
                let mut m = Self::empty(len);
                for i in indices {
                    m.insert(i);
                }
                m
            }

            pub fn from_bools(bits: Vec<bool>) -> Self {
                let count = bits.iter().filter(|&&b| b).count();
                $name { bits, count }
            }

            /// Total number of slots (rows or columns), alive or not.
            pub fn len(&self) -> usize {
                self.bits.len()
            }

            pub fn is_empty(&self) -> bool {
                self.bits.is_empty()
            }

            pub fn $count(&self) -> usize {
                self.count
            }

            #[inline]
            pub fn contains(&self, i: usize) -> bool {
                self.bits[i]
            }

            /// Returns whether the slot changed.
            pub fn insert(&mut self, i: usize) -> bool {
                let changed = !self.bits[i];
                if changed {
                    self.bits[i] = true;
                    self.count += 1;
                }
                changed
            }

            /// Returns whether the slot changed.
            pub fn remove(&mut self, i: usize) -> bool {
                let changed = self.bits[i];
                if changed {
                    self.bits[i] = false;
                    self.count -= 1;
                }
                changed
            }

            pub fn indices(&self) -> impl Iterator<Item = usize> + '_ {
                self.bits.iter().enumerate().filter_map(|(i, &b)| b.then_some(i))
            }

            pub fn as_bools(&self) -> &[bool] {
                &self.bits
            }

            pub fn is_subset_of(&self, other: &Self) -> bool {
                self.len() == other.len() && self.indices().all(|i| other.contains(i))
            }
        }
    };
}

bool_mask!(
    /// Which rows of a dataset are alive (retained prototypes, fold members).
    InstanceMask,
    alive_count
);
bool_mask!(
    /// Which columns of a dataset are selected.
    FeatureMask,
    selected_count
);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseSpec {
    pub fraction: f64,
    pub seed: u64,
}

impl NoiseSpec {
    pub fn new(fraction: f64, seed: u64) -> Result<Self> {
        if !(0.0..=1.0).contains(&fraction) {
            return Err(RcgError::invalid(format!("noise fraction {fraction} outside [0, 1]")));
        }
        Ok(NoiseSpec { fraction, seed })
    }
}

/// Flips the label of `round(fraction * n)` rows to a different class.
pub fn inject_label_noise(ds: &Dataset, spec: &NoiseSpec) -> Result<Dataset> {
    inject_label_noise_on(ds, spec, &InstanceMask::full(ds.n_rows()), 0)
}

/// Same as [`inject_label_noise`] but only rows alive in `rows` are eligible
/// and the count is taken relative to `rows.alive_count()`. `index` selects
/// an independent substream of `spec.seed` (one per fold).
pub fn inject_label_noise_on(ds: &Dataset, spec: &NoiseSpec, rows: &InstanceMask, index: u32) -> Result<Dataset> {
    if !(0.0..=1.0).contains(&spec.fraction) {
        return Err(RcgError::invalid(format!("noise fraction {} outside [0, 1]", spec.fraction)));
    }
    let c = ds.n_classes();
    let eligible: Vec<usize> = rows.indices().collect();
    // f64::round is half-away-from-zero
    let count = (spec.fraction * eligible.len() as f64).round() as usize;
    let mut rng = substream(spec.seed, Stream::Noise, index);
    let mut labels = ds.labels().to_vec();
    let chosen = rand::seq::index::sample(&mut rng, eligible.len(), count.min(eligible.len()));
    for pos in chosen.iter() {
        let row = eligible[pos];
        let old = labels[row];
        let mut new = rng.gen_range(0..c - 1);
        if new >= old {
            new += 1;
        }
        labels[row] = new;
    }
    ds.with_labels(labels)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "scheme", rename_all = "lowercase")]
pub enum SplitScheme {
    KFold { folds: usize, seed: u64, stratified: bool },
    Holdout { test_fraction: f64, seed: u64, stratified: bool },
}

#[derive(Debug, Clone, PartialEq)]
pub struct Fold {
    pub train: InstanceMask,
    pub test: InstanceMask,
}

/// Row permutation in which every class is spread evenly: each row gets the
/// key `(rank + 0.5) / class_size` from a shuffled within-class rank, so any
/// prefix holds classes in proportion to their frequencies.
fn stratified_order(ds: &Dataset, rng: &mut impl Rng) -> Vec<usize> {
    let mut by_class: Vec<Vec<usize>> = vec![Vec::new(); ds.n_classes()];
    for (i, &y) in ds.labels().iter().enumerate() {
        by_class[y].push(i);
    }
    let mut keyed: Vec<(f64, usize, usize)> = Vec::with_capacity(ds.n_rows());
    for (y, members) in by_class.iter_mut().enumerate() {
        members.shuffle(rng);
        let size = members.len() as f64;
        for (rank, &row) in members.iter().enumerate() {
            keyed.push(((rank as f64 + 0.5) / size, y, row));
        }
    }
    keyed.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
    keyed.into_iter().map(|(_, _, row)| row).collect()
}

pub fn split(ds: &Dataset, scheme: &SplitScheme) -> Result<Vec<Fold>> {
    let n = ds.n_rows();
    let (seed, stratified) = match *scheme {
        SplitScheme::KFold { seed, stratified, .. } | SplitScheme::Holdout { seed, stratified, .. } => {
            (seed, stratified)
        }
    };
    let mut rng = substream(seed, Stream::Split, 0);
    let order = if stratified {
        stratified_order(ds, &mut rng)
    } else {
        let mut o: Vec<usize> = (0..n).collect();
        o.shuffle(&mut rng);
        o
    };
    match *scheme {
        SplitScheme::KFold { folds, .. } => {
            if folds < 2 {
                return Err(RcgError::invalid(format!("fold count {folds} below 2")));
            }
            if folds > n {
                return Err(RcgError::invalid(format!("fold count {folds} exceeds {n} rows")));
            }
            Ok((0..folds)
                .map(|f| {
                    let test = InstanceMask::from_indices(
                        n,
                        order.iter().enumerate().filter(|(pos, _)| pos % folds == f).map(|(_, &row)| row),
                    );
                    let train = InstanceMask::from_bools(test.as_bools().iter().map(|b| !b).collect());
                    Fold { train, test }
                })
                .collect())
        }
        SplitScheme::Holdout { test_fraction, .. } => {
            if !(test_fraction > 0.0 && test_fraction < 1.0) {
                return Err(RcgError::invalid(format!("holdout fraction {test_fraction} outside (0, 1)")));
            }
            let size = ((test_fraction * n as f64).round() as usize).clamp(1, n - 1);
            let test = InstanceMask::from_indices(n, order[..size].iter().copied());
            let train = InstanceMask::from_bools(test.as_bools().iter().map(|b| !b).collect());
            Ok(vec![Fold { train, test }])
        }
    }
}
