//! kNN classification over reduced views and cross-validated experiments.

use std::borrow::Cow;
use std::fmt;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{inject_label_noise_on, split, Dataset, FeatureMask, InstanceMask, NoiseSpec, SplitScheme};
use crate::error::{RcgError, Result};
use crate::metric::DistanceSpec;
use crate::reduction::{reduce, Algorithm, AlgorithmConfig};
use crate::stats::paired_t_test;

/// A point to classify: a row of the dataset the classifier was built on, or
/// an external feature vector laid out like a dataset row.
#[derive(Debug, Clone, Copy)]
pub enum Query<'a> {
    Row(usize),
    Vector(&'a [f64]),
}

/// kNN over a fixed prototype set and feature subset.
pub struct KnnClassifier<'a> {
    ds: &'a Dataset,
    prototypes: Vec<usize>,
    cols: Vec<usize>,
    spec: &'a DistanceSpec,
    k: usize,
}

impl<'a> KnnClassifier<'a> {
    pub fn new(
        ds: &'a Dataset,
        prototypes: &InstanceMask,
        fmask: &FeatureMask,
        spec: &'a DistanceSpec,
        k: usize,
    ) -> Result<Self> {
        if k == 0 {
            return Err(RcgError::invalid("k must be at least 1"));
        }
        if prototypes.len() != ds.n_rows() || fmask.len() != ds.n_features() {
            return Err(RcgError::invalid("mask length does not match the dataset"));
        }
        let cols: Vec<usize> = fmask.indices().collect();
        if cols.is_empty() {
            return Err(RcgError::EmptyFeatureMask);
        }
        let prototypes: Vec<usize> = prototypes.indices().collect();
        if prototypes.is_empty() {
            return Err(RcgError::EmptyPrototypes);
        }
        Ok(KnnClassifier { ds, prototypes, cols, spec, k })
    }

    pub fn classify(&self, query: Query<'_>) -> Result<usize> {
        let x = match query {
            Query::Row(r) => {
                if r >= self.ds.n_rows() {
                    return Err(RcgError::invalid(format!("row {r} out of range")));
                }
                self.ds.row(r)
            }
            Query::Vector(v) => {
                if v.len() != self.ds.n_features() {
                    return Err(RcgError::invalid(format!(
                        "query has {} values, expected {}",
                        v.len(),
                        self.ds.n_features()
                    )));
                }
                v
            }
        };
        let mut near: Vec<(f64, usize)> =
            self.prototypes.iter().map(|&p| (self.spec.between(x, self.ds.row(p), &self.cols), p)).collect();
        let k = self.k.min(near.len());
        let by_distance = |a: &(f64, usize), b: &(f64, usize)| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1));
        if k < near.len() {
            near.select_nth_unstable_by(k - 1, by_distance);
            near.truncate(k);
        }
        near.sort_unstable_by(by_distance);

        let mut votes = vec![0usize; self.ds.n_classes()];
        for &(_, p) in &near {
            votes[self.ds.label(p)] += 1;
        }
        let top = *votes.iter().max().expect("at least one class");
        // nearest prototype whose class is among the tied winners
        let winner = near.iter().map(|&(_, p)| self.ds.label(p)).find(|&y| votes[y] == top).expect("non-empty");
        Ok(winner)
    }
}

/// Classifies one query with a kNN vote over `prototypes`.
pub fn knn_classify(
    ds: &Dataset,
    prototypes: &InstanceMask,
    fmask: &FeatureMask,
    query: Query<'_>,
    k: usize,
    spec: &DistanceSpec,
) -> Result<usize> {
    KnnClassifier::new(ds, prototypes, fmask, spec, k)?.classify(query)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FoldResult {
    pub fold: usize,
    pub train_size: usize,
    pub test_size: usize,
    pub correct: usize,
    pub accuracy: f64,
    pub retained_instances_pct: f64,
    pub retained_features_pct: f64,
    pub graph_builds: usize,
    pub halt_reason: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EvalResult {
    pub algorithm: String,
    pub scheme: SplitScheme,
    pub noise: Option<NoiseSpec>,
    pub config: AlgorithmConfig,
    /// Mean test accuracy over folds, in percent.
    pub accuracy: f64,
    pub retained_instances_pct: f64,
    pub retained_features_pct: f64,
    pub size_times_dim_pct: f64,
    pub per_fold: Vec<FoldResult>,
    /// Wall-clock time; left out of serialized results so they stay
    /// reproducible.
    #[serde(skip)]
    pub runtime_ms: f64,
    pub graph_builds: usize,
}

fn pct(part: usize, whole: usize) -> f64 {
    100.0 * part as f64 / whole as f64
}

fn mean(xs: impl ExactSizeIterator<Item = f64>) -> f64 {
    let n = xs.len();
    xs.sum::<f64>() / n as f64
}

fn run_fold(
    ds: &Dataset,
    algorithm: Algorithm,
    cfg: &AlgorithmConfig,
    noise: Option<&NoiseSpec>,
    index: usize,
    train: &InstanceMask,
    test: &InstanceMask,
) -> Result<FoldResult> {
    let learn: Cow<Dataset> = match noise {
        Some(spec) if spec.fraction > 0.0 => Cow::Owned(inject_label_noise_on(ds, spec, train, index as u32)?),
        _ => Cow::Borrowed(ds),
    };
    let outcome = reduce(&learn, train, algorithm, cfg)?;
    let spec = DistanceSpec::fit(&learn, train, cfg.normalize);
    let knn = KnnClassifier::new(&learn, &outcome.instances, &outcome.features, &spec, algorithm.classifier_k(cfg.k))?;
    let mut correct = 0;
    for row in test.indices() {
        // test labels come from the clean dataset
        if knn.classify(Query::Row(row))? == ds.label(row) {
            correct += 1;
        }
    }
    let test_size = test.alive_count();
    Ok(FoldResult {
        fold: index,
        train_size: train.alive_count(),
        test_size,
        correct,
        accuracy: pct(correct, test_size),
        retained_instances_pct: pct(outcome.instances.alive_count(), train.alive_count()),
        retained_features_pct: pct(outcome.features.selected_count(), ds.n_features()),
        graph_builds: outcome.trace.graph_builds,
        halt_reason: outcome.trace.halt_reason,
    })
}

/// Splits `ds`, optionally noises each training fold, reduces it with
/// `algorithm` and scores the reduced view on the untouched test fold.
pub fn run_experiment(
    ds: &Dataset,
    algorithm: Algorithm,
    scheme: &SplitScheme,
    cfg: &AlgorithmConfig,
    noise: Option<&NoiseSpec>,
) -> Result<EvalResult> {
    cfg.validate()?;
    let started = Instant::now();
    let folds = split(ds, scheme)?;
    let per_fold: Vec<FoldResult> = folds
        .par_iter()
        .enumerate()
        .map(|(i, f)| run_fold(ds, algorithm, cfg, noise, i, &f.train, &f.test))
        .collect::<Result<_>>()?;

    let inst = mean(per_fold.iter().map(|f| f.retained_instances_pct));
    let feat = mean(per_fold.iter().map(|f| f.retained_features_pct));
    Ok(EvalResult {
        algorithm: algorithm.name().to_string(),
        scheme: *scheme,
        noise: noise.copied(),
        config: cfg.clone(),
        accuracy: mean(per_fold.iter().map(|f| f.accuracy)),
        retained_instances_pct: inst,
        retained_features_pct: feat,
        size_times_dim_pct: inst * feat / 100.0,
        graph_builds: per_fold.iter().map(|f| f.graph_builds).sum(),
        per_fold,
        runtime_ms: started.elapsed().as_secs_f64() * 1e3,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareRow {
    pub algorithm: String,
    pub size_pct: f64,
    pub dim_pct: f64,
    pub size_times_dim_pct: f64,
    pub accuracy: f64,
}

/// Paired t-test of per-fold accuracies, `a` minus `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PairwiseT {
    pub a: String,
    pub b: String,
    pub t: f64,
    pub df: usize,
    pub mean_difference: f64,
    pub p_two_sided: f64,
    pub p_one_sided: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareTable {
    pub rows: Vec<CompareRow>,
    pub t_tests: Vec<PairwiseT>,
}

/// Rows sorted by Size×Dim (ties keep input order) plus paired t-tests for
/// every pair of algorithms, in input order.
pub fn compare_table(results: &[EvalResult]) -> Result<CompareTable> {
    let Some(first) = results.first() else {
        return Err(RcgError::invalid("nothing to compare"));
    };
    for r in &results[1..] {
        let same_folds = r.per_fold.len() == first.per_fold.len()
            && r.per_fold.iter().zip(&first.per_fold).all(|(a, b)| a.test_size == b.test_size);
        if r.scheme != first.scheme || r.noise != first.noise || !same_folds {
            return Err(RcgError::invalid(format!(
                "results for '{}' and '{}' were not produced on the same splits",
                first.algorithm, r.algorithm
            )));
        }
    }
    let mut rows: Vec<CompareRow> = results
        .iter()
        .map(|r| CompareRow {
            algorithm: r.algorithm.clone(),
            size_pct: r.retained_instances_pct,
            dim_pct: r.retained_features_pct,
            size_times_dim_pct: r.size_times_dim_pct,
            accuracy: r.accuracy,
        })
        .collect();
    rows.sort_by(|a, b| a.size_times_dim_pct.total_cmp(&b.size_times_dim_pct));

    let mut t_tests = Vec::new();
    for (i, a) in results.iter().enumerate() {
        for b in &results[i + 1..] {
            let xa: Vec<f64> = a.per_fold.iter().map(|f| f.accuracy).collect();
            let xb: Vec<f64> = b.per_fold.iter().map(|f| f.accuracy).collect();
            if let Some(t) = paired_t_test(&xa, &xb) {
                t_tests.push(PairwiseT {
                    a: a.algorithm.clone(),
                    b: b.algorithm.clone(),
                    t: t.t,
                    df: t.df,
                    mean_difference: t.mean_difference,
                    p_two_sided: t.p_two_sided,
                    p_one_sided: t.p_one_sided,
                });
            }
        }
    }
    Ok(CompareTable { rows, t_tests })
}

impl fmt::Display for CompareTable {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self.rows.iter().map(|r| r.algorithm.len()).max().unwrap_or(0).max("algorithm".len());
        writeln!(f, "{:<width$}  {:>8}  {:>8}  {:>10}  {:>8}", "algorithm", "size%", "dim%", "size*dim%", "acc%")?;
        for r in &self.rows {
            writeln!(
                f,
                "{:<width$}  {:>8.2}  {:>8.2}  {:>10.2}  {:>8.2}",
                r.algorithm, r.size_pct, r.dim_pct, r.size_times_dim_pct, r.accuracy
            )?;
        }
        if !self.t_tests.is_empty() {
            writeln!(f)?;
            let pair_width = self.t_tests.iter().map(|t| t.a.len() + t.b.len() + 4).max().unwrap_or(0).max(4);
            writeln!(f, "{:<pair_width$}  {:>8}  {:>3}  {:>8}  {:>8}", "pair", "t", "df", "p(2)", "p(1)")?;
            for t in &self.t_tests {
                writeln!(
                    f,
                    "{:<pair_width$}  {:>8.3}  {:>3}  {:>8.4}  {:>8.4}",
                    format!("{} vs {}", t.a, t.b),
                    t.t,
                    t.df,
                    t.p_two_sided,
                    t.p_one_sided
                )?;
            }
        }
        Ok(())
    }
}
