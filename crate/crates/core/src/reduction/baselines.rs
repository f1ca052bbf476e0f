//! Hart's condensed nearest neighbor rule and Gates' reduced variant. Both
//! scan training rows in ascending order and use 1NN with the (distance, row)
//! tie-break.

use crate::data::{Dataset, FeatureMask, InstanceMask};
use crate::error::{RcgError, Result};
use crate::metric::{DistanceMatrix, DistanceSpec};

/// Label of the nearest member of `subset` (local indices) to local index `x`.
fn nearest_label(m: &DistanceMatrix, labels: &[usize], subset: &[usize], x: usize) -> usize {
    let best = subset
        .iter()
        .copied()
        .min_by(|&a, &b| m.get(x, a).total_cmp(&m.get(x, b)).then(a.cmp(&b)))
        .expect("non-empty subset");
    labels[best]
}

fn consistent(m: &DistanceMatrix, labels: &[usize], subset: &[usize]) -> bool {
    (0..m.size()).all(|x| nearest_label(m, labels, subset, x) == labels[x])
}

fn setup(ds: &Dataset, train: &InstanceMask, fmask: &FeatureMask, spec: &DistanceSpec) -> Result<(DistanceMatrix, Vec<usize>)> {
    if train.alive_count() == 0 {
        return Err(RcgError::data("empty training set"));
    }
    let m = DistanceMatrix::compute(ds, train, fmask, spec)?;
    let labels = m.row_ids().iter().map(|&r| ds.label(r)).collect();
    Ok((m, labels))
}

fn to_mask(ds: &Dataset, m: &DistanceMatrix, subset: &[usize]) -> InstanceMask {
    InstanceMask::from_indices(ds.n_rows(), subset.iter().map(|&i| m.row_id(i)))
}

fn condense(m: &DistanceMatrix, labels: &[usize]) -> Vec<usize> {
    let mut in_store = vec![false; m.size()];
    let mut store = Vec::new();
    let mut seeded = Vec::new();
    for (i, &y) in labels.iter().enumerate() {
        if !seeded.contains(&y) {
            seeded.push(y);
            in_store[i] = true;
            store.push(i);
        }
    }
    loop {
        let mut added = false;
        for x in 0..m.size() {
            if !in_store[x] && nearest_label(m, labels, &store, x) != labels[x] {
                in_store[x] = true;
                store.push(x);
                added = true;
            }
        }
        if !added {
            break;
        }
    }
    store.sort_unstable();
    store
}

/// Hart's CNN: grow a store (seeded with the first row of each class) by
/// every row it misclassifies, passing over the training rows until a full
/// pass adds nothing.
pub fn cnn(ds: &Dataset, train: &InstanceMask, fmask: &FeatureMask, spec: &DistanceSpec) -> Result<InstanceMask> {
    let (m, labels) = setup(ds, train, fmask, spec)?;
    Ok(to_mask(ds, &m, &condense(&m, &labels)))
}

/// Gates' RNN: starting from the CNN store, drop each member in turn when the
/// rest still classifies every training row correctly.
pub fn rnn(ds: &Dataset, train: &InstanceMask, fmask: &FeatureMask, spec: &DistanceSpec) -> Result<InstanceMask> {
    let (m, labels) = setup(ds, train, fmask, spec)?;
    let mut store = condense(&m, &labels);
    let mut pos = 0;
    while pos < store.len() {
        if store.len() > 1 {
            let candidate = store.remove(pos);
            if consistent(&m, &labels, &store) {
                continue;
            }
            store.insert(pos, candidate);
        }
        pos += 1;
    }
    Ok(to_mask(ds, &m, &store))
}

/// Whether 1NN over `subset` classifies every row of `train` correctly.
pub fn is_consistent(
    ds: &Dataset,
    train: &InstanceMask,
    subset: &InstanceMask,
    fmask: &FeatureMask,
    spec: &DistanceSpec,
) -> Result<bool> {
    let (m, labels) = setup(ds, train, fmask, spec)?;
    let local: Vec<usize> = subset
        .indices()
        .map(|r| m.local_index(r).ok_or_else(|| RcgError::invalid("subset row outside training set")))
        .collect::<Result<_>>()?;
    if local.is_empty() {
        return Err(RcgError::EmptyPrototypes);
    }
    Ok(consistent(&m, &labels, &local))
}
