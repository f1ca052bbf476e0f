//! Synthetic benchmark: Gaussian class blobs with optional irrelevant and
//! redundant columns.

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::data::Dataset;
use crate::error::{RcgError, Result};
use crate::rng::{substream, Stream};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlobSpec {
    pub name: String,
    pub n: usize,
    pub classes: usize,
    /// Columns carrying the class signal.
    pub informative: usize,
    /// Distance between neighboring class centers, in standard deviations.
    pub separation: f64,
    /// Independent standard-normal columns.
    pub irrelevant: usize,
    /// Noisy copies of informative columns.
    pub redundant: usize,
}

/// Draws a dataset from `spec`. Rows cycle through the classes, so class
/// sizes differ by at most one. Column order: informative, redundant,
/// irrelevant.
pub fn blobs(spec: &BlobSpec, seed: u64, index: u32) -> Result<Dataset> {
    if spec.classes < 2 || spec.informative == 0 || spec.n < spec.classes {
        return Err(RcgError::invalid(format!("unusable blob spec '{}'", spec.name)));
    }
    let mut rng = substream(seed, Stream::Synthetic, index);
    let unit = Normal::new(0.0, 1.0).expect("valid normal");
    // class centers on a random direction per class, spaced by `separation`
    let centers: Vec<Vec<f64>> = (0..spec.classes)
        .map(|_| {
            (0..spec.informative)
                .map(|_| spec.separation * rng.gen_range(-1.0..1.0) * (spec.classes as f64).sqrt())
                .collect()
        })
        .collect();
    let sources: Vec<usize> = (0..spec.redundant).map(|_| rng.gen_range(0..spec.informative)).collect();

    let mut rows = Vec::with_capacity(spec.n);
    let mut labels = Vec::with_capacity(spec.n);
    for i in 0..spec.n {
        let y = i % spec.classes;
        let mut row: Vec<f64> = centers[y].iter().map(|&c| c + unit.sample(&mut rng)).collect();
        for &s in &sources {
            row.push(row[s] + 0.25 * unit.sample(&mut rng));
        }
        for _ in 0..spec.irrelevant {
            row.push(unit.sample(&mut rng) * spec.separation.max(1.0));
        }
        rows.push(row);
        labels.push(y);
    }
    Dataset::from_numeric(&rows, &labels)
}

/// The fixed suite used for method comparisons.
pub fn suite() -> Vec<BlobSpec> {
    let spec = |name: &str, n, classes, informative, separation, irrelevant, redundant| BlobSpec {
        name: name.to_string(),
        n,
        classes,
        informative,
        separation,
        irrelevant,
        redundant,
    };
    vec![
        spec("two-blobs-irrelevant", 200, 2, 2, 2.0, 3, 0),
        spec("three-blobs-mixed", 240, 3, 3, 2.0, 2, 2),
        spec("four-blobs-redundant", 240, 4, 2, 2.5, 1, 2),
        spec("overlap-irrelevant", 200, 2, 3, 1.2, 4, 0),
    ]
}
