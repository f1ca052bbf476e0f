//! Quadratic entropy, local/total uncertainty over a kNN graph, the relative
//! certainty gain (RCG), and the significance test that gates every accept or
//! halt decision of the reduction algorithms.

use std::cell::RefCell;
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::error::{RcgError, Result};
use crate::graph::NeighborhoodGraph;
use crate::stats::chi_square_quantile;

const NORMALIZATION_TOLERANCE: f64 = 1e-9;

/// Σ γ_j (1 − γ_j) over a probability vector.
pub fn quadratic_entropy(dist: &[f64]) -> Result<f64> {
    if dist.iter().any(|&g| !(g >= 0.0)) {
        return Err(RcgError::invalid("probability vector has a negative or NaN entry"));
    }
    let total: f64 = dist.iter().sum();
    if (total - 1.0).abs() > NORMALIZATION_TOLERANCE {
        return Err(RcgError::invalid(format!("probability vector sums to {total}, not 1")));
    }
    Ok(dist.iter().map(|g| g * (1.0 - g)).sum())
}

/// Quadratic entropy of a count vector, evaluated as
/// `(N² − Σ n_j²) / N²` so equal multisets of counts give bit-equal values.
/// An all-zero vector has entropy 0.
pub fn count_entropy(counts: &[usize]) -> f64 {
    let total: usize = counts.iter().sum();
    if total == 0 {
        return 0.0;
    }
    let squares: usize = counts.iter().map(|&c| c * c).sum();
    let total_sq = total * total;
    (total_sq - squares) as f64 / total_sq as f64
}

/// U_0: quadratic entropy of the empirical class distribution of `labels`.
pub fn prior_uncertainty(labels: &[usize], n_classes: usize) -> f64 {
    let mut counts = vec![0; n_classes];
    for &y in labels {
        counts[y] += 1;
    }
    count_entropy(&counts)
}

/// What a significance test needs to know about one RCG value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RcgContext {
    pub rcg: f64,
    /// Alive instance count.
    pub n: usize,
    /// Classes present among the alive instances.
    pub c: usize,
    /// n.. = 2|E|.
    pub n_dotdot: usize,
}

impl RcgContext {
    /// Degrees of freedom `(n − 1)(c − 1)`.
    pub fn degrees_of_freedom(&self) -> Result<f64> {
        if self.n < 2 || self.c < 2 {
            return Err(RcgError::DegreesOfFreedom { n: self.n, c: self.c });
        }
        Ok(((self.n - 1) * (self.c - 1)) as f64)
    }

    /// `(n.. − 1)(c − 1) · RCG`.
    pub fn statistic(&self) -> f64 {
        (self.n_dotdot as f64 - 1.0) * (self.c as f64 - 1.0) * self.rcg
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "snake_case")]
pub enum Significance {
    ChiSquare { alpha: f64 },
    EpsilonMargin { epsilon: f64 },
}

impl Default for Significance {
    fn default() -> Self {
        Significance::ChiSquare { alpha: 0.05 }
    }
}

impl Significance {
    pub fn validate(&self) -> Result<()> {
        match *self {
            Significance::ChiSquare { alpha } if !(alpha > 0.0 && alpha < 1.0) => {
                Err(RcgError::invalid(format!("alpha {alpha} outside (0, 1)")))
            }
            Significance::EpsilonMargin { epsilon } if !(epsilon >= 0.0) => {
                Err(RcgError::invalid(format!("epsilon {epsilon} is negative")))
            }
            _ => Ok(()),
        }
    }
}

/// Right-hand side of a ">>" comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Baseline {
    Zero,
    Observed(RcgContext),
}

thread_local! {
    static QUANTILES: RefCell<HashMap<(u64, u64), f64>> = RefCell::new(HashMap::new());
}

fn cached_quantile(p: f64, df: f64) -> Result<f64> {
    let key = (p.to_bits(), df.to_bits());
    if let Some(q) = QUANTILES.with(|c| c.borrow().get(&key).copied()) {
        return Ok(q);
    }
    let q = chi_square_quantile(p, df)?;
    QUANTILES.with(|c| c.borrow_mut().insert(key, q));
    Ok(q)
}

/// True iff `a` exceeds the chi-square critical value at level `alpha`.
fn significant_vs_zero(a: &RcgContext, alpha: f64) -> Result<bool> {
    let df = a.degrees_of_freedom()?;
    Ok(a.statistic() > cached_quantile(1.0 - alpha, df)?)
}

/// The ">>" operator.
///
/// `ChiSquare`: versus zero, the statistic of `a` must exceed the `1 − alpha`
/// quantile of χ² with `(n − 1)(c − 1)` degrees of freedom; versus an observed
/// RCG, `a` must also be strictly higher with a strictly higher statistic.
/// `EpsilonMargin`: `rcg(a) > rcg(b) + epsilon`.
pub fn significantly_greater(a: &RcgContext, b: &Baseline, spec: &Significance) -> Result<bool> {
    a.degrees_of_freedom()?;
    if let Baseline::Observed(b) = b {
        b.degrees_of_freedom()?;
    }
    match (*spec, b) {
        (Significance::EpsilonMargin { epsilon }, Baseline::Zero) => Ok(a.rcg > epsilon),
        (Significance::EpsilonMargin { epsilon }, Baseline::Observed(b)) => Ok(a.rcg > b.rcg + epsilon),
        (Significance::ChiSquare { alpha }, Baseline::Zero) => significant_vs_zero(a, alpha),
        (Significance::ChiSquare { alpha }, Baseline::Observed(b)) => Ok(a.rcg > b.rcg
            && a.statistic() - b.statistic() > 0.0
            && significant_vs_zero(a, alpha)?),
    }
}

/// Uncertainty of a graph: U_loc per slot (0 for dead slots), U_tot, U_0 and
/// RCG.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UncertaintyState {
    pub u_loc: Vec<f64>,
    pub u_tot: f64,
    pub u_0: f64,
    pub rcg: f64,
    pub n_dotdot: usize,
    pub alive_count: usize,
    pub classes_present: usize,
}

impl UncertaintyState {
    pub fn compute(g: &NeighborhoodGraph) -> Result<Self> {
        let u_loc = (0..g.len())
            .map(|i| if g.is_alive(i) { count_entropy(g.class_tally(i)) } else { 0.0 })
            .collect();
        Self::finish(g, u_loc)
    }

    /// Recomputes U_loc on `affected` only; U_0, U_tot and RCG are refreshed
    /// from the new degrees. Equal to [`UncertaintyState::compute`] on `g`
    /// whenever `affected` covers every instance whose tally changed.
    pub fn update_after_removal(&self, g: &NeighborhoodGraph, affected: &[usize]) -> Result<Self> {
        let mut u_loc = self.u_loc.clone();
        for &i in affected {
            u_loc[i] = count_entropy(g.class_tally(i));
        }
        Self::finish(g, u_loc)
    }

    fn finish(g: &NeighborhoodGraph, mut u_loc: Vec<f64>) -> Result<Self> {
        let counts = g.class_counts();
        let u_0 = count_entropy(&counts);
        let classes_present = counts.iter().filter(|&&c| c > 0).count();
        if u_0 == 0.0 {
            return Err(RcgError::degenerate("alive instances all share one class, RCG undefined"));
        }
        let n_dotdot = 2 * g.edge_count();
        let mut u_tot = 0.0;
        for (i, u) in u_loc.iter_mut().enumerate() {
            if g.is_alive(i) {
                u_tot += (g.degree(i) as f64 / n_dotdot as f64) * *u;
            } else {
                *u = 0.0;
            }
        }
        Ok(UncertaintyState {
            u_loc,
            u_tot,
            u_0,
            rcg: (u_0 - u_tot) / u_0,
            n_dotdot,
            alive_count: g.alive_count(),
            classes_present,
        })
    }

    pub fn context(&self) -> RcgContext {
        RcgContext { rcg: self.rcg, n: self.alive_count, c: self.classes_present, n_dotdot: self.n_dotdot }
    }
}
