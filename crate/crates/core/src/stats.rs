//! Chi-square quantiles and the paired Student t test.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ChiSquared, ContinuousCDF, StudentsT};

use crate::error::{RcgError, Result};

/// Quantile of the chi-square distribution with `df` degrees of freedom.
pub fn chi_square_quantile(p: f64, df: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(RcgError::invalid(format!("probability {p} outside (0, 1)")));
    }
    let dist = ChiSquared::new(df).map_err(|e| RcgError::invalid(format!("chi-square df {df}: {e}")))?;
    Ok(dist.inverse_cdf(p))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PairedT {
    pub t: f64,
    pub df: usize,
    pub mean_difference: f64,
    pub p_two_sided: f64,
    /// P(T >= t): evidence that the first sample is higher.
    pub p_one_sided: f64,
}

/// Paired t test on `a[i] - b[i]`. Returns `None` with fewer than two pairs.
/// Identical samples give `t = 0, p = 1`; a constant nonzero difference gives
/// an infinite statistic with `p = 0`.
pub fn paired_t_test(a: &[f64], b: &[f64]) -> Option<PairedT> {
    if a.len() != b.len() || a.len() < 2 {
        return None;
    }
    let m = a.len() as f64;
    let diffs: Vec<f64> = a.iter().zip(b).map(|(x, y)| x - y).collect();
    let mean = diffs.iter().sum::<f64>() / m;
    let var = diffs.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / (m - 1.0);
    let df = a.len() - 1;
    let t = if var == 0.0 {
        if mean == 0.0 {
            0.0
        } else {
            mean.signum() * f64::INFINITY
        }
    } else {
        mean / (var / m).sqrt()
    };
    let (p_two_sided, p_one_sided) = if t.is_infinite() {
        (0.0, if t > 0.0 { 0.0 } else { 1.0 })
    } else {
        let dist = StudentsT::new(0.0, 1.0, df as f64).expect("df >= 1");
        let upper = 1.0 - dist.cdf(t);
        ((2.0 * (1.0 - dist.cdf(t.abs()))).min(1.0), upper)
    };
    Some(PairedT { t, df, mean_difference: mean, p_two_sided, p_one_sided })
}
