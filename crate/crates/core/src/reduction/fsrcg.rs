use rayon::prelude::*;

use crate::data::{Dataset, FeatureMask, InstanceMask};
use crate::error::Result;
use crate::uncertainty::{Baseline, UncertaintyState};

use super::{Action, AlgorithmConfig, Problem, ReductionTrace};

/// Forward feature selection: starting from no feature, repeatedly add the
/// feature whose inclusion gives the highest RCG, as long as that RCG is
/// significantly higher than the current one.
///
/// If not even the best single feature is significant, that feature is
/// returned alone so downstream classifiers have a space to work in.
pub fn fsrcg(ds: &Dataset, train: &InstanceMask, cfg: &AlgorithmConfig) -> Result<(FeatureMask, ReductionTrace)> {
    let problem = Problem::new(ds, train, cfg)?;
    let p = ds.n_features();
    let mut selected = FeatureMask::empty(p);
    let mut current: Option<UncertaintyState> = None;
    let mut trace = ReductionTrace::new("fsrcg");

    loop {
        let candidates: Vec<usize> = (0..p).filter(|&j| !selected.contains(j)).collect();
        if candidates.is_empty() {
            trace.add_halt("forward selection", "all features selected");
            break;
        }
        let scored: Vec<(usize, UncertaintyState)> = candidates
            .par_iter()
            .map(|&j| {
                let mut trial = selected.clone();
                trial.insert(j);
                problem.snapshot(train, &trial, cfg.k).map(|s| (j, s.state))
            })
            .collect::<Result<_>>()?;
        // first maximum in column order
        let (best_col, best) = scored
            .into_iter()
            .reduce(|acc, cand| if cand.1.rcg > acc.1.rcg { cand } else { acc })
            .expect("at least one candidate");

        let baseline = current.as_ref().map_or(Baseline::Zero, |s| Baseline::Observed(s.context()));
        let before = current.as_ref().map_or(0.0, |s| s.rcg);
        if problem.significantly_greater(&best, baseline)? {
            selected.insert(best_col);
            trace.push(Action::AddFeature(best_col), before, best.rcg, &selected, train);
            current = Some(best);
        } else {
            if selected.selected_count() == 0 {
                selected.insert(best_col);
                trace.push(Action::AddFeature(best_col), before, best.rcg, &selected, train);
                trace.add_halt("forward selection", "no significant single feature, kept the best one");
            } else {
                trace.add_halt("forward selection", format!("best candidate {best_col} not significantly better"));
            }
            break;
        }
    }
    trace.graph_builds = problem.builds();
    Ok((selected, trace))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::uncertainty::Significance;

    /// Column 0 separates the classes (a wide gap between two tight runs),
    /// column 1 is unrelated to the class.
    fn separable_plus_noise() -> Dataset {
        let mut rows = Vec::new();
        let mut labels = Vec::new();
        for i in 0..40 {
            let class = i % 2;
            let x = class as f64 * 100.0 + (i / 2) as f64;
            let noise = ((i * 7919) % 97) as f64;
            rows.push(vec![x, noise]);
            labels.push(class);
        }
        Dataset::from_numeric(&rows, &labels).unwrap()
    }

    #[test]
    fn picks_the_separating_feature_only() {
        let ds = separable_plus_noise();
        for significance in [Significance::ChiSquare { alpha: 0.05 }, Significance::EpsilonMargin { epsilon: 1e-9 }] {
            let cfg = AlgorithmConfig { k: 1, significance, ..Default::default() };
            let (sel, trace) = fsrcg(&ds, &InstanceMask::full(40), &cfg).unwrap();
            assert_eq!(sel.indices().collect::<Vec<_>>(), vec![0]);
            assert_eq!(trace.steps.len(), 1);
            assert_eq!(trace.steps[0].rcg_after, 1.0);
            assert_eq!(trace.graph_builds, 3);
        }
    }

    #[test]
    fn identical_copies_select_one() {
        let base = separable_plus_noise();
        let rows: Vec<Vec<f64>> = (0..40).map(|i| vec![base.value(i, 0); 3]).collect();
        let ds = Dataset::from_numeric(&rows, base.labels()).unwrap();
        let (sel, _) = fsrcg(&ds, &InstanceMask::full(40), &AlgorithmConfig::with_k(1)).unwrap();
        assert_eq!(sel.selected_count(), 1);
    }

    #[test]
    fn falls_back_to_best_single_feature() {
        // labels unrelated to both columns: nothing is significant
        let rows: Vec<Vec<f64>> = (0..30).map(|i| vec![i as f64, ((i * 13) % 30) as f64]).collect();
        let labels: Vec<usize> = (0..30).map(|i| (i * 7 % 5) % 2).collect();
        let ds = Dataset::from_numeric(&rows, &labels).unwrap();
        let (sel, trace) = fsrcg(&ds, &InstanceMask::full(30), &AlgorithmConfig::with_k(1)).unwrap();
        assert_eq!(sel.selected_count(), 1);
        assert!(trace.halt_reason.contains("no significant single feature"));
    }
}
