use rayon::prelude::*;

use crate::data::{Dataset, FeatureMask, InstanceMask};
use crate::error::{RcgError, Result};
use crate::uncertainty::Baseline;

use super::{
    centers_pass, prune_borders, purge_zero_uncertainty, Action, AlgorithmConfig, Problem, ReductionTrace, Snapshot,
};

/// Joint feature and prototype selection.
///
/// Stage A eliminates features backward. Each round scores every remaining
/// feature by the RCG of the space without it (graph rebuilt on the current
/// instances), and commits the best removal only if its RCG is significantly
/// higher than the current one. Every committed removal is followed by a
/// simultaneous purge of the instances whose neighborhood is class-pure in the
/// new space (centers and mislabeled points). The next round is measured
/// against the RCG of the purged set, or against the RCG accepted before the
/// purge when `pre_purge_baseline` is set.
///
/// Stage B prunes border instances in the final space exactly as the first
/// phase of [`psrcg`](super::psrcg).
pub fn fsps_rcg(
    ds: &Dataset,
    train: &InstanceMask,
    cfg: &AlgorithmConfig,
) -> Result<(FeatureMask, InstanceMask, ReductionTrace)> {
    let problem = Problem::new(ds, train, cfg)?;
    if train.alive_count() < problem.min_alive {
        return Err(RcgError::data(format!(
            "training set of {} instances is below the floor of {}",
            train.alive_count(),
            problem.min_alive
        )));
    }
    let mut features = FeatureMask::full(ds.n_features());
    let mut instances = train.clone();
    let mut trace = ReductionTrace::new("fsps");

    let mut current = problem.snapshot(&instances, &features, cfg.k)?.state;
    loop {
        if features.selected_count() <= 1 {
            trace.add_halt("stage A", "a single feature is left");
            break;
        }
        let candidates: Vec<usize> = features.indices().collect();
        let scored: Vec<(usize, Snapshot)> = candidates
            .par_iter()
            .map(|&j| {
                let mut trial = features.clone();
                trial.remove(j);
                problem.snapshot(&instances, &trial, cfg.k).map(|s| (j, s))
            })
            .collect::<Result<_>>()?;
        let (col, best) = scored
            .into_iter()
            .reduce(|acc, cand| {
                let better = if cfg.literal_min { cand.1.state.rcg < acc.1.state.rcg } else { cand.1.state.rcg > acc.1.state.rcg };
                if better {
                    cand
                } else {
                    acc
                }
            })
            .expect("at least two candidates");

        if !problem.significantly_greater(&best.state, Baseline::Observed(current.context()))? {
            trace.add_halt("stage A", format!("removing feature {col} gives no significant gain"));
            break;
        }
        features.remove(col);
        trace.push(Action::RemoveFeature(col), current.rcg, best.state.rcg, &features, &instances);

        let removed = purge_zero_uncertainty(&best, problem.min_alive);
        for &r in &removed {
            instances.remove(r);
        }
        let purged = if removed.is_empty() {
            best.state.clone()
        } else {
            problem.snapshot(&instances, &features, cfg.k)?.state
        };
        trace.push(Action::BulkRemoveZeroUloc(removed), best.state.rcg, purged.rcg, &features, &instances);
        current = if cfg.pre_purge_baseline { best.state } else { purged };
    }

    let stage_b = prune_borders(&problem, &features, &mut instances, &mut trace)?;
    trace.add_halt("stage B", stage_b);
    if cfg.final_centers_pass {
        let pass = centers_pass(&problem, &features, &mut instances, &mut trace)?;
        trace.add_halt("final pass", pass);
    }
    trace.graph_builds = problem.builds();
    Ok((features, instances, trace))
}
