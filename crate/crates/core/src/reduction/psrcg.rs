use crate::data::{Dataset, FeatureMask, InstanceMask};
use crate::error::{RcgError, Result};

use super::{centers_pass, prune_borders, AlgorithmConfig, Problem, ReductionTrace};

/// Prototype selection. Phase 1 prunes border instances from the k-NN graph
/// while the RCG improves; phase 2 removes, in one sweep, every survivor whose
/// (k+1)-NN neighborhood is class-pure.
pub fn psrcg(
    ds: &Dataset,
    train: &InstanceMask,
    features: &FeatureMask,
    cfg: &AlgorithmConfig,
) -> Result<(InstanceMask, ReductionTrace)> {
    let problem = Problem::new(ds, train, cfg)?;
    if train.alive_count() < problem.min_alive {
        return Err(RcgError::data(format!(
            "training set of {} instances is below the floor of {}",
            train.alive_count(),
            problem.min_alive
        )));
    }
    let mut instances = train.clone();
    let mut trace = ReductionTrace::new("psrcg");

    let phase1 = prune_borders(&problem, features, &mut instances, &mut trace)?;
    trace.add_halt("phase 1", phase1);
    let phase2 = centers_pass(&problem, features, &mut instances, &mut trace)?;
    trace.add_halt("phase 2", phase2);

    trace.graph_builds = problem.builds();
    Ok((instances, trace))
}
