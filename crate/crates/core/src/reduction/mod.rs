//! Feature and prototype selection driven by the relative certainty gain,
//! plus the CNN/RNN condensing baselines.
//!
//! * [`fsrcg`]: forward feature selection.
//! * [`psrcg`]: prototype selection (border pruning, then a center and
//!   mislabeled purge in a (k+1)-NN graph).
//! * [`fsps_rcg`]: backward feature elimination interleaved with purges of
//!   zero-uncertainty instances, followed by border pruning.
//! * [`cnn`] / [`rnn`]: Hart's condensed and Gates' reduced nearest neighbor
//!   rules.

mod baselines;
mod fsps;
mod fsrcg;
mod psrcg;
mod trace;

use std::fmt;
use std::str::FromStr;
use std::sync::atomic::{AtomicUsize, Ordering};

use serde::{Deserialize, Serialize};

pub use baselines::{cnn, is_consistent, rnn};
pub use fsps::fsps_rcg;
pub use fsrcg::fsrcg;
pub use psrcg::psrcg;
pub use trace::{Action, ReductionTrace, Step};

use crate::data::{Dataset, FeatureMask, InstanceMask};
use crate::error::{RcgError, Result};
use crate::graph::NeighborhoodGraph;
use crate::metric::{DistanceMatrix, DistanceSpec};
use crate::uncertainty::{significantly_greater, Baseline, Significance, UncertaintyState};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AlgorithmConfig {
    pub k: usize,
    pub significance: Significance,
    /// Undo the deletion that triggered the border-pruning halt.
    pub rollback_last_deletion: bool,
    /// Instance floor; `None` means `max(c, k + 2)`.
    pub min_alive: Option<usize>,
    /// Range-normalize numeric columns.
    pub normalize: bool,
    /// Backward elimination picks the candidate with the *lowest* RCG.
    pub literal_min: bool,
    /// Finish (FS+PS)RCG with the (k+1)-NN zero-uncertainty purge.
    pub final_centers_pass: bool,
    /// Keep the accepted candidate's RCG as the (FS+PS)RCG baseline across
    /// the purge that follows it, instead of the RCG of the purged set.
    #[serde(default)]
    pub pre_purge_baseline: bool,
}

impl Default for AlgorithmConfig {
    fn default() -> Self {
        AlgorithmConfig {
            k: 5,
            significance: Significance::default(),
            rollback_last_deletion: true,
            min_alive: None,
            normalize: true,
            literal_min: false,
            final_centers_pass: false,
            pre_purge_baseline: false,
        }
    }
}

impl AlgorithmConfig {
    pub fn with_k(k: usize) -> Self {
        AlgorithmConfig { k, ..Default::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if self.k == 0 {
            return Err(RcgError::invalid("k must be at least 1"));
        }
        if let Some(m) = self.min_alive {
            if m < 2 {
                return Err(RcgError::invalid(format!("min_alive {m} below 2")));
            }
        }
        self.significance.validate()
    }

    pub fn resolved_min_alive(&self, n_classes: usize) -> usize {
        self.min_alive.unwrap_or_else(|| n_classes.max(self.k + 2)).max(2)
    }
}

/// Selectable reduction pipelines.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Algorithm {
    #[serde(rename = "none")]
    None,
    #[serde(rename = "fsrcg")]
    Fsrcg,
    #[serde(rename = "psrcg")]
    Psrcg,
    #[serde(rename = "fsps")]
    Fsps,
    #[serde(rename = "fsrcg+psrcg")]
    FsrcgThenPsrcg,
    #[serde(rename = "cnn")]
    Cnn,
    #[serde(rename = "rnn")]
    Rnn,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::None,
        Algorithm::Fsrcg,
        Algorithm::Psrcg,
        Algorithm::Fsps,
        Algorithm::FsrcgThenPsrcg,
        Algorithm::Cnn,
        Algorithm::Rnn,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Algorithm::None => "none",
            Algorithm::Fsrcg => "fsrcg",
            Algorithm::Psrcg => "psrcg",
            Algorithm::Fsps => "fsps",
            Algorithm::FsrcgThenPsrcg => "fsrcg+psrcg",
            Algorithm::Cnn => "cnn",
            Algorithm::Rnn => "rnn",
        }
    }

    /// Neighborhood size used to classify with the reduced set. CNN and RNN
    /// build 1NN-consistent subsets and are scored with 1NN.
    pub fn classifier_k(self, k: usize) -> usize {
        match self {
            Algorithm::Cnn | Algorithm::Rnn => 1,
            _ => k,
        }
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Algorithm {
    type Err = RcgError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fsrcg-psrcg" | "fsrcg_psrcg" => Ok(Algorithm::FsrcgThenPsrcg),
            "fs+ps" | "fsps-rcg" => Ok(Algorithm::Fsps),
            lower => Algorithm::ALL
                .into_iter()
                .find(|a| a.name() == lower)
                .ok_or_else(|| RcgError::invalid(format!("unknown algorithm '{s}'"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReductionOutcome {
    pub features: FeatureMask,
    pub instances: InstanceMask,
    pub trace: ReductionTrace,
}

/// Runs `algorithm` on the rows of `train`. Distances use numeric ranges
/// frozen over `train`.
pub fn reduce(ds: &Dataset, train: &InstanceMask, algorithm: Algorithm, cfg: &AlgorithmConfig) -> Result<ReductionOutcome> {
    cfg.validate()?;
    let all_features = FeatureMask::full(ds.n_features());
    match algorithm {
        Algorithm::None => Ok(ReductionOutcome {
            features: all_features,
            instances: train.clone(),
            trace: ReductionTrace { halt_reason: "no reduction".into(), ..ReductionTrace::new("none") },
        }),
        Algorithm::Fsrcg => {
            let (features, trace) = fsrcg(ds, train, cfg)?;
            Ok(ReductionOutcome { features, instances: train.clone(), trace })
        }
        Algorithm::Psrcg => {
            let (instances, trace) = psrcg(ds, train, &all_features, cfg)?;
            Ok(ReductionOutcome { features: all_features, instances, trace })
        }
        Algorithm::Fsps => {
            let (features, instances, trace) = fsps_rcg(ds, train, cfg)?;
            Ok(ReductionOutcome { features, instances, trace })
        }
        Algorithm::FsrcgThenPsrcg => {
            let (features, mut trace) = fsrcg(ds, train, cfg)?;
            let (instances, ps_trace) = psrcg(ds, train, &features, cfg)?;
            trace.algorithm = Algorithm::FsrcgThenPsrcg.name().into();
            trace.steps.extend(ps_trace.steps);
            trace.graph_builds += ps_trace.graph_builds;
            trace.halt_reason = format!("fsrcg {}; psrcg {}", trace.halt_reason, ps_trace.halt_reason);
            Ok(ReductionOutcome { features, instances, trace })
        }
        Algorithm::Cnn | Algorithm::Rnn => {
            let spec = DistanceSpec::fit(ds, train, cfg.normalize);
            let instances = if algorithm == Algorithm::Cnn {
                cnn(ds, train, &all_features, &spec)?
            } else {
                rnn(ds, train, &all_features, &spec)?
            };
            let mut trace = ReductionTrace::new(algorithm.name());
            trace.halt_reason = format!("consistent subset of {} instances", instances.alive_count());
            Ok(ReductionOutcome { features: all_features, instances, trace })
        }
    }
}

/// Uncertainty state of the k-NN graph over `instances` in the `features`
/// space, with numeric ranges frozen over `train`.
pub fn subset_state(
    ds: &Dataset,
    train: &InstanceMask,
    instances: &InstanceMask,
    features: &FeatureMask,
    cfg: &AlgorithmConfig,
) -> Result<UncertaintyState> {
    if !instances.is_subset_of(train) {
        return Err(RcgError::invalid("instances are not a subset of the training set"));
    }
    let problem = Problem::new(ds, instances, cfg)?;
    let problem = Problem { spec: DistanceSpec::fit(ds, train, cfg.normalize), ..problem };
    Ok(problem.snapshot(instances, features, cfg.k)?.state)
}

/// Role of an instance from the classes of its graph neighborhood.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum InstanceRole {
    /// Every neighbor shares the instance's class.
    Center,
    /// No neighbor shares the instance's class.
    Mislabeled,
    Border,
}

pub fn instance_role(g: &NeighborhoodGraph, i: usize) -> InstanceRole {
    let own = g.labels()[i];
    let same = g.neighborhood(i).iter().filter(|&&j| g.labels()[j] == own).count();
    if same == g.degree(i) {
        InstanceRole::Center
    } else if same == 0 {
        InstanceRole::Mislabeled
    } else {
        InstanceRole::Border
    }
}

/// A graph built over the alive rows of an instance mask, together with its
/// distance matrix and uncertainty state.
pub(crate) struct Snapshot {
    pub matrix: DistanceMatrix,
    pub graph: NeighborhoodGraph,
    pub state: UncertaintyState,
}

/// Everything shared by one reduction run over one training set.
pub(crate) struct Problem<'a> {
    pub ds: &'a Dataset,
    pub spec: DistanceSpec,
    pub cfg: &'a AlgorithmConfig,
    pub min_alive: usize,
    builds: AtomicUsize,
}

impl<'a> Problem<'a> {
    pub fn new(ds: &'a Dataset, train: &InstanceMask, cfg: &'a AlgorithmConfig) -> Result<Self> {
        cfg.validate()?;
        if train.len() != ds.n_rows() {
            return Err(RcgError::invalid("training mask length differs from dataset rows"));
        }
        if train.alive_count() < 2 {
            return Err(RcgError::data("training set needs at least 2 instances"));
        }
        let mut seen = vec![false; ds.n_classes()];
        for i in train.indices() {
            seen[ds.label(i)] = true;
        }
        if seen.iter().filter(|&&s| s).count() < 2 {
            return Err(RcgError::degenerate("training set holds a single class"));
        }
        Ok(Problem {
            ds,
            spec: DistanceSpec::fit(ds, train, cfg.normalize),
            cfg,
            min_alive: cfg.resolved_min_alive(ds.n_classes()),
            builds: AtomicUsize::new(0),
        })
    }

    pub fn builds(&self) -> usize {
        self.builds.load(Ordering::Relaxed)
    }

    pub fn snapshot(&self, instances: &InstanceMask, features: &FeatureMask, k: usize) -> Result<Snapshot> {
        let matrix = DistanceMatrix::compute(self.ds, instances, features, &self.spec)?;
        let labels: Vec<usize> = matrix.row_ids().iter().map(|&r| self.ds.label(r)).collect();
        let graph = NeighborhoodGraph::build(&matrix, &labels, self.ds.n_classes(), k)?;
        self.builds.fetch_add(1, Ordering::Relaxed);
        let state = UncertaintyState::compute(&graph)?;
        Ok(Snapshot { matrix, graph, state })
    }

    pub fn significantly_greater(&self, a: &UncertaintyState, b: Baseline) -> Result<bool> {
        significantly_greater(&a.context(), &b, &self.cfg.significance)
    }
}

/// Removes every instance with U_loc = 0 in `snap` at once, keeping at least
/// `min_alive` instances overall and `ceil(min_alive / classes)` per class
/// (or the whole class if smaller). When the floor binds, instances with the
/// largest neighborhoods go first. Returns the removed dataset rows.
pub(crate) fn purge_zero_uncertainty(snap: &Snapshot, min_alive: usize) -> Vec<usize> {
    let g = &snap.graph;
    let counts = g.class_counts();
    let present = counts.iter().filter(|&&c| c > 0).count().max(1);
    let per_class_floor = min_alive.div_ceil(present).max(1);

    let mut zero: Vec<usize> = g.alive_indices().filter(|&i| snap.state.u_loc[i] == 0.0).collect();
    zero.sort_by(|&a, &b| g.degree(b).cmp(&g.degree(a)).then(a.cmp(&b)));

    let mut remaining = counts.clone();
    let mut alive = g.alive_count();
    let mut removed = Vec::new();
    for i in zero {
        let y = g.labels()[i];
        let floor = per_class_floor.min(counts[y]);
        if alive <= min_alive || remaining[y] <= floor {
            continue;
        }
        remaining[y] -= 1;
        alive -= 1;
        removed.push(snap.matrix.row_id(i));
    }
    removed.sort_unstable();
    removed
}

/// Deletes the instance of maximal U_loc (ties: fewer neighbors, then lower
/// row) while the RCG strictly improves and stays significant versus zero.
/// Returns the halt reason.
pub(crate) fn prune_borders(
    problem: &Problem<'_>,
    features: &FeatureMask,
    instances: &mut InstanceMask,
    trace: &mut ReductionTrace,
) -> Result<String> {
    if instances.alive_count() <= problem.min_alive {
        return Ok(format!("instance floor {} reached", problem.min_alive));
    }
    let Snapshot { matrix, mut graph, mut state } = problem.snapshot(instances, features, problem.cfg.k)?;
    let mut class_counts = graph.class_counts();
    loop {
        if graph.alive_count() <= problem.min_alive {
            return Ok(format!("instance floor {} reached", problem.min_alive));
        }
        let victim = graph
            .alive_indices()
            .max_by(|&a, &b| {
                state.u_loc[a]
                    .total_cmp(&state.u_loc[b])
                    .then(graph.degree(b).cmp(&graph.degree(a)))
                    .then(b.cmp(&a))
            })
            .expect("alive instances");
        let y = graph.labels()[victim];
        if class_counts[y] == 1 && class_counts.iter().filter(|&&c| c > 0).count() == 2 {
            return Ok("next deletion would leave a single class".into());
        }
        let row = matrix.row_id(victim);
        let affected = graph.remove_instance(&matrix, victim)?;
        class_counts[y] -= 1;
        let next = state.update_after_removal(&graph, &affected)?;
        instances.remove(row);
        trace.push(Action::RemoveInstance(row), state.rcg, next.rcg, features, instances);

        let halt = if !(next.rcg > state.rcg) {
            Some("RCG did not increase")
        } else if !problem.significantly_greater(&next, Baseline::Zero)? {
            Some("RCG not significantly above zero")
        } else {
            None
        };
        if let Some(reason) = halt {
            if problem.cfg.rollback_last_deletion {
                instances.insert(row);
                trace.push(Action::Rollback(row), next.rcg, state.rcg, features, instances);
                return Ok(format!("{reason} (last deletion rolled back)"));
            }
            return Ok(reason.into());
        }
        state = next;
    }
}

/// Rebuilds a (k+1)-NN graph on the current instances and purges every
/// instance with U_loc = 0.
pub(crate) fn centers_pass(
    problem: &Problem<'_>,
    features: &FeatureMask,
    instances: &mut InstanceMask,
    trace: &mut ReductionTrace,
) -> Result<String> {
    let k = problem.cfg.k + 1;
    let snap = problem.snapshot(instances, features, k)?;
    let removed = purge_zero_uncertainty(&snap, problem.min_alive);
    for &r in &removed {
        instances.remove(r);
    }
    let after = if removed.is_empty() {
        snap.state.rcg
    } else {
        problem.snapshot(instances, features, k)?.state.rcg
    };
    let count = removed.len();
    trace.push(Action::BulkRemoveZeroUloc(removed), snap.state.rcg, after, features, instances);
    Ok(format!("removed {count} zero-uncertainty instances with {k}-NN"))
}
