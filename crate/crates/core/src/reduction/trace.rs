use std::fmt;

use serde::{Deserialize, Serialize};

use crate::data::{FeatureMask, InstanceMask};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "target", rename_all = "snake_case")]
pub enum Action {
    AddFeature(usize),
    RemoveFeature(usize),
    RemoveInstance(usize),
    /// Simultaneous removal of every listed row (all had U_loc = 0).
    BulkRemoveZeroUloc(Vec<usize>),
    /// Restores a row whose deletion triggered the halting condition.
    Rollback(usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    pub action: Action,
    pub rcg_before: f64,
    pub rcg_after: f64,
    /// Masks sizes after the action.
    pub alive_count: usize,
    pub selected_count: usize,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ReductionTrace {
    pub algorithm: String,
    pub steps: Vec<Step>,
    pub halt_reason: String,
    /// kNN graphs built from scratch (instance deletions update locally and
    /// are not counted).
    pub graph_builds: usize,
}

impl ReductionTrace {
    pub fn new(algorithm: impl Into<String>) -> Self {
        ReductionTrace { algorithm: algorithm.into(), ..Default::default() }
    }

    pub(crate) fn push(
        &mut self,
        action: Action,
        rcg_before: f64,
        rcg_after: f64,
        features: &FeatureMask,
        instances: &InstanceMask,
    ) {
        self.steps.push(Step {
            action,
            rcg_before,
            rcg_after,
            alive_count: instances.alive_count(),
            selected_count: features.selected_count(),
        });
    }

    pub(crate) fn add_halt(&mut self, phase: &str, reason: impl AsRef<str>) {
        if !self.halt_reason.is_empty() {
            self.halt_reason.push_str("; ");
        }
        self.halt_reason.push_str(phase);
        self.halt_reason.push_str(": ");
        self.halt_reason.push_str(reason.as_ref());
    }

    /// Applies every action, in order, to the given starting masks.
    pub fn replay(&self, mut features: FeatureMask, mut instances: InstanceMask) -> (FeatureMask, InstanceMask) {
        for step in &self.steps {
            match &step.action {
                Action::AddFeature(j) => {
                    features.insert(*j);
                }
                Action::RemoveFeature(j) => {
                    features.remove(*j);
                }
                Action::RemoveInstance(i) => {
                    instances.remove(*i);
                }
                Action::BulkRemoveZeroUloc(rows) => {
                    for &i in rows {
                        instances.remove(i);
                    }
                }
                Action::Rollback(i) => {
                    instances.insert(*i);
                }
            }
        }
        (features, instances)
    }
}

impl fmt::Display for Action {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Action::AddFeature(j) => write!(f, "add-feature {j}"),
            Action::RemoveFeature(j) => write!(f, "remove-feature {j}"),
            Action::RemoveInstance(i) => write!(f, "remove-instance {i}"),
            Action::BulkRemoveZeroUloc(rows) => {
                write!(f, "bulk-remove-zero-uloc {}", rows.len())?;
                if !rows.is_empty() {
                    let list: Vec<String> = rows.iter().map(usize::to_string).collect();
                    write!(f, " [{}]", list.join(","))?;
                }
                Ok(())
            }
            Action::Rollback(i) => write!(f, "rollback {i}"),
        }
    }
}

/// Line-oriented text report, one step per line.
impl fmt::Display for ReductionTrace {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "# algorithm: {}", self.algorithm)?;
        writeln!(f, "# graph builds: {}", self.graph_builds)?;
        writeln!(f, "# step\trcg_before\trcg_after\talive\tselected\taction")?;
        for (t, s) in self.steps.iter().enumerate() {
            writeln!(
                f,
                "{t}\t{:.9}\t{:.9}\t{}\t{}\t{}",
                s.rcg_before, s.rcg_after, s.alive_count, s.selected_count, s.action
            )?;
        }
        writeln!(f, "# halt: {}", self.halt_reason)
    }
}
