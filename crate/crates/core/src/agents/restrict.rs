use std::collections::HashMap;

use crate::data_pipeline::{DrugCombination, TreatmentPeriod};
use crate::mdp_env::ActionSet;

pub const DEFAULT_MIN_COUNT: usize = 5;

/// A reduced action set and, for each retained action, `(old index, new index)`.
#[derive(Debug, Clone, PartialEq)]
pub struct RestrictedActions {
    pub action_set: ActionSet,
    pub remap: Vec<(usize, usize)>,
}

impl RestrictedActions {
    pub fn new_index(&self, old: usize) -> Option<usize> {
        self.remap.iter().find(|(o, _)| *o == old).map(|(_, n)| *n)
    }
}

/// Keeps NONE plus every combination seen in at least `min_count` periods,
/// preserving the original order.
pub fn restrict_actions(actions: &ActionSet, periods: &[TreatmentPeriod], min_count: usize) -> RestrictedActions {
    let mut counts: HashMap<&DrugCombination, usize> = HashMap::new();
    for p in periods {
        *counts.entry(&p.combination).or_default() += 1;
    }
    let mut kept = Vec::new();
    let mut remap = Vec::new();
    for (old, combo) in actions.iter().enumerate() {
        let n = counts.get(combo).copied().unwrap_or(0);
        if old == ActionSet::NO_TREATMENT || n >= min_count {
            remap.push((old, kept.len()));
            kept.push(combo.clone());
        }
    }
    RestrictedActions {
        action_set: ActionSet::new(kept.into_iter().skip(1)),
        remap,
    }
}
