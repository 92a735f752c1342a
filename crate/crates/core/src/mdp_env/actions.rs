use std::collections::HashMap;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::state::{HealthState, PatientState};
use crate::data_pipeline::DrugCombination;
use crate::error::{Error, Result};

/// Indexed action universe. No treatment always sits at index 0; the other
/// indices follow construction order and are stable across serialization.
#[derive(Debug, Clone)]
pub struct ActionSet {
    actions: Vec<DrugCombination>,
    index: HashMap<DrugCombination, usize>,
}

impl PartialEq for ActionSet {
    fn eq(&self, other: &Self) -> bool {
        self.actions == other.actions
    }
}

impl ActionSet {
    pub const NO_TREATMENT: usize = 0;

    /// Builds the set from combinations in order, dropping duplicates and
    /// inserting no treatment at the front.
    pub fn new<I: IntoIterator<Item = DrugCombination>>(combos: I) -> Self {
        let mut actions = vec![DrugCombination::no_treatment()];
        let mut index = HashMap::new();
        index.insert(DrugCombination::no_treatment(), 0);
        for c in combos {
            if !index.contains_key(&c) {
                index.insert(c.clone(), actions.len());
                actions.push(c);
            }
        }
        ActionSet { actions, index }
    }

    pub fn len(&self) -> usize {
        self.actions.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn get(&self, idx: usize) -> Option<&DrugCombination> {
        self.actions.get(idx)
    }

    pub fn combination(&self, idx: usize) -> &DrugCombination {
        &self.actions[idx]
    }

    pub fn index_of(&self, combo: &DrugCombination) -> Option<usize> {
        self.index.get(combo).copied()
    }

    pub fn iter(&self) -> impl Iterator<Item = &DrugCombination> {
        self.actions.iter()
    }
}

impl Serialize for ActionSet {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.actions.serialize(s)
    }
}

impl<'de> Deserialize<'de> for ActionSet {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let actions = Vec::<DrugCombination>::deserialize(d)?;
        if actions.first().map(|c| !c.is_no_treatment()).unwrap_or(true) {
            return Err(serde::de::Error::custom(
                "action set must start with the no-treatment action",
            ));
        }
        Ok(ActionSet::new(actions.into_iter().skip(1)))
    }
}

/// Remission forces no treatment; needing treatment forbids it.
pub fn legal_actions(state: &PatientState, actions: &ActionSet) -> Result<Vec<usize>> {
    match state.health {
        HealthState::Dead => Err(Error::TerminalState),
        HealthState::Remission => Ok(vec![ActionSet::NO_TREATMENT]),
        HealthState::NeedsTreatment => Ok((1..actions.len()).collect()),
    }
}

pub fn is_legal(state: &PatientState, action: usize) -> bool {
    match state.health {
        HealthState::Dead => false,
        HealthState::Remission => action == ActionSet::NO_TREATMENT,
        HealthState::NeedsTreatment => action != ActionSet::NO_TREATMENT,
    }
}
