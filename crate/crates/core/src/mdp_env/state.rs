use serde::{Deserialize, Serialize};

use crate::data_pipeline::{Demographics, DrugCombination};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum HealthState {
    NeedsTreatment,
    Remission,
    Dead,
}

/// The simulated patient at the start of a month.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct PatientState {
    pub health: HealthState,
    /// Months survived so far (number of preceding transitions).
    pub months_since_start: u32,
    /// Consecutive months on `current_combination`, no-treatment months included.
    pub months_on_current: u32,
    pub prior_lines: u32,
    pub current_combination: DrugCombination,
    #[serde(flatten)]
    pub demographics: Demographics,
}

impl PatientState {
    pub fn initial(demographics: Demographics) -> Self {
        PatientState {
            health: HealthState::NeedsTreatment,
            months_since_start: 0,
            months_on_current: 0,
            prior_lines: 0,
            current_combination: DrugCombination::no_treatment(),
            demographics,
        }
    }

    pub fn is_terminal(&self) -> bool {
        self.health == HealthState::Dead
    }
}
