use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::data_pipeline::EmpiricalDemographics;
use crate::error::{Error, Result};
use crate::mdp_env::{ActionSet, HealthState, PatientState};

/// Network input layout for patient states. Clocks and age are scaled to
/// roughly unit range; categoricals are full one-hot blocks.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateEncoder {
    actions: Vec<String>,
    races: Vec<String>,
    stages: Vec<String>,
    grades: Vec<String>,
    #[serde(skip)]
    index: Option<Lookup>,
}

#[derive(Debug, Clone, PartialEq, Default)]
struct Lookup {
    actions: HashMap<String, usize>,
    races: HashMap<String, usize>,
    stages: HashMap<String, usize>,
    grades: HashMap<String, usize>,
}

const NUMERIC: usize = 6;

fn to_map(levels: &[String]) -> HashMap<String, usize> {
    levels.iter().enumerate().map(|(i, l)| (l.clone(), i)).collect()
}

impl StateEncoder {
    pub fn new(actions: &ActionSet, demographics: &EmpiricalDemographics) -> Self {
        let mut enc = StateEncoder {
            actions: actions.iter().map(|c| c.to_string()).collect(),
            races: demographics.race.levels().map(str::to_string).collect(),
            stages: demographics.stage.levels().map(str::to_string).collect(),
            grades: demographics.grade.levels().map(str::to_string).collect(),
            index: None,
        };
        enc.build_index();
        enc
    }

    fn build_index(&mut self) {
        self.index = Some(Lookup {
            actions: to_map(&self.actions),
            races: to_map(&self.races),
            stages: to_map(&self.stages),
            grades: to_map(&self.grades),
        });
    }

    /// Rebuilds lookup tables after deserialization.
    pub fn ready(mut self) -> Self {
        self.build_index();
        self
    }

    pub fn dim(&self) -> usize {
        NUMERIC + self.actions.len() + self.races.len() + self.stages.len() + self.grades.len()
    }

    pub fn encode(&self, state: &PatientState) -> Result<Vec<f64>> {
        let idx = self.index.as_ref().expect("encoder index built");
        let mut x = vec![0.0; self.dim()];
        x[0] = (state.health == HealthState::NeedsTreatment) as u8 as f64;
        x[1] = (state.health == HealthState::Remission) as u8 as f64;
        x[2] = state.months_since_start as f64 / 60.0;
        x[3] = state.months_on_current as f64 / 12.0;
        x[4] = state.prior_lines as f64 / 4.0;
        x[5] = (state.demographics.age as f64 - 60.0) / 10.0;
        let mut offset = NUMERIC;
        let combo = state.current_combination.to_string();
        for (field, value, map, width) in [
            ("combination", combo.as_str(), &idx.actions, self.actions.len()),
            ("race", state.demographics.race.as_str(), &idx.races, self.races.len()),
            ("stage", state.demographics.stage.as_str(), &idx.stages, self.stages.len()),
            ("grade", state.demographics.grade.as_str(), &idx.grades, self.grades.len()),
        ] {
            let i = map.get(value).ok_or_else(|| Error::UnknownCategory {
                field: field.to_string(),
                value: value.to_string(),
            })?;
            x[offset + i] = 1.0;
            offset += width;
        }
        Ok(x)
    }
}
