use std::collections::HashMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::records::ClinicalRecord;
use crate::error::{Error, Result};

/// Fixed per-patient covariates.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Demographics {
    pub age: u32,
    pub race: String,
    pub stage: String,
    pub grade: String,
}

impl From<&ClinicalRecord> for Demographics {
    fn from(r: &ClinicalRecord) -> Self {
        Demographics {
            age: r.age_at_start,
            race: r.race.clone(),
            stage: r.tumor_stage.clone(),
            grade: r.tumor_grade.clone(),
        }
    }
}

/// Categorical relative frequencies, most frequent level first (ties by name).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrequencyTable(pub Vec<(String, f64)>);

impl FrequencyTable {
    fn from_values<'a>(values: impl Iterator<Item = &'a str>) -> FrequencyTable {
        let mut counts: HashMap<&str, usize> = HashMap::new();
        let mut n = 0usize;
        for v in values {
            *counts.entry(v).or_default() += 1;
            n += 1;
        }
        let mut levels: Vec<(&str, usize)> = counts.into_iter().collect();
        levels.sort_by(|a, b| b.1.cmp(&a.1).then(a.0.cmp(b.0)));
        FrequencyTable(
            levels
                .into_iter()
                .map(|(k, c)| (k.to_string(), c as f64 / n as f64))
                .collect(),
        )
    }

    pub fn levels(&self) -> impl Iterator<Item = &str> {
        self.0.iter().map(|(k, _)| k.as_str())
    }

    pub fn frequency(&self, level: &str) -> f64 {
        self.0
            .iter()
            .find(|(k, _)| k == level)
            .map(|(_, f)| *f)
            .unwrap_or(0.0)
    }

    pub fn total(&self) -> f64 {
        self.0.iter().map(|(_, f)| f).sum()
    }

    fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> &str {
        if self.0.len() == 1 {
            return &self.0[0].0;
        }
        let dist = WeightedIndex::new(self.0.iter().map(|(_, f)| *f))
            .expect("frequency table has positive weights");
        &self.0[dist.sample(rng)].0
    }
}

/// Empirical distributions used to draw simulated patients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmpiricalDemographics {
    pub race: FrequencyTable,
    pub stage: FrequencyTable,
    pub grade: FrequencyTable,
    /// Observed ages, resampled uniformly.
    pub ages: Vec<u32>,
}

impl EmpiricalDemographics {
    /// Draws age and each categorical independently from its marginal.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Demographics {
        let age = self.ages[rng.random_range(0..self.ages.len())];
        Demographics {
            age,
            race: self.race.sample(rng).to_string(),
            stage: self.stage.sample(rng).to_string(),
            grade: self.grade.sample(rng).to_string(),
        }
    }

    /// A single deterministic patient profile.
    pub fn point_mass(d: &Demographics) -> Self {
        EmpiricalDemographics {
            race: FrequencyTable(vec![(d.race.clone(), 1.0)]),
            stage: FrequencyTable(vec![(d.stage.clone(), 1.0)]),
            grade: FrequencyTable(vec![(d.grade.clone(), 1.0)]),
            ages: vec![d.age],
        }
    }
}

pub fn empirical_distributions(clinical: &[ClinicalRecord]) -> Result<EmpiricalDemographics> {
    if clinical.is_empty() {
        return Err(Error::EmptyCohort);
    }
    Ok(EmpiricalDemographics {
        race: FrequencyTable::from_values(clinical.iter().map(|r| r.race.as_str())),
        stage: FrequencyTable::from_values(clinical.iter().map(|r| r.tumor_stage.as_str())),
        grade: FrequencyTable::from_values(clinical.iter().map(|r| r.tumor_grade.as_str())),
        ages: clinical.iter().map(|r| r.age_at_start).collect(),
    })
}
