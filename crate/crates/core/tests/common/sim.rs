//! A Cox-driven environment fitted on a synthetic cohort.

#![allow(dead_code)]

use std::sync::Arc;

use oncosim::data_pipeline::{
    build_treatment_periods, empirical_distributions, filter_cohort, standardize_lines, ClinicalRecord,
    StandardizationTable, TreatmentPeriod, UnknownDrugPolicy,
};
use oncosim::mdp_env::{ActionSet, Dynamics, Environment};
use oncosim::survival::{action_universe, fit_death_model, fit_recurrence_model, CoxModel};
use oncosim::synth::{generate_cohort, GroundTruth};

pub struct Fitted {
    pub periods: Vec<TreatmentPeriod>,
    pub clinical: Vec<ClinicalRecord>,
    pub death: CoxModel,
    pub recurrence: CoxModel,
}

pub fn fitted(seed: u64, n: usize) -> Fitted {
    let cohort = generate_cohort(seed, n, &GroundTruth::default()).unwrap();
    let (lines, _) =
        standardize_lines(&cohort.drug_lines, &StandardizationTable::shipped(), UnknownDrugPolicy::Drop).unwrap();
    let filtered = filter_cohort(&cohort.clinical, &lines);
    let periods = build_treatment_periods(&filtered.clinical, &filtered.lines).unwrap();
    let death = fit_death_model(&periods, &filtered.clinical).unwrap();
    let recurrence = fit_recurrence_model(&periods, &filtered.clinical).unwrap();
    Fitted {
        periods,
        clinical: filtered.clinical,
        death,
        recurrence,
    }
}

impl Fitted {
    pub fn action_set(&self) -> ActionSet {
        ActionSet::new(action_universe(&self.periods).into_iter().filter(|c| !c.is_no_treatment()))
    }

    pub fn env(&self) -> Environment {
        Environment::new(
            Dynamics::Cox {
                death: Arc::new(self.death.clone()),
                recurrence: Arc::new(self.recurrence.clone()),
            },
            self.action_set(),
            empirical_distributions(&self.clinical).unwrap(),
        )
    }
}
