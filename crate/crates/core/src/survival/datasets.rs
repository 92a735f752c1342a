use std::collections::HashMap;

use super::cox::{fit_cox, SurvivalDataset, Ties};
use super::model::{CoxModel, Timescale};
use super::schema::{demographics_by_patient, CovariateInput, CovariateSchema};
use crate::data_pipeline::{
    empirical_distributions, group_by_patient, ClinicalRecord, Demographics, DrugCombination,
    TreatmentPeriod,
};
use crate::error::{Error, Result};

/// Ridge strength used for both simulator regressions.
pub const DEFAULT_PENALTY: f64 = 0.1;

/// Every combination observed in the periods (the action universe), sorted, no-treatment first.
pub fn action_universe(periods: &[TreatmentPeriod]) -> Vec<DrugCombination> {
    let mut combos: Vec<DrugCombination> = periods.iter().map(|p| p.combination.clone()).collect();
    combos.push(DrugCombination::no_treatment());
    combos.sort_by_key(|c| (!c.is_no_treatment(), c.to_string()));
    combos.dedup();
    combos
}

fn lookup<'a>(
    demographics: &'a HashMap<&str, Demographics>,
    period: &TreatmentPeriod,
) -> Result<&'a Demographics> {
    demographics
        .get(period.patient_id.as_str())
        .ok_or_else(|| Error::UnknownCategory {
            field: "patient_id".into(),
            value: period.patient_id.clone(),
        })
}

/// One row per patient: covariates of the patient's first period, duration
/// is the total months survived, the event is death.
pub fn death_dataset(
    periods: &[TreatmentPeriod],
    clinical: &[ClinicalRecord],
    schema: &CovariateSchema,
) -> Result<SurvivalDataset> {
    let demographics = demographics_by_patient(clinical);
    let mut data = SurvivalDataset::new(schema.dim());
    let mut x = vec![0.0; schema.dim()];
    for (_, course) in group_by_patient(periods) {
        let first = course.iter().min_by_key(|p| p.month_index).expect("non-empty course");
        let last = course.iter().max_by_key(|p| p.month_index).expect("non-empty course");
        let d = lookup(&demographics, first)?;
        schema.encode_into(&CovariateInput::from_period(first, d), &mut x)?;
        data.push(&x, last.month_index + 1, last.event_flags.death_this_period)?;
    }
    Ok(data)
}

/// One row per combination run: duration is the run length in months (gap time
/// since the previous event), the event is the run ending before the patient's
/// last period. Covariates are those of the run's first period.
pub fn recurrence_dataset(
    periods: &[TreatmentPeriod],
    clinical: &[ClinicalRecord],
    schema: &CovariateSchema,
) -> Result<SurvivalDataset> {
    let demographics = demographics_by_patient(clinical);
    let mut data = SurvivalDataset::new(schema.dim());
    let mut x = vec![0.0; schema.dim()];
    for (_, course) in group_by_patient(periods) {
        let mut start = 0;
        for (i, period) in course.iter().enumerate() {
            let run_ends = i + 1 == course.len() || course[i + 1].combination != period.combination;
            if !run_ends {
                continue;
            }
            let first = course[start];
            let d = lookup(&demographics, first)?;
            schema.encode_into(&CovariateInput::from_period(first, d), &mut x)?;
            data.push(&x, period.months_on_current, period.event_flags.line_ended_this_period)?;
            start = i + 1;
        }
    }
    Ok(data)
}

/// Terminal-event model on the months-since-treatment-start timescale.
pub fn fit_death_model(periods: &[TreatmentPeriod], clinical: &[ClinicalRecord]) -> Result<CoxModel> {
    let demographics = empirical_distributions(clinical)?;
    let schema = CovariateSchema::death(&action_universe(periods), &demographics);
    let data = death_dataset(periods, clinical, &schema)?;
    let mut model = fit_cox(&data, DEFAULT_PENALTY, Ties::Efron)?;
    model.schema = schema.with_observed_ranges(&data);
    model.timescale = Timescale::SinceTreatmentStart;
    Ok(model)
}

/// Gap-time recurrent-event model: the clock restarts with every combination
/// change, and one coefficient vector is shared across event indices with the
/// prior-line count as a covariate.
pub fn fit_recurrence_model(
    periods: &[TreatmentPeriod],
    clinical: &[ClinicalRecord],
) -> Result<CoxModel> {
    let demographics = empirical_distributions(clinical)?;
    let schema = CovariateSchema::recurrence(&action_universe(periods), &demographics);
    let data = recurrence_dataset(periods, clinical, &schema)?;
    let mut model = fit_cox(&data, DEFAULT_PENALTY, Ties::Efron)?;
    model.schema = schema.with_observed_ranges(&data);
    model.timescale = Timescale::GapSinceLastEvent;
    Ok(model)
}
