use std::collections::BTreeMap;

use crate::data_pipeline::{group_by_patient, DrugCombination, TreatmentPeriod};
use crate::mdp_env::TrajectoryRecord;

/// The combination given in each month of one patient's course, from month 0.
#[derive(Debug, Clone, PartialEq)]
pub struct PatientCourse {
    pub id: String,
    pub months: Vec<DrugCombination>,
}

impl PatientCourse {
    /// Treatment lines: maximal runs of one combination other than no treatment.
    pub fn lines(&self) -> Vec<&DrugCombination> {
        let mut lines = Vec::new();
        let mut prev: Option<&DrugCombination> = None;
        for c in &self.months {
            if !c.is_no_treatment() && prev != Some(c) {
                lines.push(c);
            }
            prev = Some(c);
        }
        lines
    }
}

/// One course per simulated round, ordered by round.
pub fn courses_from_trajectories(records: &[TrajectoryRecord]) -> Vec<PatientCourse> {
    let mut by_round: BTreeMap<u64, Vec<&TrajectoryRecord>> = BTreeMap::new();
    for r in records {
        by_round.entry(r.round).or_default().push(r);
    }
    by_round
        .into_iter()
        .map(|(round, mut steps)| {
            steps.sort_by_key(|r| r.step);
            PatientCourse {
                id: round.to_string(),
                months: steps.into_iter().map(|r| r.combination.clone()).collect(),
            }
        })
        .collect()
}

/// One course per patient in the observed data, ordered by patient id.
pub fn courses_from_periods(periods: &[TreatmentPeriod]) -> Vec<PatientCourse> {
    group_by_patient(periods)
        .into_iter()
        .map(|(id, mut ps)| {
            ps.sort_by_key(|p| p.month_index);
            PatientCourse {
                id: id.to_string(),
                months: ps.into_iter().map(|p| p.combination.clone()).collect(),
            }
        })
        .collect()
}
