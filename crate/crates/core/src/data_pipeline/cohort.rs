use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::records::{ClinicalRecord, DrugLineRecord, VitalStatus};

/// Rows removed by each exclusion rule of [`filter_cohort`].
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FilterReport {
    pub lines_empty_drug_names: usize,
    pub lines_equal_start_end: usize,
    pub lines_reversed_span: usize,
    pub patients_living: usize,
    pub lines_of_living_patients: usize,
    pub lines_without_patient: usize,
}

impl FilterReport {
    pub fn total_dropped(&self) -> usize {
        self.lines_empty_drug_names
            + self.lines_equal_start_end
            + self.lines_reversed_span
            + self.patients_living
            + self.lines_of_living_patients
            + self.lines_without_patient
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct FilteredCohort {
    pub clinical: Vec<ClinicalRecord>,
    pub lines: Vec<DrugLineRecord>,
    pub report: FilterReport,
}

/// Applies the cohort exclusions: drug lines without drug names, lines whose
/// start and end day coincide (or run backwards), patients who have not
/// reached their survival endpoint, and lines left without a retained patient.
pub fn filter_cohort(clinical: &[ClinicalRecord], lines: &[DrugLineRecord]) -> FilteredCohort {
    let mut report = FilterReport::default();

    let mut living = HashSet::new();
    let mut retained_clinical = Vec::with_capacity(clinical.len());
    for rec in clinical {
        if rec.vital_status == VitalStatus::Living {
            living.insert(rec.patient_id.as_str());
            report.patients_living += 1;
        } else {
            retained_clinical.push(rec.clone());
        }
    }
    let retained_ids: HashSet<&str> = retained_clinical
        .iter()
        .map(|r| r.patient_id.as_str())
        .collect();

    let mut retained_lines = Vec::with_capacity(lines.len());
    for line in lines {
        if line.drug_names_raw.iter().all(|d| d.trim().is_empty()) {
            report.lines_empty_drug_names += 1;
        } else if line.start_day == line.end_day {
            report.lines_equal_start_end += 1;
        } else if line.end_day < line.start_day {
            report.lines_reversed_span += 1;
        } else if living.contains(line.patient_id.as_str()) {
            report.lines_of_living_patients += 1;
        } else if !retained_ids.contains(line.patient_id.as_str()) {
            report.lines_without_patient += 1;
        } else {
            retained_lines.push(line.clone());
        }
    }

    FilteredCohort {
        clinical: retained_clinical,
        lines: retained_lines,
        report,
    }
}
