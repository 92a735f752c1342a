//! Ingestion of clinical and drug-line tables into monthly treatment periods.

mod cohort;
mod combination;
mod demographics;
mod periods;
mod records;
mod standardize;

pub use cohort::{filter_cohort, FilterReport, FilteredCohort};
pub use combination::{DrugCombination, NO_TREATMENT_LABEL};
pub use demographics::{empirical_distributions, Demographics, EmpiricalDemographics, FrequencyTable};
pub use periods::{
    build_treatment_periods, group_by_patient, period_count, read_periods, window_span,
    write_periods, EventFlags, TreatmentPeriod, PERIOD_COLUMNS, PERIOD_DAYS,
};
pub use records::{
    read_clinical, read_drug_lines, write_clinical, write_drug_lines, ClinicalRecord,
    DrugLineRecord, VitalStatus, CLINICAL_COLUMNS, DRUG_LINE_COLUMNS,
};
pub use standardize::{
    standardize_lines, StandardizationReport, DEFAULT_STANDARDIZATION_TSV, StandardizationTable, UnknownDrugPolicy,
};
