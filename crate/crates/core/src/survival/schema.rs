use std::collections::HashMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::data_pipeline::{
    ClinicalRecord, Demographics, DrugCombination, EmpiricalDemographics, TreatmentPeriod,
};
use super::cox::SurvivalDataset;
use crate::error::{Error, Result};

pub const HEALTH_LEVELS: [&str; 2] = ["needs_treatment", "remission"];

/// What a covariate is read from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Field {
    Health,
    Treatment,
    PriorLines,
    /// 1-based month in which the current combination run began.
    RunStartMonth,
    Age,
    Race,
    Stage,
    Grade,
    /// Anonymous column of a raw dataset; cannot be encoded from a patient.
    Column(usize),
}

impl fmt::Display for Field {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Field::Health => f.write_str("health"),
            Field::Treatment => f.write_str("treatment"),
            Field::PriorLines => f.write_str("prior_lines"),
            Field::RunStartMonth => f.write_str("run_start_month"),
            Field::Age => f.write_str("age"),
            Field::Race => f.write_str("race"),
            Field::Stage => f.write_str("stage"),
            Field::Grade => f.write_str("grade"),
            Field::Column(i) => write!(f, "x{i}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Feature {
    /// `range`, when set, is the span seen at fit time; encoded values are
    /// clamped to it so simulated states never extrapolate past the data.
    Numeric {
        field: Field,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        range: Option<[f64; 2]>,
    },
    /// `levels[0]` is the reference level and encodes to all zeros.
    OneHot { field: Field, levels: Vec<String> },
}

impl Feature {
    fn width(&self) -> usize {
        match self {
            Feature::Numeric { .. } => 1,
            Feature::OneHot { levels, .. } => levels.len().saturating_sub(1),
        }
    }
}

#[derive(Serialize, Deserialize)]
struct SchemaRepr {
    features: Vec<Feature>,
}

/// Ordered covariate layout shared by fitting and simulation.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(from = "SchemaRepr", into = "SchemaRepr")]
pub struct CovariateSchema {
    features: Vec<Feature>,
    lookup: Vec<HashMap<String, usize>>,
    dim: usize,
}

impl PartialEq for CovariateSchema {
    fn eq(&self, other: &Self) -> bool {
        self.features == other.features
    }
}

impl From<SchemaRepr> for CovariateSchema {
    fn from(r: SchemaRepr) -> Self {
        CovariateSchema::new(r.features)
    }
}

impl From<CovariateSchema> for SchemaRepr {
    fn from(s: CovariateSchema) -> Self {
        SchemaRepr {
            features: s.features,
        }
    }
}

/// Everything an encoding can read: the patient's state with the candidate
/// action already applied.
#[derive(Debug, Clone, Copy)]
pub struct CovariateInput<'a> {
    pub in_remission: bool,
    pub treatment: &'a DrugCombination,
    pub prior_lines: u32,
    pub run_start_month: u32,
    pub demographics: &'a Demographics,
}

impl<'a> CovariateInput<'a> {
    /// Input for a data period. The run start is recovered from the month index
    /// and the run length so far.
    pub fn from_period(period: &'a TreatmentPeriod, demographics: &'a Demographics) -> Self {
        CovariateInput {
            in_remission: period.combination.is_no_treatment(),
            treatment: &period.combination,
            prior_lines: period.prior_lines,
            run_start_month: period.month_index + 2 - period.months_on_current,
            demographics,
        }
    }
}

impl CovariateSchema {
    pub fn new(features: Vec<Feature>) -> Self {
        let lookup = features
            .iter()
            .map(|f| match f {
                Feature::Numeric { .. } => HashMap::new(),
                Feature::OneHot { levels, .. } => levels
                    .iter()
                    .enumerate()
                    .map(|(i, l)| (l.clone(), i))
                    .collect(),
            })
            .collect();
        let dim = features.iter().map(Feature::width).sum();
        CovariateSchema {
            features,
            lookup,
            dim,
        }
    }

    /// `p` anonymous numeric columns, for fits on raw datasets.
    pub fn columns(p: usize) -> Self {
        CovariateSchema::new(
            (0..p)
                .map(|i| Feature::Numeric {
                    field: Field::Column(i),
                    range: None,
                })
                .collect(),
        )
    }

    /// Layout of the terminal death model: health, treatment, prior lines, age,
    /// race, stage, grade.
    pub fn death(treatments: &[DrugCombination], demographics: &EmpiricalDemographics) -> Self {
        Self::patient_schema(treatments, demographics, false)
    }

    /// Layout of the gap-time recurrence model; adds the month the current run began.
    pub fn recurrence(
        treatments: &[DrugCombination],
        demographics: &EmpiricalDemographics,
    ) -> Self {
        Self::patient_schema(treatments, demographics, true)
    }

    fn patient_schema(
        treatments: &[DrugCombination],
        demographics: &EmpiricalDemographics,
        with_run_start: bool,
    ) -> Self {
        let mut treatment_levels = vec![DrugCombination::no_treatment().to_string()];
        let mut others: Vec<String> = treatments
            .iter()
            .filter(|c| !c.is_no_treatment())
            .map(|c| c.to_string())
            .collect();
        others.sort();
        others.dedup();
        treatment_levels.extend(others);

        let mut features = vec![
            Feature::OneHot {
                field: Field::Health,
                levels: HEALTH_LEVELS.iter().map(|s| s.to_string()).collect(),
            },
            Feature::OneHot {
                field: Field::Treatment,
                levels: treatment_levels,
            },
            Feature::Numeric {
                field: Field::PriorLines,
                range: None,
            },
        ];
        if with_run_start {
            features.push(Feature::Numeric {
                field: Field::RunStartMonth,
                range: None,
            });
        }
        features.push(Feature::Numeric {
            field: Field::Age,
            range: None,
        });
        for (field, table) in [
            (Field::Race, &demographics.race),
            (Field::Stage, &demographics.stage),
            (Field::Grade, &demographics.grade),
        ] {
            features.push(Feature::OneHot {
                field,
                levels: table.levels().map(str::to_string).collect(),
            });
        }
        CovariateSchema::new(features)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    /// Records the observed span of every numeric column of `data`.
    pub fn with_observed_ranges(mut self, data: &SurvivalDataset) -> Self {
        let mut offset = 0;
        for feature in &mut self.features {
            let width = feature.width();
            if let Feature::Numeric { range, .. } = feature {
                *range = (0..data.len())
                    .map(|i| data.row(i)[offset])
                    .fold(None, |acc: Option<[f64; 2]>, v| match acc {
                        None => Some([v, v]),
                        Some([lo, hi]) => Some([lo.min(v), hi.max(v)]),
                    });
            }
            offset += width;
        }
        self
    }

    pub fn features(&self) -> &[Feature] {
        &self.features
    }

    /// Treatment vocabulary, reference level (no treatment) first.
    pub fn treatment_levels(&self) -> Option<&[String]> {
        self.features.iter().find_map(|f| match f {
            Feature::OneHot {
                field: Field::Treatment,
                levels,
            } => Some(levels.as_slice()),
            _ => None,
        })
    }

    /// Column names of the encoded vector, e.g. `age` or `race=Asian`.
    pub fn column_names(&self) -> Vec<String> {
        let mut names = Vec::with_capacity(self.dim);
        for f in &self.features {
            match f {
                Feature::Numeric { field, .. } => names.push(field.to_string()),
                Feature::OneHot { field, levels } => {
                    names.extend(levels.iter().skip(1).map(|l| format!("{field}={l}")))
                }
            }
        }
        names
    }

    pub fn encode(&self, input: &CovariateInput<'_>) -> Result<Vec<f64>> {
        let mut out = vec![0.0; self.dim];
        self.encode_into(input, &mut out)?;
        Ok(out)
    }

    pub fn encode_into(&self, input: &CovariateInput<'_>, out: &mut [f64]) -> Result<()> {
        if out.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: out.len(),
            });
        }
        out.fill(0.0);
        let mut offset = 0;
        for (feature, lookup) in self.features.iter().zip(&self.lookup) {
            match feature {
                Feature::Numeric { field, range } => {
                    let raw = match field {
                        Field::PriorLines => input.prior_lines as f64,
                        Field::RunStartMonth => input.run_start_month as f64,
                        Field::Age => input.demographics.age as f64,
                        other => {
                            return Err(Error::UnknownCategory {
                                field: other.to_string(),
                                value: "<not encodable from a patient state>".into(),
                            })
                        }
                    };
                    out[offset] = match range {
                        Some([lo, hi]) => raw.clamp(*lo, *hi),
                        None => raw,
                    };
                    offset += 1;
                }
                Feature::OneHot { field, levels } => {
                    let treatment;
                    let value: &str = match field {
                        Field::Health => HEALTH_LEVELS[input.in_remission as usize],
                        Field::Treatment => {
                            treatment = input.treatment.to_string();
                            &treatment
                        }
                        Field::Race => &input.demographics.race,
                        Field::Stage => &input.demographics.stage,
                        Field::Grade => &input.demographics.grade,
                        other => {
                            return Err(Error::UnknownCategory {
                                field: other.to_string(),
                                value: "<not a categorical field>".into(),
                            })
                        }
                    };
                    let level = *lookup.get(value).ok_or_else(|| Error::UnknownCategory {
                        field: field.to_string(),
                        value: value.to_string(),
                    })?;
                    if level > 0 {
                        out[offset + level - 1] = 1.0;
                    }
                    offset += levels.len() - 1;
                }
            }
        }
        Ok(())
    }
}

/// Demographics of each patient in a cohort, keyed by patient id.
pub fn demographics_by_patient(clinical: &[ClinicalRecord]) -> HashMap<&str, Demographics> {
    clinical
        .iter()
        .map(|r| (r.patient_id.as_str(), Demographics::from(r)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data_pipeline::FrequencyTable;

    fn demo_tables() -> EmpiricalDemographics {
        EmpiricalDemographics {
            race: FrequencyTable(vec![("White".into(), 0.9), ("Asian".into(), 0.1)]),
            stage: FrequencyTable(vec![("IIIC".into(), 0.7), ("IV".into(), 0.3)]),
            grade: FrequencyTable(vec![("G3".into(), 0.8), ("G2".into(), 0.2)]),
            ages: vec![50, 60],
        }
    }

    fn treatments() -> Vec<DrugCombination> {
        vec![
            DrugCombination::new(["carboplatin", "paclitaxel"]),
            DrugCombination::new(["gemcitabine"]),
        ]
    }

    #[test]
    fn reference_levels_encode_to_zero() {
        let schema = CovariateSchema::recurrence(&treatments(), &demo_tables());
        let d = Demographics {
            age: 0,
            race: "White".into(),
            stage: "IIIC".into(),
            grade: "G3".into(),
        };
        let none = DrugCombination::no_treatment();
        let x = schema
            .encode(&CovariateInput {
                in_remission: false,
                treatment: &none,
                prior_lines: 0,
                run_start_month: 0,
                demographics: &d,
            })
            .unwrap();
        assert!(x.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn hand_encoded_row() {
        let schema = CovariateSchema::recurrence(&treatments(), &demo_tables());
        assert_eq!(
            schema.column_names(),
            [
                "health=remission",
                "treatment=carboplatin+paclitaxel",
                "treatment=gemcitabine",
                "prior_lines",
                "run_start_month",
                "age",
                "race=Asian",
                "stage=IV",
                "grade=G2",
            ]
        );
        let d = Demographics {
            age: 61,
            race: "Asian".into(),
            stage: "IIIC".into(),
            grade: "G2".into(),
        };
        let gem = DrugCombination::new(["gemcitabine"]);
        let x = schema
            .encode(&CovariateInput {
                in_remission: false,
                treatment: &gem,
                prior_lines: 2,
                run_start_month: 7,
                demographics: &d,
            })
            .unwrap();
        assert_eq!(x, [0.0, 0.0, 1.0, 2.0, 7.0, 61.0, 1.0, 0.0, 1.0]);
    }

    #[test]
    fn race_change_is_block_local() {
        let schema = CovariateSchema::death(&treatments(), &demo_tables());
        let t = DrugCombination::new(["gemcitabine"]);
        let mut d = Demographics {
            age: 61,
            race: "White".into(),
            stage: "IV".into(),
            grade: "G3".into(),
        };
        let input = |d: &Demographics| {
            schema
                .encode(&CovariateInput {
                    in_remission: false,
                    treatment: &t,
                    prior_lines: 1,
                    run_start_month: 3,
                    demographics: d,
                })
                .unwrap()
        };
        let a = input(&d);
        d.race = "Asian".into();
        let b = input(&d);
        let names = schema.column_names();
        for (i, name) in names.iter().enumerate() {
            if !name.starts_with("race=") {
                assert_eq!(a[i], b[i], "{name}");
            }
        }
        assert_ne!(a, b);
    }

    #[test]
    fn unknown_category_errors() {
        let schema = CovariateSchema::death(&treatments(), &demo_tables());
        let t = DrugCombination::new(["aldesleukin"]);
        let d = Demographics {
            age: 61,
            race: "White".into(),
            stage: "IV".into(),
            grade: "G3".into(),
        };
        let err = schema
            .encode(&CovariateInput {
                in_remission: false,
                treatment: &t,
                prior_lines: 0,
                run_start_month: 1,
                demographics: &d,
            })
            .unwrap_err();
        assert!(matches!(err, Error::UnknownCategory { .. }));
    }

    #[test]
    fn schema_json_round_trip() {
        let schema = CovariateSchema::recurrence(&treatments(), &demo_tables());
        let json = serde_json::to_string(&schema).unwrap();
        let back: CovariateSchema = serde_json::from_str(&json).unwrap();
        assert_eq!(back, schema);
        assert_eq!(back.dim(), schema.dim());
    }
}
