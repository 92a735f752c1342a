//! Synthetic cohorts with a known proportional-hazards ground truth.
//!
//! Each patient gets fixed covariates (age, stage, grade, race) and a
//! first-line regimen. Death time in days is exponential with rate
//! `base_rate * exp(beta . x)`, where `x` holds `(age - 60) / 10`, stage and
//! grade indicators against the reference levels, and first-line regimen
//! indicators against the reference regimen. Race has no effect. Follow-up is
//! censored at a uniform random time and at `admin_censor_days`; censored
//! patients are reported as living.
//!
//! Drug lines follow the patient until death or censoring: the first-line
//! regimen, then treatment-free gaps alternating with later-line regimens.
//! Some drug names are written as brand names, and a small fraction of extra
//! malformed rows (empty drug names, zero-length spans, unknown drugs) is mixed
//! in so the ingest filters have something to remove.

use std::collections::HashMap;

use rand::distr::weighted::WeightedIndex;
use rand::distr::Distribution;
use rand::Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use crate::data_pipeline::{
    standardize_lines, ClinicalRecord, DrugCombination, DrugLineRecord, StandardizationTable,
    UnknownDrugPolicy, VitalStatus,
};
use crate::error::{Error, Result};
use crate::rng::{stream, Purpose, SimRng};
use crate::survival::SurvivalDataset;

/// A categorical covariate level with its sampling weight and log hazard ratio
/// against the reference (the first level, whose coefficient is 0).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Level {
    pub name: String,
    pub weight: f64,
    pub beta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruth {
    pub base_rate_per_day: f64,
    pub age_mean: f64,
    pub age_sd: f64,
    /// Log hazard ratio per decade of age away from 60.
    pub age_beta: f64,
    pub stages: Vec<Level>,
    pub grades: Vec<Level>,
    pub races: Vec<Level>,
    /// First-line regimens as `+`-joined generic names.
    pub first_line: Vec<Level>,
    pub later_lines: Vec<String>,
    pub admin_censor_days: u32,
    pub random_censor_max_days: u32,
    pub malformed_row_rate: f64,
    pub brand_name_rate: f64,
}

fn level(name: &str, weight: f64, beta: f64) -> Level {
    Level {
        name: name.to_string(),
        weight,
        beta,
    }
}

impl Default for GroundTruth {
    fn default() -> Self {
        GroundTruth {
            // Median survival of about 40 months for the reference patient.
            base_rate_per_day: std::f64::consts::LN_2 / 1200.0,
            age_mean: 60.0,
            age_sd: 10.0,
            age_beta: 0.3,
            stages: vec![
                level("Stage III", 0.55, 0.0),
                level("Stage IV", 0.45, 0.5),
            ],
            grades: vec![level("G3", 0.55, 0.0), level("G2", 0.45, -0.3)],
            races: vec![
                level("White", 0.8, 0.0),
                level("Black or African American", 0.12, 0.0),
                level("Asian", 0.08, 0.0),
            ],
            first_line: vec![
                level("carboplatin+paclitaxel", 0.36, 0.0),
                level("carboplatin+docetaxel", 0.32, 0.2),
                level("bevacizumab+carboplatin+paclitaxel", 0.32, -0.7),
            ],
            later_lines: [
                "carboplatin+gemcitabine",
                "pegylated liposomal doxorubicin",
                "topotecan",
                "gemcitabine",
                "tamoxifen",
                "paclitaxel",
            ]
            .map(String::from)
            .to_vec(),
            admin_censor_days: 5475,
            random_censor_max_days: 40_000,
            malformed_row_rate: 0.02,
            brand_name_rate: 0.3,
        }
    }
}

impl GroundTruth {
    /// Coefficient names in [`recovery_dataset`] column order.
    pub fn coefficient_names(&self) -> Vec<String> {
        let mut names = vec!["age_decades".to_string()];
        for (field, levels) in [("stage", &self.stages), ("grade", &self.grades), ("first_line", &self.first_line)] {
            names.extend(levels.iter().skip(1).map(|l| format!("{field}={}", l.name)));
        }
        names
    }

    pub fn coefficients(&self) -> Vec<f64> {
        let mut beta = vec![self.age_beta];
        for levels in [&self.stages, &self.grades, &self.first_line] {
            beta.extend(levels.iter().skip(1).map(|l| l.beta));
        }
        beta
    }

    /// The first-line regimen with the lowest hazard.
    pub fn dominant_regimen(&self) -> &str {
        &self
            .first_line
            .iter()
            .min_by(|a, b| a.beta.total_cmp(&b.beta))
            .expect("at least one regimen")
            .name
    }

    pub fn validate(&self) -> Result<()> {
        for (field, levels) in [
            ("stage", &self.stages),
            ("grade", &self.grades),
            ("race", &self.races),
            ("first_line", &self.first_line),
        ] {
            if levels.is_empty() || levels.iter().any(|l| !(l.weight > 0.0)) {
                return Err(Error::Config(format!("{field} levels need positive weights")));
            }
            if levels[0].beta != 0.0 {
                return Err(Error::Config(format!("{field} reference level must have beta 0")));
            }
        }
        if self.later_lines.is_empty() || !(self.base_rate_per_day > 0.0) {
            return Err(Error::Config("later_lines must be non-empty and base rate positive".into()));
        }
        Ok(())
    }
}

/// Written next to the generated CSVs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GroundTruthDoc {
    pub seed: u64,
    pub n_patients: usize,
    pub truth: GroundTruth,
    pub coefficient_names: Vec<String>,
    pub coefficients: Vec<f64>,
    pub dominant_regimen: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticCohort {
    pub clinical: Vec<ClinicalRecord>,
    pub drug_lines: Vec<DrugLineRecord>,
    pub ground_truth: GroundTruthDoc,
}

const BRANDS: [(&str, &str); 9] = [
    ("carboplatin", "Paraplatin"),
    ("paclitaxel", "Taxol"),
    ("docetaxel", "Taxotere"),
    ("bevacizumab", "Avastin"),
    ("gemcitabine", "Gemzar"),
    ("pegylated liposomal doxorubicin", "Doxil"),
    ("topotecan", "Hycamtin"),
    ("tamoxifen", "Nolvadex"),
    ("cisplatin", "Platinol"),
];

fn pick<'a>(levels: &'a [Level], rng: &mut SimRng) -> &'a Level {
    if levels.len() == 1 {
        return &levels[0];
    }
    let dist = WeightedIndex::new(levels.iter().map(|l| l.weight)).expect("positive weights");
    &levels[dist.sample(rng)]
}

fn raw_names(regimen: &str, brand_rate: f64, rng: &mut SimRng) -> Vec<String> {
    let brands: HashMap<&str, &str> = BRANDS.into_iter().collect();
    regimen
        .split('+')
        .map(|drug| match brands.get(drug) {
            Some(brand) if rng.random::<f64>() < brand_rate => brand.to_string(),
            _ => drug.to_string(),
        })
        .collect()
}

/// Generates `n` patients. Patient `i` draws from its own stream, so a cohort
/// is a prefix of any larger cohort with the same seed.
pub fn generate_cohort(seed: u64, n: usize, truth: &GroundTruth) -> Result<SyntheticCohort> {
    truth.validate()?;
    let age_dist = Normal::new(truth.age_mean, truth.age_sd)
        .map_err(|e| Error::Config(format!("age distribution: {e}")))?;
    let mut clinical = Vec::with_capacity(n);
    let mut drug_lines = Vec::new();
    for i in 0..n {
        let rng = &mut stream(seed, Purpose::Synth, i as u64);
        let id = format!("SYN-{:05}", i + 1);
        let age = age_dist.sample(rng).round().clamp(25.0, 90.0) as u32;
        let race = pick(&truth.races, rng);
        let stage = pick(&truth.stages, rng);
        let grade = pick(&truth.grades, rng);
        let first = pick(&truth.first_line, rng);
        let eta = truth.age_beta * (age as f64 - 60.0) / 10.0 + stage.beta + grade.beta + first.beta;
        let rate = truth.base_rate_per_day * eta.exp();
        let u: f64 = 1.0 - rng.random::<f64>();
        let death_day = (-u.ln() / rate).ceil().max(1.0);
        let censor_day = rng
            .random_range(1..=truth.random_censor_max_days)
            .min(truth.admin_censor_days) as f64;
        let (days, status) = if death_day <= censor_day {
            (death_day as u32, VitalStatus::Deceased)
        } else {
            (censor_day as u32, VitalStatus::Living)
        };
        clinical.push(ClinicalRecord {
            patient_id: id.clone(),
            age_at_start: age,
            race: race.name.clone(),
            tumor_stage: stage.name.clone(),
            tumor_grade: grade.name.clone(),
            overall_survival_days: days,
            vital_status: status,
        });

        let d = days as i64;
        let mut start = rng.random_range(0..21).min(d - 1);
        let mut regimen = first.name.clone();
        loop {
            let end = (start + rng.random_range(90..=200)).min(d);
            drug_lines.push(DrugLineRecord {
                patient_id: id.clone(),
                drug_names_raw: raw_names(&regimen, truth.brand_name_rate, rng),
                start_day: start,
                end_day: end,
            });
            start = end + rng.random_range(60..=300);
            if start >= d {
                break;
            }
            regimen = truth.later_lines[rng.random_range(0..truth.later_lines.len())].clone();
        }
        if rng.random::<f64>() < truth.malformed_row_rate {
            let day = rng.random_range(0..=d);
            let (names, end) = match rng.random_range(0..3) {
                0 => (Vec::new(), day + 30),
                1 => (vec!["paclitaxel".to_string()], day),
                _ => (vec!["investigational agent".to_string()], day + 30),
            };
            drug_lines.push(DrugLineRecord {
                patient_id: id.clone(),
                drug_names_raw: names,
                start_day: day,
                end_day: end,
            });
        }
    }
    Ok(SyntheticCohort {
        clinical,
        drug_lines,
        ground_truth: GroundTruthDoc {
            seed,
            n_patients: n,
            coefficient_names: truth.coefficient_names(),
            coefficients: truth.coefficients(),
            dominant_regimen: truth.dominant_regimen().to_string(),
            truth: truth.clone(),
        },
    })
}

/// Patient-level survival data in the generator's parametrization: one row per
/// patient with a usable first line, duration in days, event = deceased.
/// The first line is the standardized, well-formed line with the earliest start.
pub fn recovery_dataset(
    truth: &GroundTruth,
    clinical: &[ClinicalRecord],
    lines: &[DrugLineRecord],
    table: &StandardizationTable,
) -> Result<SurvivalDataset> {
    let (lines, _) = standardize_lines(lines, table, UnknownDrugPolicy::Drop)?;
    let mut first: HashMap<&str, &DrugLineRecord> = HashMap::new();
    for l in &lines {
        if l.drug_names_raw.is_empty() || l.end_day <= l.start_day {
            continue;
        }
        let e = first.entry(l.patient_id.as_str()).or_insert(l);
        if l.start_day < e.start_day {
            *e = l;
        }
    }
    let index = |levels: &[Level], value: &str| levels.iter().position(|l| l.name == value);
    let dim = truth.coefficients().len();
    let mut data = SurvivalDataset::new(dim);
    for c in clinical {
        let Some(line) = first.get(c.patient_id.as_str()) else {
            continue;
        };
        let regimen = DrugCombination::new(line.drug_names_raw.iter().cloned()).to_string();
        let mut x = vec![(c.age_at_start as f64 - 60.0) / 10.0];
        for (levels, value) in [
            (&truth.stages, c.tumor_stage.as_str()),
            (&truth.grades, c.tumor_grade.as_str()),
            (&truth.first_line, regimen.as_str()),
        ] {
            let k = index(levels, value).ok_or_else(|| Error::UnknownCategory {
                field: "recovery".into(),
                value: value.to_string(),
            })?;
            x.extend((1..levels.len()).map(|j| (j == k) as u8 as f64));
        }
        data.push(&x, c.overall_survival_days.max(1), c.vital_status == VitalStatus::Deceased)?;
    }
    Ok(data)
}
