use std::collections::HashMap;

use serde::Serialize;

use super::courses::PatientCourse;
use crate::data_pipeline::DrugCombination;

pub const DEFAULT_MAX_LINES: usize = 6;

/// One row of `lines.csv`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LineShare {
    pub line_index: usize,
    pub combination: String,
    pub percent: f64,
}

/// For each line k (1-based, up to `max_lines`), the percentage of patients
/// with a k-th line who received each combination in it. Within a line,
/// rows are ordered by percentage, descending, then by combination.
pub fn line_frequencies(courses: &[PatientCourse], max_lines: usize) -> Vec<LineShare> {
    let mut per_line: Vec<HashMap<&DrugCombination, u64>> = vec![HashMap::new(); max_lines];
    let lines: Vec<Vec<&DrugCombination>> = courses.iter().map(PatientCourse::lines).collect();
    for patient in &lines {
        for (k, combo) in patient.iter().take(max_lines).enumerate() {
            *per_line[k].entry(*combo).or_default() += 1;
        }
    }
    let mut out = Vec::new();
    for (k, counts) in per_line.into_iter().enumerate() {
        let reached: u64 = counts.values().sum();
        let mut rows: Vec<(&DrugCombination, u64)> = counts.into_iter().collect();
        rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(b.0)));
        out.extend(rows.into_iter().map(|(combo, c)| LineShare {
            line_index: k + 1,
            combination: combo.to_string(),
            percent: 100.0 * c as f64 / reached as f64,
        }));
    }
    out
}
