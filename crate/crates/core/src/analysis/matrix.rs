use std::collections::HashMap;

use serde::Serialize;

use super::courses::PatientCourse;
use crate::data_pipeline::DrugCombination;

pub const DEFAULT_INTERVAL_MONTHS: u32 = 3;

#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyRow {
    pub combination: DrugCombination,
    pub counts: Vec<u64>,
    pub z: Vec<f64>,
    pub z_clamped: Vec<f64>,
}

impl FrequencyRow {
    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }
}

/// Treatment counts per combination and time interval, with per-interval z-scores.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyMatrix {
    pub interval_months: u32,
    /// First month of each interval column.
    pub interval_starts: Vec<u32>,
    /// Sorted by total count, descending; ties by combination.
    pub rows: Vec<FrequencyRow>,
}

/// One row of `heatmap.csv`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeatmapCell {
    pub combination: String,
    pub interval_start_month: u32,
    pub count: u64,
    pub z: f64,
    pub z_clamped: f64,
}

/// Counts every treated month (no-treatment months are not administrations)
/// into the interval containing it. Each column is standardized across all
/// combinations with its population mean and standard deviation; a column with
/// zero spread gets z = 0. Clamped scores bound z to [0, 3].
pub fn frequency_timing_matrix(courses: &[PatientCourse], interval_months: u32) -> FrequencyMatrix {
    assert!(interval_months >= 1, "interval must be >= 1 month");
    let mut counts: HashMap<&DrugCombination, Vec<u64>> = HashMap::new();
    let mut columns = 0usize;
    for course in courses {
        for (month, combo) in course.months.iter().enumerate() {
            if combo.is_no_treatment() {
                continue;
            }
            let col = month / interval_months as usize;
            columns = columns.max(col + 1);
            let row = counts.entry(combo).or_default();
            if row.len() <= col {
                row.resize(col + 1, 0);
            }
            row[col] += 1;
        }
    }
    let mut rows: Vec<FrequencyRow> = counts
        .into_iter()
        .map(|(combo, mut c)| {
            c.resize(columns, 0);
            FrequencyRow {
                combination: combo.clone(),
                counts: c,
                z: vec![0.0; columns],
                z_clamped: vec![0.0; columns],
            }
        })
        .collect();
    rows.sort_by(|a, b| b.total().cmp(&a.total()).then_with(|| a.combination.cmp(&b.combination)));

    let n = rows.len() as f64;
    for col in 0..columns {
        let mean = rows.iter().map(|r| r.counts[col] as f64).sum::<f64>() / n;
        let var = rows
            .iter()
            .map(|r| (r.counts[col] as f64 - mean).powi(2))
            .sum::<f64>()
            / n;
        let sd = var.sqrt();
        for r in &mut rows {
            let z = if sd > 0.0 {
                (r.counts[col] as f64 - mean) / sd
            } else {
                0.0
            };
            r.z[col] = z;
            r.z_clamped[col] = z.clamp(0.0, 3.0);
        }
    }
    FrequencyMatrix {
        interval_months,
        interval_starts: (0..columns as u32).map(|c| c * interval_months).collect(),
        rows,
    }
}

impl FrequencyMatrix {
    pub fn total_count(&self) -> u64 {
        self.rows.iter().map(FrequencyRow::total).sum()
    }

    /// Long form, row-major in matrix order.
    pub fn cells(&self) -> Vec<HeatmapCell> {
        self.rows
            .iter()
            .flat_map(|r| {
                self.interval_starts.iter().enumerate().map(move |(c, &start)| HeatmapCell {
                    combination: r.combination.to_string(),
                    interval_start_month: start,
                    count: r.counts[c],
                    z: r.z[c],
                    z_clamped: r.z_clamped[c],
                })
            })
            .collect()
    }
}
