//! Statistical comparisons and the data behind the learning-curve, box-plot,
//! heatmap and treatment-line figures.

mod courses;
mod lines;
mod matrix;
mod stats;
mod summary;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use courses::{courses_from_periods, courses_from_trajectories, PatientCourse};
pub use lines::{line_frequencies, LineShare, DEFAULT_MAX_LINES};
pub use matrix::{
    frequency_timing_matrix, FrequencyMatrix, FrequencyRow, HeatmapCell, DEFAULT_INTERVAL_MONTHS,
};
pub use stats::{
    ln_gamma, regularized_incomplete_beta, t_two_sided_p, welch_t_test, SurvivalSample, WelchTest,
};
pub use summary::{quantile_sorted, survival_summary, SurvivalSummary};

use crate::error::Result;

/// One entry of `comparison.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub pair: [String; 2],
    pub t: f64,
    pub df: f64,
    pub p: f64,
    pub mean_a: f64,
    pub mean_b: f64,
}

pub fn compare(a: &SurvivalSample, b: &SurvivalSample) -> Result<Comparison> {
    let test = welch_t_test(a, b)?;
    Ok(Comparison {
        pair: [a.label.clone(), b.label.clone()],
        t: test.t,
        df: test.df,
        p: test.p,
        mean_a: stats::mean(&a.values),
        mean_b: stats::mean(&b.values),
    })
}

pub fn write_heatmap<W: Write>(writer: W, matrix: &FrequencyMatrix) -> Result<()> {
    write_rows(writer, &HEATMAP_COLUMNS, matrix.cells())
}

pub fn write_lines<W: Write>(writer: W, shares: &[LineShare]) -> Result<()> {
    write_rows(writer, &LINES_COLUMNS, shares.iter().cloned())
}

pub const HEATMAP_COLUMNS: [&str; 5] = ["combination", "interval_start_month", "count", "z", "z_clamped"];
pub const LINES_COLUMNS: [&str; 3] = ["line_index", "combination", "percent"];

/// The header is written even when there are no rows.
fn write_rows<W: Write, T: Serialize>(writer: W, header: &[&str], rows: impl IntoIterator<Item = T>) -> Result<()> {
    let mut w = csv::WriterBuilder::new().has_headers(false).from_writer(writer);
    w.write_record(header)?;
    for r in rows {
        w.serialize(r)?;
    }
    w.flush().map_err(|e| crate::Error::io("<csv>", e))?;
    Ok(())
}
