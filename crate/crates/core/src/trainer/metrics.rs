use std::collections::VecDeque;
use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::Result;

pub const METRICS_COLUMNS: [&str; 7] = [
    "round",
    "survival_months",
    "return",
    "sma1000",
    "cma",
    "epsilon",
    "loss",
];

/// One line of `metrics.csv`. `sma` is empty until a full window exists;
/// `epsilon` and `loss` are empty for agents that do not learn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricsRow {
    pub round: u64,
    pub survival_months: u32,
    #[serde(rename = "return")]
    pub episode_return: i64,
    #[serde(rename = "sma1000")]
    pub sma: Option<f64>,
    pub cma: f64,
    pub epsilon: Option<f64>,
    pub loss: Option<f64>,
}

/// Running survival statistics. Sums are kept as integers so that the moving
/// and cumulative means are exact quotients.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MetricAccumulator {
    window: usize,
    recent: VecDeque<u32>,
    window_sum: u64,
    total_sum: u64,
    count: u64,
}

impl MetricAccumulator {
    pub fn new(window: usize) -> Self {
        assert!(window >= 1, "window must be >= 1");
        MetricAccumulator {
            window,
            recent: VecDeque::with_capacity(window),
            window_sum: 0,
            total_sum: 0,
            count: 0,
        }
    }

    /// Adds one episode and returns `(sma, cma)`.
    pub fn push(&mut self, survival_months: u32) -> (Option<f64>, f64) {
        if self.recent.len() == self.window {
            self.window_sum -= self.recent.pop_front().unwrap_or(0) as u64;
        }
        self.recent.push_back(survival_months);
        self.window_sum += survival_months as u64;
        self.total_sum += survival_months as u64;
        self.count += 1;
        (self.sma(), self.cma())
    }

    pub fn sma(&self) -> Option<f64> {
        (self.recent.len() == self.window).then(|| self.window_sum as f64 / self.window as f64)
    }

    pub fn cma(&self) -> f64 {
        if self.count == 0 {
            0.0
        } else {
            self.total_sum as f64 / self.count as f64
        }
    }

    pub fn count(&self) -> u64 {
        self.count
    }
}

pub fn metrics_writer<W: Write>(writer: W) -> csv::Writer<W> {
    csv::WriterBuilder::new().has_headers(true).from_writer(writer)
}

pub fn read_metrics<R: Read>(reader: R) -> Result<Vec<MetricsRow>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut rows = Vec::new();
    for row in rdr.deserialize() {
        rows.push(row?);
    }
    Ok(rows)
}
