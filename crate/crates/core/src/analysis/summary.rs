use serde::{Deserialize, Serialize};

use super::stats::{mean, variance};
use crate::error::{Error, Result};

/// Box-plot statistics of a sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SurvivalSummary {
    pub n: usize,
    pub mean: f64,
    /// Sample standard deviation (n - 1); 0 for a single value.
    pub sd: f64,
    pub median: f64,
    pub q1: f64,
    pub q3: f64,
    pub whisker_low: f64,
    pub whisker_high: f64,
    pub outliers: Vec<f64>,
}

/// Quantile of sorted data by linear interpolation between order statistics:
/// with `h = (n - 1) p`, `Q(p) = x[floor h] + (h - floor h) (x[floor h + 1] - x[floor h])`.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Whiskers reach the most extreme points within 1.5 IQR of the box; points beyond are outliers.
pub fn survival_summary(values: &[f64]) -> Result<SurvivalSummary> {
    if values.is_empty() {
        return Err(Error::EmptySample);
    }
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let (q1, median, q3) = (
        quantile_sorted(&sorted, 0.25),
        quantile_sorted(&sorted, 0.5),
        quantile_sorted(&sorted, 0.75),
    );
    let reach = 1.5 * (q3 - q1);
    let (lo_fence, hi_fence) = (q1 - reach, q3 + reach);
    let inside = sorted.iter().copied().filter(|v| (lo_fence..=hi_fence).contains(v));
    let whisker_low = inside.clone().next().unwrap_or(q1);
    let whisker_high = inside.last().unwrap_or(q3);
    Ok(SurvivalSummary {
        n: sorted.len(),
        mean: mean(&sorted),
        sd: if sorted.len() > 1 { variance(&sorted).sqrt() } else { 0.0 },
        median,
        q1,
        q3,
        whisker_low,
        whisker_high,
        outliers: sorted
            .iter()
            .copied()
            .filter(|v| *v < lo_fence || *v > hi_fence)
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn one_to_hundred_quartiles() {
        let xs: Vec<f64> = (1..=100).map(f64::from).collect();
        let s = survival_summary(&xs).unwrap();
        assert!((s.q1 - 25.75).abs() < 1e-12);
        assert!((s.q3 - 75.25).abs() < 1e-12);
        assert!((s.median - 50.5).abs() < 1e-12);
        assert!(s.outliers.is_empty());
    }

    #[test]
    fn singleton() {
        let s = survival_summary(&[5.0]).unwrap();
        assert_eq!((s.mean, s.median, s.sd), (5.0, 5.0, 0.0));
        assert!(s.outliers.is_empty());
    }

    #[test]
    fn empty_is_error() {
        assert!(matches!(survival_summary(&[]), Err(Error::EmptySample)));
    }
}
