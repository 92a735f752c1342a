use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::cox::Ties;
use super::schema::CovariateSchema;
use crate::error::{Error, Result};

pub const MODEL_FORMAT_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Timescale {
    SinceTreatmentStart,
    GapSinceLastEvent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    /// Penalized log partial likelihood at the returned coefficients.
    pub log_likelihood: f64,
    pub iterations: usize,
    pub max_gradient: f64,
}

/// A fitted proportional-hazards model: coefficients plus the cumulative
/// baseline hazard on the integer grid `0..=T`, held flat beyond `T`.
#[derive(Debug, Clone, PartialEq)]
pub struct CoxModel {
    pub beta: Vec<f64>,
    /// `cumulative_hazard[t]` is the baseline cumulative hazard at month `t`.
    pub cumulative_hazard: Vec<f64>,
    pub schema: CovariateSchema,
    pub timescale: Timescale,
    pub penalty: f64,
    pub ties: Ties,
    pub diagnostics: FitDiagnostics,
}

#[derive(Serialize, Deserialize)]
struct ModelDocument {
    version: u32,
    timescale: Timescale,
    penalty: f64,
    ties: Ties,
    schema: CovariateSchema,
    beta: Vec<f64>,
    baseline_grid: Vec<u32>,
    cumulative_hazard: Vec<f64>,
    diagnostics: FitDiagnostics,
}

impl CoxModel {
    pub fn linear_predictor(&self, x: &[f64]) -> f64 {
        debug_assert_eq!(x.len(), self.beta.len());
        self.beta.iter().zip(x).map(|(b, v)| b * v).sum()
    }

    /// Baseline cumulative hazard at month `t`, constant past the grid end.
    pub fn cumulative_baseline(&self, t: u32) -> f64 {
        let last = self.cumulative_hazard.len().saturating_sub(1);
        self.cumulative_hazard
            .get((t as usize).min(last))
            .copied()
            .unwrap_or(0.0)
    }

    pub fn baseline_survival(&self, t: u32) -> f64 {
        (-self.cumulative_baseline(t)).exp()
    }

    /// S(t | x) = exp(-Lambda0(t) * exp(beta'x)).
    pub fn survival_at(&self, x: &[f64], t: u32) -> f64 {
        let h = self.cumulative_baseline(t);
        if h == 0.0 {
            return 1.0;
        }
        (-h * self.linear_predictor(x).exp()).exp()
    }

    /// Probability of the event during month `t` given survival through `t - 1`,
    /// i.e. `1 - S(t|x) / S(t-1|x)`. Month 0 has no interval and returns 0.
    pub fn conditional_event_prob(&self, x: &[f64], t: u32) -> Result<f64> {
        if t == 0 {
            return Ok(0.0);
        }
        let increment = self.cumulative_baseline(t) - self.cumulative_baseline(t - 1);
        if increment <= 0.0 {
            return Ok(0.0);
        }
        let previous = self.survival_at(x, t - 1);
        if previous == 0.0 {
            return Err(Error::ZeroSurvival(t - 1));
        }
        // S(t)/S(t-1) = exp(-dLambda0 * exp(eta)); expm1 keeps small hazards exact.
        let p = -(-increment * self.linear_predictor(x).exp()).exp_m1();
        Ok(p.clamp(0.0, 1.0))
    }

    pub fn to_json_writer<W: Write>(&self, writer: W) -> Result<()> {
        let doc = ModelDocument {
            version: MODEL_FORMAT_VERSION,
            timescale: self.timescale,
            penalty: self.penalty,
            ties: self.ties,
            schema: self.schema.clone(),
            beta: self.beta.clone(),
            baseline_grid: (0..self.cumulative_hazard.len() as u32).collect(),
            cumulative_hazard: self.cumulative_hazard.clone(),
            diagnostics: self.diagnostics,
        };
        serde_json::to_writer_pretty(writer, &doc)?;
        Ok(())
    }

    pub fn from_json_reader<R: Read>(reader: R) -> Result<Self> {
        let doc: ModelDocument = serde_json::from_reader(reader)?;
        if doc.version != MODEL_FORMAT_VERSION {
            return Err(Error::Config(format!(
                "unsupported model format version {}",
                doc.version
            )));
        }
        if doc.beta.len() != doc.schema.dim() {
            return Err(Error::DimensionMismatch {
                expected: doc.schema.dim(),
                actual: doc.beta.len(),
            });
        }
        if doc.baseline_grid.len() != doc.cumulative_hazard.len()
            || doc
                .baseline_grid
                .iter()
                .enumerate()
                .any(|(i, t)| *t as usize != i)
        {
            return Err(Error::Config(
                "baseline_grid must be 0..=T aligned with cumulative_hazard".into(),
            ));
        }
        Ok(CoxModel {
            beta: doc.beta,
            cumulative_hazard: doc.cumulative_hazard,
            schema: doc.schema,
            timescale: doc.timescale,
            penalty: doc.penalty,
            ties: doc.ties,
            diagnostics: doc.diagnostics,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn model(cum: Vec<f64>, beta: Vec<f64>) -> CoxModel {
        CoxModel {
            schema: CovariateSchema::columns(beta.len()),
            beta,
            cumulative_hazard: cum,
            timescale: Timescale::SinceTreatmentStart,
            penalty: 0.1,
            ties: Ties::Efron,
            diagnostics: FitDiagnostics {
                log_likelihood: 0.0,
                iterations: 0,
                max_gradient: 0.0,
            },
        }
    }

    #[test]
    fn survival_at_zero_is_one() {
        let m = model(vec![0.0, 0.2, 0.5], vec![0.7]);
        assert_eq!(m.survival_at(&[3.0], 0), 1.0);
    }

    #[test]
    fn zero_covariates_give_baseline() {
        let m = model(vec![0.0, 0.2, 0.5], vec![0.7]);
        assert_eq!(m.survival_at(&[0.0], 2), (-0.5f64).exp());
        assert_eq!(m.survival_at(&[0.0], 2), m.baseline_survival(2));
    }

    #[test]
    fn plateau_beyond_grid() {
        let m = model(vec![0.0, 0.2, 0.5], vec![0.7]);
        assert_eq!(m.survival_at(&[1.0], 50), m.survival_at(&[1.0], 2));
        assert_eq!(m.conditional_event_prob(&[1.0], 50).unwrap(), 0.0);
    }

    #[test]
    fn flat_month_has_zero_probability() {
        let m = model(vec![0.0, 0.2, 0.2, 0.4], vec![0.7]);
        assert_eq!(m.conditional_event_prob(&[1.0], 2).unwrap(), 0.0);
    }

    #[test]
    fn first_month_probability() {
        // baseline chosen so that S(1|0) = 0.9
        let m = model(vec![0.0, -(0.9f64.ln())], vec![0.3]);
        let p = m.conditional_event_prob(&[0.0], 1).unwrap();
        assert!((p - 0.1).abs() < 1e-12);
    }

    #[test]
    fn underflow_reports_zero_survival() {
        let m = model(vec![0.0, 800.0, 900.0], vec![1.0]);
        assert!(matches!(
            m.conditional_event_prob(&[2.0], 2),
            Err(Error::ZeroSurvival(1))
        ));
    }

    #[test]
    fn json_round_trip() {
        let m = model(vec![0.0, 0.2, 0.5], vec![0.7, -0.1]);
        let mut buf = Vec::new();
        m.to_json_writer(&mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.contains("\"baseline_grid\""));
        assert_eq!(CoxModel::from_json_reader(buf.as_slice()).unwrap(), m);
    }
}
