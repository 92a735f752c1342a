//! Penalized Cox partial likelihood and its Newton-Raphson maximizer.
//!
//! The objective is `logPL(beta) - penalty/2 * |beta|^2`. Tied event times use
//! the Efron correction by default: for an event time with `d` tied events,
//! risk-set sums `S0, S1, S2` and event-set sums `E0, E1, E2`,
//!
//! ```text
//! logPL += sum_{D} eta - sum_{l=0}^{d-1} log(S0 - l/d * E0)
//! ```
//!
//! with the matching first and second derivatives. Covariates are centred
//! before evaluation (the partial likelihood is invariant to centring); the
//! baseline is converted back to raw covariate units at the end.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::model::{CoxModel, FitDiagnostics, Timescale};
use super::schema::CovariateSchema;
use crate::error::{Error, Result};

pub const MAX_ITERATIONS: usize = 100;
pub const GRADIENT_TOLERANCE: f64 = 1e-7;
pub const LOGLIK_TOLERANCE: f64 = 1e-9;
const MAX_STEP_HALVINGS: usize = 40;
/// Smallest accepted ratio between Cholesky pivots.
const SINGULAR_PIVOT_RATIO: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Ties {
    #[default]
    Efron,
    Breslow,
}

/// Rows of (covariates, integer duration >= 1, event indicator).
#[derive(Debug, Clone, PartialEq)]
pub struct SurvivalDataset {
    dim: usize,
    x: Vec<f64>,
    durations: Vec<u32>,
    events: Vec<bool>,
}

impl SurvivalDataset {
    pub fn new(dim: usize) -> Self {
        SurvivalDataset {
            dim,
            x: Vec::new(),
            durations: Vec::new(),
            events: Vec::new(),
        }
    }

    pub fn push(&mut self, covariates: &[f64], duration: u32, event: bool) -> Result<()> {
        if covariates.len() != self.dim {
            return Err(Error::DimensionMismatch {
                expected: self.dim,
                actual: covariates.len(),
            });
        }
        if duration < 1 {
            return Err(Error::DegenerateData("durations must be at least 1".into()));
        }
        self.x.extend_from_slice(covariates);
        self.durations.push(duration);
        self.events.push(event);
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.durations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.durations.is_empty()
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.x[i * self.dim..(i + 1) * self.dim]
    }

    pub fn duration(&self, i: usize) -> u32 {
        self.durations[i]
    }

    pub fn event(&self, i: usize) -> bool {
        self.events[i]
    }

    pub fn event_count(&self) -> usize {
        self.events.iter().filter(|e| **e).count()
    }

    pub fn max_duration(&self) -> u32 {
        self.durations.iter().copied().max().unwrap_or(0)
    }

    fn column_means(&self) -> Vec<f64> {
        let mut means = vec![0.0; self.dim];
        if self.is_empty() {
            return means;
        }
        for i in 0..self.len() {
            for (m, v) in means.iter_mut().zip(self.row(i)) {
                *m += v;
            }
        }
        let n = self.len() as f64;
        means.iter_mut().for_each(|m| *m /= n);
        means
    }
}

/// Value, gradient and (optionally) Hessian of the penalized log partial likelihood.
#[derive(Debug, Clone)]
pub struct Evaluation {
    pub log_likelihood: f64,
    pub gradient: Vec<f64>,
    /// Row-major `p x p`; empty when not requested.
    pub hessian: Vec<f64>,
}

/// Row indices grouped by distinct duration, longest first.
fn time_groups(data: &SurvivalDataset) -> Vec<(u32, Vec<usize>)> {
    let mut order: Vec<usize> = (0..data.len()).collect();
    order.sort_by(|&a, &b| data.durations[b].cmp(&data.durations[a]).then(a.cmp(&b)));
    let mut groups: Vec<(u32, Vec<usize>)> = Vec::new();
    for i in order {
        let t = data.durations[i];
        match groups.last_mut() {
            Some((gt, rows)) if *gt == t => rows.push(i),
            _ => groups.push((t, vec![i])),
        }
    }
    groups
}

struct Centered<'a> {
    data: &'a SurvivalDataset,
    means: Vec<f64>,
    groups: Vec<(u32, Vec<usize>)>,
}

impl<'a> Centered<'a> {
    fn new(data: &'a SurvivalDataset) -> Self {
        Centered {
            data,
            means: data.column_means(),
            groups: time_groups(data),
        }
    }

    fn row_into(&self, i: usize, out: &mut [f64]) {
        for ((o, v), m) in out.iter_mut().zip(self.data.row(i)).zip(&self.means) {
            *o = v - m;
        }
    }

    fn evaluate(&self, beta: &[f64], penalty: f64, ties: Ties, want_hessian: bool) -> Evaluation {
        let p = self.data.dim;
        let mut ll = 0.0;
        let mut grad = vec![0.0; p];
        let mut hess = if want_hessian { vec![0.0; p * p] } else { Vec::new() };

        let mut s0 = 0.0;
        let mut s1 = vec![0.0; p];
        let mut s2 = if want_hessian { vec![0.0; p * p] } else { Vec::new() };
        let mut e1 = vec![0.0; p];
        let mut e2 = if want_hessian { vec![0.0; p * p] } else { Vec::new() };
        let mut z1 = vec![0.0; p];
        let mut xi = vec![0.0; p];

        for (_, rows) in &self.groups {
            let mut e0 = 0.0;
            let mut d = 0usize;
            e1.fill(0.0);
            if want_hessian {
                e2.fill(0.0);
            }
            for &i in rows {
                self.row_into(i, &mut xi);
                let eta: f64 = xi.iter().zip(beta).map(|(a, b)| a * b).sum();
                let w = eta.exp();
                s0 += w;
                for j in 0..p {
                    s1[j] += w * xi[j];
                }
                if want_hessian {
                    accumulate_outer(&mut s2, &xi, w);
                }
                if self.data.events[i] {
                    d += 1;
                    ll += eta;
                    e0 += w;
                    for j in 0..p {
                        grad[j] += xi[j];
                        e1[j] += w * xi[j];
                    }
                    if want_hessian {
                        accumulate_outer(&mut e2, &xi, w);
                    }
                }
            }
            if d == 0 {
                continue;
            }
            let steps: Vec<f64> = match ties {
                Ties::Efron => (0..d).map(|l| l as f64 / d as f64).collect(),
                Ties::Breslow => vec![0.0; d],
            };
            for f in steps {
                let phi = s0 - f * e0;
                ll -= phi.ln();
                for j in 0..p {
                    z1[j] = s1[j] - f * e1[j];
                    grad[j] -= z1[j] / phi;
                }
                if want_hessian {
                    for j in 0..p {
                        for k in j..p {
                            let z2 = s2[j * p + k] - f * e2[j * p + k];
                            hess[j * p + k] -= z2 / phi - z1[j] * z1[k] / (phi * phi);
                        }
                    }
                }
            }
        }

        if want_hessian {
            for j in 0..p {
                for k in 0..j {
                    hess[j * p + k] = hess[k * p + j];
                }
                hess[j * p + j] -= penalty;
            }
        }
        for j in 0..p {
            ll -= 0.5 * penalty * beta[j] * beta[j];
            grad[j] -= penalty * beta[j];
        }
        Evaluation {
            log_likelihood: ll,
            gradient: grad,
            hessian: hess,
        }
    }

    /// Breslow increments `d_t / sum_{R(t)} exp(eta)` on the grid `0..=max_duration`,
    /// accumulated and converted to raw covariate units.
    fn cumulative_baseline(&self, beta: &[f64]) -> Vec<f64> {
        let p = self.data.dim;
        let max_t = self.data.max_duration() as usize;
        let mut increments = vec![0.0; max_t + 1];
        let mut s0 = 0.0;
        let mut xi = vec![0.0; p];
        for (t, rows) in &self.groups {
            let mut d = 0usize;
            for &i in rows {
                self.row_into(i, &mut xi);
                let eta: f64 = xi.iter().zip(beta).map(|(a, b)| a * b).sum();
                s0 += eta.exp();
                d += self.data.events[i] as usize;
            }
            if d > 0 {
                increments[*t as usize] = d as f64 / s0;
            }
        }
        let shift = (-beta
            .iter()
            .zip(&self.means)
            .map(|(b, m)| b * m)
            .sum::<f64>())
        .exp();
        let mut cumulative = Vec::with_capacity(increments.len());
        let mut acc = 0.0;
        for inc in increments {
            acc += inc;
            cumulative.push(acc * shift);
        }
        cumulative
    }
}

fn accumulate_outer(m: &mut [f64], x: &[f64], w: f64) {
    let p = x.len();
    for j in 0..p {
        let wx = w * x[j];
        if wx == 0.0 {
            continue;
        }
        let row = &mut m[j * p..(j + 1) * p];
        for k in j..p {
            row[k] += wx * x[k];
        }
    }
}

/// Penalized log partial likelihood with its gradient and Hessian at `beta`.
pub fn evaluate_partial_likelihood(
    data: &SurvivalDataset,
    beta: &[f64],
    penalty: f64,
    ties: Ties,
) -> Evaluation {
    assert_eq!(beta.len(), data.dim, "beta length must match dataset dimension");
    Centered::new(data).evaluate(beta, penalty, ties, true)
}

fn max_abs(v: &[f64]) -> f64 {
    v.iter().fold(0.0, |m, x| m.max(x.abs()))
}

/// Fits a ridge-penalized Cox model by Newton-Raphson with step halving.
///
/// Stops when the gradient max-norm falls below 1e-7 or an accepted step
/// changes the objective by less than 1e-9. The returned model carries an
/// anonymous column schema; see [`super::fit_death_model`] for fits on patient data.
pub fn fit_cox(data: &SurvivalDataset, penalty: f64, ties: Ties) -> Result<CoxModel> {
    if !(penalty >= 0.0) || !penalty.is_finite() {
        return Err(Error::DegenerateData(format!("penalty must be >= 0, got {penalty}")));
    }
    if data.event_count() == 0 {
        return Err(Error::DegenerateData("no events in dataset".into()));
    }
    let p = data.dim;
    let centered = Centered::new(data);
    let mut beta = vec![0.0; p];
    let mut current = centered.evaluate(&beta, penalty, ties, true);
    let mut iterations = 0;
    let mut converged = false;

    while iterations < MAX_ITERATIONS {
        if max_abs(&current.gradient) < GRADIENT_TOLERANCE {
            converged = true;
            break;
        }
        iterations += 1;
        // Newton direction: (-H) delta = g
        let neg_h = DMatrix::from_row_slice(p, p, &current.hessian).map(|v| -v);
        let chol = neg_h.cholesky().ok_or(Error::SingularHessian)?;
        let diag = chol.l_dirty().diagonal();
        let (lo, hi) = diag
            .iter()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), v| (lo.min(*v), hi.max(*v)));
        if !(lo > hi * SINGULAR_PIVOT_RATIO) {
            return Err(Error::SingularHessian);
        }
        let delta = chol.solve(&DVector::from_column_slice(&current.gradient));
        if delta.iter().any(|v| !v.is_finite()) {
            return Err(Error::SingularHessian);
        }

        let mut step = 1.0;
        let mut candidate: Vec<f64>;
        let mut next;
        let mut halvings = 0;
        loop {
            candidate = beta.iter().zip(delta.iter()).map(|(b, d)| b + step * d).collect();
            next = centered.evaluate(&candidate, penalty, ties, true);
            if next.log_likelihood.is_finite() && next.log_likelihood >= current.log_likelihood {
                break;
            }
            halvings += 1;
            if halvings > MAX_STEP_HALVINGS {
                // No ascent possible along the Newton direction: at the optimum numerically.
                candidate = beta.clone();
                next = current.clone();
                break;
            }
            step *= 0.5;
        }
        let change = next.log_likelihood - current.log_likelihood;
        beta = candidate;
        current = next;
        if change.abs() < LOGLIK_TOLERANCE {
            converged = true;
            break;
        }
    }

    let max_gradient = max_abs(&current.gradient);
    if !converged {
        if max_gradient < GRADIENT_TOLERANCE {
            converged = true;
        } else {
            return Err(Error::NonConvergence {
                iterations,
                max_gradient,
            });
        }
    }
    debug_assert!(converged);
    if beta.iter().any(|b| !b.is_finite()) {
        return Err(Error::SingularHessian);
    }

    let cumulative_hazard = centered.cumulative_baseline(&beta);
    Ok(CoxModel {
        beta,
        cumulative_hazard,
        schema: CovariateSchema::columns(p),
        timescale: Timescale::SinceTreatmentStart,
        penalty,
        ties,
        diagnostics: FitDiagnostics {
            log_likelihood: current.log_likelihood,
            iterations,
            max_gradient,
        },
    })
}
