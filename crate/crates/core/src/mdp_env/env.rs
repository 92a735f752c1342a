use std::collections::HashMap;
use std::sync::Arc;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::actions::{is_legal, legal_actions, ActionSet};
use super::state::{HealthState, PatientState};
use crate::data_pipeline::{DrugCombination, EmpiricalDemographics};
use crate::error::{Error, Result};
use crate::rng::SimRng;
use crate::survival::{CovariateInput, CoxModel};

pub const DEFAULT_HORIZON_CAP: u32 = 240;

/// Monthly event probabilities for one state-action pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TransitionProbabilities {
    pub p_death: f64,
    pub p_survive: f64,
    pub p_remission: f64,
    pub p_treatment: f64,
}

impl TransitionProbabilities {
    pub fn new(p_death: f64, p_remission: f64) -> Self {
        let p_death = p_death.clamp(0.0, 1.0);
        let p_remission = p_remission.clamp(0.0, 1.0);
        TransitionProbabilities {
            p_death,
            p_survive: 1.0 - p_death,
            p_remission,
            p_treatment: 1.0 - p_remission,
        }
    }
}

/// Fixed probabilities independent of the state, optionally per action.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct PinnedDynamics {
    pub default: (f64, f64),
    pub per_action: HashMap<DrugCombination, (f64, f64)>,
}

impl PinnedDynamics {
    pub fn constant(p_death: f64, p_remission: f64) -> Self {
        PinnedDynamics {
            default: (p_death, p_remission),
            per_action: HashMap::new(),
        }
    }

    pub fn with_action(mut self, combo: DrugCombination, p_death: f64, p_remission: f64) -> Self {
        self.per_action.insert(combo, (p_death, p_remission));
        self
    }
}

/// Where transition probabilities come from.
#[derive(Debug, Clone)]
pub enum Dynamics {
    /// Death and gap-time recurrence regressions.
    Cox {
        death: Arc<CoxModel>,
        recurrence: Arc<CoxModel>,
    },
    /// Constant probabilities, for calibration and sanity environments.
    Pinned(PinnedDynamics),
}

/// A configured, immutable environment.
#[derive(Debug, Clone)]
pub struct Environment {
    pub dynamics: Dynamics,
    pub action_set: ActionSet,
    pub demographics: EmpiricalDemographics,
    pub horizon_cap: u32,
}

/// One simulated month.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Transition {
    pub state: PatientState,
    pub action: usize,
    pub reward: i32,
    pub next_state: PatientState,
    pub done: bool,
    /// Death forced by the horizon cap rather than drawn.
    pub capped: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Episode {
    pub transitions: Vec<Transition>,
    /// Number of +1 rewards.
    pub survival_months: u32,
    /// Sum of rewards; always `survival_months - 1`.
    pub total_return: i64,
}

/// Anything that picks an action index for a live state.
pub trait Policy {
    fn begin_episode(&mut self) {}

    fn select(&mut self, state: &PatientState, legal: &[usize], rng: &mut SimRng) -> Result<usize>;

    fn observe(&mut self, _transition: &Transition) {}
}

/// Clocks after applying `action` for one month.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
struct NextClocks {
    months_since_start: u32,
    months_on_current: u32,
    prior_lines: u32,
}

fn next_clocks(state: &PatientState, action: &DrugCombination) -> NextClocks {
    let same = *action == state.current_combination;
    NextClocks {
        months_since_start: state.months_since_start + 1,
        months_on_current: if same { state.months_on_current + 1 } else { 1 },
        prior_lines: state.prior_lines
            + (!same && !state.current_combination.is_no_treatment()) as u32,
    }
}

impl Environment {
    pub fn new(dynamics: Dynamics, action_set: ActionSet, demographics: EmpiricalDemographics) -> Self {
        Environment {
            dynamics,
            action_set,
            demographics,
            horizon_cap: DEFAULT_HORIZON_CAP,
        }
    }

    pub fn with_horizon_cap(mut self, cap: u32) -> Self {
        assert!(cap >= 1, "horizon cap must be at least one month");
        self.horizon_cap = cap;
        self
    }

    /// Checks that every action can be encoded by both regressions.
    pub fn validate(&self) -> Result<()> {
        if let Dynamics::Cox { death, recurrence } = &self.dynamics {
            let probe = PatientState::initial(self.demographics.sample(&mut crate::rng::stream(
                0,
                crate::rng::Purpose::Init,
                0,
            )));
            for combo in self.action_set.iter() {
                for model in [death, recurrence] {
                    let input = CovariateInput {
                        in_remission: combo.is_no_treatment(),
                        treatment: combo,
                        prior_lines: 0,
                        run_start_month: 1,
                        demographics: &probe.demographics,
                    };
                    model.schema.encode(&input)?;
                }
            }
        }
        Ok(())
    }

    /// A new patient needing treatment at month 0 with sampled demographics.
    pub fn reset(&self, rng: &mut SimRng) -> PatientState {
        PatientState::initial(self.demographics.sample(rng))
    }

    pub fn legal_actions(&self, state: &PatientState) -> Result<Vec<usize>> {
        legal_actions(state, &self.action_set)
    }

    pub fn transition_probs(&self, state: &PatientState, action: usize) -> Result<TransitionProbabilities> {
        if state.is_terminal() {
            return Err(Error::TerminalState);
        }
        if !is_legal(state, action) || action >= self.action_set.len() {
            return Err(Error::IllegalAction { action });
        }
        let combo = self.action_set.combination(action);
        match &self.dynamics {
            Dynamics::Pinned(pinned) => {
                let (pd, pr) = pinned.per_action.get(combo).copied().unwrap_or(pinned.default);
                Ok(TransitionProbabilities::new(pd, pr))
            }
            Dynamics::Cox { death, recurrence } => {
                let clocks = next_clocks(state, combo);
                let input = CovariateInput {
                    in_remission: state.health == HealthState::Remission,
                    treatment: combo,
                    prior_lines: clocks.prior_lines,
                    run_start_month: clocks.months_since_start + 1 - clocks.months_on_current,
                    demographics: &state.demographics,
                };
                let p_death = event_prob(death, &input, clocks.months_since_start)?;
                let p_remission = event_prob(recurrence, &input, clocks.months_on_current)?;
                Ok(TransitionProbabilities::new(p_death, p_remission))
            }
        }
    }

    /// Advances one month: death is drawn first, then remission among survivors.
    pub fn step(&self, state: &PatientState, action: usize, rng: &mut SimRng) -> Result<Transition> {
        let probs = self.transition_probs(state, action)?;
        let combo = self.action_set.combination(action);
        let clocks = next_clocks(state, combo);

        let mut capped = false;
        let health = if rng.random::<f64>() < probs.p_death {
            HealthState::Dead
        } else if clocks.months_since_start >= self.horizon_cap {
            capped = true;
            HealthState::Dead
        } else if rng.random::<f64>() < probs.p_remission {
            HealthState::Remission
        } else {
            HealthState::NeedsTreatment
        };
        let done = health == HealthState::Dead;
        let next_state = PatientState {
            health,
            months_since_start: clocks.months_since_start,
            months_on_current: clocks.months_on_current,
            prior_lines: clocks.prior_lines,
            current_combination: combo.clone(),
            demographics: state.demographics.clone(),
        };
        Ok(Transition {
            state: state.clone(),
            action,
            reward: if done { -1 } else { 1 },
            next_state,
            done,
            capped,
        })
    }

    /// Runs one patient from reset to death.
    pub fn run_episode<P: Policy + ?Sized>(&self, policy: &mut P, rng: &mut SimRng) -> Result<Episode> {
        policy.begin_episode();
        let mut state = self.reset(rng);
        let mut transitions = Vec::new();
        let mut survival_months = 0u32;
        loop {
            let legal = self.legal_actions(&state)?;
            let action = policy.select(&state, &legal, rng)?;
            if !legal.contains(&action) {
                return Err(Error::IllegalAction { action });
            }
            let transition = self.step(&state, action, rng)?;
            policy.observe(&transition);
            let done = transition.done;
            if !done {
                survival_months += 1;
                state = transition.next_state.clone();
            }
            transitions.push(transition);
            if done {
                break;
            }
        }
        Ok(Episode {
            transitions,
            survival_months,
            total_return: survival_months as i64 - 1,
        })
    }
}

fn event_prob(model: &CoxModel, input: &CovariateInput<'_>, t: u32) -> Result<f64> {
    let x = model.schema.encode(input)?;
    match model.conditional_event_prob(&x, t) {
        Err(Error::ZeroSurvival(_)) => Ok(1.0),
        other => other,
    }
}

/// Uniform choice among legal actions.
#[derive(Debug, Clone, Copy, Default)]
pub struct RandomPolicy;

impl Policy for RandomPolicy {
    fn select(&mut self, _state: &PatientState, legal: &[usize], rng: &mut SimRng) -> Result<usize> {
        if legal.is_empty() {
            return Err(Error::NoLegalActions);
        }
        Ok(legal[rng.random_range(0..legal.len())])
    }
}
