use std::cell::Cell;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::encoder::StateEncoder;
use super::replay::{ReplayMemory, DEFAULT_REPLAY_CAPACITY};
use crate::error::{Error, Result};
use crate::mdp_env::{legal_actions, ActionSet, PatientState, Policy, Transition};
use crate::neural::{
    smooth_l1, Gradients, Mlp, RmsPropState, DEFAULT_HIDDEN_LAYERS, DEFAULT_HIDDEN_WIDTH,
    DEFAULT_LEARNING_RATE,
};
use crate::rng::SimRng;

/// Exponential decay with a floor: `max(min, start * decay^round)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EpsilonSchedule {
    pub start: f64,
    pub min: f64,
    pub decay: f64,
}

impl EpsilonSchedule {
    /// Reaches `min` exactly at `round`.
    pub fn reaching_floor_at(start: f64, min: f64, round: u64) -> Self {
        EpsilonSchedule {
            start,
            min,
            decay: (min / start).powf(1.0 / round as f64),
        }
    }

    pub fn epsilon(&self, round: u64) -> f64 {
        let raw = self.start * self.decay.powf(round as f64);
        raw.clamp(self.min, self.start)
    }
}

impl Default for EpsilonSchedule {
    fn default() -> Self {
        EpsilonSchedule::reaching_floor_at(0.9, 0.05, 50_000)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DqnConfig {
    pub hidden_width: usize,
    pub hidden_layers: usize,
    pub learning_rate: f64,
    pub gamma: f64,
    pub batch_size: usize,
    pub replay_capacity: usize,
    /// Optimizer calls between target-network syncs.
    pub target_sync: u64,
    pub epsilon: EpsilonSchedule,
}

impl Default for DqnConfig {
    fn default() -> Self {
        DqnConfig {
            hidden_width: DEFAULT_HIDDEN_WIDTH,
            hidden_layers: DEFAULT_HIDDEN_LAYERS,
            learning_rate: DEFAULT_LEARNING_RATE,
            gamma: 0.99,
            batch_size: 128,
            replay_capacity: DEFAULT_REPLAY_CAPACITY,
            target_sync: 10,
            epsilon: EpsilonSchedule::default(),
        }
    }
}

/// Deep Q-network agent with replay memory and a periodically synced target network.
#[derive(Debug, Clone)]
pub struct DqnAgent {
    pub config: DqnConfig,
    pub encoder: StateEncoder,
    pub action_set: ActionSet,
    pub online: Mlp,
    pub target: Mlp,
    pub optimizer: RmsPropState,
    pub replay: ReplayMemory,
    /// Completed training rounds; drives the ε schedule.
    pub rounds_seen: u64,
    pub optimize_calls: u64,
    /// Forces ε (e.g. 0 for greedy evaluation).
    pub epsilon_override: Option<f64>,
    target_evaluations: Cell<u64>,
}

impl DqnAgent {
    pub fn new(config: DqnConfig, encoder: StateEncoder, action_set: ActionSet, rng: &mut SimRng) -> Self {
        let online = Mlp::new(
            encoder.dim(),
            config.hidden_width,
            config.hidden_layers,
            action_set.len(),
            rng,
        );
        DqnAgent::from_parts(config, encoder, action_set, online)
    }

    /// Agent around a given online network; the target starts as a copy.
    pub fn from_parts(config: DqnConfig, encoder: StateEncoder, action_set: ActionSet, online: Mlp) -> Self {
        assert_eq!(online.input_dim(), encoder.dim(), "network input must match encoder");
        assert_eq!(online.output_dim(), action_set.len(), "network output must match action set");
        DqnAgent {
            optimizer: RmsPropState::new(&online, config.learning_rate),
            target: online.clone(),
            online,
            replay: ReplayMemory::new(config.replay_capacity),
            config,
            encoder,
            action_set,
            rounds_seen: 0,
            optimize_calls: 0,
            epsilon_override: None,
            target_evaluations: Cell::new(0),
        }
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon_override
            .unwrap_or_else(|| self.config.epsilon.epsilon(self.rounds_seen))
    }

    /// Number of target-network forward passes so far.
    pub fn target_evaluations(&self) -> u64 {
        self.target_evaluations.get()
    }

    pub fn q_values(&self, state: &PatientState) -> Result<Vec<f64>> {
        self.online.forward(&self.encoder.encode(state)?)
    }

    /// Greedy action over `legal`, lowest index on ties.
    pub fn greedy(&self, state: &PatientState, legal: &[usize]) -> Result<usize> {
        if legal.is_empty() {
            return Err(Error::NoLegalActions);
        }
        if legal.len() == 1 {
            return Ok(legal[0]);
        }
        let q = self.q_values(state)?;
        Ok(argmax_legal(&q, legal))
    }

    pub fn select_action(&self, state: &PatientState, legal: &[usize], rng: &mut SimRng) -> Result<usize> {
        if legal.is_empty() {
            return Err(Error::NoLegalActions);
        }
        if legal.len() == 1 {
            return Ok(legal[0]);
        }
        if rng.random::<f64>() < self.epsilon() {
            return Ok(legal[rng.random_range(0..legal.len())]);
        }
        self.greedy(state, legal)
    }

    /// `r` for terminal transitions, else `r + gamma * max_legal target(s')`.
    pub fn td_targets(&self, batch: &[Transition]) -> Result<Vec<f64>> {
        batch
            .iter()
            .map(|t| {
                let r = t.reward as f64;
                if t.done {
                    return Ok(r);
                }
                let legal = legal_actions(&t.next_state, &self.action_set)?;
                self.target_evaluations.set(self.target_evaluations.get() + 1);
                let q = self.target.forward(&self.encoder.encode(&t.next_state)?)?;
                let best = legal
                    .iter()
                    .map(|&a| q[a])
                    .fold(f64::NEG_INFINITY, f64::max);
                Ok(r + self.config.gamma * best)
            })
            .collect()
    }

    /// One gradient step on `batch`; returns the smooth-L1 loss before the step.
    pub fn optimize_on_batch(&mut self, batch: &[Transition]) -> Result<f64> {
        let targets = self.td_targets(batch)?;
        let mut caches = Vec::with_capacity(batch.len());
        let mut predictions = Vec::with_capacity(batch.len());
        for t in batch {
            let x = self.encoder.encode(&t.state)?;
            let cache = self.online.forward_cached(&x)?;
            predictions.push(cache.output()[t.action]);
            caches.push((x, cache));
        }
        let report = smooth_l1(&predictions, &targets)?;
        let mut grads = Gradients::zeros_like(&self.online);
        let mut upstream = vec![0.0; self.online.output_dim()];
        for ((t, (x, cache)), g) in batch.iter().zip(&caches).zip(&report.gradient) {
            upstream.iter_mut().for_each(|u| *u = 0.0);
            upstream[t.action] = *g;
            self.online.backward_into(cache, x, &upstream, &mut grads)?;
        }
        self.optimizer.step(&mut self.online, &grads);
        Ok(report.loss)
    }

    /// Samples a minibatch from replay, takes one optimizer step and syncs the
    /// target network every `target_sync` calls.
    pub fn optimize(&mut self, rng: &mut SimRng) -> Result<f64> {
        if self.replay.is_empty() {
            return Err(Error::EmptyReplay);
        }
        let batch = self.replay.sample(self.config.batch_size, rng);
        let loss = self.optimize_on_batch(&batch)?;
        self.optimize_calls += 1;
        if self.config.target_sync > 0 && self.optimize_calls % self.config.target_sync == 0 {
            self.sync_target();
        }
        Ok(loss)
    }

    /// Rebuilds an agent from checkpointed parts.
    #[allow(clippy::too_many_arguments)]
    pub fn restore(
        config: DqnConfig,
        encoder: StateEncoder,
        action_set: ActionSet,
        online: Mlp,
        target: Mlp,
        optimizer: RmsPropState,
        replay: ReplayMemory,
        rounds_seen: u64,
        optimize_calls: u64,
    ) -> Result<Self> {
        let dims = online.dims();
        if target.dims() != dims || dims[0] != encoder.dim() || *dims.last().unwrap() != action_set.len() {
            return Err(Error::IncompatibleCheckpoint(format!(
                "network dims {dims:?} do not match encoder ({}) and action set ({})",
                encoder.dim(),
                action_set.len()
            )));
        }
        Ok(DqnAgent {
            config,
            encoder,
            action_set,
            online,
            target,
            optimizer,
            replay,
            rounds_seen,
            optimize_calls,
            epsilon_override: None,
            target_evaluations: Cell::new(0),
        })
    }

    pub fn sync_target(&mut self) {
        self.target = self.online.clone();
    }

    pub fn remember(&mut self, t: Transition) {
        self.replay.push(t);
    }
}

pub(crate) fn argmax_legal(q: &[f64], legal: &[usize]) -> usize {
    let mut sorted = legal.to_vec();
    sorted.sort_unstable();
    let mut best = sorted[0];
    for &a in &sorted[1..] {
        if q[a] > q[best] {
            best = a;
        }
    }
    best
}

impl Policy for DqnAgent {
    fn select(&mut self, state: &PatientState, legal: &[usize], rng: &mut SimRng) -> Result<usize> {
        self.select_action(state, legal, rng)
    }
}
