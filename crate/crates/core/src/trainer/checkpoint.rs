use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use super::config::TrainConfig;
use super::metrics::MetricAccumulator;
use crate::agents::{Agent, DqnAgent, DqnConfig, NccnPolicy, ReplayMemory, StateEncoder};
use crate::error::{Error, Result};
use crate::mdp_env::{ActionSet, RandomPolicy};
use crate::neural::{Mlp, RmsPropState};

pub const CHECKPOINT_VERSION: u32 = 1;

/// Activity counters; zero for agents that do not learn.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct TrainCounters {
    pub replay_pushes: u64,
    pub optimize_calls: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DqnSnapshot {
    pub config: DqnConfig,
    pub encoder: StateEncoder,
    pub online: Mlp,
    pub target: Mlp,
    pub optimizer: RmsPropState,
    pub rounds_seen: u64,
    pub optimize_calls: u64,
    pub epsilon: f64,
    pub replay_len: usize,
    pub replay: Option<ReplayMemory>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum AgentSnapshot {
    Dqn(Box<DqnSnapshot>),
    Nccn(NccnPolicy),
    Random,
}

/// Everything needed to evaluate a trained agent or continue its training.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainCheckpoint {
    pub version: u32,
    pub config: TrainConfig,
    pub action_set: ActionSet,
    /// Index of the next round to run.
    pub next_round: u64,
    pub metrics: MetricAccumulator,
    pub counters: TrainCounters,
    pub agent: AgentSnapshot,
}

impl AgentSnapshot {
    pub fn capture(agent: &Agent, with_replay: bool) -> Self {
        match agent {
            Agent::Dqn(a) => AgentSnapshot::Dqn(Box::new(DqnSnapshot {
                config: a.config,
                encoder: a.encoder.clone(),
                online: a.online.clone(),
                target: a.target.clone(),
                optimizer: a.optimizer.clone(),
                rounds_seen: a.rounds_seen,
                optimize_calls: a.optimize_calls,
                epsilon: a.epsilon(),
                replay_len: a.replay.len(),
                replay: with_replay.then(|| a.replay.clone()),
            })),
            Agent::Nccn(p) => AgentSnapshot::Nccn(p.clone()),
            Agent::Random(_) => AgentSnapshot::Random,
        }
    }

    pub fn restore(&self, action_set: &ActionSet) -> Result<Agent> {
        Ok(match self {
            AgentSnapshot::Dqn(s) => {
                let replay = s
                    .replay
                    .clone()
                    .unwrap_or_else(|| ReplayMemory::new(s.config.replay_capacity));
                Agent::Dqn(Box::new(DqnAgent::restore(
                    s.config,
                    s.encoder.clone().ready(),
                    action_set.clone(),
                    s.online.clone(),
                    s.target.clone(),
                    s.optimizer.clone(),
                    replay,
                    s.rounds_seen,
                    s.optimize_calls,
                )?))
            }
            AgentSnapshot::Nccn(p) => Agent::Nccn(p.clone()),
            AgentSnapshot::Random => Agent::Random(RandomPolicy),
        })
    }
}

impl TrainCheckpoint {
    pub fn to_json_writer<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer(writer, self)?;
        Ok(())
    }

    pub fn from_json_reader<R: Read>(reader: R) -> Result<Self> {
        let ckpt: TrainCheckpoint = serde_json::from_reader(reader)?;
        if ckpt.version != CHECKPOINT_VERSION {
            return Err(Error::IncompatibleCheckpoint(format!(
                "checkpoint version {} (expected {CHECKPOINT_VERSION})",
                ckpt.version
            )));
        }
        Ok(ckpt)
    }
}
