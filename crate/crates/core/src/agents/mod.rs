//! Action-selection policies for the treatment MDP.

mod dqn;
mod encoder;
mod nccn;
mod replay;
mod restrict;

pub use dqn::{DqnAgent, DqnConfig, EpsilonSchedule};
pub use encoder::StateEncoder;
pub use nccn::{NccnPolicy, NccnRegimens};
pub use replay::{ReplayMemory, DEFAULT_REPLAY_CAPACITY};
pub use restrict::{restrict_actions, RestrictedActions, DEFAULT_MIN_COUNT};

use crate::error::Result;
use crate::mdp_env::{PatientState, Policy, RandomPolicy, Transition};
use crate::rng::SimRng;

/// Regimens shipped with the crate.
pub const DEFAULT_NCCN_REGIMENS: &str = include_str!("../../data/nccn_regimens.txt");

/// Any of the trainable or baseline agents.
#[derive(Debug, Clone)]
pub enum Agent {
    Dqn(Box<DqnAgent>),
    Nccn(NccnPolicy),
    Random(RandomPolicy),
}

impl Agent {
    pub fn as_dqn(&self) -> Option<&DqnAgent> {
        match self {
            Agent::Dqn(a) => Some(a),
            _ => None,
        }
    }

    pub fn as_dqn_mut(&mut self) -> Option<&mut DqnAgent> {
        match self {
            Agent::Dqn(a) => Some(a),
            _ => None,
        }
    }

    fn inner(&mut self) -> &mut dyn Policy {
        match self {
            Agent::Dqn(a) => a.as_mut(),
            Agent::Nccn(p) => p,
            Agent::Random(p) => p,
        }
    }
}

impl Policy for Agent {
    fn begin_episode(&mut self) {
        self.inner().begin_episode()
    }

    fn select(&mut self, state: &PatientState, legal: &[usize], rng: &mut SimRng) -> Result<usize> {
        self.inner().select(state, legal, rng)
    }

    fn observe(&mut self, transition: &Transition) {
        self.inner().observe(transition)
    }
}
