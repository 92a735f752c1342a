use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::agents::{DqnConfig, DEFAULT_MIN_COUNT};
use crate::error::{Error, Result};
use crate::mdp_env::DEFAULT_HORIZON_CAP;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AgentKind {
    Dqn,
    Nccn,
    Random,
}

impl fmt::Display for AgentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AgentKind::Dqn => "dqn",
            AgentKind::Nccn => "nccn",
            AgentKind::Random => "random",
        })
    }
}

impl FromStr for AgentKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "dqn" => Ok(AgentKind::Dqn),
            "nccn" => Ok(AgentKind::Nccn),
            "random" => Ok(AgentKind::Random),
            other => Err(Error::Config(format!("unknown agent kind '{other}'"))),
        }
    }
}

pub const DEFAULT_CHECKPOINT_PERIOD: u64 = 10_000;
pub const DEFAULT_WINDOW: usize = 1_000;
pub const DEFAULT_FLUSH_EVERY: u64 = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub rounds: u64,
    pub seed: u64,
    /// Rounds between checkpoints; 0 keeps only the final one.
    pub checkpoint_period: u64,
    /// Moving-average window.
    pub window: usize,
    pub agent: AgentKind,
    pub restricted: bool,
    pub min_count: usize,
    pub flush_every: u64,
    pub horizon_cap: u32,
    /// Store replay contents in checkpoints so a resumed run is bit-identical.
    pub checkpoint_replay: bool,
    pub dqn: DqnConfig,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            rounds: 200_000,
            seed: 0,
            checkpoint_period: DEFAULT_CHECKPOINT_PERIOD,
            window: DEFAULT_WINDOW,
            agent: AgentKind::Dqn,
            restricted: false,
            min_count: DEFAULT_MIN_COUNT,
            flush_every: DEFAULT_FLUSH_EVERY,
            horizon_cap: DEFAULT_HORIZON_CAP,
            checkpoint_replay: true,
            dqn: DqnConfig::default(),
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        if self.rounds < 1 {
            return Err(Error::Config("rounds must be >= 1".into()));
        }
        if self.window < 1 {
            return Err(Error::Config("window must be >= 1".into()));
        }
        if self.horizon_cap < 1 {
            return Err(Error::Config("horizon_cap must be >= 1".into()));
        }
        let d = &self.dqn;
        if d.batch_size < 1 || d.replay_capacity < 1 || d.hidden_width < 1 {
            return Err(Error::Config(
                "batch_size, replay_capacity and hidden_width must be >= 1".into(),
            ));
        }
        if !(0.0..=1.0).contains(&d.gamma) {
            return Err(Error::Config("gamma must be in [0, 1]".into()));
        }
        if !(d.learning_rate > 0.0) {
            return Err(Error::Config("learning_rate must be positive".into()));
        }
        let e = &d.epsilon;
        if !(0.0 <= e.min && e.min <= e.start && e.start <= 1.0 && e.decay > 0.0 && e.decay <= 1.0) {
            return Err(Error::Config("epsilon schedule must satisfy 0 <= min <= start <= 1, 0 < decay <= 1".into()));
        }
        Ok(())
    }
}
