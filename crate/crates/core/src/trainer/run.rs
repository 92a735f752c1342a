use std::thread;

use super::checkpoint::{AgentSnapshot, TrainCheckpoint, TrainCounters, CHECKPOINT_VERSION};
use super::config::{AgentKind, TrainConfig};
use super::metrics::{MetricAccumulator, MetricsRow};
use crate::agents::{Agent, DqnAgent, NccnPolicy, NccnRegimens, StateEncoder};
use crate::error::{Error, Result};
use crate::mdp_env::{ActionSet, Environment, Episode, RandomPolicy};
use crate::rng::{stream, Purpose};

/// Receives every finished round and periodic checkpoints.
pub trait TrainSink {
    fn record(&mut self, row: &MetricsRow, episode: &Episode, actions: &ActionSet) -> Result<()>;

    fn checkpoint(&mut self, checkpoint: &TrainCheckpoint, is_final: bool) -> Result<()>;

    fn flush(&mut self) -> Result<()> {
        Ok(())
    }
}

/// Keeps rows and final checkpoints in memory.
#[derive(Debug, Default)]
pub struct MemorySink {
    pub rows: Vec<MetricsRow>,
    pub checkpoints: Vec<TrainCheckpoint>,
}

impl TrainSink for MemorySink {
    fn record(&mut self, row: &MetricsRow, _episode: &Episode, _actions: &ActionSet) -> Result<()> {
        self.rows.push(row.clone());
        Ok(())
    }

    fn checkpoint(&mut self, checkpoint: &TrainCheckpoint, _is_final: bool) -> Result<()> {
        self.checkpoints.push(checkpoint.clone());
        Ok(())
    }
}

/// A fresh agent of the configured kind for `env`.
pub fn build_agent(config: &TrainConfig, env: &Environment, regimens: Option<&NccnRegimens>) -> Result<Agent> {
    Ok(match config.agent {
        AgentKind::Dqn => {
            let encoder = StateEncoder::new(&env.action_set, &env.demographics);
            let mut rng = stream(config.seed, Purpose::Init, 0);
            Agent::Dqn(Box::new(DqnAgent::new(
                config.dqn,
                encoder,
                env.action_set.clone(),
                &mut rng,
            )))
        }
        AgentKind::Nccn => {
            let regimens = regimens
                .ok_or_else(|| Error::Config("the nccn agent needs a regimen list".into()))?;
            Agent::Nccn(NccnPolicy::new(regimens, &env.action_set)?)
        }
        AgentKind::Random => Agent::Random(RandomPolicy),
    })
}

/// Round loop state. Each round draws from its own seeded streams, so the
/// trajectory of a run depends only on the seed and the agent's state.
pub struct Trainer<'e> {
    pub config: TrainConfig,
    pub env: &'e Environment,
    pub agent: Agent,
    pub metrics: MetricAccumulator,
    pub counters: TrainCounters,
    next_round: u64,
}

impl<'e> Trainer<'e> {
    pub fn new(config: TrainConfig, env: &'e Environment, agent: Agent) -> Result<Self> {
        config.validate()?;
        check_agent(&agent, env)?;
        Ok(Trainer {
            metrics: MetricAccumulator::new(config.window),
            config,
            env,
            agent,
            counters: TrainCounters::default(),
            next_round: 0,
        })
    }

    /// Continues from a checkpoint; `config.rounds` may extend the original run.
    pub fn resume(config: TrainConfig, env: &'e Environment, checkpoint: &TrainCheckpoint) -> Result<Self> {
        config.validate()?;
        if checkpoint.action_set != env.action_set {
            return Err(Error::IncompatibleCheckpoint(
                "action set differs from the environment".into(),
            ));
        }
        let agent = checkpoint.agent.restore(&checkpoint.action_set)?;
        check_agent(&agent, env)?;
        Ok(Trainer {
            config,
            env,
            agent,
            metrics: checkpoint.metrics.clone(),
            counters: checkpoint.counters,
            next_round: checkpoint.next_round,
        })
    }

    pub fn next_round(&self) -> u64 {
        self.next_round
    }

    pub fn run_round(&mut self) -> Result<(MetricsRow, Episode)> {
        let round = self.next_round;
        let seed = self.config.seed;
        let epsilon = self.agent.as_dqn().map(DqnAgent::epsilon);
        let episode = self
            .env
            .run_episode(&mut self.agent, &mut stream(seed, Purpose::Episode, round))?;
        let mut loss = None;
        if let Some(dqn) = self.agent.as_dqn_mut() {
            for t in &episode.transitions {
                dqn.remember(t.clone());
            }
            self.counters.replay_pushes += episode.transitions.len() as u64;
            loss = Some(dqn.optimize(&mut stream(seed, Purpose::Optimize, round))?);
            self.counters.optimize_calls += 1;
            dqn.rounds_seen += 1;
        }
        let (sma, cma) = self.metrics.push(episode.survival_months);
        self.next_round += 1;
        let row = MetricsRow {
            round,
            survival_months: episode.survival_months,
            episode_return: episode.total_return,
            sma,
            cma,
            epsilon,
            loss,
        };
        Ok((row, episode))
    }

    pub fn checkpoint(&self) -> TrainCheckpoint {
        TrainCheckpoint {
            version: CHECKPOINT_VERSION,
            config: self.config.clone(),
            action_set: self.env.action_set.clone(),
            next_round: self.next_round,
            metrics: self.metrics.clone(),
            counters: self.counters,
            agent: AgentSnapshot::capture(&self.agent, self.config.checkpoint_replay),
        }
    }

    /// Runs until `config.rounds` rounds have completed and writes a final checkpoint.
    pub fn run<S: TrainSink + ?Sized>(&mut self, sink: &mut S) -> Result<TrainCheckpoint> {
        let period = self.config.checkpoint_period;
        while self.next_round < self.config.rounds {
            let (row, episode) = self.run_round()?;
            sink.record(&row, &episode, &self.env.action_set)?;
            if period > 0 && self.next_round % period == 0 && self.next_round < self.config.rounds {
                sink.flush()?;
                sink.checkpoint(&self.checkpoint(), false)?;
            }
        }
        sink.flush()?;
        let last = self.checkpoint();
        sink.checkpoint(&last, true)?;
        Ok(last)
    }
}

fn check_agent(agent: &Agent, env: &Environment) -> Result<()> {
    if let Some(dqn) = agent.as_dqn() {
        if dqn.action_set != env.action_set {
            return Err(Error::IncompatibleCheckpoint(
                "agent action set differs from the environment".into(),
            ));
        }
        if dqn.encoder != StateEncoder::new(&env.action_set, &env.demographics) {
            return Err(Error::IncompatibleCheckpoint(
                "agent state encoding differs from the environment".into(),
            ));
        }
    }
    Ok(())
}

/// Trains `agent` in `env` and returns the final checkpoint.
pub fn train<S: TrainSink + ?Sized>(
    config: TrainConfig,
    env: &Environment,
    agent: Agent,
    sink: &mut S,
) -> Result<TrainCheckpoint> {
    Trainer::new(config, env, agent)?.run(sink)
}

/// Greedy rollouts of a frozen agent; episode `i` uses stream `(seed, Evaluate, i)`.
pub fn evaluate(checkpoint: &TrainCheckpoint, env: &Environment, n: usize, seed: u64) -> Result<Vec<u32>> {
    evaluate_parallel(checkpoint, env, n, seed, 1)
}

/// As [`evaluate`], splitting episodes across `threads` workers. The result
/// does not depend on the thread count.
pub fn evaluate_parallel(
    checkpoint: &TrainCheckpoint,
    env: &Environment,
    n: usize,
    seed: u64,
    threads: usize,
) -> Result<Vec<u32>> {
    if checkpoint.action_set != env.action_set {
        return Err(Error::IncompatibleCheckpoint(
            "action set differs from the environment".into(),
        ));
    }
    let mut agent = checkpoint.agent.restore(&checkpoint.action_set)?;
    check_agent(&agent, env)?;
    if let Some(dqn) = agent.as_dqn_mut() {
        dqn.epsilon_override = Some(0.0);
    }
    let rollout = |agent: &mut Agent, range: std::ops::Range<usize>| -> Result<Vec<u32>> {
        range
            .map(|i| {
                env.run_episode(agent, &mut stream(seed, Purpose::Evaluate, i as u64))
                    .map(|e| e.survival_months)
            })
            .collect()
    };
    let threads = threads.clamp(1, n.max(1));
    if threads == 1 {
        return rollout(&mut agent, 0..n);
    }
    let chunk = n.div_ceil(threads);
    let parts: Vec<Result<Vec<u32>>> = thread::scope(|scope| {
        let handles: Vec<_> = (0..threads)
            .map(|k| {
                let mut local = agent.clone();
                let range = (k * chunk).min(n)..((k + 1) * chunk).min(n);
                let rollout = &rollout;
                scope.spawn(move || rollout(&mut local, range))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("evaluation worker panicked"))
            .collect()
    });
    let mut out = Vec::with_capacity(n);
    for part in parts {
        out.extend(part?);
    }
    Ok(out)
}
