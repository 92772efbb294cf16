//! Double deep Q-learning agent.
//!
//! The online network picks the greedy next action, the target network
//! scores it:
//!
//! ```text
//! a* = argmax_a Q(s', a; online)
//! y  = r + γ · Q(s', a*; target)      (y = r at episode end)
//! ```
//!
//! The target network is a copy of the online one, refreshed every
//! `target_sync_every` gradient steps (or episodes, see [`SyncUnit`]).

use std::path::Path;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::env::Action;
use crate::nn::{AdamState, Matrix, NetConfig, NetParams, QNetwork};
use crate::{Error, Result};

mod replay;
mod schedule;

pub use replay::{ReplayBuffer, Transition, TransitionBatch};
pub use schedule::EpsilonSchedule;

pub const AGENT_CHECKPOINT_VERSION: u32 = 1;

/// What `target_sync_every` counts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SyncUnit {
    #[default]
    GradientSteps,
    Episodes,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AgentConfig {
    pub gamma: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub replay_capacity: usize,
    pub target_sync_every: u64,
    pub sync_unit: SyncUnit,
    /// Transitions required before the first update.
    pub warmup: usize,
    pub net: NetConfig,
}

impl AgentConfig {
    /// γ = 0.9, α = 1e-4, batch 4096, replay 1e6, sync every 100 steps.
    pub fn standard(input_dim: usize) -> Self {
        AgentConfig {
            gamma: 0.9,
            learning_rate: 1e-4,
            batch_size: 4096,
            replay_capacity: 1_000_000,
            target_sync_every: 100,
            sync_unit: SyncUnit::GradientSteps,
            warmup: 4096,
            net: NetConfig::standard(input_dim),
        }
    }

    /// Sets the batch size and the warmup that goes with it.
    pub fn with_batch_size(mut self, batch_size: usize) -> Self {
        self.batch_size = batch_size;
        self.warmup = batch_size;
        self
    }

    pub fn validate(&self) -> Result<()> {
        self.net.validate()?;
        let fail = |msg: String| Err(Error::Config(msg));
        if !(0.0..=1.0).contains(&self.gamma) {
            return fail(format!("gamma {} not in [0, 1]", self.gamma));
        }
        if !(self.learning_rate > 0.0 && self.learning_rate.is_finite()) {
            return fail(format!("learning rate {} must be positive", self.learning_rate));
        }
        if self.target_sync_every == 0 {
            return fail("target sync interval must be >= 1".into());
        }
        if self.batch_size == 0 || self.batch_size > self.replay_capacity {
            return fail(format!(
                "batch size {} must be in 1..={}",
                self.batch_size, self.replay_capacity
            ));
        }
        if self.warmup < self.batch_size {
            return fail(format!("warmup {} is smaller than the batch size", self.warmup));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TrainStep {
    /// Replay memory still below warmup.
    Skipped,
    Updated { loss: f64 },
}

/// Index of the largest value, lowest index on ties.
pub fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, v) in values.iter().enumerate().skip(1) {
        if *v > values[best] {
            best = i;
        }
    }
    best
}

#[derive(Debug, Clone)]
pub struct Agent {
    config: AgentConfig,
    online: QNetwork,
    target: QNetwork,
    adam: AdamState,
    buffer: ReplayBuffer,
    gradient_steps: u64,
    episodes: u64,
}

#[derive(Serialize, Deserialize)]
struct AgentRecord {
    version: u32,
    config: AgentConfig,
    online: NetParams,
    target: NetParams,
    adam: AdamState,
    gradient_steps: u64,
    episodes: u64,
}

impl Agent {
    pub fn new(config: AgentConfig) -> Result<Self> {
        config.validate()?;
        let online = QNetwork::new(config.net.clone())?;
        Ok(Agent::assemble(config, online))
    }

    /// Agent around an existing online network; the target starts as a copy.
    pub fn with_network(config: AgentConfig, online: QNetwork) -> Result<Self> {
        config.validate()?;
        if online.config() != &config.net {
            return Err(Error::Config("network does not match the agent's net config".into()));
        }
        Ok(Agent::assemble(config, online))
    }

    fn assemble(config: AgentConfig, online: QNetwork) -> Self {
        Agent {
            target: online.clone(),
            adam: AdamState::new(online.params()),
            buffer: ReplayBuffer::new(config.replay_capacity, config.net.input_dim),
            online,
            config,
            gradient_steps: 0,
            episodes: 0,
        }
    }

    pub fn config(&self) -> &AgentConfig {
        &self.config
    }

    pub fn online(&self) -> &QNetwork {
        &self.online
    }

    pub fn target(&self) -> &QNetwork {
        &self.target
    }

    /// Replaces the target network's parameters. Mainly for fixtures.
    pub fn set_target(&mut self, target: QNetwork) -> Result<()> {
        if target.config() != self.online.config() {
            return Err(Error::Config("target network shape differs from online".into()));
        }
        self.target = target;
        Ok(())
    }

    pub fn adam(&self) -> &AdamState {
        &self.adam
    }

    pub fn buffer(&self) -> &ReplayBuffer {
        &self.buffer
    }

    pub fn buffer_mut(&mut self) -> &mut ReplayBuffer {
        &mut self.buffer
    }

    pub fn gradient_steps(&self) -> u64 {
        self.gradient_steps
    }

    pub fn input_dim(&self) -> usize {
        self.online.input_dim()
    }

    pub fn q_values(&self, observation: &[f64]) -> Result<Vec<f64>> {
        let q = self.online.predict(&Matrix::from_rows(&[observation])?)?;
        Ok(q.row(0).to_vec())
    }

    pub fn greedy_action(&self, observation: &[f64]) -> Result<Action> {
        let q = self.q_values(observation)?;
        Ok(Action::from_index(argmax(&q)).expect("three outputs"))
    }

    /// ε-greedy: uniform random action with probability `epsilon`, otherwise
    /// the greedy one.
    pub fn select_action<R: Rng + ?Sized>(&self, observation: &[f64], epsilon: f64, rng: &mut R) -> Result<Action> {
        if rng.random::<f64>() < epsilon {
            let i = rng.random_range(0..Action::ALL.len());
            return Ok(Action::ALL[i]);
        }
        self.greedy_action(observation)
    }

    pub fn store(&mut self, transition: Transition) -> Result<()> {
        self.buffer.store(transition)
    }

    /// Double-Q regression targets for `batch`.
    pub fn compute_targets(&self, batch: &TransitionBatch) -> Result<Vec<f64>> {
        let q_online = self.online.predict(&batch.next_states)?;
        let q_target = self.target.predict(&batch.next_states)?;
        Ok((0..batch.len())
            .map(|i| {
                if batch.dones[i] {
                    batch.rewards[i]
                } else {
                    let best = argmax(q_online.row(i));
                    batch.rewards[i] + self.config.gamma * q_target.get(i, best)
                }
            })
            .collect())
    }

    /// One gradient update from a replay minibatch. `replay_rng` drives the
    /// sampling, `dropout_rng` the dropout masks.
    pub fn train_step<R1, R2>(&mut self, replay_rng: &mut R1, dropout_rng: &mut R2) -> Result<TrainStep>
    where
        R1: Rng + ?Sized,
        R2: Rng + ?Sized,
    {
        if self.buffer.len() < self.config.warmup {
            return Ok(TrainStep::Skipped);
        }
        let batch = self.buffer.sample(self.config.batch_size, replay_rng)?;
        let targets = self.compute_targets(&batch)?;
        let (loss, grads) = self
            .online
            .loss_and_grads(&batch.states, &batch.actions, &targets, dropout_rng)?;
        self.adam
            .step(self.online.params_mut(), &grads, self.config.learning_rate)?;
        self.gradient_steps += 1;
        if self.config.sync_unit == SyncUnit::GradientSteps
            && self.gradient_steps % self.config.target_sync_every == 0
        {
            self.sync_target();
        }
        Ok(TrainStep::Updated { loss })
    }

    /// Marks an episode boundary; syncs the target when counting episodes.
    pub fn end_episode(&mut self) {
        self.episodes += 1;
        if self.config.sync_unit == SyncUnit::Episodes && self.episodes % self.config.target_sync_every == 0 {
            self.sync_target();
        }
    }

    pub fn sync_target(&mut self) {
        self.target.copy_from(&self.online);
    }

    /// Networks, optimizer state and counters. The replay memory is not
    /// included; a restored agent starts with an empty buffer.
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string(&AgentRecord {
            version: AGENT_CHECKPOINT_VERSION,
            config: self.config.clone(),
            online: self.online.params().clone(),
            target: self.target.params().clone(),
            adam: self.adam.clone(),
            gradient_steps: self.gradient_steps,
            episodes: self.episodes,
        })?)
    }

    pub fn from_json(text: &str) -> Result<Agent> {
        let value: serde_json::Value =
            serde_json::from_str(text).map_err(|e| Error::CorruptCheckpoint(e.to_string()))?;
        crate::nn::checkpoint_version(&value, AGENT_CHECKPOINT_VERSION)?;
        let r: AgentRecord =
            serde_json::from_value(value).map_err(|e| Error::CorruptCheckpoint(e.to_string()))?;
        let corrupt = |e: Error| Error::CorruptCheckpoint(e.to_string());
        r.config.validate().map_err(corrupt)?;
        let online = QNetwork::from_parts(r.config.net.clone(), r.online).map_err(corrupt)?;
        let target = QNetwork::from_parts(r.config.net.clone(), r.target).map_err(corrupt)?;
        if r.adam.m.shapes() != online.params().shapes() || r.adam.v.shapes() != online.params().shapes() {
            return Err(Error::CorruptCheckpoint("optimizer state shape mismatch".into()));
        }
        Ok(Agent {
            buffer: ReplayBuffer::new(r.config.replay_capacity, r.config.net.input_dim),
            config: r.config,
            online,
            target,
            adam: r.adam,
            gradient_steps: r.gradient_steps,
            episodes: r.episodes,
        })
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        let path = path.as_ref();
        std::fs::write(path, self.to_json()?).map_err(|e| Error::io(path, e))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Agent> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Agent::from_json(&text)
    }
}
