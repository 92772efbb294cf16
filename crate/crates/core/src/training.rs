//! Episode loop: ε-greedy interaction, replay, one gradient step per
//! environment step, and early stopping once the agent beats the market for
//! a run of consecutive episodes.

use std::io::Write;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::agent::{Agent, AgentConfig, EpsilonSchedule, Transition};
use crate::env::{Action, EnvConfig, TradingEnv};
use crate::market_data::FeatureFrame;
use crate::rng::{self, Stream, StreamRng};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TrainConfig {
    pub episodes: usize,
    pub env: EnvConfig,
    pub agent: AgentConfig,
    pub schedule: EpsilonSchedule,
    pub early_stop_streak: usize,
    pub ma_window: usize,
    pub seed: u64,
    pub checkpoint_path: Option<PathBuf>,
}

impl TrainConfig {
    /// 1000 episodes of 252 days, stop after 25 straight wins.
    pub fn standard(input_dim: usize) -> Self {
        TrainConfig::with_episodes(input_dim, 1000)
    }

    pub fn with_episodes(input_dim: usize, episodes: usize) -> Self {
        TrainConfig {
            episodes,
            env: EnvConfig::default(),
            agent: AgentConfig::standard(input_dim),
            schedule: EpsilonSchedule::new(episodes),
            early_stop_streak: 25,
            ma_window: 50,
            seed: 0,
            checkpoint_path: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.episodes == 0 || self.early_stop_streak == 0 || self.ma_window == 0 {
            return Err(Error::Config(
                "episodes, early_stop_streak and ma_window must be >= 1".into(),
            ));
        }
        self.env.costs.validate()?;
        self.agent.validate()
    }

    /// SHA-256 of the JSON form, hex encoded.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        Sha256::digest(json.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EpisodeRecord {
    /// 1-based.
    pub episode: usize,
    pub epsilon: f64,
    pub agent_nav: f64,
    pub market_nav: f64,
    /// Agent NAV strictly above market NAV.
    pub outperformed: bool,
    pub steps: usize,
    /// Cumulative gradient steps at episode end.
    pub gradient_steps: u64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Termination {
    Completed,
    EarlyStop { episode: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainLog {
    pub records: Vec<EpisodeRecord>,
    pub termination: Termination,
    pub config: TrainConfig,
}

impl TrainLog {
    pub fn total_steps(&self) -> usize {
        self.records.iter().map(|r| r.steps).sum()
    }

    /// `episode,epsilon,agent_nav,market_nav,outperformed`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["episode", "epsilon", "agent_nav", "market_nav", "outperformed"])?;
        for r in &self.records {
            w.write_record([
                r.episode.to_string(),
                r.epsilon.to_string(),
                r.agent_nav.to_string(),
                r.market_nav.to_string(),
                r.outperformed.to_string(),
            ])?;
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }

    pub fn summary_json(&self, wall_time_secs: f64) -> Result<String> {
        let last = self.records.last();
        let summary = serde_json::json!({
            "termination": self.termination,
            "episodes_run": self.records.len(),
            "total_steps": self.total_steps(),
            "gradient_steps": last.map_or(0, |r| r.gradient_steps),
            "final_agent_nav": last.map(|r| r.agent_nav),
            "final_market_nav": last.map(|r| r.market_nav),
            "wall_time_secs": wall_time_secs,
            "config_hash": self.config.hash(),
        });
        Ok(serde_json::to_string_pretty(&summary)?)
    }
}

/// Fraction of outperforming episodes over a trailing window; the first
/// `window - 1` entries average over the episodes seen so far.
pub fn outperformance_ma(records: &[EpisodeRecord], window: usize) -> Vec<f64> {
    let window = window.max(1);
    let mut wins = 0usize;
    records
        .iter()
        .enumerate()
        .map(|(k, r)| {
            wins += r.outperformed as usize;
            if k >= window {
                wins -= records[k - window].outperformed as usize;
            }
            wins as f64 / (k + 1).min(window) as f64
        })
        .collect()
}

/// Chooses the action taken in the environment during training.
pub trait Behavior {
    fn act(&mut self, agent: &Agent, observation: &[f64], epsilon: f64, rng: &mut StreamRng) -> Result<Action>;
}

/// The agent's own ε-greedy policy.
pub struct EpsilonGreedy;

impl Behavior for EpsilonGreedy {
    fn act(&mut self, agent: &Agent, observation: &[f64], epsilon: f64, rng: &mut StreamRng) -> Result<Action> {
        agent.select_action(observation, epsilon, rng)
    }
}

/// Fixed rule on the observation, ignoring the agent and ε.
pub struct Scripted<F>(pub F);

impl<F: FnMut(&[f64]) -> Action> Behavior for Scripted<F> {
    fn act(&mut self, _: &Agent, observation: &[f64], _: f64, _: &mut StreamRng) -> Result<Action> {
        Ok((self.0)(observation))
    }
}

pub struct TrainOutcome {
    pub log: TrainLog,
    pub agent: Agent,
}

pub fn run_training(config: &TrainConfig, frame: &FeatureFrame) -> Result<TrainOutcome> {
    run_training_with(config, frame, &mut EpsilonGreedy)
}

pub fn run_training_with(
    config: &TrainConfig,
    frame: &FeatureFrame,
    behavior: &mut dyn Behavior,
) -> Result<TrainOutcome> {
    config.validate()?;
    if frame.n_features() != config.agent.net.input_dim {
        return Err(Error::ShapeMismatch {
            expected: config.agent.net.input_dim,
            actual: frame.n_features(),
        });
    }
    let mut env = TradingEnv::new(frame, config.env)?;
    let mut agent_config = config.agent.clone();
    agent_config.net.seed = config.seed;
    let mut agent = Agent::new(agent_config)?;

    let mut start_rng = rng::stream(config.seed, Stream::EnvStart);
    let mut explore_rng = rng::stream(config.seed, Stream::Exploration);
    let mut dropout_rng = rng::stream(config.seed, Stream::Dropout);
    let mut replay_rng = rng::stream(config.seed, Stream::Replay);

    let mut records = Vec::with_capacity(config.episodes);
    let mut streak = 0;
    let mut termination = Termination::Completed;
    for episode in 1..=config.episodes {
        let epsilon = config.schedule.epsilon_at(episode);
        let mut observation = env.reset(&mut start_rng);
        loop {
            let action = behavior.act(&agent, &observation, epsilon, &mut explore_rng)?;
            let result = env.step(action)?;
            agent.store(Transition {
                state: std::mem::take(&mut observation),
                action,
                reward: result.reward,
                next_state: result.observation.clone(),
                done: result.done,
            })?;
            agent
                .train_step(&mut replay_rng, &mut dropout_rng)
                .map_err(|e| Error::Diverged {
                    episode,
                    source: Box::new(e),
                })?;
            observation = result.observation;
            if result.done {
                break;
            }
        }
        agent.end_episode();

        let state = env.state();
        let outperformed = state.agent_nav > state.market_nav;
        records.push(EpisodeRecord {
            episode,
            epsilon,
            agent_nav: state.agent_nav,
            market_nav: state.market_nav,
            outperformed,
            steps: state.t,
            gradient_steps: agent.gradient_steps(),
        });
        streak = if outperformed { streak + 1 } else { 0 };
        if streak >= config.early_stop_streak {
            termination = Termination::EarlyStop { episode };
            break;
        }
    }

    if let Some(path) = &config.checkpoint_path {
        agent.save(path)?;
    }
    Ok(TrainOutcome {
        log: TrainLog {
            records,
            termination,
            config: config.clone(),
        },
        agent,
    })
}
