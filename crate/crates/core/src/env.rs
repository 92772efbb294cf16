//! Daily single-asset trading simulator.
//!
//! The agent observes the feature row of day `k` and picks a position for
//! the next day. The step pays `position · r_{k+1} - cost`, where `r` is the
//! raw 1-day log return of the traded asset and the cost is either
//! `trades · trading_cost` (position changed) or `time_cost` (unchanged). NAVs
//! are running sums of rewards and of market returns, reset to zero with each
//! episode.

use std::io::Write;

use chrono::NaiveDate;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::market_data::FeatureFrame;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Action {
    Short = 0,
    Neutral = 1,
    Long = 2,
}

impl Action {
    pub const ALL: [Action; 3] = [Action::Short, Action::Neutral, Action::Long];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(index: usize) -> Option<Action> {
        Action::ALL.get(index).copied()
    }

    /// `-1`, `0` or `+1`.
    pub fn position(self) -> i32 {
        self as i32 - 1
    }

    pub fn from_position(position: i32) -> Option<Action> {
        usize::try_from(position + 1).ok().and_then(Action::from_index)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostModel {
    pub trading_cost: f64,
    pub time_cost: f64,
}

impl CostModel {
    /// 1 bp per trade, 0.1 bp per unchanged day.
    pub const PAPER: CostModel = CostModel {
        trading_cost: 1e-4,
        time_cost: 1e-5,
    };
    pub const NONE: CostModel = CostModel {
        trading_cost: 0.0,
        time_cost: 0.0,
    };
    /// 10 bp per trade, 1 bp per unchanged day.
    pub const HIGH: CostModel = CostModel {
        trading_cost: 1e-3,
        time_cost: 1e-4,
    };

    pub fn validate(&self) -> Result<()> {
        let ok = |c: f64| c.is_finite() && c >= 0.0;
        if ok(self.trading_cost) && ok(self.time_cost) {
            Ok(())
        } else {
            Err(Error::Config(format!("costs must be finite and >= 0: {self:?}")))
        }
    }

    /// Cost of moving from `from` to `to`, and the number of unit trades.
    pub fn charge(&self, from: i32, to: i32) -> (f64, u32) {
        let trades = from.abs_diff(to);
        if trades > 0 {
            (trades as f64 * self.trading_cost, trades)
        } else {
            (self.time_cost, 0)
        }
    }
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel::PAPER
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum StartMode {
    /// Uniform over all rows that leave room for a full episode.
    Random,
    Fixed(usize),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnvConfig {
    pub episode_length: usize,
    pub costs: CostModel,
    pub start_mode: StartMode,
}

impl Default for EnvConfig {
    fn default() -> Self {
        EnvConfig {
            episode_length: 252,
            costs: CostModel::PAPER,
            start_mode: StartMode::Random,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvState {
    pub t: usize,
    pub cursor: usize,
    pub position: i32,
    pub agent_nav: f64,
    pub market_nav: f64,
    pub trade_count: u32,
    pub cost_paid: f64,
    pub done: bool,
}

impl EnvState {
    fn at(cursor: usize) -> Self {
        EnvState {
            t: 0,
            cursor,
            position: 0,
            agent_nav: 0.0,
            market_nav: 0.0,
            trade_count: 0,
            cost_paid: 0.0,
            done: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepInfo {
    pub position: i32,
    /// Unit trades executed by this step.
    pub trades: u32,
    /// Cost charged by this step.
    pub cost: f64,
    pub market_return: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StepResult {
    pub observation: Vec<f64>,
    pub reward: f64,
    pub done: bool,
    pub info: StepInfo,
}

/// One row of an episode trace.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepRecord {
    pub step: usize,
    /// Date on which the market return was realized.
    pub date: NaiveDate,
    pub action: Action,
    pub position: i32,
    pub market_return: f64,
    pub cost: f64,
    pub reward: f64,
    pub agent_nav: f64,
    pub market_nav: f64,
}

pub struct TradingEnv<'a> {
    frame: &'a FeatureFrame,
    config: EnvConfig,
    state: EnvState,
    trace: Vec<StepRecord>,
}

impl<'a> TradingEnv<'a> {
    pub fn new(frame: &'a FeatureFrame, config: EnvConfig) -> Result<Self> {
        config.costs.validate()?;
        let too_short = || Error::FrameTooShort {
            rows: frame.len(),
            episode_length: config.episode_length,
        };
        if config.episode_length == 0 || frame.len() < config.episode_length + 1 {
            return Err(too_short());
        }
        if let StartMode::Fixed(start) = config.start_mode {
            if start + config.episode_length >= frame.len() {
                return Err(too_short());
            }
        }
        Ok(TradingEnv {
            frame,
            config,
            state: EnvState::at(0),
            trace: Vec::new(),
        })
    }

    pub fn config(&self) -> &EnvConfig {
        &self.config
    }

    pub fn frame(&self) -> &FeatureFrame {
        self.frame
    }

    pub fn state(&self) -> &EnvState {
        &self.state
    }

    pub fn trace(&self) -> &[StepRecord] {
        &self.trace
    }

    /// Largest admissible start row.
    pub fn last_start(&self) -> usize {
        self.frame.len() - 1 - self.config.episode_length
    }

    /// Starts a new episode: flat position, both NAVs at zero.
    pub fn reset<R: Rng + ?Sized>(&mut self, rng: &mut R) -> Vec<f64> {
        let start = match self.config.start_mode {
            StartMode::Fixed(start) => start,
            StartMode::Random => rng.random_range(0..=self.last_start()),
        };
        self.state = EnvState::at(start);
        self.trace.clear();
        self.frame.row(start).to_vec()
    }

    pub fn step(&mut self, action: Action) -> Result<StepResult> {
        if self.state.done {
            return Err(Error::EpisodeDone);
        }
        let s = &mut self.state;
        let new_pos = action.position();
        let (cost, trades) = self.config.costs.charge(s.position, new_pos);
        let next = s.cursor + 1;
        let market_return = self.frame.target_returns()[next];
        let reward = market_return * new_pos as f64 - cost;

        s.position = new_pos;
        s.agent_nav += reward;
        s.market_nav += market_return;
        s.trade_count += trades;
        s.cost_paid += cost;
        s.cursor = next;
        s.t += 1;
        s.done = s.t == self.config.episode_length;

        self.trace.push(StepRecord {
            step: s.t,
            date: self.frame.dates()[next],
            action,
            position: new_pos,
            market_return,
            cost,
            reward,
            agent_nav: s.agent_nav,
            market_nav: s.market_nav,
        });
        Ok(StepResult {
            observation: self.frame.row(next).to_vec(),
            reward,
            done: s.done,
            info: StepInfo {
                position: new_pos,
                trades,
                cost,
                market_return,
            },
        })
    }
}

/// Running sum.
pub fn cumulative(values: &[f64]) -> Vec<f64> {
    values
        .iter()
        .scan(0.0, |acc, v| {
            *acc += v;
            Some(*acc)
        })
        .collect()
}

/// Agent and market NAV curves of a trace.
pub fn nav_curves(trace: &[StepRecord]) -> (Vec<f64>, Vec<f64>) {
    let rewards: Vec<f64> = trace.iter().map(|r| r.reward).collect();
    let market: Vec<f64> = trace.iter().map(|r| r.market_return).collect();
    (cumulative(&rewards), cumulative(&market))
}

/// Writes `step,date,action,position,market_return,cost,reward,agent_nav,market_nav`.
pub fn write_trace_csv<W: Write>(trace: &[StepRecord], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([
        "step",
        "date",
        "action",
        "position",
        "market_return",
        "cost",
        "reward",
        "agent_nav",
        "market_nav",
    ])?;
    for r in trace {
        w.write_record([
            r.step.to_string(),
            r.date.format("%Y-%m-%d").to_string(),
            r.action.index().to_string(),
            r.position.to_string(),
            r.market_return.to_string(),
            r.cost.to_string(),
            r.reward.to_string(),
            r.agent_nav.to_string(),
            r.market_nav.to_string(),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

/// Parses a trace written by [`write_trace_csv`].
pub fn read_trace_csv<R: std::io::Read>(reader: R) -> Result<Vec<StepRecord>> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut out = Vec::new();
    for record in rdr.records() {
        let record = record?;
        let bad = |i: usize| Error::Config(format!("bad trace field `{}`", &record[i]));
        let num = |i: usize| record[i].parse::<f64>().map_err(|_| bad(i));
        let action = record[2]
            .parse::<usize>()
            .ok()
            .and_then(Action::from_index)
            .ok_or_else(|| bad(2))?;
        out.push(StepRecord {
            step: record[0].parse().map_err(|_| bad(0))?,
            date: NaiveDate::parse_from_str(&record[1], "%Y-%m-%d").map_err(|_| bad(1))?,
            action,
            position: record[3].parse().map_err(|_| bad(3))?,
            market_return: num(4)?,
            cost: num(5)?,
            reward: num(6)?,
            agent_nav: num(7)?,
            market_nav: num(8)?,
        });
    }
    Ok(out)
}
