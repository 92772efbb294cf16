//! Out-of-sample evaluation.
//!
//! The trained agent trades the test window once, greedily. Its daily rewards
//! give annualized E(R), std(R) and Sharpe; its actions are scored against the
//! hindsight-optimal action path, which a dynamic program finds under the same
//! cost accounting as the environment.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::agent::Agent;
use crate::env::{cumulative, Action, CostModel, EnvConfig, StartMode, StepRecord, TradingEnv};
use crate::market_data::{FeatureFrame, TRADING_DAYS};
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct BacktestResult {
    /// Date each step's market return was realized.
    pub dates: Vec<NaiveDate>,
    pub actions: Vec<Action>,
    pub positions: Vec<i32>,
    pub rewards: Vec<f64>,
    pub market_returns: Vec<f64>,
    pub costs: Vec<f64>,
    pub agent_nav: Vec<f64>,
    pub market_nav: Vec<f64>,
}

impl BacktestResult {
    pub fn len(&self) -> usize {
        self.rewards.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rewards.is_empty()
    }

    pub fn from_trace(trace: &[StepRecord]) -> Self {
        let rewards: Vec<f64> = trace.iter().map(|r| r.reward).collect();
        let market_returns: Vec<f64> = trace.iter().map(|r| r.market_return).collect();
        BacktestResult {
            dates: trace.iter().map(|r| r.date).collect(),
            actions: trace.iter().map(|r| r.action).collect(),
            positions: trace.iter().map(|r| r.position).collect(),
            costs: trace.iter().map(|r| r.cost).collect(),
            agent_nav: cumulative(&rewards),
            market_nav: cumulative(&market_returns),
            rewards,
            market_returns,
        }
    }

    /// Position times market return, before costs.
    pub fn gross_returns(&self) -> Vec<f64> {
        self.positions
            .iter()
            .zip(&self.market_returns)
            .map(|(p, r)| *p as f64 * r)
            .collect()
    }
}

/// Steps `policy` once through the whole frame, starting flat at row 0.
/// Returns the result and the raw step trace.
pub fn run_policy<F>(frame: &FeatureFrame, costs: CostModel, mut policy: F) -> Result<(BacktestResult, Vec<StepRecord>)>
where
    F: FnMut(&[f64]) -> Result<Action>,
{
    let config = EnvConfig {
        episode_length: frame.len().saturating_sub(1),
        costs,
        start_mode: StartMode::Fixed(0),
    };
    let mut env = TradingEnv::new(frame, config)?;
    let mut observation = env.reset(&mut crate::rng::stream(0, crate::rng::Stream::EnvStart));
    loop {
        let step = env.step(policy(&observation)?)?;
        observation = step.observation;
        if step.done {
            break;
        }
    }
    let trace = env.trace().to_vec();
    Ok((BacktestResult::from_trace(&trace), trace))
}

/// Greedy single pass of `agent` over `frame`. No learning happens.
pub fn run_backtest(agent: &Agent, frame: &FeatureFrame, costs: CostModel) -> Result<BacktestResult> {
    Ok(run_backtest_traced(agent, frame, costs)?.0)
}

pub fn run_backtest_traced(
    agent: &Agent,
    frame: &FeatureFrame,
    costs: CostModel,
) -> Result<(BacktestResult, Vec<StepRecord>)> {
    if agent.input_dim() != frame.n_features() {
        return Err(Error::ShapeMismatch {
            expected: agent.input_dim(),
            actual: frame.n_features(),
        });
    }
    run_policy(frame, costs, |obs| agent.greedy_action(obs))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnualizedMetrics {
    pub e_r: f64,
    pub std_r: f64,
    /// `None` when `std_r` is zero.
    pub sharpe: Option<f64>,
}

/// `E(R) = 252 · mean`, `std(R) = sqrt(252) · sample std`, Sharpe with a zero
/// risk-free rate.
pub fn annualized_metrics(daily: &[f64]) -> Result<AnnualizedMetrics> {
    if daily.len() < 2 {
        return Err(Error::TooFewObservations {
            needed: 2,
            got: daily.len(),
        });
    }
    let n = daily.len() as f64;
    let mean = daily.iter().sum::<f64>() / n;
    let std = if daily.iter().all(|x| *x == daily[0]) {
        0.0
    } else {
        (daily.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    };
    let e_r = TRADING_DAYS * mean;
    let std_r = TRADING_DAYS.sqrt() * std;
    Ok(AnnualizedMetrics {
        e_r,
        std_r,
        sharpe: (std_r > 0.0).then(|| e_r / std_r),
    })
}

/// Total reward of an action path under the environment's accounting,
/// starting flat. `returns[t]` is the return earned by `actions[t]`.
pub fn sequence_reward(actions: &[Action], returns: &[f64], costs: CostModel) -> f64 {
    let mut position = 0;
    let mut total = 0.0;
    for (a, r) in actions.iter().zip(returns) {
        let (cost, _) = costs.charge(position, a.position());
        position = a.position();
        total += r * position as f64 - cost;
    }
    total
}

/// Hindsight-optimal actions for the realized `returns`.
///
/// Backward induction over the three positions; the path starts flat. Among
/// equally good choices Neutral wins, then the lower position.
pub fn oracle_actions(returns: &[f64], costs: CostModel) -> Vec<Action> {
    const PREFERENCE: [Action; 3] = [Action::Neutral, Action::Short, Action::Long];
    let n = returns.len();
    let mut value = [0.0f64; 3];
    let mut choice = vec![[Action::Neutral; 3]; n];
    for t in (0..n).rev() {
        let mut next_value = [0.0; 3];
        for prev in Action::ALL {
            let mut best = f64::NEG_INFINITY;
            for a in PREFERENCE {
                let (cost, _) = costs.charge(prev.position(), a.position());
                let v = returns[t] * a.position() as f64 - cost + value[a.index()];
                if v > best {
                    best = v;
                    choice[t][prev.index()] = a;
                }
            }
            next_value[prev.index()] = best;
        }
        value = next_value;
    }
    let mut prev = Action::Neutral;
    choice
        .iter()
        .map(|c| {
            prev = c[prev.index()];
            prev
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ActionScore {
    pub mse: f64,
    pub accuracy: f64,
}

/// Mean squared difference of action codes and fraction of exact matches.
pub fn score_actions(actions: &[Action], oracle: &[Action]) -> Result<ActionScore> {
    if actions.len() != oracle.len() {
        return Err(Error::LengthMismatch {
            left: actions.len(),
            right: oracle.len(),
        });
    }
    if actions.is_empty() {
        return Err(Error::TooFewObservations { needed: 1, got: 0 });
    }
    let n = actions.len() as f64;
    let (mut sq, mut hits) = (0.0, 0usize);
    for (a, o) in actions.iter().zip(oracle) {
        sq += (a.index() as f64 - o.index() as f64).powi(2);
        hits += (a == o) as usize;
    }
    Ok(ActionScore {
        mse: sq / n,
        accuracy: hits as f64 / n,
    })
}

/// Which daily series feeds E(R) and std(R).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ReturnBasis {
    /// Rewards, i.e. net of trading and time costs.
    #[default]
    Net,
    Gross,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PerformanceReport {
    pub model: String,
    pub e_r: f64,
    pub std_r: f64,
    pub sharpe: Option<f64>,
    pub mse: f64,
    pub accuracy: f64,
    pub n_days: usize,
}

impl PerformanceReport {
    fn build(model: &str, daily: &[f64], actions: &[Action], oracle: &[Action]) -> Result<Self> {
        let m = annualized_metrics(daily)?;
        let s = score_actions(actions, oracle)?;
        Ok(PerformanceReport {
            model: model.to_string(),
            e_r: m.e_r,
            std_r: m.std_r,
            sharpe: m.sharpe,
            mse: s.mse,
            accuracy: s.accuracy,
            n_days: daily.len(),
        })
    }
}

/// Metrics of a backtest, scored against the oracle for the same window.
pub fn performance_report(
    model: &str,
    result: &BacktestResult,
    costs: CostModel,
    basis: ReturnBasis,
) -> Result<PerformanceReport> {
    let oracle = oracle_actions(&result.market_returns, costs);
    let daily = match basis {
        ReturnBasis::Net => result.rewards.clone(),
        ReturnBasis::Gross => result.gross_returns(),
    };
    PerformanceReport::build(model, &daily, &result.actions, &oracle)
}

/// Long-and-hold benchmark on the same window: raw market returns, scored as
/// a constant Long action path.
pub fn market_report(result: &BacktestResult, costs: CostModel) -> Result<PerformanceReport> {
    let oracle = oracle_actions(&result.market_returns, costs);
    let longs = vec![Action::Long; result.len()];
    PerformanceReport::build("market", &result.market_returns, &longs, &oracle)
}

fn fixed6(x: f64) -> String {
    let s = format!("{x:.6}");
    if s == "-0.000000" {
        "0.000000".into()
    } else {
        s
    }
}

/// Report rows as a JSON array with sorted keys and six decimals.
pub fn report_json(rows: &[PerformanceReport]) -> String {
    let mut out = String::from("[\n");
    for (i, r) in rows.iter().enumerate() {
        let sharpe = r.sharpe.map_or_else(|| "null".to_string(), fixed6);
        let model = serde_json::to_string(&r.model).expect("string serializes");
        out.push_str(&format!(
            "  {{\"accuracy\": {}, \"e_r\": {}, \"model\": {}, \"mse\": {}, \"n_days\": {}, \"sharpe\": {}, \"std_r\": {}}}",
            fixed6(r.accuracy),
            fixed6(r.e_r),
            model,
            fixed6(r.mse),
            r.n_days,
            sharpe,
            fixed6(r.std_r),
        ));
        out.push_str(if i + 1 < rows.len() { ",\n" } else { "\n" });
    }
    out.push_str("]\n");
    out
}

pub fn parse_report_json(text: &str) -> Result<Vec<PerformanceReport>> {
    Ok(serde_json::from_str(text)?)
}

/// One labelled NAV curve.
#[derive(Debug, Clone, PartialEq)]
pub struct NavCurve {
    pub model: String,
    pub dates: Vec<NaiveDate>,
    pub nav: Vec<f64>,
}

/// `date,model,nav`, curves in the given order.
pub fn write_nav_csv<W: Write>(curves: &[NavCurve], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["date", "model", "nav"])?;
    for c in curves {
        for (d, v) in c.dates.iter().zip(&c.nav) {
            w.write_record([d.format("%Y-%m-%d").to_string(), c.model.clone(), fixed6(*v)])?;
        }
    }
    w.flush().map_err(|e| Error::io("<csv writer>", e))?;
    Ok(())
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReportFiles {
    pub report: PathBuf,
    pub navs: PathBuf,
}

/// Writes `report.json` and `nav.csv` into `dir`.
pub fn emit_report(rows: &[PerformanceReport], curves: &[NavCurve], dir: &Path) -> Result<ReportFiles> {
    if rows.is_empty() {
        return Err(Error::Config("a report needs at least one row".into()));
    }
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let report = dir.join("report.json");
    fs::write(&report, report_json(rows)).map_err(|e| Error::io(&report, e))?;
    let navs = dir.join("nav.csv");
    let mut buf = Vec::new();
    write_nav_csv(curves, &mut buf)?;
    fs::write(&navs, buf).map_err(|e| Error::io(&navs, e))?;
    Ok(ReportFiles { report, navs })
}
