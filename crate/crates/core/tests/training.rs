mod common;

use ddqn_trader::agent::Agent;
use ddqn_trader::env::{Action, CostModel};
use ddqn_trader::market_data::FeatureFrame;
use ddqn_trader::rng::StreamRng;
use ddqn_trader::training::{outperformance_ma, run_training, run_training_with, Behavior, Scripted, Termination, TrainConfig};
use ddqn_trader::Result;
use proptest::prelude::*;

fn alternating(n: usize) -> Vec<f64> {
    (0..n).map(|i| if i % 2 == 0 { 0.01 } else { -0.01 }).collect()
}

fn quick(episodes: usize, t: usize) -> TrainConfig {
    let mut config = TrainConfig::with_episodes(2, episodes);
    config.agent = config.agent.with_batch_size(16);
    config.agent.net.hidden_dims = vec![8, 8];
    config.env.episode_length = t;
    config.env.costs = CostModel::NONE;
    config
}

#[test]
fn ties_never_count_as_outperformance() {
    let frame = common::plain_frame(&[0.01; 40]);
    let config = quick(3, 10);
    let outcome = run_training_with(&config, &frame, &mut Scripted(|_: &[f64]| Action::Long)).unwrap();
    assert_eq!(outcome.log.termination, Termination::Completed);
    assert_eq!(outcome.log.records.len(), 3);
    assert!(outcome.log.records.iter().all(|r| !r.outperformed && r.agent_nav == r.market_nav));
}

#[test]
fn records_follow_the_schedule_and_step_count() {
    let frame = common::plain_frame(&alternating(60));
    let config = quick(6, 12);
    let outcome = run_training(&config, &frame).unwrap();
    assert_eq!(outcome.log.records.len(), 6);
    assert_eq!(outcome.log.total_steps(), 6 * 12);
    for r in &outcome.log.records {
        assert_eq!(r.epsilon, config.schedule.epsilon_at(r.episode));
        assert_eq!(r.steps, 12);
    }
    // warmup of 16 transitions, then one update per step
    assert_eq!(outcome.log.records.last().unwrap().gradient_steps, 6 * 12 - 15);
}

#[test]
fn identical_runs_give_identical_logs() {
    let frame = common::plain_frame(&alternating(80));
    let config = quick(5, 20);
    let csv = || {
        let mut buf = Vec::new();
        run_training(&config, &frame).unwrap().log.write_csv(&mut buf).unwrap();
        buf
    };
    let a = csv();
    assert_eq!(a, csv());
    assert!(String::from_utf8(a).unwrap().starts_with("episode,epsilon,agent_nav,market_nav,outperformed\n"));
}

#[test]
fn seeds_change_the_run() {
    let frame = common::plain_frame(&alternating(80));
    let mut a = quick(4, 20);
    let mut b = a.clone();
    a.seed = 1;
    b.seed = 2;
    let la = run_training(&a, &frame).unwrap().log.records;
    let lb = run_training(&b, &frame).unwrap().log.records;
    assert_ne!(la, lb);
}

#[test]
fn checkpoint_is_written_and_loads() {
    let dir = tempfile::tempdir().unwrap();
    let frame = common::plain_frame(&alternating(60));
    let mut config = quick(2, 20);
    config.checkpoint_path = Some(dir.path().join("agent.json"));
    let outcome = run_training(&config, &frame).unwrap();
    let loaded = Agent::load(dir.path().join("agent.json")).unwrap();
    assert_eq!(loaded.online().params(), outcome.agent.online().params());
}

#[test]
fn width_mismatch_is_rejected() {
    let frame = common::plain_frame(&alternating(60));
    let mut config = quick(2, 20);
    config.agent.net.input_dim = 4;
    assert!(run_training(&config, &frame).is_err());
}

/// Beats or trails the market episode by episode according to `plan`.
struct Planned {
    plan: Vec<bool>,
    steps_per_episode: usize,
    calls: usize,
}

impl Behavior for Planned {
    fn act(&mut self, _: &Agent, obs: &[f64], _: f64, _: &mut StreamRng) -> Result<Action> {
        let win = self.plan[self.calls / self.steps_per_episode];
        self.calls += 1;
        let up = obs[0] > 0.0;
        Ok(if up == win { Action::Long } else { Action::Short })
    }
}

fn run_plan(frame: &FeatureFrame, plan: Vec<bool>, streak: usize) -> (Termination, usize) {
    let mut config = quick(plan.len(), 10);
    config.early_stop_streak = streak;
    let mut behavior = Planned {
        plan,
        steps_per_episode: 10,
        calls: 0,
    };
    let log = run_training_with(&config, frame, &mut behavior).unwrap().log;
    (log.termination, log.records.len())
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 40, ..ProptestConfig::default() })]

    #[test]
    fn early_stop_fires_at_the_first_full_streak(plan in prop::collection::vec(any::<bool>(), 1..30), streak in 1usize..5) {
        let frame = common::lookahead_frame(&alternating(40));
        let mut run = 0;
        let expected = plan.iter().position(|w| {
            run = if *w { run + 1 } else { 0 };
            run >= streak
        });
        let (termination, episodes) = run_plan(&frame, plan.clone(), streak);
        match expected {
            Some(k) => {
                prop_assert_eq!(termination, Termination::EarlyStop { episode: k + 1 });
                prop_assert_eq!(episodes, k + 1);
            }
            None => {
                prop_assert_eq!(termination, Termination::Completed);
                prop_assert_eq!(episodes, plan.len());
            }
        }
    }
}

#[test]
fn moving_average_on_a_run() {
    let frame = common::lookahead_frame(&alternating(40));
    let plan: Vec<bool> = (0..12).map(|k| k % 3 != 0).collect();
    let mut config = quick(12, 10);
    config.ma_window = 3;
    let mut behavior = Planned {
        plan: plan.clone(),
        steps_per_episode: 10,
        calls: 0,
    };
    let log = run_training_with(&config, &frame, &mut behavior).unwrap().log;
    let outs: Vec<bool> = log.records.iter().map(|r| r.outperformed).collect();
    assert_eq!(outs, plan);
    let ma = outperformance_ma(&log.records, 3);
    assert_eq!(ma[0], 0.0);
    assert_eq!(ma[1], 0.5);
    assert!(ma[2..].iter().all(|v| (*v - 2.0 / 3.0).abs() < 1e-15));
}

#[test]
fn summary_carries_termination_and_hash() {
    let frame = common::plain_frame(&alternating(60));
    let config = quick(2, 20);
    let log = run_training(&config, &frame).unwrap().log;
    let summary: serde_json::Value = serde_json::from_str(&log.summary_json(1.5).unwrap()).unwrap();
    assert_eq!(summary["termination"], "completed");
    assert_eq!(summary["config_hash"], config.hash());
    assert_eq!(summary["wall_time_secs"], 1.5);
}
