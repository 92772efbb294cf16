mod common;

use ddqn_trader::env::{
    nav_curves, read_trace_csv, write_trace_csv, Action, CostModel, EnvConfig, EnvState, StartMode, StepRecord, TradingEnv,
};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn play(returns: &[f64], actions: &[Action], costs: CostModel) -> (Vec<StepRecord>, EnvState) {
    let frame = common::plain_frame(returns);
    let config = EnvConfig {
        episode_length: actions.len(),
        costs,
        start_mode: StartMode::Fixed(0),
    };
    let mut env = TradingEnv::new(&frame, config).unwrap();
    env.reset(&mut ChaCha8Rng::seed_from_u64(0));
    for a in actions {
        env.step(*a).unwrap();
    }
    (env.trace().to_vec(), *env.state())
}

#[test]
fn random_starts_stay_in_bounds() {
    let frame = common::plain_frame(&vec![0.001; 300]);
    let mut env = TradingEnv::new(&frame, EnvConfig::default()).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let mut seen = [false; 48];
    for _ in 0..10_000 {
        env.reset(&mut rng);
        let c = env.state().cursor;
        assert!(c <= 47);
        seen[c] = true;
    }
    assert!(seen.iter().all(|s| *s));
}

#[test]
fn short_frame_is_rejected() {
    let frame = common::plain_frame(&vec![0.0; 200]);
    assert!(TradingEnv::new(&frame, EnvConfig::default()).is_err());
}

#[test]
fn step_after_done_fails() {
    let frame = common::plain_frame(&[0.0, 0.01, 0.02]);
    let config = EnvConfig {
        episode_length: 2,
        costs: CostModel::NONE,
        start_mode: StartMode::Fixed(0),
    };
    let mut env = TradingEnv::new(&frame, config).unwrap();
    env.reset(&mut ChaCha8Rng::seed_from_u64(0));
    env.step(Action::Long).unwrap();
    env.step(Action::Long).unwrap();
    assert!(env.state().done);
    assert!(env.step(Action::Long).is_err());
}

#[test]
fn neutral_hold_pays_time_cost() {
    let (trace, _) = play(&[0.0, 0.0, 0.02], &[Action::Neutral, Action::Neutral], CostModel::PAPER);
    let last = trace[1];
    assert_eq!(last.reward, -1e-5);
    assert_eq!(last.market_return, 0.02);
}

#[test]
fn trace_csv_round_trip() {
    let returns = [0.0, 0.01, -0.02, 0.005];
    let (trace, _) = play(&returns, &[Action::Long, Action::Short, Action::Neutral], CostModel::PAPER);
    let mut buf = Vec::new();
    write_trace_csv(&trace, &mut buf).unwrap();
    assert!(String::from_utf8_lossy(&buf)
        .starts_with("step,date,action,position,market_return,cost,reward,agent_nav,market_nav\n"));
    assert_eq!(read_trace_csv(buf.as_slice()).unwrap(), trace);
}

fn action() -> impl Strategy<Value = Action> {
    (0usize..3).prop_map(|i| Action::ALL[i])
}

proptest! {
    #[test]
    fn nav_is_sum_of_rewards(
        returns in prop::collection::vec(-0.05f64..0.05, 2..60),
        seed_actions in prop::collection::vec(action(), 60),
        tc in 0.0f64..1e-3,
        hc in 0.0f64..1e-4,
    ) {
        let actions = &seed_actions[..returns.len() - 1];
        let costs = CostModel { trading_cost: tc, time_cost: hc };
        let (trace, state) = play(&returns, actions, costs);
        let sum: f64 = trace.iter().map(|r| r.reward).sum();
        prop_assert!((state.agent_nav - sum).abs() <= 1e-12);
        prop_assert_eq!(trace.len(), actions.len());
        prop_assert!(state.done);

        // total cost = trading cost per unit change + time cost per unchanged step
        let (mut units, mut holds, mut prev) = (0i32, 0, 0);
        for a in actions {
            let p = a.position();
            if p == prev { holds += 1 } else { units += (p - prev).abs() }
            prev = p;
        }
        let expected = tc * units as f64 + hc * holds as f64;
        prop_assert!((state.cost_paid - expected).abs() <= 1e-12);
        prop_assert_eq!(state.trade_count, units as u32);

        let (agent, market) = nav_curves(&trace);
        prop_assert_eq!(agent.len(), market.len());
    }

    #[test]
    fn long_and_short_mirror_the_market(returns in prop::collection::vec(-0.05f64..0.05, 2..60)) {
        let n = returns.len() - 1;
        let (long, _) = play(&returns, &vec![Action::Long; n], CostModel::NONE);
        let (short, _) = play(&returns, &vec![Action::Short; n], CostModel::NONE);
        let (l, m) = nav_curves(&long);
        let (s, _) = nav_curves(&short);
        prop_assert_eq!(&l, &m);
        for (x, y) in s.iter().zip(&m) {
            prop_assert_eq!(*x, -*y);
        }
    }

    #[test]
    fn stepping_is_deterministic(
        returns in prop::collection::vec(-0.05f64..0.05, 2..30),
        acts in prop::collection::vec(action(), 30),
    ) {
        let n = returns.len() - 1;
        let (a, _) = play(&returns, &acts[..n], CostModel::PAPER);
        let (b, _) = play(&returns, &acts[..n], CostModel::PAPER);
        prop_assert_eq!(a, b);
    }
}
