//! Fixtures and independent oracles shared by the integration tests.
#![allow(dead_code)]

use chrono::{Duration, NaiveDate};
use ddqn_trader::env::{Action, CostModel};
use ddqn_trader::market_data::{build_features, synth_generate, Asset, FeatureFrame, FeatureOptions, ModelId, Regime, SynthSpec};
use ddqn_trader::nn::{Matrix, QNetwork};
use rand::Rng;
use std::collections::HashMap;

pub fn day(i: usize) -> NaiveDate {
    NaiveDate::from_ymd_opt(2020, 1, 1).unwrap() + Duration::days(i as i64)
}

/// M0 frame with the given feature rows and target returns.
pub fn frame(rows: Vec<Vec<f64>>, returns: &[f64]) -> FeatureFrame {
    let dates = (0..returns.len()).map(day).collect();
    FeatureFrame::new(ModelId::M0, dates, rows, returns.to_vec()).unwrap()
}

/// M0 frame whose features are the returns themselves.
pub fn plain_frame(returns: &[f64]) -> FeatureFrame {
    frame(returns.iter().map(|r| vec![*r, 0.0]).collect(), returns)
}

/// Row `i` carries the sign of the return realized at row `i + 1`.
pub fn lookahead_frame(returns: &[f64]) -> FeatureFrame {
    let rows = (0..returns.len())
        .map(|i| {
            let next = returns.get(i + 1).copied().unwrap_or(0.0);
            vec![next.signum(), 0.0]
        })
        .collect();
    frame(rows, returns)
}

pub fn random_returns<R: Rng>(rng: &mut R, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| rng.random_range(-scale..scale)).collect()
}

/// Synthetic S&P series run through the real feature pipeline, split into
/// `train_rows` and the remainder.
pub fn synthetic_frames(regime: Regime, vol: f64, n_days: usize, seed: u64, train_rows: usize) -> (FeatureFrame, FeatureFrame) {
    let spec = SynthSpec::new("ESc1", regime, 0.0, vol, n_days, seed);
    let prices = synth_generate(&spec).unwrap();
    let assets = HashMap::from([(Asset::Sp500, prices)]);
    let frame = build_features(ModelId::M0, &assets, FeatureOptions::default()).unwrap();
    frame.split_at(train_rows).unwrap()
}

/// Forward pass written directly from the parameter layout. Returns the
/// output and the hidden pre-activations.
pub fn naive_forward(net: &QNetwork, x: &[f64]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let layers = &net.params().layers;
    let mut a = x.to_vec();
    let mut pre = Vec::new();
    for (l, layer) in layers.iter().enumerate() {
        let mut z = layer.biases.clone();
        for (k, xk) in a.iter().enumerate() {
            for j in 0..layer.outputs {
                z[j] += xk * layer.weights[k * layer.outputs + j];
            }
        }
        if l + 1 == layers.len() {
            return (z, pre);
        }
        a = z.iter().map(|v| v.max(0.0)).collect();
        pre.push(z);
    }
    unreachable!()
}

/// Batch-mean squared error on the taken actions plus the batch-mean
/// activity penalty.
pub fn naive_loss(net: &QNetwork, states: &Matrix, actions: &[usize], targets: &[f64]) -> f64 {
    let n = states.rows() as f64;
    let l2 = net.config().l2_activity;
    let mut total = 0.0;
    for i in 0..states.rows() {
        let (q, pre) = naive_forward(net, states.row(i));
        total += (q[actions[i]] - targets[i]).powi(2);
        total += l2 * pre.iter().flatten().map(|z| z.max(0.0).powi(2)).sum::<f64>();
    }
    total / n
}

/// Smallest |pre-activation| over the batch; small values put a finite
/// difference at risk of crossing a ReLU kink.
pub fn min_abs_preactivation(net: &QNetwork, states: &Matrix) -> f64 {
    (0..states.rows())
        .flat_map(|i| naive_forward(net, states.row(i)).1.into_iter().flatten())
        .map(f64::abs)
        .fold(f64::INFINITY, f64::min)
}

/// Largest relative error between `analytic` and central differences of
/// [`naive_loss`] with step `h`.
pub fn max_gradient_error(net: &QNetwork, states: &Matrix, actions: &[usize], targets: &[f64], analytic: &[f64], h: f64) -> f64 {
    let mut probe = net.clone();
    let mut worst: f64 = 0.0;
    let mut flat = 0;
    let n_slices = net.params().slices().count();
    for s in 0..n_slices {
        let len = net.params().slices().nth(s).unwrap().len();
        for j in 0..len {
            let original = net.params().slices().nth(s).unwrap()[j];
            probe.params_mut().slices_mut().nth(s).unwrap()[j] = original + h;
            let up = naive_loss(&probe, states, actions, targets);
            probe.params_mut().slices_mut().nth(s).unwrap()[j] = original - h;
            let down = naive_loss(&probe, states, actions, targets);
            probe.params_mut().slices_mut().nth(s).unwrap()[j] = original;
            let numeric = (up - down) / (2.0 * h);
            let a = analytic[flat];
            let err = (a - numeric).abs() / a.abs().max(numeric.abs()).max(1e-6);
            worst = worst.max(err);
            flat += 1;
        }
    }
    worst
}

/// Total reward of a position path, computed from the cost definitions.
pub fn path_reward(actions: &[Action], returns: &[f64], costs: CostModel) -> f64 {
    let mut prev = 0i32;
    let mut total = 0.0;
    for (a, r) in actions.iter().zip(returns) {
        let p = a.position();
        let cost = if p != prev {
            (p - prev).abs() as f64 * costs.trading_cost
        } else {
            costs.time_cost
        };
        total += r * p as f64 - cost;
        prev = p;
    }
    total
}

/// Best total reward over all `3^T` action paths.
pub fn brute_force_best(returns: &[f64], costs: CostModel) -> f64 {
    let t = returns.len();
    let mut best = f64::NEG_INFINITY;
    let mut path = vec![Action::Short; t];
    for code in 0..3usize.pow(t as u32) {
        let mut c = code;
        for slot in path.iter_mut() {
            *slot = Action::ALL[c % 3];
            c /= 3;
        }
        best = best.max(path_reward(&path, returns, costs));
    }
    best
}

/// Number of position changes along a path starting flat.
pub fn position_changes(actions: &[Action]) -> usize {
    let mut prev = 0;
    actions
        .iter()
        .filter(|a| {
            let changed = a.position() != prev;
            prev = a.position();
            changed
        })
        .count()
}
