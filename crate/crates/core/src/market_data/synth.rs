use chrono::{Datelike, NaiveDate, Weekday};
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use super::PriceSeries;
use crate::rng::{self, Stream};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind")]
pub enum Regime {
    /// Geometric random walk with drift.
    Trend,
    /// Drift plus a deterministic return of `+amplitude, -amplitude, ...`.
    MeanRevert { amplitude: f64 },
    /// Driftless random walk.
    Flat,
}

/// Parameters of a synthetic daily price path. Rates are per day.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SynthSpec {
    pub asset_id: String,
    pub drift: f64,
    pub vol: f64,
    pub n_days: usize,
    pub seed: u64,
    pub regime: Regime,
    pub start_price: f64,
    pub start_date: NaiveDate,
}

impl SynthSpec {
    pub fn new(asset_id: impl Into<String>, regime: Regime, drift: f64, vol: f64, n_days: usize, seed: u64) -> Self {
        SynthSpec {
            asset_id: asset_id.into(),
            drift,
            vol,
            n_days,
            seed,
            regime,
            start_price: 100.0,
            start_date: NaiveDate::from_ymd_opt(2000, 1, 3).unwrap(),
        }
    }
}

fn next_weekday(d: NaiveDate) -> NaiveDate {
    let mut next = d.succ_opt().expect("date overflow");
    while matches!(next.weekday(), Weekday::Sat | Weekday::Sun) {
        next = next.succ_opt().expect("date overflow");
    }
    next
}

/// Generates `n_days` closes on consecutive weekdays. Deterministic per seed.
pub fn synth_generate(spec: &SynthSpec) -> Result<PriceSeries> {
    if !(spec.vol >= 0.0 && spec.vol.is_finite()) {
        return Err(Error::Config(format!("synthetic vol must be >= 0, got {}", spec.vol)));
    }
    if spec.n_days < 2 {
        return Err(Error::Config(format!("synthetic series needs >= 2 days, got {}", spec.n_days)));
    }
    if !(spec.start_price > 0.0 && spec.drift.is_finite()) {
        return Err(Error::Config("synthetic start price must be positive and drift finite".into()));
    }
    let mut rng = rng::stream(spec.seed, Stream::Synthetic);
    let mut rows = Vec::with_capacity(spec.n_days);
    let mut date = spec.start_date;
    while matches!(date.weekday(), Weekday::Sat | Weekday::Sun) {
        date = next_weekday(date);
    }
    let mut log_price = spec.start_price.ln();
    rows.push((date, spec.start_price));
    for t in 1..spec.n_days {
        let z: f64 = StandardNormal.sample(&mut rng);
        let r = match spec.regime {
            Regime::Trend => spec.drift + spec.vol * z,
            Regime::MeanRevert { amplitude } => {
                let sign = if t % 2 == 1 { 1.0 } else { -1.0 };
                spec.drift + sign * amplitude + spec.vol * z
            }
            Regime::Flat => spec.vol * z,
        };
        log_price += r;
        date = next_weekday(date);
        rows.push((date, log_price.exp()));
    }
    PriceSeries::new(spec.asset_id.clone(), rows)
}
