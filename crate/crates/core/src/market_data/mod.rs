//! Price ingestion and feature engineering.
//!
//! Prices become log returns over 1 and 5 days, each scaled by an EWMA
//! estimate of daily volatility and annualized with `sqrt(252)`. The
//! per-model [`FeatureFrame`] is the inner join of those features across the
//! model's assets, carrying the raw 1-day S&P 500 return alongside as the
//! reward driver.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

mod features;
mod ingest;
mod synth;

pub use features::{build_features, split, Column, FeatureFrame, FeatureOptions, FiveDayScale, SplitSpec};
pub use ingest::{load_csv, read_csv, write_csv, LoadedSeries};
pub use synth::{synth_generate, Regime, SynthSpec};

/// Trading days per year used for annualization.
pub const TRADING_DAYS: f64 = 252.0;

/// Observations averaged to seed the EWMA variance.
pub const EWMA_SEED_WINDOW: usize = 20;

/// RiskMetrics daily decay.
pub const DEFAULT_DECAY: f64 = 0.94;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Asset {
    Sp500,
    Russell2000,
    Wti,
    Gold,
}

impl Asset {
    pub const ALL: [Asset; 4] = [Asset::Sp500, Asset::Russell2000, Asset::Wti, Asset::Gold];

    pub fn symbol(self) -> &'static str {
        match self {
            Asset::Sp500 => "ESc1",
            Asset::Russell2000 => "IWM",
            Asset::Wti => "CLc1",
            Asset::Gold => "GCc1",
        }
    }

    pub fn from_symbol(symbol: &str) -> Option<Asset> {
        Asset::ALL.into_iter().find(|a| a.symbol().eq_ignore_ascii_case(symbol))
    }
}

/// Feature set. `M0` uses the S&P 500 alone; each later model adds one asset
/// in the order Russell 2000, WTI, Gold.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum ModelId {
    M0,
    M1,
    M2,
    M3,
}

impl ModelId {
    pub fn from_index(index: usize) -> Option<ModelId> {
        [ModelId::M0, ModelId::M1, ModelId::M2, ModelId::M3].get(index).copied()
    }

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn assets(self) -> &'static [Asset] {
        &Asset::ALL[..=self.index()]
    }

    pub fn feature_count(self) -> usize {
        2 * (self.index() + 1)
    }

    pub fn label(self) -> &'static str {
        match self {
            ModelId::M0 => "M0",
            ModelId::M1 => "M1",
            ModelId::M2 => "M2",
            ModelId::M3 => "M3",
        }
    }
}

impl std::fmt::Display for ModelId {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Daily closes of one asset, strictly increasing in date, all positive.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    asset_id: String,
    dates: Vec<NaiveDate>,
    closes: Vec<f64>,
}

impl PriceSeries {
    /// Builds a series from rows already in date order.
    pub fn new(asset_id: impl Into<String>, rows: Vec<(NaiveDate, f64)>) -> Result<Self> {
        let asset_id = asset_id.into();
        for w in rows.windows(2) {
            if w[1].0 == w[0].0 {
                return Err(Error::DuplicateDate {
                    asset: asset_id,
                    date: w[1].0,
                });
            }
            if w[1].0 < w[0].0 {
                return Err(Error::Config(format!(
                    "series {asset_id} is not sorted at {}",
                    w[1].0
                )));
            }
        }
        if let Some((date, close)) = rows.iter().find(|(_, c)| !(c.is_finite() && *c > 0.0)) {
            return Err(Error::Config(format!(
                "series {asset_id} has non-positive close {close} on {date}"
            )));
        }
        let (dates, closes) = rows.into_iter().unzip();
        Ok(PriceSeries {
            asset_id,
            dates,
            closes,
        })
    }

    /// Sorts rows by date, then validates as [`PriceSeries::new`].
    pub fn from_unsorted(asset_id: impl Into<String>, mut rows: Vec<(NaiveDate, f64)>) -> Result<Self> {
        rows.sort_by_key(|(d, _)| *d);
        PriceSeries::new(asset_id, rows)
    }

    pub fn asset_id(&self) -> &str {
        &self.asset_id
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn closes(&self) -> &[f64] {
        &self.closes
    }

    pub fn len(&self) -> usize {
        self.closes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.closes.is_empty()
    }

    /// Same series with every close multiplied by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        let rows = self
            .dates
            .iter()
            .zip(&self.closes)
            .map(|(d, c)| (*d, c * factor))
            .collect();
        PriceSeries::new(self.asset_id.clone(), rows)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    pub asset_id: String,
    pub horizon: usize,
    pub dates: Vec<NaiveDate>,
    pub values: Vec<f64>,
}

impl ReturnSeries {
    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct VolSeries {
    pub asset_id: String,
    pub decay: f64,
    pub dates: Vec<NaiveDate>,
    pub sigma: Vec<f64>,
}

/// `ln(close_t / close_{t-horizon})`, dated at `t`.
pub fn log_returns(series: &PriceSeries, horizon: usize) -> Result<ReturnSeries> {
    if horizon != 1 && horizon != 5 {
        return Err(Error::BadHorizon(horizon));
    }
    if series.len() <= horizon {
        return Err(Error::SeriesTooShort {
            asset: series.asset_id.clone(),
            len: series.len(),
            horizon,
        });
    }
    let closes = series.closes();
    let values = closes
        .iter()
        .zip(&closes[horizon..])
        .map(|(prev, cur)| (cur / prev).ln())
        .collect();
    Ok(ReturnSeries {
        asset_id: series.asset_id.clone(),
        horizon,
        dates: series.dates[horizon..].to_vec(),
        values,
    })
}

/// EWMA volatility with the variance seeded by the mean squared return of the
/// first [`EWMA_SEED_WINDOW`] observations.
pub fn ewma_vol(returns: &ReturnSeries, decay: f64) -> Result<VolSeries> {
    let head = &returns.values[..returns.len().min(EWMA_SEED_WINDOW)];
    let seed = if head.is_empty() {
        0.0
    } else {
        head.iter().map(|r| r * r).sum::<f64>() / head.len() as f64
    };
    ewma_vol_seeded(returns, decay, seed)
}

/// `σ_t² = λ σ_{t-1}² + (1 - λ) r_t²` starting from `seed_variance`.
pub fn ewma_vol_seeded(returns: &ReturnSeries, decay: f64, seed_variance: f64) -> Result<VolSeries> {
    if !(decay > 0.0 && decay < 1.0) {
        return Err(Error::BadDecay(decay));
    }
    if returns.is_empty() {
        return Err(Error::SeriesTooShort {
            asset: returns.asset_id.clone(),
            len: 0,
            horizon: returns.horizon,
        });
    }
    let mut variance = seed_variance;
    let sigma = returns
        .values
        .iter()
        .map(|r| {
            variance = decay * variance + (1.0 - decay) * r * r;
            variance.sqrt()
        })
        .collect();
    Ok(VolSeries {
        asset_id: returns.asset_id.clone(),
        decay,
        dates: returns.dates.clone(),
        sigma,
    })
}

/// `r_t / (σ_t · sqrt(252))`, matching each return to the volatility of the
/// same date.
pub fn normalize(returns: &ReturnSeries, vol: &VolSeries) -> Result<ReturnSeries> {
    normalize_scaled(returns, vol, TRADING_DAYS.sqrt())
}

/// `r_t / (σ_t · annualization)`.
pub fn normalize_scaled(returns: &ReturnSeries, vol: &VolSeries, annualization: f64) -> Result<ReturnSeries> {
    let mut values = Vec::with_capacity(returns.len());
    let mut j = 0;
    for (date, r) in returns.dates.iter().zip(&returns.values) {
        while j < vol.dates.len() && vol.dates[j] < *date {
            j += 1;
        }
        if j == vol.dates.len() || vol.dates[j] != *date {
            return Err(Error::Misaligned {
                asset: returns.asset_id.clone(),
                date: *date,
            });
        }
        let sigma = vol.sigma[j];
        let value = if sigma == 0.0 {
            if *r != 0.0 {
                return Err(Error::DegenerateVolatility {
                    asset: returns.asset_id.clone(),
                    date: *date,
                });
            }
            0.0
        } else {
            r / (sigma * annualization)
        };
        values.push(value);
    }
    Ok(ReturnSeries {
        asset_id: returns.asset_id.clone(),
        horizon: returns.horizon,
        dates: returns.dates.clone(),
        values,
    })
}
