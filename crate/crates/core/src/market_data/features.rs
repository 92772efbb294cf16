use std::collections::{BTreeMap, HashMap};
use std::io::{Read, Write};
use std::ops::Range;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{ewma_vol, log_returns, normalize_scaled, Asset, ModelId, PriceSeries, DEFAULT_DECAY, TRADING_DAYS};
use crate::{Error, Result};

/// Annualization applied to 5-day returns.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FiveDayScale {
    /// Same `σ_t · sqrt(252)` as the 1-day returns.
    #[default]
    Daily,
    /// `σ_t · sqrt(252 / 5)`.
    HorizonAdjusted,
}

impl FiveDayScale {
    fn annualization(self) -> f64 {
        match self {
            FiveDayScale::Daily => TRADING_DAYS.sqrt(),
            FiveDayScale::HorizonAdjusted => (TRADING_DAYS / 5.0).sqrt(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FeatureOptions {
    pub decay: f64,
    pub five_day_scale: FiveDayScale,
}

impl Default for FeatureOptions {
    fn default() -> Self {
        FeatureOptions {
            decay: DEFAULT_DECAY,
            five_day_scale: FiveDayScale::Daily,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Column {
    pub asset_id: String,
    pub horizon: usize,
}

/// Date-aligned normalized returns for one model, the agent's state space.
///
/// `target_returns[i]` is the raw 1-day S&P 500 log return realized on
/// `dates[i]`.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureFrame {
    model: ModelId,
    dates: Vec<NaiveDate>,
    columns: Vec<Column>,
    values: Vec<f64>,
    target_returns: Vec<f64>,
}

fn model_columns(model: ModelId) -> Vec<Column> {
    model
        .assets()
        .iter()
        .flat_map(|a| {
            [1, 5].map(|horizon| Column {
                asset_id: a.symbol().to_string(),
                horizon,
            })
        })
        .collect()
}

impl FeatureFrame {
    /// `rows` holds one feature vector per date, each `model.feature_count()` wide.
    pub fn new(
        model: ModelId,
        dates: Vec<NaiveDate>,
        rows: Vec<Vec<f64>>,
        target_returns: Vec<f64>,
    ) -> Result<Self> {
        let width = model.feature_count();
        if rows.len() != dates.len() || target_returns.len() != dates.len() {
            return Err(Error::LengthMismatch {
                left: dates.len(),
                right: rows.len().min(target_returns.len()),
            });
        }
        if let Some(w) = dates.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::Config(format!("frame dates not increasing at {}", w[1])));
        }
        let mut values = Vec::with_capacity(rows.len() * width);
        for (row, date) in rows.iter().zip(&dates) {
            if row.len() != width {
                return Err(Error::ShapeMismatch {
                    expected: width,
                    actual: row.len(),
                });
            }
            if row.iter().any(|v| !v.is_finite()) {
                return Err(Error::NonFiniteFeature(*date));
            }
            values.extend_from_slice(row);
        }
        if let Some(i) = target_returns.iter().position(|r| !r.is_finite()) {
            return Err(Error::NonFiniteFeature(dates[i]));
        }
        Ok(FeatureFrame {
            model,
            dates,
            columns: model_columns(model),
            values,
            target_returns,
        })
    }

    pub fn model(&self) -> ModelId {
        self.model
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    pub fn n_features(&self) -> usize {
        self.columns.len()
    }

    pub fn columns(&self) -> &[Column] {
        &self.columns
    }

    pub fn dates(&self) -> &[NaiveDate] {
        &self.dates
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let w = self.n_features();
        &self.values[i * w..(i + 1) * w]
    }

    pub fn target_returns(&self) -> &[f64] {
        &self.target_returns
    }

    /// Contiguous sub-frame over `rows`.
    pub fn slice(&self, rows: Range<usize>) -> FeatureFrame {
        let w = self.n_features();
        FeatureFrame {
            model: self.model,
            dates: self.dates[rows.clone()].to_vec(),
            columns: self.columns.clone(),
            values: self.values[rows.start * w..rows.end * w].to_vec(),
            target_returns: self.target_returns[rows].to_vec(),
        }
    }

    /// Splits into `[0, at)` and `[at, len)`.
    pub fn split_at(&self, at: usize) -> Result<(FeatureFrame, FeatureFrame)> {
        if at == 0 || at >= self.len() {
            return Err(Error::InvalidSplit(format!(
                "row {at} leaves an empty partition of a {}-row frame",
                self.len()
            )));
        }
        Ok((self.slice(0..at), self.slice(at..self.len())))
    }

    /// Columnar CSV: `date, f0..f{n-1}, target_return`.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        let mut header = vec!["date".to_string()];
        header.extend((0..self.n_features()).map(|i| format!("f{i}")));
        header.push("target_return".into());
        w.write_record(&header)?;
        for i in 0..self.len() {
            let mut rec = vec![self.dates[i].format("%Y-%m-%d").to_string()];
            rec.extend(self.row(i).iter().map(|v| v.to_string()));
            rec.push(self.target_returns[i].to_string());
            w.write_record(&rec)?;
        }
        w.flush().map_err(|e| Error::io("<csv writer>", e))?;
        Ok(())
    }

    /// Reads the format produced by [`FeatureFrame::write_csv`]. The model is
    /// inferred from the number of feature columns.
    pub fn read_csv<R: Read>(reader: R) -> Result<FeatureFrame> {
        let mut rdr = csv::Reader::from_reader(reader);
        let width = rdr.headers()?.len().saturating_sub(2);
        let model = ModelId::from_index((width / 2).wrapping_sub(1))
            .filter(|m| m.feature_count() == width)
            .ok_or_else(|| Error::Config(format!("frame csv has {width} feature columns")))?;
        let (mut dates, mut rows, mut targets) = (Vec::new(), Vec::new(), Vec::new());
        for record in rdr.records() {
            let record = record?;
            let bad = |field: &str| Error::Config(format!("bad frame field `{field}`"));
            let date = NaiveDate::parse_from_str(&record[0], "%Y-%m-%d").map_err(|_| bad(&record[0]))?;
            let nums = record
                .iter()
                .skip(1)
                .map(|s| s.parse::<f64>().map_err(|_| bad(s)))
                .collect::<Result<Vec<_>>>()?;
            dates.push(date);
            targets.push(nums[width]);
            rows.push(nums[..width].to_vec());
        }
        FeatureFrame::new(model, dates, rows, targets)
    }
}

/// Builds the feature frame of `model` from the assets' price series.
///
/// Each asset is converted on its own calendar first; the frame then keeps
/// only dates present for every asset.
pub fn build_features(
    model: ModelId,
    assets: &HashMap<Asset, PriceSeries>,
    options: FeatureOptions,
) -> Result<FeatureFrame> {
    let mut per_asset: Vec<BTreeMap<NaiveDate, [f64; 2]>> = Vec::new();
    let mut raw_target: BTreeMap<NaiveDate, f64> = BTreeMap::new();
    for asset in model.assets() {
        let series = assets.get(asset).ok_or_else(|| Error::MissingAsset {
            model: model.to_string(),
            asset: asset.symbol().to_string(),
        })?;
        let r1 = log_returns(series, 1)?;
        let r5 = log_returns(series, 5)?;
        let vol = ewma_vol(&r1, options.decay)?;
        let n1 = normalize_scaled(&r1, &vol, TRADING_DAYS.sqrt())?;
        let n5 = normalize_scaled(&r5, &vol, options.five_day_scale.annualization())?;
        let one_day: BTreeMap<_, _> = n1.dates.iter().copied().zip(n1.values.iter().copied()).collect();
        let joined = n5
            .dates
            .iter()
            .zip(&n5.values)
            .filter_map(|(d, v5)| one_day.get(d).map(|v1| (*d, [*v1, *v5])))
            .collect();
        per_asset.push(joined);
        if *asset == Asset::Sp500 {
            raw_target = r1.dates.iter().copied().zip(r1.values.iter().copied()).collect();
        }
    }

    let (mut dates, mut rows, mut targets) = (Vec::new(), Vec::new(), Vec::new());
    for date in per_asset[0].keys() {
        let row: Option<Vec<f64>> = per_asset
            .iter()
            .map(|m| m.get(date))
            .try_fold(Vec::with_capacity(model.feature_count()), |mut acc, pair| {
                acc.extend_from_slice(pair?);
                Some(acc)
            });
        if let Some(row) = row {
            dates.push(*date);
            rows.push(row);
            targets.push(raw_target[date]);
        }
    }
    if dates.is_empty() {
        return Err(Error::EmptyIntersection(model.to_string()));
    }
    FeatureFrame::new(model, dates, rows, targets)
}

/// Train/test boundaries: train covers `[train_start, train_end]`, test covers
/// `(train_end, test_end]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SplitSpec {
    pub train_start: NaiveDate,
    pub train_end: NaiveDate,
    pub test_end: NaiveDate,
}

pub fn split(frame: &FeatureFrame, spec: SplitSpec) -> Result<(FeatureFrame, FeatureFrame)> {
    if !(spec.train_start < spec.train_end && spec.train_end < spec.test_end) {
        return Err(Error::InvalidSplit(format!(
            "need train_start < train_end < test_end, got {} / {} / {}",
            spec.train_start, spec.train_end, spec.test_end
        )));
    }
    let last = *frame
        .dates
        .last()
        .ok_or_else(|| Error::InvalidSplit("empty frame".into()))?;
    if spec.train_end >= last {
        return Err(Error::InvalidSplit(format!(
            "train_end {} is not before the last frame date {last}",
            spec.train_end
        )));
    }
    let lo = frame.dates.partition_point(|d| *d < spec.train_start);
    let mid = frame.dates.partition_point(|d| *d <= spec.train_end);
    let hi = frame.dates.partition_point(|d| *d <= spec.test_end);
    if lo == mid || mid == hi {
        return Err(Error::InvalidSplit(format!(
            "empty partition (train {} rows, test {} rows)",
            mid - lo,
            hi - mid
        )));
    }
    Ok((frame.slice(lo..mid), frame.slice(mid..hi)))
}
