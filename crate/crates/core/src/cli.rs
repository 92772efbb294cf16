//! Command implementations behind the `ddqn-trader` binary.
//!
//! Every command reads one flat TOML [`RunConfig`]; an empty file gives the
//! standard setup. Outputs land under `out_dir`:
//!
//! ```text
//! out/data/<SYMBOL>.csv                       synth
//! out/frames/M{k}/{train,test}.csv            prepare
//! out/frames/M{k}/provenance.json
//! out/train/M{k}/{log.csv,summary.json,checkpoint.json}
//! out/eval/M{k}/{backtest.csv,report.json,nav.csv}
//! out/report/{report.json,nav.csv}            report
//! ```
//!
//! Existing outputs are only replaced with `--force`. Files are written to a
//! temporary name and renamed into place.

use std::collections::{BTreeMap, HashMap};
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use chrono::NaiveDate;
use clap::{Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Deserializer, Serialize};

use crate::agent::{Agent, AgentConfig, EpsilonSchedule, SyncUnit};
use crate::env::{read_trace_csv, write_trace_csv, CostModel, EnvConfig, StartMode};
use crate::evaluation::{
    emit_report, market_report, performance_report, run_backtest_traced, BacktestResult, NavCurve,
    PerformanceReport, ReturnBasis,
};
use crate::market_data::{
    build_features, load_csv, split, synth_generate, write_csv, Asset, FeatureFrame, FeatureOptions,
    FiveDayScale, ModelId, PriceSeries, Regime, SplitSpec, SynthSpec,
};
use crate::nn::NetConfig;
use crate::training::{run_training, TrainConfig};
use crate::{Error, Result};

/// Exit status for success.
pub const EXIT_OK: i32 = 0;
/// Exit status for configuration or validation failures.
pub const EXIT_VALIDATION: i32 = 2;
/// Exit status for failures after work started.
pub const EXIT_RUNTIME: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "snake_case")]
pub enum CostPreset {
    /// 1 bp per trade, 0.1 bp per held day.
    #[default]
    Paper,
    None,
    /// 10 bp per trade, 1 bp per held day.
    High,
}

impl CostPreset {
    pub fn costs(self) -> CostModel {
        match self {
            CostPreset::Paper => CostModel::PAPER,
            CostPreset::None => CostModel::NONE,
            CostPreset::High => CostModel::HIGH,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SynthKind {
    Trend,
    #[default]
    MeanRevert,
    Flat,
}

fn date(y: i32, m: u32, d: u32) -> NaiveDate {
    NaiveDate::from_ymd_opt(y, m, d).expect("valid date")
}

/// Accepts both `2007-01-01` (a TOML date) and `"2007-01-01"`.
fn de_date<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<NaiveDate, D::Error> {
    #[derive(Deserialize)]
    #[serde(untagged)]
    enum Raw {
        Text(String),
        Toml(toml::value::Datetime),
    }
    let text = match Raw::deserialize(d)? {
        Raw::Text(s) => s,
        Raw::Toml(dt) => dt.to_string(),
    };
    NaiveDate::parse_from_str(&text, "%Y-%m-%d").map_err(serde::de::Error::custom)
}

/// Flat run configuration. Unknown keys are rejected.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Feature set 0..=3.
    pub model: usize,
    /// Directory holding `<SYMBOL>.csv` price files.
    pub data_dir: PathBuf,
    pub out_dir: PathBuf,
    pub seed: u64,
    /// Checkpoint for `evaluate`; defaults to the one `train` writes.
    pub checkpoint: Option<PathBuf>,

    #[serde(deserialize_with = "de_date")]
    pub train_start: NaiveDate,
    #[serde(deserialize_with = "de_date")]
    pub train_end: NaiveDate,
    #[serde(deserialize_with = "de_date")]
    pub test_end: NaiveDate,

    pub costs: CostPreset,
    /// Overrides the preset's per-trade cost.
    pub trading_cost: Option<f64>,
    /// Overrides the preset's per-day holding cost.
    pub time_cost: Option<f64>,

    pub ewma_decay: f64,
    pub five_day_scale: FiveDayScale,

    pub episodes: usize,
    pub episode_length: usize,
    pub gamma: f64,
    pub learning_rate: f64,
    pub batch_size: usize,
    pub replay_capacity: usize,
    /// Defaults to `batch_size`.
    pub warmup: Option<usize>,
    pub target_sync_every: u64,
    pub sync_unit: SyncUnit,
    pub hidden_layers: Vec<usize>,
    pub dropout: f64,
    pub l2_activity: f64,
    pub epsilon_start: f64,
    pub epsilon_knee: f64,
    pub epsilon_end: f64,
    /// Defaults to half of `episodes`.
    pub linear_until: Option<usize>,
    pub early_stop_streak: usize,
    pub ma_window: usize,
    pub return_basis: ReturnBasis,

    pub synth_kind: SynthKind,
    pub synth_amplitude: f64,
    pub synth_drift: f64,
    pub synth_vol: f64,
    pub synth_days: usize,
    #[serde(deserialize_with = "de_date")]
    pub synth_start: NaiveDate,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            model: 0,
            data_dir: PathBuf::from("data"),
            out_dir: PathBuf::from("out"),
            seed: 0,
            checkpoint: None,
            train_start: date(2007, 1, 1),
            train_end: date(2019, 12, 31),
            test_end: date(2022, 12, 31),
            costs: CostPreset::Paper,
            trading_cost: None,
            time_cost: None,
            ewma_decay: crate::market_data::DEFAULT_DECAY,
            five_day_scale: FiveDayScale::Daily,
            episodes: 1000,
            episode_length: 252,
            gamma: 0.9,
            learning_rate: 1e-4,
            batch_size: 4096,
            replay_capacity: 1_000_000,
            warmup: None,
            target_sync_every: 100,
            sync_unit: SyncUnit::GradientSteps,
            hidden_layers: vec![64, 64],
            dropout: 0.1,
            l2_activity: 1e-6,
            epsilon_start: 1.0,
            epsilon_knee: 0.1,
            epsilon_end: 0.01,
            linear_until: None,
            early_stop_streak: 25,
            ma_window: 50,
            return_basis: ReturnBasis::Net,
            synth_kind: SynthKind::MeanRevert,
            synth_amplitude: 0.002,
            synth_drift: 0.0002,
            synth_vol: 0.01,
            synth_days: 6000,
            synth_start: date(2000, 1, 3),
        }
    }
}

/// Command-line values that take precedence over the file.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub model: Option<usize>,
    pub costs: Option<CostPreset>,
    pub out: Option<PathBuf>,
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<RunConfig> {
        toml::from_str(text).map_err(|e| Error::Config(e.message().to_string()))
    }

    /// Reads `path` (or starts from defaults), applies `overrides` and
    /// validates the result.
    pub fn load(path: Option<&Path>, overrides: &Overrides) -> Result<RunConfig> {
        let mut config = match path {
            Some(p) => {
                let text = fs::read_to_string(p)
                    .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
                RunConfig::from_toml(&text).map_err(|e| match e {
                    Error::Config(msg) => Error::Config(format!("{}: {msg}", p.display())),
                    other => other,
                })?
            }
            None => RunConfig::default(),
        };
        if let Some(seed) = overrides.seed {
            config.seed = seed;
        }
        if let Some(model) = overrides.model {
            config.model = model;
        }
        if let Some(costs) = overrides.costs {
            config.costs = costs;
            config.trading_cost = None;
            config.time_cost = None;
        }
        if let Some(out) = &overrides.out {
            config.out_dir = out.clone();
        }
        config.validate()?;
        Ok(config)
    }

    pub fn model_id(&self) -> Result<ModelId> {
        ModelId::from_index(self.model)
            .ok_or_else(|| Error::Config(format!("model must be 0..=3, got {}", self.model)))
    }

    pub fn cost_model(&self) -> CostModel {
        let preset = self.costs.costs();
        CostModel {
            trading_cost: self.trading_cost.unwrap_or(preset.trading_cost),
            time_cost: self.time_cost.unwrap_or(preset.time_cost),
        }
    }

    pub fn split_spec(&self) -> SplitSpec {
        SplitSpec {
            train_start: self.train_start,
            train_end: self.train_end,
            test_end: self.test_end,
        }
    }

    pub fn feature_options(&self) -> FeatureOptions {
        FeatureOptions {
            decay: self.ewma_decay,
            five_day_scale: self.five_day_scale,
        }
    }

    pub fn train_config(&self) -> Result<TrainConfig> {
        let model = self.model_id()?;
        let net = NetConfig {
            hidden_dims: self.hidden_layers.clone(),
            dropout_rate: self.dropout,
            l2_activity: self.l2_activity,
            seed: self.seed,
            ..NetConfig::standard(model.feature_count())
        };
        let agent = AgentConfig {
            gamma: self.gamma,
            learning_rate: self.learning_rate,
            batch_size: self.batch_size,
            replay_capacity: self.replay_capacity,
            target_sync_every: self.target_sync_every,
            sync_unit: self.sync_unit,
            warmup: self.warmup.unwrap_or(self.batch_size),
            net,
        };
        Ok(TrainConfig {
            episodes: self.episodes,
            env: EnvConfig {
                episode_length: self.episode_length,
                costs: self.cost_model(),
                start_mode: StartMode::Random,
            },
            agent,
            schedule: EpsilonSchedule {
                start: self.epsilon_start,
                knee: self.epsilon_knee,
                end: self.epsilon_end,
                linear_until: self.linear_until.unwrap_or((self.episodes / 2).max(1)),
                total_episodes: self.episodes,
            },
            early_stop_streak: self.early_stop_streak,
            ma_window: self.ma_window,
            seed: self.seed,
            checkpoint_path: None,
        })
    }

    /// Checks everything that does not need the data files.
    pub fn validate(&self) -> Result<()> {
        self.model_id()?;
        self.cost_model().validate()?;
        if !(self.train_start < self.train_end && self.train_end < self.test_end) {
            return Err(Error::InvalidSplit(format!(
                "need train_start < train_end < test_end, got {} / {} / {}",
                self.train_start, self.train_end, self.test_end
            )));
        }
        if !(self.ewma_decay > 0.0 && self.ewma_decay < 1.0) {
            return Err(Error::Config(format!("ewma_decay {} not in (0, 1)", self.ewma_decay)));
        }
        if self.episode_length == 0 {
            return Err(Error::Config("episode_length must be >= 1".into()));
        }
        let (s, k, e) = (self.epsilon_start, self.epsilon_knee, self.epsilon_end);
        if !(0.0 <= e && e <= k && k <= s && s <= 1.0) {
            return Err(Error::Config(format!(
                "epsilon values must satisfy 0 <= end <= knee <= start <= 1, got {e} / {k} / {s}"
            )));
        }
        if !(self.synth_vol >= 0.0 && self.synth_vol.is_finite() && self.synth_amplitude.is_finite()) {
            return Err(Error::Config("synth_vol and synth_amplitude must be finite, vol >= 0".into()));
        }
        if self.synth_days < 2 {
            return Err(Error::Config("synth_days must be >= 2".into()));
        }
        self.train_config()?.validate()
    }

    fn asset_path(&self, asset: Asset) -> PathBuf {
        self.data_dir.join(format!("{}.csv", asset.symbol()))
    }

    /// Fails with the first asset of the model whose price file is missing.
    pub fn check_data(&self) -> Result<()> {
        let model = self.model_id()?;
        for asset in model.assets() {
            if !self.asset_path(*asset).is_file() {
                return Err(Error::MissingAsset {
                    model: model.to_string(),
                    asset: asset.symbol().to_string(),
                });
            }
        }
        Ok(())
    }

    fn model_dir(&self, stage: &str) -> Result<PathBuf> {
        Ok(self.out_dir.join(stage).join(self.model_id()?.label()))
    }

    fn checkpoint_path(&self) -> Result<PathBuf> {
        match &self.checkpoint {
            Some(p) => Ok(p.clone()),
            None => Ok(self.model_dir("train")?.join("checkpoint.json")),
        }
    }
}

/// Prepared inputs of one model.
#[derive(Debug, Clone)]
pub struct Frames {
    pub train: FeatureFrame,
    pub test: FeatureFrame,
    pub dropped: BTreeMap<String, usize>,
}

/// Loads the model's price files and builds the split feature frames.
pub fn build_frames(config: &RunConfig) -> Result<Frames> {
    config.check_data()?;
    let model = config.model_id()?;
    let mut prices: HashMap<Asset, PriceSeries> = HashMap::new();
    let mut dropped = BTreeMap::new();
    for asset in model.assets() {
        let loaded = load_csv(config.asset_path(*asset))?;
        dropped.insert(asset.symbol().to_string(), loaded.dropped);
        prices.insert(*asset, loaded.series);
    }
    let frame = build_features(model, &prices, config.feature_options())?;
    let (train, test) = split(&frame, config.split_spec())?;
    Ok(Frames { train, test, dropped })
}

fn ensure_writable(paths: &[PathBuf], force: bool) -> Result<()> {
    if force {
        return Ok(());
    }
    match paths.iter().find(|p| p.exists()) {
        Some(p) => Err(Error::Config(format!(
            "{} already exists; pass --force to overwrite",
            p.display()
        ))),
        None => Ok(()),
    }
}

/// Writes through a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    if let Some(dir) = path.parent() {
        fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    }
    let mut tmp = path.as_os_str().to_owned();
    tmp.push(format!(".tmp{}", std::process::id()));
    let tmp = PathBuf::from(tmp);
    fs::write(&tmp, bytes).map_err(|e| Error::io(&tmp, e))?;
    fs::rename(&tmp, path).map_err(|e| Error::io(path, e))
}

fn csv_bytes(f: impl FnOnce(&mut Vec<u8>) -> Result<()>) -> Result<Vec<u8>> {
    let mut buf = Vec::new();
    f(&mut buf)?;
    Ok(buf)
}

fn date_range(frame: &FeatureFrame) -> serde_json::Value {
    serde_json::json!({
        "rows": frame.len(),
        "first": frame.dates().first().map(|d| d.to_string()),
        "last": frame.dates().last().map(|d| d.to_string()),
    })
}

/// Writes synthetic price files for all four assets into `out/data`.
pub fn cmd_synth(config: &RunConfig, force: bool) -> Result<Vec<PathBuf>> {
    let dir = config.out_dir.join("data");
    let paths: Vec<PathBuf> = Asset::ALL
        .iter()
        .map(|a| dir.join(format!("{}.csv", a.symbol())))
        .collect();
    ensure_writable(&paths, force)?;
    let regime = match config.synth_kind {
        SynthKind::Trend => Regime::Trend,
        SynthKind::MeanRevert => Regime::MeanRevert {
            amplitude: config.synth_amplitude,
        },
        SynthKind::Flat => Regime::Flat,
    };
    for (k, (asset, path)) in Asset::ALL.iter().zip(&paths).enumerate() {
        let mut spec = SynthSpec::new(
            asset.symbol(),
            regime,
            config.synth_drift,
            config.synth_vol,
            config.synth_days,
            config.seed.wrapping_add(k as u64),
        );
        spec.start_date = config.synth_start;
        let series = synth_generate(&spec)?;
        write_atomic(path, &csv_bytes(|b| write_csv(&series, b))?)?;
    }
    Ok(paths)
}

/// Writes the train/test frames and a provenance record.
pub fn cmd_prepare(config: &RunConfig, force: bool) -> Result<Vec<PathBuf>> {
    let dir = config.model_dir("frames")?;
    let paths = vec![dir.join("train.csv"), dir.join("test.csv"), dir.join("provenance.json")];
    ensure_writable(&paths, force)?;
    let frames = build_frames(config)?;
    let provenance = serde_json::json!({
        "model": config.model_id()?.label(),
        "ewma_decay": config.ewma_decay,
        "five_day_scale": config.five_day_scale,
        "inputs": config.model_id()?.assets().iter()
            .map(|a| (a.symbol().to_string(), config.asset_path(*a).display().to_string()))
            .collect::<BTreeMap<_, _>>(),
        "dropped_rows": frames.dropped,
        "train": date_range(&frames.train),
        "test": date_range(&frames.test),
    });
    write_atomic(&paths[0], &csv_bytes(|b| frames.train.write_csv(b))?)?;
    write_atomic(&paths[1], &csv_bytes(|b| frames.test.write_csv(b))?)?;
    let mut json = serde_json::to_string_pretty(&provenance)?;
    json.push('\n');
    write_atomic(&paths[2], json.as_bytes())?;
    Ok(paths)
}

/// Trains on the train frame; writes the episode log, a summary and the
/// checkpoint.
pub fn cmd_train(config: &RunConfig, force: bool) -> Result<Vec<PathBuf>> {
    let dir = config.model_dir("train")?;
    let paths = vec![dir.join("log.csv"), dir.join("summary.json"), dir.join("checkpoint.json")];
    ensure_writable(&paths, force)?;
    let train_config = config.train_config()?;
    let frames = build_frames(config)?;
    let started = Instant::now();
    let outcome = run_training(&train_config, &frames.train)?;
    let wall = started.elapsed().as_secs_f64();
    write_atomic(&paths[0], &csv_bytes(|b| outcome.log.write_csv(b))?)?;
    let mut summary = outcome.log.summary_json(wall)?;
    summary.push('\n');
    write_atomic(&paths[1], summary.as_bytes())?;
    write_atomic(&paths[2], outcome.agent.to_json()?.as_bytes())?;
    Ok(paths)
}

/// Backtests the checkpoint on the test frame and writes its report.
pub fn cmd_evaluate(config: &RunConfig, force: bool) -> Result<Vec<PathBuf>> {
    let dir = config.model_dir("eval")?;
    let paths = vec![dir.join("backtest.csv"), dir.join("report.json"), dir.join("nav.csv")];
    ensure_writable(&paths, force)?;
    let checkpoint = config.checkpoint_path()?;
    if !checkpoint.is_file() {
        return Err(Error::Config(format!("checkpoint {} not found", checkpoint.display())));
    }
    let agent = Agent::load(&checkpoint)?;
    let model = config.model_id()?;
    if agent.input_dim() != model.feature_count() {
        return Err(Error::ShapeMismatch {
            expected: agent.input_dim(),
            actual: model.feature_count(),
        });
    }
    let frames = build_frames(config)?;
    let costs = config.cost_model();
    let (result, trace) = run_backtest_traced(&agent, &frames.test, costs)?;
    let rows = vec![
        performance_report(model.label(), &result, costs, config.return_basis)?,
        market_report(&result, costs)?,
    ];
    let curves = nav_curves_for(&[(model.label().to_string(), result)]);
    write_atomic(&paths[0], &csv_bytes(|b| write_trace_csv(&trace, b))?)?;
    write_report(&rows, &curves, &paths[1], &paths[2])?;
    Ok(paths)
}

fn nav_curves_for(results: &[(String, BacktestResult)]) -> Vec<NavCurve> {
    let mut curves: Vec<NavCurve> = results
        .iter()
        .map(|(label, r)| NavCurve {
            model: label.clone(),
            dates: r.dates.clone(),
            nav: r.agent_nav.clone(),
        })
        .collect();
    if let Some((_, first)) = results.first() {
        curves.push(NavCurve {
            model: "market".into(),
            dates: first.dates.clone(),
            nav: first.market_nav.clone(),
        });
    }
    curves
}

fn write_report(rows: &[PerformanceReport], curves: &[NavCurve], report: &Path, navs: &Path) -> Result<()> {
    let staging = report
        .parent()
        .unwrap_or(Path::new("."))
        .join(format!(".staging{}", std::process::id()));
    let files = emit_report(rows, curves, &staging)?;
    let moved = write_atomic(report, &fs::read(&files.report).map_err(|e| Error::io(&files.report, e))?)
        .and_then(|_| write_atomic(navs, &fs::read(&files.navs).map_err(|e| Error::io(&files.navs, e))?));
    let _ = fs::remove_dir_all(&staging);
    moved
}

/// Collects every `eval/M*/backtest.csv` into one table with a market row.
pub fn cmd_report(config: &RunConfig, force: bool) -> Result<Vec<PathBuf>> {
    let dir = config.out_dir.join("report");
    let paths = vec![dir.join("report.json"), dir.join("nav.csv")];
    ensure_writable(&paths, force)?;
    let costs = config.cost_model();
    let mut results = Vec::new();
    for model in [ModelId::M0, ModelId::M1, ModelId::M2, ModelId::M3] {
        let path = config.out_dir.join("eval").join(model.label()).join("backtest.csv");
        if path.is_file() {
            let file = fs::File::open(&path).map_err(|e| Error::io(&path, e))?;
            let trace = read_trace_csv(file)?;
            results.push((model.label().to_string(), BacktestResult::from_trace(&trace)));
        }
    }
    if results.is_empty() {
        return Err(Error::Config(format!(
            "no backtests under {}; run `evaluate` first",
            config.out_dir.join("eval").display()
        )));
    }
    let mut rows = Vec::new();
    for (label, result) in &results {
        rows.push(performance_report(label, result, costs, config.return_basis)?);
    }
    rows.push(market_report(&results[0].1, costs)?);
    write_report(&rows, &nav_curves_for(&results), &paths[0], &paths[1])?;
    Ok(paths)
}

#[derive(Debug, Parser)]
#[command(name = "ddqn-trader", version, about = "Double DQN trading agent")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    /// TOML run configuration; defaults apply when omitted.
    #[arg(long, global = true, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, global = true, value_name = "N")]
    pub seed: Option<u64>,
    #[arg(long, global = true, value_parser = clap::value_parser!(u8).range(0..=3))]
    pub model: Option<u8>,
    #[arg(long, global = true, value_enum)]
    pub costs: Option<CostPreset>,
    #[arg(long, global = true, value_name = "DIR")]
    pub out: Option<PathBuf>,
    /// Overwrite existing outputs.
    #[arg(long, global = true)]
    pub force: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand)]
pub enum Command {
    /// Build train/test feature frames from price files.
    Prepare,
    /// Generate synthetic price files.
    Synth,
    /// Train an agent on the train frame.
    Train,
    /// Backtest a checkpoint on the test frame.
    Evaluate,
    /// Combine all evaluated models into one report.
    Report,
}

impl Cli {
    pub fn overrides(&self) -> Overrides {
        Overrides {
            seed: self.seed,
            model: self.model.map(usize::from),
            costs: self.costs,
            out: self.out.clone(),
        }
    }
}

pub fn execute(cli: &Cli) -> Result<Vec<PathBuf>> {
    let config = RunConfig::load(cli.config.as_deref(), &cli.overrides())?;
    match cli.command {
        Command::Synth => cmd_synth(&config, cli.force),
        Command::Prepare => cmd_prepare(&config, cli.force),
        Command::Train => cmd_train(&config, cli.force),
        Command::Evaluate => cmd_evaluate(&config, cli.force),
        Command::Report => cmd_report(&config, cli.force),
    }
}

pub fn exit_code(error: &Error) -> i32 {
    if error.is_validation() {
        EXIT_VALIDATION
    } else {
        EXIT_RUNTIME
    }
}

/// Parses `args`, runs the command and returns the process exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_VALIDATION } else { EXIT_OK };
        }
    };
    match execute(&cli) {
        Ok(paths) => {
            for p in paths {
                println!("{}", p.display());
            }
            EXIT_OK
        }
        Err(e) => {
            eprintln!("error: {e}");
            exit_code(&e)
        }
    }
}
