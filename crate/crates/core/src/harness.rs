//! Monte-Carlo BLER sweeps, budget comparison and result files.
//!
//! Every trial draws its message, channel noise and decoder plans from
//! streams keyed by (seed, SNR index, trial index), so a sweep's output is
//! a pure function of its configuration whatever the worker count.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::fs::{File, OpenOptions};
use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::budget::BudgetReport;
use crate::channel::{ebn0_to_sigma, transmit, ChannelParams, LlrVector};
use crate::crc3;
use crate::error::{Error, Result};
use crate::rmcode::{CodewordBits, MessageBits, RmCode};
use crate::rng::{self, stream_key};
use crate::rpa::{rpa_decode, RpaConfig};
use crate::srpa::{
    budget_formula, crc_message, srpa_multi_decode, BudgetTarget, CorrelationMetric, LevelParams,
    PlanMode, SrpaConfig,
};

pub const CSV_HEADER: &str = "code_m,code_r,decoder,ebn0_db,trials,errors,bler,ci_low,ci_high,mean_fht,seed";

/// Environment variable holding the default worker count.
pub const WORKERS_ENV: &str = "RM_RPA_WORKERS";

const BATCH: u64 = 256;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CodeParams {
    pub m: u32,
    pub r: u32,
}

/// Decoder entry of a sweep configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum DecoderSpec {
    Rpa {
        #[serde(default)]
        label: Option<String>,
        #[serde(default = "default_epsilon")]
        epsilon: f64,
        #[serde(default = "default_true")]
        early_stop: bool,
    },
    Srpa {
        #[serde(default)]
        label: Option<String>,
        k: usize,
        #[serde(default)]
        crc: bool,
        /// Overrides the default per-level parameters.
        #[serde(default)]
        levels: Option<Vec<LevelParams>>,
        #[serde(default)]
        metric: CorrelationMetric,
        #[serde(default)]
        plan_mode: PlanMode,
    },
    /// Single sparse decoder keeping `ratio` of the recursions.
    Sparse {
        #[serde(default)]
        label: Option<String>,
        ratio: f64,
    },
}

fn default_epsilon() -> f64 {
    RpaConfig::default().epsilon
}

fn default_true() -> bool {
    true
}

impl DecoderSpec {
    pub fn rpa() -> Self {
        DecoderSpec::Rpa {
            label: None,
            epsilon: default_epsilon(),
            early_stop: true,
        }
    }

    pub fn rpa_full_rounds() -> Self {
        DecoderSpec::Rpa {
            label: None,
            epsilon: default_epsilon(),
            early_stop: false,
        }
    }

    pub fn srpa(k: usize, crc: bool) -> Self {
        DecoderSpec::Srpa {
            label: None,
            k,
            crc,
            levels: None,
            metric: CorrelationMetric::Hard,
            plan_mode: PlanMode::Fresh,
        }
    }

    pub fn sparse(ratio: f64) -> Self {
        DecoderSpec::Sparse { label: None, ratio }
    }

    pub fn label(&self) -> String {
        match self {
            DecoderSpec::Rpa { label: Some(l), .. }
            | DecoderSpec::Srpa { label: Some(l), .. }
            | DecoderSpec::Sparse { label: Some(l), .. } => l.clone(),
            DecoderSpec::Rpa { early_stop: true, .. } => "rpa".into(),
            DecoderSpec::Rpa { early_stop: false, .. } => "rpa-full-rounds".into(),
            DecoderSpec::Srpa { k, crc, .. } => {
                format!("{k}-srpa{}", if *crc { "-crc" } else { "" })
            }
            DecoderSpec::Sparse { ratio, .. } => format!("sparse-{ratio}"),
        }
    }

    pub fn resolve(&self, code: &RmCode, seed: u64) -> Result<Decoder> {
        let decoder = match self {
            DecoderSpec::Rpa {
                epsilon, early_stop, ..
            } => {
                let cfg = RpaConfig {
                    epsilon: *epsilon,
                    early_stop: *early_stop,
                    ..RpaConfig::default()
                };
                cfg.validate()?;
                if code.r() == 0 {
                    return Err(Error::Config("RPA needs order ≥ 1".into()));
                }
                Decoder::Rpa(cfg)
            }
            DecoderSpec::Srpa {
                k,
                crc,
                levels,
                metric,
                plan_mode,
                ..
            } => {
                let mut cfg = SrpaConfig::k_srpa(code, *k, *crc);
                if let Some(levels) = levels {
                    cfg.levels = levels.clone();
                }
                cfg.metric = *metric;
                cfg.plan_mode = *plan_mode;
                cfg.master_seed = stream_key(seed, &[rng::LABEL_PLAN]);
                cfg.validate(code)?;
                Decoder::Srpa(cfg)
            }
            DecoderSpec::Sparse { ratio, .. } => {
                if !(*ratio > 0.0 && *ratio <= 1.0) {
                    return Err(Error::Config(format!("sparse ratio {ratio} outside (0, 1]")));
                }
                let mut cfg = SrpaConfig::sparse_ratio(code, *ratio);
                cfg.master_seed = stream_key(seed, &[rng::LABEL_PLAN]);
                cfg.validate(code)?;
                Decoder::Srpa(cfg)
            }
        };
        Ok(decoder)
    }
}

/// A decoder ready to run on one code.
#[derive(Debug, Clone, PartialEq)]
pub enum Decoder {
    Rpa(RpaConfig),
    Srpa(SrpaConfig),
}

impl Decoder {
    pub fn uses_crc(&self) -> bool {
        matches!(self, Decoder::Srpa(cfg) if cfg.selection == crate::srpa::Selection::CrcThenMostLikely)
    }

    pub fn decode(
        &self,
        code: &RmCode,
        llr: &LlrVector,
        trial: u64,
        budget: &mut BudgetReport,
    ) -> Result<CodewordBits> {
        match self {
            Decoder::Rpa(cfg) => rpa_decode(code, llr, cfg, budget),
            Decoder::Srpa(cfg) => Ok(srpa_multi_decode(code, llr, cfg, trial, budget)?.codeword),
        }
    }

    /// Prediction for full-rounds RPA and sparse decoders; early-stopping
    /// RPA has no fixed count.
    pub fn predicted_budget(&self, code: &RmCode) -> Option<BudgetReport> {
        match self {
            Decoder::Rpa(cfg) if !cfg.early_stop => budget_formula(code, BudgetTarget::FullRpa).ok(),
            Decoder::Rpa(_) => None,
            Decoder::Srpa(cfg) => budget_formula(code, BudgetTarget::Sparse(cfg)).ok(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ChannelKind {
    #[default]
    Awgn,
    /// Hard-decision BPSK, p = Q(1/σ), unless `crossover` fixes p.
    Bsc,
    Noiseless,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelSpec {
    #[serde(default)]
    pub kind: ChannelKind,
    pub ebn0_db: Vec<f64>,
    #[serde(default)]
    pub crossover: Option<f64>,
}

/// Which rate converts Eb/N0 to σ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum RateConvention {
    /// k/n without CRC, (k−3)/n for CRC-aided decoders.
    #[default]
    Auto,
    Code,
    Payload,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunSpec {
    pub max_trials: u64,
    #[serde(default = "default_min_errors")]
    pub min_block_errors: u64,
    #[serde(default)]
    pub seed: Option<u64>,
    #[serde(default)]
    pub workers: Option<usize>,
    #[serde(default)]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub rate_convention: RateConvention,
}

fn default_min_errors() -> u64 {
    100
}

/// A full sweep configuration; see `configs/sweep.toml` for the file layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimConfig {
    pub code: CodeParams,
    pub channel: ChannelSpec,
    pub run: RunSpec,
    pub decoders: Vec<DecoderSpec>,
}

impl SimConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn validate(&self) -> Result<()> {
        if self.channel.ebn0_db.is_empty() {
            return Err(Error::Config("ebn0_db must not be empty".into()));
        }
        if self.run.max_trials == 0 || self.run.min_block_errors == 0 {
            return Err(Error::Config(
                "max_trials and min_block_errors must be at least 1".into(),
            ));
        }
        if self.decoders.is_empty() {
            return Err(Error::Config("no decoders configured".into()));
        }
        if self.run.seed.is_none() {
            return Err(Error::Config("a seed is required".into()));
        }
        let labels: HashSet<String> = self.decoders.iter().map(DecoderSpec::label).collect();
        if labels.len() != self.decoders.len() {
            return Err(Error::Config("decoder labels must be unique".into()));
        }
        if labels.iter().any(|l| l.contains(',') || l.contains('"')) {
            return Err(Error::Config("decoder labels must not contain commas or quotes".into()));
        }
        if let Some(p) = self.channel.crossover {
            ChannelParams::bsc(p)?;
        }
        let code = RmCode::new(self.code.m, self.code.r)?;
        for d in &self.decoders {
            let decoder = d.resolve(&code, 0)?;
            if decoder.uses_crc() && self.run.rate_convention != RateConvention::Code && code.k() <= crc3::WIDTH {
                return Err(Error::Config("code too small for CRC payload".into()));
            }
        }
        Ok(())
    }
}

/// Result at one (decoder, Eb/N0) point.
#[derive(Debug, Clone, PartialEq)]
pub struct PointResult {
    pub decoder: String,
    pub ebn0_db: f64,
    pub trials: u64,
    pub block_errors: u64,
    pub total_budget: BudgetReport,
    pub wall_time: Duration,
}

impl PointResult {
    pub fn bler(&self) -> f64 {
        self.block_errors as f64 / self.trials as f64
    }

    pub fn ci95(&self) -> (f64, f64) {
        wilson_interval(self.block_errors, self.trials)
    }

    pub fn mean_budget(&self) -> (f64, f64, f64) {
        let t = self.trials as f64;
        (
            self.total_budget.fht_calls as f64 / t,
            self.total_budget.projections as f64 / t,
            self.total_budget.aggregations as f64 / t,
        )
    }

    pub fn mean_fht(&self) -> f64 {
        self.mean_budget().0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub code: CodeParams,
    pub seed: u64,
    pub points: Vec<PointResult>,
}

/// 95% Wilson score interval for `errors` successes in `trials`.
pub fn wilson_interval(errors: u64, trials: u64) -> (f64, f64) {
    if trials == 0 {
        return (0.0, 1.0);
    }
    const Z: f64 = 1.959_963_984_540_054;
    let n = trials as f64;
    let p = errors as f64 / n;
    let denom = 1.0 + Z * Z / n;
    let centre = (p + Z * Z / (2.0 * n)) / denom;
    let half = Z * (p * (1.0 - p) / n + Z * Z / (4.0 * n * n)).sqrt() / denom;
    ((centre - half).max(0.0).min(p), (centre + half).min(1.0).max(p))
}

/// Outcome of one trial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrialOutcome {
    pub error: bool,
    pub budget: BudgetReport,
}

/// Everything needed to run trials at one (decoder, Eb/N0) point.
pub struct PointRunner<'a> {
    pub code: &'a RmCode,
    pub decoder: &'a Decoder,
    pub channel: ChannelParams,
    pub seed: u64,
    pub point: u64,
}

impl PointRunner<'_> {
    pub fn message(&self, trial: u64) -> MessageBits {
        let mut rng = rng::stream(self.seed, &[rng::LABEL_MESSAGE, self.point, trial]);
        let bits: Vec<u8> = (0..self.code.k()).map(|_| rng.random_range(0..2u8)).collect();
        if self.decoder.uses_crc() {
            crc_message(&bits[..self.code.k() - crc3::WIDTH])
        } else {
            MessageBits(bits)
        }
    }

    pub fn received(&self, cw: &CodewordBits, trial: u64) -> LlrVector {
        let mut rng = rng::stream(self.seed, &[rng::LABEL_CHANNEL, self.point, trial]);
        transmit(cw, &self.channel, &mut rng)
    }

    pub fn run_trial(&self, trial: u64) -> Result<TrialOutcome> {
        let cw = self.code.encode(&self.message(trial))?;
        let llr = self.received(&cw, trial);
        let mut budget = BudgetReport::new();
        let decoded = self
            .decoder
            .decode(self.code, &llr, (self.point << 40) | trial, &mut budget)?;
        Ok(TrialOutcome {
            error: decoded != cw,
            budget,
        })
    }

    /// Runs trials 0, 1, … until `min_errors` block errors or `max_trials`
    /// trials, whichever comes first. Trials run in parallel batches but
    /// are accumulated in index order.
    pub fn run(&self, max_trials: u64, min_errors: u64) -> Result<(u64, u64, BudgetReport)> {
        let (mut trials, mut errors, mut budget) = (0u64, 0u64, BudgetReport::new());
        while trials < max_trials && errors < min_errors {
            let end = (trials + BATCH).min(max_trials);
            let outcomes: Vec<Result<TrialOutcome>> =
                (trials..end).into_par_iter().map(|t| self.run_trial(t)).collect();
            for outcome in outcomes {
                let o = outcome?;
                trials += 1;
                errors += o.error as u64;
                budget += o.budget;
                if errors >= min_errors {
                    break;
                }
            }
        }
        Ok((trials, errors, budget))
    }
}

fn channel_for(cfg: &SimConfig, code: &RmCode, decoder: &Decoder, ebn0_db: f64) -> Result<ChannelParams> {
    let n = code.n() as f64;
    let payload = (code.k() - crc3::WIDTH.min(code.k())) as f64 / n;
    let rate = match cfg.run.rate_convention {
        RateConvention::Code => code.k() as f64 / n,
        RateConvention::Payload => payload,
        RateConvention::Auto if decoder.uses_crc() => payload,
        RateConvention::Auto => code.k() as f64 / n,
    };
    match cfg.channel.kind {
        ChannelKind::Awgn => ChannelParams::awgn(ebn0_to_sigma(ebn0_db, rate)?),
        ChannelKind::Bsc => match cfg.channel.crossover {
            Some(p) => ChannelParams::bsc(p),
            None => ChannelParams::bsc_from_ebn0(ebn0_db, rate),
        },
        ChannelKind::Noiseless => Ok(ChannelParams::Noiseless),
    }
}

/// Runs every (decoder, Eb/N0) point not listed in `skip` (label, Eb/N0 bits).
pub fn run_sweep_skipping(cfg: &SimConfig, skip: &HashSet<(String, u64)>) -> Result<SweepResult> {
    cfg.validate()?;
    let seed = cfg.run.seed.expect("validated");
    let code = RmCode::new(cfg.code.m, cfg.code.r)?;
    let workers = cfg.run.workers.unwrap_or_else(default_workers).max(1);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    let mut points = Vec::new();
    for spec in &cfg.decoders {
        let label = spec.label();
        let decoder = spec.resolve(&code, seed)?;
        for (e, &ebn0_db) in cfg.channel.ebn0_db.iter().enumerate() {
            if skip.contains(&(label.clone(), ebn0_db.to_bits())) {
                continue;
            }
            let runner = PointRunner {
                code: &code,
                decoder: &decoder,
                channel: channel_for(cfg, &code, &decoder, ebn0_db)?,
                seed,
                point: e as u64,
            };
            let start = Instant::now();
            let (trials, block_errors, total_budget) =
                pool.install(|| runner.run(cfg.run.max_trials, cfg.run.min_block_errors))?;
            points.push(PointResult {
                decoder: label.clone(),
                ebn0_db,
                trials,
                block_errors,
                total_budget,
                wall_time: start.elapsed(),
            });
        }
    }
    Ok(SweepResult {
        code: cfg.code,
        seed,
        points,
    })
}

pub fn run_sweep(cfg: &SimConfig) -> Result<SweepResult> {
    run_sweep_skipping(cfg, &HashSet::new())
}

pub fn default_workers() -> usize {
    std::env::var(WORKERS_ENV)
        .ok()
        .and_then(|v| v.parse().ok())
        .filter(|&w| w > 0)
        .unwrap_or_else(rayon::current_num_threads)
}

/// One CSV data row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CsvRow {
    pub code_m: u32,
    pub code_r: u32,
    pub decoder: String,
    pub ebn0_db: f64,
    pub trials: u64,
    pub errors: u64,
    pub bler: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub mean_fht: f64,
    pub seed: u64,
}

impl SweepResult {
    pub fn rows(&self) -> Vec<CsvRow> {
        self.points
            .iter()
            .map(|p| {
                let (ci_low, ci_high) = p.ci95();
                CsvRow {
                    code_m: self.code.m,
                    code_r: self.code.r,
                    decoder: p.decoder.clone(),
                    ebn0_db: p.ebn0_db,
                    trials: p.trials,
                    errors: p.block_errors,
                    bler: p.bler(),
                    ci_low,
                    ci_high,
                    mean_fht: p.mean_fht(),
                    seed: self.seed,
                }
            })
            .collect()
    }
}

fn format_row(row: &CsvRow) -> String {
    format!(
        "{},{},{},{},{},{},{},{},{},{},{}",
        row.code_m,
        row.code_r,
        row.decoder,
        row.ebn0_db,
        row.trials,
        row.errors,
        row.bler,
        row.ci_low,
        row.ci_high,
        row.mean_fht,
        row.seed
    )
}

pub fn read_csv(path: &Path) -> Result<Vec<CsvRow>> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| Error::Config(e.to_string()))?;
    let header = reader.headers().map_err(|e| Error::Config(e.to_string()))?;
    if header.iter().collect::<Vec<_>>().join(",") != CSV_HEADER {
        return Err(Error::Config(format!("{}: unexpected CSV header", path.display())));
    }
    reader
        .deserialize()
        .map(|r| r.map_err(|e| Error::Config(e.to_string())))
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Svg,
}

/// Writes results. CSV output is append-only: an existing file keeps its
/// rows and receives the new ones. SVG output is rewritten.
pub fn emit_results(res: &SweepResult, format: OutputFormat, path: &Path) -> std::io::Result<()> {
    let rows = res.rows();
    if rows.is_empty() {
        return Err(std::io::Error::new(
            std::io::ErrorKind::InvalidInput,
            "no results to write",
        ));
    }
    match format {
        OutputFormat::Csv => append_csv(&rows, path),
        OutputFormat::Svg => std::fs::write(path, render_svg(&rows)),
    }
}

fn append_csv(rows: &[CsvRow], path: &Path) -> std::io::Result<()> {
    let fresh = std::fs::metadata(path).map(|m| m.len() == 0).unwrap_or(true);
    let mut file = OpenOptions::new().create(true).append(true).open(path)?;
    let mut text = String::new();
    if fresh {
        text.push_str(CSV_HEADER);
        text.push('\n');
    }
    for row in rows {
        text.push_str(&format_row(row));
        text.push('\n');
    }
    file.write_all(text.as_bytes())
}

/// Writes the effective configuration next to the CSV.
pub fn write_config_echo(cfg: &SimConfig, csv_path: &Path) -> Result<PathBuf> {
    let mut path = csv_path.as_os_str().to_owned();
    path.push(".config.toml");
    let path = PathBuf::from(path);
    let mut file = File::create(&path).map_err(|e| Error::Config(e.to_string()))?;
    file.write_all(cfg.to_toml()?.as_bytes())
        .map_err(|e| Error::Config(e.to_string()))?;
    Ok(path)
}

/// Points already present in an existing CSV for this configuration.
pub fn completed_points(cfg: &SimConfig, rows: &[CsvRow]) -> HashSet<(String, u64)> {
    rows.iter()
        .filter(|r| {
            r.code_m == cfg.code.m && r.code_r == cfg.code.r && Some(r.seed) == cfg.run.seed
        })
        .map(|r| (r.decoder.clone(), r.ebn0_db.to_bits()))
        .collect()
}

const PALETTE: [&str; 8] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#17becf",
];

/// Log-scale BLER against Eb/N0, one polyline per decoder. Zero-error points
/// are omitted.
pub fn render_svg(rows: &[CsvRow]) -> String {
    let (w, h) = (640.0, 480.0);
    let (left, right, top, bottom) = (70.0, 160.0, 30.0, 50.0);
    let plotted: Vec<&CsvRow> = rows.iter().filter(|r| r.bler > 0.0).collect();
    let xs = plotted.iter().map(|r| r.ebn0_db);
    let (mut x0, mut x1) = xs.clone().fold((f64::MAX, f64::MIN), |(a, b), x| (a.min(x), b.max(x)));
    if plotted.is_empty() {
        (x0, x1) = (0.0, 1.0);
    }
    if x1 - x0 < 1e-9 {
        x0 -= 0.5;
        x1 += 0.5;
    }
    let lo = plotted
        .iter()
        .map(|r| r.bler.log10().floor())
        .fold(0.0f64, f64::min)
        .min(-1.0);
    let hi = 0.0;
    let px = |x: f64| left + (x - x0) / (x1 - x0) * (w - left - right);
    let py = |b: f64| top + (hi - b.log10()) / (hi - lo) * (h - top - bottom);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}" font-family="sans-serif" font-size="12">"#
    );
    let _ = writeln!(svg, r#"<rect width="{w}" height="{h}" fill="white"/>"#);
    let (pl, pr, pt, pb) = (left, w - right, top, h - bottom);
    let _ = writeln!(
        svg,
        r#"<rect x="{pl}" y="{pt}" width="{}" height="{}" fill="none" stroke="black"/>"#,
        pr - pl,
        pb - pt
    );
    let mut decade = lo;
    while decade <= hi {
        let y = py(10f64.powf(decade));
        let _ = writeln!(
            svg,
            r##"<line x1="{pl}" y1="{y:.2}" x2="{pr}" y2="{y:.2}" stroke="#dddddd"/><text x="{}" y="{:.2}" text-anchor="end">1e{}</text>"##,
            pl - 6.0,
            y + 4.0,
            decade as i64
        );
        decade += 1.0;
    }
    for i in 0..=4 {
        let x = x0 + (x1 - x0) * i as f64 / 4.0;
        let _ = writeln!(
            svg,
            r#"<text x="{:.2}" y="{}" text-anchor="middle">{x:.2}</text>"#,
            px(x),
            pb + 18.0
        );
    }
    let _ = writeln!(
        svg,
        r#"<text x="{:.2}" y="{}" text-anchor="middle">Eb/N0 [dB]</text>"#,
        (pl + pr) / 2.0,
        h - 10.0
    );
    let _ = writeln!(
        svg,
        r#"<text x="18" y="{:.2}" text-anchor="middle" transform="rotate(-90 18 {:.2})">BLER</text>"#,
        (pt + pb) / 2.0,
        (pt + pb) / 2.0
    );

    let mut labels: Vec<&str> = Vec::new();
    for r in rows {
        if !labels.contains(&r.decoder.as_str()) {
            labels.push(&r.decoder);
        }
    }
    for (i, label) in labels.iter().enumerate() {
        let colour = PALETTE[i % PALETTE.len()];
        let mut pts: Vec<&&CsvRow> = plotted.iter().filter(|r| r.decoder == *label).collect();
        pts.sort_by(|a, b| a.ebn0_db.total_cmp(&b.ebn0_db));
        let coords: Vec<String> = pts
            .iter()
            .map(|r| format!("{:.2},{:.2}", px(r.ebn0_db), py(r.bler)))
            .collect();
        let _ = writeln!(
            svg,
            r#"<polyline class="series" data-decoder="{label}" fill="none" stroke="{colour}" stroke-width="2" points="{}"/>"#,
            coords.join(" ")
        );
        let ly = top + 16.0 + 18.0 * i as f64;
        let _ = writeln!(
            svg,
            r#"<line x1="{}" y1="{ly}" x2="{}" y2="{ly}" stroke="{colour}" stroke-width="2"/><text x="{}" y="{}">{label}</text>"#,
            pr + 10.0,
            pr + 30.0,
            pr + 36.0,
            ly + 4.0
        );
    }
    svg.push_str("</svg>\n");
    svg
}

/// One line of the budget comparison table.
#[derive(Debug, Clone, PartialEq)]
pub struct BudgetRow {
    pub decoder: String,
    pub predicted_fht: Option<u64>,
    pub measured_mean_fht: f64,
    /// 1 − measured/full-rounds, in whole percent.
    pub savings_percent: i64,
}

/// Integer-percent savings of `fht` against `full_rounds` FHTs.
pub fn savings_percent(fht: f64, full_rounds: u64) -> i64 {
    (100.0 * (1.0 - fht / full_rounds as f64)).round() as i64
}

/// Predicted and measured FHT counts for each decoder on `code`, measured
/// over `trials` AWGN decodes at `ebn0_db` (code-rate convention).
pub fn compare_budget(
    code: &RmCode,
    decoders: &[DecoderSpec],
    ebn0_db: f64,
    trials: u64,
    seed: u64,
) -> Result<Vec<BudgetRow>> {
    let full = budget_formula(code, BudgetTarget::FullRpa)?.fht_calls;
    let rate = code.k() as f64 / code.n() as f64;
    let channel = ChannelParams::awgn(ebn0_to_sigma(ebn0_db, rate)?)?;
    decoders
        .iter()
        .map(|spec| {
            let decoder = spec.resolve(code, seed)?;
            let runner = PointRunner {
                code,
                decoder: &decoder,
                channel,
                seed,
                point: 0,
            };
            let (n, _, total) = runner.run(trials.max(1), u64::MAX)?;
            let measured = total.fht_calls as f64 / n as f64;
            Ok(BudgetRow {
                decoder: spec.label(),
                predicted_fht: decoder.predicted_budget(code).map(|b| b.fht_calls),
                measured_mean_fht: measured,
                savings_percent: savings_percent(measured, full),
            })
        })
        .collect()
}

pub fn format_budget_table(code: &RmCode, rows: &[BudgetRow]) -> String {
    let mut out = format!(
        "RM({},{})  n = {}  k = {}\n{:<20} {:>14} {:>16} {:>8}\n",
        code.m(),
        code.r(),
        code.n(),
        code.k(),
        "decoder",
        "predicted_fht",
        "measured_fht",
        "savings"
    );
    for row in rows {
        let predicted = row
            .predicted_fht
            .map_or_else(|| "-".to_string(), |p| p.to_string());
        let _ = writeln!(
            out,
            "{:<20} {:>14} {:>16.1} {:>7}%",
            row.decoder, predicted, row.measured_mean_fht, row.savings_percent
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(decoders: Vec<DecoderSpec>, ebn0: Vec<f64>) -> SimConfig {
        SimConfig {
            code: CodeParams { m: 5, r: 2 },
            channel: ChannelSpec {
                kind: ChannelKind::Awgn,
                ebn0_db: ebn0,
                crossover: None,
            },
            run: RunSpec {
                max_trials: 200,
                min_block_errors: 1000,
                seed: Some(1),
                workers: Some(2),
                output: None,
                rate_convention: RateConvention::Auto,
            },
            decoders,
        }
    }

    #[test]
    fn wilson_brackets_estimate() {
        for (e, n) in [(0, 10), (3, 10), (10, 10), (50, 10_000), (1, 1)] {
            let (lo, hi) = wilson_interval(e, n);
            let p = e as f64 / n as f64;
            assert!(lo <= p && p <= hi && lo >= 0.0 && hi <= 1.0);
        }
        let (lo, hi) = wilson_interval(50, 100);
        assert!((lo - 0.4038).abs() < 1e-3 && (hi - 0.5962).abs() < 1e-3);
    }

    #[test]
    fn savings_examples() {
        assert_eq!(savings_percent(96.0, 381), 75);
        assert_eq!(savings_percent(49152.0, 388620), 87);
        assert_eq!(savings_percent(512.0, 2044), 75);
        assert_eq!(savings_percent(256.0, 1020), 75);
    }

    #[test]
    fn labels() {
        assert_eq!(DecoderSpec::rpa().label(), "rpa");
        assert_eq!(DecoderSpec::rpa_full_rounds().label(), "rpa-full-rounds");
        assert_eq!(DecoderSpec::srpa(2, true).label(), "2-srpa-crc");
        assert_eq!(DecoderSpec::sparse(0.5).label(), "sparse-0.5");
    }

    #[test]
    fn config_validation() {
        let mut cfg = config(vec![DecoderSpec::rpa()], vec![]);
        assert!(cfg.validate().is_err());
        cfg.channel.ebn0_db = vec![1.0];
        assert!(cfg.validate().is_ok());
        cfg.run.seed = None;
        assert!(cfg.validate().is_err());
        cfg.run.seed = Some(1);
        cfg.decoders.push(DecoderSpec::rpa());
        assert!(cfg.validate().is_err());
        cfg.decoders = vec![DecoderSpec::srpa(0, false)];
        assert!(cfg.validate().is_err());
        cfg.code = CodeParams { m: 5, r: 1 };
        cfg.decoders = vec![DecoderSpec::srpa(2, false)];
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn toml_round_trip() {
        let cfg = config(
            vec![DecoderSpec::rpa(), DecoderSpec::srpa(2, true), DecoderSpec::sparse(0.25)],
            vec![1.0, 2.5],
        );
        let text = cfg.to_toml().unwrap();
        assert_eq!(SimConfig::from_toml(&text).unwrap(), cfg);
    }

    #[test]
    fn shipped_example_config_is_valid() {
        let mut cfg = SimConfig::from_toml(include_str!("../../../configs/sweep.toml")).unwrap();
        cfg.run.seed = Some(1);
        cfg.validate().unwrap();
        let labels: Vec<String> = cfg.decoders.iter().map(DecoderSpec::label).collect();
        assert_eq!(labels, ["rpa", "2-srpa-crc", "8-srpa-crc", "sparse-0.25"]);
    }

    #[test]
    fn parses_documented_layout() {
        let text = r#"
[code]
m = 7
r = 2

[channel]
kind = "awgn"
ebn0_db = [1.0, 2.0, 3.0]

[run]
max_trials = 1000
min_block_errors = 50
seed = 42
rate_convention = "code"

[[decoders]]
kind = "rpa"

[[decoders]]
kind = "srpa"
k = 2
crc = true

[[decoders]]
kind = "sparse"
ratio = 0.5
label = "half"
"#;
        let cfg = SimConfig::from_toml(text).unwrap();
        assert_eq!(cfg.decoders.len(), 3);
        assert_eq!(cfg.decoders[2].label(), "half");
        assert_eq!(cfg.run.rate_convention, RateConvention::Code);
        cfg.validate().unwrap();
    }

    #[test]
    fn noiseless_channel_never_errs() {
        let mut cfg = config(
            vec![DecoderSpec::rpa(), DecoderSpec::srpa(2, true), DecoderSpec::sparse(0.25)],
            vec![0.0],
        );
        cfg.channel.kind = ChannelKind::Noiseless;
        cfg.run.max_trials = 1000;
        let res = run_sweep(&cfg).unwrap();
        for p in &res.points {
            assert_eq!(p.trials, 1000);
            assert_eq!(p.block_errors, 0, "{}", p.decoder);
        }
    }

    #[test]
    fn useless_channel_always_errs() {
        let mut cfg = config(vec![DecoderSpec::rpa(), DecoderSpec::srpa(2, false)], vec![0.0]);
        cfg.channel.kind = ChannelKind::Bsc;
        cfg.channel.crossover = Some(0.5);
        cfg.run.max_trials = 300;
        let res = run_sweep(&cfg).unwrap();
        for p in &res.points {
            let (lo, hi) = p.ci95();
            assert!(hi >= 1.0 - 1e-12, "{}: {lo} {hi}", p.decoder);
            assert!(p.bler() > 0.97);
        }
    }

    #[test]
    fn stop_rule_counts_errors_in_trial_order() {
        let mut cfg = config(vec![DecoderSpec::rpa()], vec![-2.0]);
        cfg.run.max_trials = 5000;
        cfg.run.min_block_errors = 7;
        let res = run_sweep(&cfg).unwrap();
        let p = &res.points[0];
        assert_eq!(p.block_errors, 7);
        // The last counted trial is an error.
        let code = RmCode::new(5, 2).unwrap();
        let decoder = DecoderSpec::rpa().resolve(&code, 1).unwrap();
        let runner = PointRunner {
            code: &code,
            decoder: &decoder,
            channel: channel_for(&cfg, &code, &decoder, -2.0).unwrap(),
            seed: 1,
            point: 0,
        };
        assert!(runner.run_trial(p.trials - 1).unwrap().error);
        let errs = (0..p.trials).filter(|&t| runner.run_trial(t).unwrap().error).count();
        assert_eq!(errs as u64, 7);
    }

    #[test]
    fn csv_and_svg_structure() {
        let cfg = config(
            vec![DecoderSpec::rpa(), DecoderSpec::srpa(2, false)],
            vec![0.0, 1.0, 2.0],
        );
        let res = run_sweep(&cfg).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let csv_path = dir.path().join("r.csv");
        emit_results(&res, OutputFormat::Csv, &csv_path).unwrap();
        let text = std::fs::read_to_string(&csv_path).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], CSV_HEADER);
        assert_eq!(lines.len(), 7);
        let rows = read_csv(&csv_path).unwrap();
        assert_eq!(rows, res.rows());

        let svg_path = dir.path().join("r.svg");
        emit_results(&res, OutputFormat::Svg, &svg_path).unwrap();
        let svg = std::fs::read_to_string(&svg_path).unwrap();
        assert_eq!(svg.matches("<polyline").count(), 2);

        let one = SweepResult {
            points: res.points[..1].to_vec(),
            ..res.clone()
        };
        let single = dir.path().join("one.csv");
        emit_results(&one, OutputFormat::Csv, &single).unwrap();
        assert_eq!(std::fs::read_to_string(&single).unwrap().lines().count(), 2);

        let empty = SweepResult {
            points: vec![],
            ..res
        };
        assert!(emit_results(&empty, OutputFormat::Csv, &dir.path().join("e.csv")).is_err());
        assert!(emit_results(&one, OutputFormat::Csv, Path::new("/nonexistent/dir/x.csv")).is_err());
    }

    #[test]
    fn resumption_skips_completed_points() {
        let cfg = config(vec![DecoderSpec::rpa()], vec![0.0, 1.0]);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("r.csv");
        let mut partial = cfg.clone();
        partial.channel.ebn0_db = vec![0.0];
        emit_results(&run_sweep(&partial).unwrap(), OutputFormat::Csv, &path).unwrap();
        let done = completed_points(&cfg, &read_csv(&path).unwrap());
        let rest = run_sweep_skipping(&cfg, &done).unwrap();
        assert_eq!(rest.points.len(), 1);
        assert_eq!(rest.points[0].ebn0_db, 1.0);
        emit_results(&rest, OutputFormat::Csv, &path).unwrap();

        let whole = dir.path().join("whole.csv");
        emit_results(&run_sweep(&cfg).unwrap(), OutputFormat::Csv, &whole).unwrap();
        assert_eq!(
            std::fs::read_to_string(&path).unwrap(),
            std::fs::read_to_string(&whole).unwrap()
        );
    }

    #[test]
    fn budget_comparison_small() {
        let code = RmCode::new(6, 2).unwrap();
        let rows = compare_budget(
            &code,
            &[DecoderSpec::rpa_full_rounds(), DecoderSpec::srpa(2, true)],
            3.0,
            3,
            9,
        )
        .unwrap();
        assert_eq!(rows[0].predicted_fht, Some(189));
        assert_eq!(rows[0].measured_mean_fht, 189.0);
        assert_eq!(rows[0].savings_percent, 0);
        assert_eq!(rows[1].predicted_fht, Some(2 * 3 * 8));
        assert_eq!(rows[1].measured_mean_fht, 48.0);
        assert!(format_budget_table(&code, &rows).contains("2-srpa-crc"));
    }
}
