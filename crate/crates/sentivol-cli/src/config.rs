//! Run configuration: TOML schema, validation, and hashing.
//!
//! A config names one or more market indices (each with a price or return
//! source), the sentiment proxies to build for each, the variance-model
//! options, and the sub-periods. Validation happens before any computation;
//! an invalid config exits with code 2 and touches nothing on disk.

use std::collections::BTreeSet;
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use sentivol_core::egarch::{ExogTiming, FitOptions, Sigma0Policy};
use sentivol_core::sentiment::SentimentKind;

/// Where a proxy's raw material comes from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProxySource {
    /// The index's own price levels (momentum indicators).
    Levels,
    /// The index's own returns (the volatility indicator).
    Returns,
    /// A level column in a dated CSV, ingested as the indicator itself.
    Csv,
    /// A `date,put_volume,call_volume` CSV (put/call ratio).
    OptionVolumes,
    /// A `date,bond_id,market_value,ytm_percent` CSV (default-risk share).
    BondSnapshots,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProxyConfig {
    pub kind: SentimentKind,
    pub from: ProxySource,
    /// CSV path for the csv / option_volumes / bond_snapshots sources.
    pub path: Option<PathBuf>,
    /// Column name for the csv source.
    pub column: Option<String>,
    /// Momentum windows (levels source).
    pub short_window: Option<usize>,
    pub long_window: Option<usize>,
    /// Rolling window (returns source).
    pub window: Option<usize>,
    /// Yield threshold in percent (bond_snapshots source).
    pub threshold: Option<f64>,
    /// Overrides the kind's default variance-model eligibility.
    pub use_in_egarch: Option<bool>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IndexConfig {
    pub label: String,
    /// Exactly one of `prices_csv` and `returns_csv`.
    pub prices_csv: Option<PathBuf>,
    pub prices_column: Option<String>,
    pub returns_csv: Option<PathBuf>,
    pub returns_column: Option<String>,
    #[serde(default)]
    pub proxies: Vec<ProxyConfig>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PeriodConfig {
    pub label: String,
    #[serde(deserialize_with = "de_date")]
    pub start: NaiveDate,
    #[serde(deserialize_with = "de_date")]
    pub end: NaiveDate,
}

/// Accepts both TOML's native date literal (`2000-01-01`) and a quoted
/// `"YYYY-MM-DD"` string.
fn de_date<'de, D: serde::Deserializer<'de>>(d: D) -> Result<NaiveDate, D::Error> {
    use serde::de::Error as _;
    let value = toml::Value::deserialize(d)?;
    let text = match &value {
        toml::Value::String(s) => s.clone(),
        toml::Value::Datetime(dt) => dt.to_string(),
        other => return Err(D::Error::custom(format!("expected a date, got {other}"))),
    };
    NaiveDate::parse_from_str(&text, "%Y-%m-%d")
        .map_err(|_| D::Error::custom(format!("invalid date '{text}', expected YYYY-MM-DD")))
}

/// Whether each period's variance model carries all eligible proxies jointly
/// or one proxy at a time.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum DeltaMode {
    #[default]
    Joint,
    Separate,
}

#[derive(Debug, Clone, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct EgarchConfig {
    pub multistart: Option<usize>,
    pub tolerance: Option<f64>,
    pub max_iterations: Option<usize>,
    pub min_observations: Option<usize>,
    /// "sample_variance" (default), "unconditional", or a positive number.
    pub sigma0: Option<toml::Value>,
    pub exog_timing: Option<ExogTiming>,
    pub delta_mode: Option<DeltaMode>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OutputFormat {
    Json,
    Text,
    Csv,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub seed: u64,
    pub out_dir: PathBuf,
    /// Defaults to all three formats. JSON is always written; this controls
    /// the rendered tables.
    pub formats: Option<Vec<OutputFormat>>,
    pub indices: Vec<IndexConfig>,
    #[serde(default)]
    pub egarch: EgarchConfig,
    /// Defaults to the three standard sub-periods when omitted.
    pub periods: Option<Vec<PeriodConfig>>,
}

/// A config error message; the caller maps these to exit code 2.
#[derive(Debug)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "config error: {}", self.0)
    }
}

impl std::error::Error for ConfigError {}

fn fail(message: impl Into<String>) -> ConfigError {
    ConfigError(message.into())
}

pub fn default_periods() -> Vec<PeriodConfig> {
    let d = |y, m, day| NaiveDate::from_ymd_opt(y, m, day).expect("valid date");
    vec![
        PeriodConfig {
            label: "before".to_string(),
            start: d(2000, 1, 1),
            end: d(2008, 8, 31),
        },
        PeriodConfig {
            label: "crisis".to_string(),
            start: d(2008, 9, 1),
            end: d(2009, 5, 31),
        },
        PeriodConfig {
            label: "after".to_string(),
            start: d(2009, 6, 1),
            end: d(2019, 3, 18),
        },
    ]
}

/// The config text and its digest, kept for the manifest.
pub struct LoadedConfig {
    pub config: RunConfig,
    pub sha256: String,
    pub path: PathBuf,
}

pub fn load(path: &Path) -> Result<LoadedConfig, ConfigError> {
    let raw = std::fs::read(path)
        .map_err(|e| fail(format!("cannot read {}: {e}", path.display())))?;
    let text = std::str::from_utf8(&raw)
        .map_err(|_| fail(format!("{} is not UTF-8", path.display())))?;
    let config: RunConfig =
        toml::from_str(text).map_err(|e| fail(format!("{}: {e}", path.display())))?;
    let digest = Sha256::digest(&raw);
    let sha256 = digest.iter().map(|b| format!("{b:02x}")).collect();
    Ok(LoadedConfig {
        config,
        sha256,
        path: path.to_path_buf(),
    })
}

impl RunConfig {
    /// Full structural validation; called before anything touches disk.
    pub fn validate(&self, base_dir: &Path) -> Result<(), ConfigError> {
        if self.indices.is_empty() {
            return Err(fail("at least one [[indices]] entry is required"));
        }
        let mut labels = BTreeSet::new();
        for index in &self.indices {
            check_label("index", &index.label)?;
            if !labels.insert(&index.label) {
                return Err(fail(format!("duplicate index label {:?}", index.label)));
            }
            match (&index.prices_csv, &index.returns_csv) {
                (Some(_), Some(_)) => {
                    return Err(fail(format!(
                        "index {:?}: give prices_csv or returns_csv, not both",
                        index.label
                    )));
                }
                (None, None) => {
                    return Err(fail(format!(
                        "index {:?}: one of prices_csv or returns_csv is required",
                        index.label
                    )));
                }
                _ => {}
            }
            if index.prices_csv.is_some() && index.prices_column.is_none() {
                return Err(fail(format!(
                    "index {:?}: prices_column is required with prices_csv",
                    index.label
                )));
            }
            if index.returns_csv.is_some() && index.returns_column.is_none() {
                return Err(fail(format!(
                    "index {:?}: returns_column is required with returns_csv",
                    index.label
                )));
            }
            for p in [&index.prices_csv, &index.returns_csv].into_iter().flatten() {
                check_file(base_dir, p)?;
            }
            if index.proxies.is_empty() {
                return Err(fail(format!(
                    "index {:?}: at least one proxy is required",
                    index.label
                )));
            }
            let mut kinds = BTreeSet::new();
            for proxy in &index.proxies {
                if !kinds.insert(proxy.kind) {
                    return Err(fail(format!(
                        "index {:?}: duplicate proxy kind {}",
                        index.label, proxy.kind
                    )));
                }
                proxy.validate(&index.label, base_dir)?;
            }
        }
        let mut period_labels = BTreeSet::new();
        for period in self.periods() {
            check_label("period", &period.label)?;
            if period.start > period.end {
                return Err(fail(format!(
                    "period {:?}: start {} is after end {}",
                    period.label, period.start, period.end
                )));
            }
            if !period_labels.insert(period.label.clone()) {
                return Err(fail(format!("duplicate period label {:?}", period.label)));
            }
        }
        self.fit_options().map(|_| ())
    }

    pub fn periods(&self) -> Vec<PeriodConfig> {
        self.periods.clone().unwrap_or_else(default_periods)
    }

    pub fn formats(&self) -> Vec<OutputFormat> {
        self.formats.clone().unwrap_or_else(|| {
            vec![OutputFormat::Json, OutputFormat::Text, OutputFormat::Csv]
        })
    }

    pub fn delta_mode(&self) -> DeltaMode {
        self.egarch.delta_mode.unwrap_or_default()
    }

    /// Translates the `[egarch]` table into fit options, validating as it
    /// goes. The multistart jitter stream is seeded by the run seed.
    pub fn fit_options(&self) -> Result<FitOptions, ConfigError> {
        let mut options = FitOptions {
            jitter_seed: self.seed,
            ..FitOptions::default()
        };
        let e = &self.egarch;
        if let Some(m) = e.multistart {
            if m == 0 {
                return Err(fail("egarch.multistart must be at least 1"));
            }
            options.multistart = m;
        }
        if let Some(t) = e.tolerance {
            if !(t > 0.0) {
                return Err(fail("egarch.tolerance must be positive"));
            }
            options.tolerance = t;
        }
        if let Some(iters) = e.max_iterations {
            if iters == 0 {
                return Err(fail("egarch.max_iterations must be at least 1"));
            }
            options.max_iterations = iters;
        }
        if let Some(min) = e.min_observations {
            options.min_observations = min;
        }
        if let Some(timing) = e.exog_timing {
            options.exog_timing = timing;
        }
        if let Some(value) = &e.sigma0 {
            options.sigma0 = parse_sigma0(value)?;
        }
        Ok(options)
    }
}

fn parse_sigma0(value: &toml::Value) -> Result<Sigma0Policy, ConfigError> {
    match value {
        toml::Value::String(s) => match s.as_str() {
            "sample_variance" => Ok(Sigma0Policy::SampleVariance),
            "unconditional" => Ok(Sigma0Policy::Unconditional),
            other => Err(fail(format!(
                "egarch.sigma0: expected \"sample_variance\", \"unconditional\", \
                 or a positive number, got {other:?}"
            ))),
        },
        toml::Value::Float(v) if *v > 0.0 => Ok(Sigma0Policy::Fixed(*v)),
        toml::Value::Integer(v) if *v > 0 => Ok(Sigma0Policy::Fixed(*v as f64)),
        other => Err(fail(format!(
            "egarch.sigma0: expected \"sample_variance\", \"unconditional\", \
             or a positive number, got {other}"
        ))),
    }
}

impl ProxyConfig {
    fn validate(&self, index_label: &str, base_dir: &Path) -> Result<(), ConfigError> {
        let at = |msg: String| fail(format!("index {index_label:?}, proxy {}: {msg}", self.kind));
        match self.from {
            ProxySource::Levels => {
                if !matches!(self.kind, SentimentKind::Smmi | SentimentKind::Bmmi) {
                    return Err(at("only momentum kinds build from price levels".into()));
                }
                if let (Some(s), Some(l)) = (self.short_window, self.long_window) {
                    if s == 0 || s >= l {
                        return Err(at(format!("windows must satisfy 0 < short < long, got {s}/{l}")));
                    }
                }
            }
            ProxySource::Returns => {
                if self.kind != SentimentKind::Bmsi {
                    return Err(at("only the volatility kind builds from returns".into()));
                }
                if self.window == Some(0) || self.window == Some(1) {
                    return Err(at("window must be at least 2".into()));
                }
            }
            ProxySource::Csv => {
                let path = self.path.as_ref().ok_or_else(|| at("path is required".into()))?;
                check_file(base_dir, path)?;
                if self.column.is_none() {
                    return Err(at("column is required".into()));
                }
            }
            ProxySource::OptionVolumes => {
                if self.kind != SentimentKind::Smsi {
                    return Err(at("option volumes only build the put/call ratio".into()));
                }
                let path = self.path.as_ref().ok_or_else(|| at("path is required".into()))?;
                check_file(base_dir, path)?;
            }
            ProxySource::BondSnapshots => {
                if self.kind != SentimentKind::Dri {
                    return Err(at("bond snapshots only build the default-risk share".into()));
                }
                let path = self.path.as_ref().ok_or_else(|| at("path is required".into()))?;
                check_file(base_dir, path)?;
                if let Some(t) = self.threshold {
                    if !t.is_finite() {
                        return Err(at(format!("threshold must be finite, got {t}")));
                    }
                }
            }
        }
        Ok(())
    }

    /// Whether this proxy's day-over-day changes enter the variance model.
    pub fn egarch_eligible(&self) -> bool {
        self.use_in_egarch
            .unwrap_or_else(|| self.kind.egarch_eligible_by_default())
    }
}

/// Paths in the config resolve relative to the config file's directory.
pub fn resolve(base_dir: &Path, p: &Path) -> PathBuf {
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base_dir.join(p)
    }
}

/// Labels flow into file names, so they are restricted to a safe charset.
fn check_label(what: &str, label: &str) -> Result<(), ConfigError> {
    if label.is_empty() {
        return Err(fail(format!("{what} labels must be non-empty")));
    }
    if !label
        .chars()
        .all(|c| c.is_ascii_alphanumeric() || matches!(c, '-' | '_' | '.'))
    {
        return Err(fail(format!(
            "{what} label {label:?} may only contain ASCII letters, digits, '-', '_', '.'"
        )));
    }
    Ok(())
}

fn check_file(base_dir: &Path, p: &Path) -> Result<(), ConfigError> {
    let full = resolve(base_dir, p);
    if !full.is_file() {
        return Err(fail(format!("referenced file {} does not exist", full.display())));
    }
    Ok(())
}
