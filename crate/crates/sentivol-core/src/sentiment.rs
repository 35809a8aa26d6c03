//! Construction of the six market-activity sentiment indicators.
//!
//! Each constructor returns a [`SentimentSeries`]: the observations plus the
//! indicator kind and the parameters actually used, so downstream reports can
//! state how an index was built. Level constraints (ratios nonnegative, the
//! distress share inside `[0, 1]`) are enforced at construction; differenced
//! series are exempt since differences legitimately change sign.

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::series::{self, ObservationSeries};

pub const DEFAULT_MOMENTUM_SHORT: usize = 5;
pub const DEFAULT_MOMENTUM_LONG: usize = 250;
pub const DEFAULT_STABILITY_WINDOW: usize = 20;
pub const DEFAULT_DISTRESS_YIELD_THRESHOLD: f64 = 8.0;

/// The six indicator families.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum SentimentKind {
    /// Stock market momentum: short/long moving-average ratio of index levels.
    #[serde(rename = "SMMI")]
    Smmi,
    /// Stock market strength: put/call option volume ratio.
    #[serde(rename = "SMSI")]
    Smsi,
    /// Implied volatility of index options.
    #[serde(rename = "SVIX")]
    Svix,
    /// Bond market momentum: short/long moving-average ratio of bond index levels.
    #[serde(rename = "BMMI")]
    Bmmi,
    /// Bond market stability: rolling standard deviation of bond returns.
    #[serde(rename = "BMSI")]
    Bmsi,
    /// Default risk: market-value share of bonds yielding above a distress threshold.
    #[serde(rename = "DRI")]
    Dri,
}

impl SentimentKind {
    pub fn label(&self) -> &'static str {
        match self {
            SentimentKind::Smmi => "SMMI",
            SentimentKind::Smsi => "SMSI",
            SentimentKind::Svix => "SVIX",
            SentimentKind::Bmmi => "BMMI",
            SentimentKind::Bmsi => "BMSI",
            SentimentKind::Dri => "DRI",
        }
    }

    /// Whether the indicator's source data is continuous enough for the
    /// variance-equation regressor by default. The put/call ratio (zero-call
    /// days are dropped) and the bond cross-sections (irregular snapshots)
    /// are not; they stay available to the squared-residual regressions.
    pub fn egarch_eligible_by_default(&self) -> bool {
        !matches!(self, SentimentKind::Smsi | SentimentKind::Dri)
    }

    pub fn all() -> [SentimentKind; 6] {
        [
            SentimentKind::Smmi,
            SentimentKind::Smsi,
            SentimentKind::Svix,
            SentimentKind::Bmmi,
            SentimentKind::Bmsi,
            SentimentKind::Dri,
        ]
    }
}

impl std::fmt::Display for SentimentKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

/// Momentum output convention: sign-meaningful percent deviation (default) or
/// the raw short/long average ratio.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum MomentumOutput {
    /// `100 * (short_ma / long_ma - 1)`; zero means averages agree.
    #[default]
    PercentDeviation,
    /// `short_ma / long_ma`; one means averages agree.
    RawRatio,
}

/// Parameters an indicator was actually built with; carried into artifacts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ConstructionParams {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub short_window: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub long_window: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub window: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub threshold: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<MomentumOutput>,
    #[serde(default)]
    pub differenced: bool,
}

/// A sentiment indicator: observations tagged with their kind and construction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SentimentData", into = "SentimentData")]
pub struct SentimentSeries {
    series: ObservationSeries,
    kind: SentimentKind,
    params: ConstructionParams,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct SentimentData {
    series: ObservationSeries,
    kind: SentimentKind,
    params: ConstructionParams,
}

impl TryFrom<SentimentData> for SentimentSeries {
    type Error = Error;
    fn try_from(raw: SentimentData) -> Result<Self> {
        SentimentSeries::new(raw.series, raw.kind, raw.params)
    }
}

impl From<SentimentSeries> for SentimentData {
    fn from(s: SentimentSeries) -> Self {
        SentimentData {
            series: s.series,
            kind: s.kind,
            params: s.params,
        }
    }
}

impl SentimentSeries {
    /// Wraps a series as an indicator, enforcing the kind's level constraints.
    pub fn new(
        series: ObservationSeries,
        kind: SentimentKind,
        params: ConstructionParams,
    ) -> Result<Self> {
        if !params.differenced {
            let constraint: Option<(&'static str, fn(f64) -> bool)> = match kind {
                SentimentKind::Smsi => Some(("put/call ratio >= 0", |v| v >= 0.0)),
                SentimentKind::Svix => Some(("implied volatility >= 0", |v| v >= 0.0)),
                SentimentKind::Bmsi => Some(("volatility >= 0", |v| v >= 0.0)),
                SentimentKind::Dri => Some(("share in [0, 1]", |v| (0.0..=1.0).contains(&v))),
                SentimentKind::Smmi | SentimentKind::Bmmi => None,
            };
            if let Some((label, ok)) = constraint {
                for (date, value) in series.iter() {
                    if !ok(value) {
                        return Err(Error::IndicatorRange {
                            kind,
                            date,
                            value,
                            constraint: label,
                        });
                    }
                }
            }
        }
        Ok(SentimentSeries {
            series,
            kind,
            params,
        })
    }

    pub fn series(&self) -> &ObservationSeries {
        &self.series
    }

    pub fn kind(&self) -> SentimentKind {
        self.kind
    }

    pub fn params(&self) -> &ConstructionParams {
        &self.params
    }

    pub fn len(&self) -> usize {
        self.series.len()
    }

    pub fn is_empty(&self) -> bool {
        self.series.is_empty()
    }

    pub fn dates(&self) -> &[NaiveDate] {
        self.series.dates()
    }

    pub fn values(&self) -> &[f64] {
        self.series.values()
    }
}

/// One bond's cross-section row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BondRecord {
    pub bond_id: String,
    pub market_value: f64,
    pub ytm_percent: f64,
}

/// All bonds quoted on one date.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BondSnapshot {
    pub date: NaiveDate,
    pub bonds: Vec<BondRecord>,
}

/// Daily put and call option volumes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OptionVolume {
    pub date: NaiveDate,
    pub put_volume: f64,
    pub call_volume: f64,
}

/// Momentum indicator: short moving average over long moving average of index
/// levels, reported as percent deviation (or raw ratio). Defined from the
/// `long_window`-th observation onward.
pub fn momentum_index(
    levels: &ObservationSeries,
    kind: SentimentKind,
    short_window: usize,
    long_window: usize,
    output: MomentumOutput,
) -> Result<SentimentSeries> {
    if !matches!(kind, SentimentKind::Smmi | SentimentKind::Bmmi) {
        return Err(Error::KindMismatch { kind });
    }
    if short_window == 0 || short_window >= long_window {
        return Err(Error::BadWindow {
            window: short_window,
            requirement: "0 < short_window < long_window",
        });
    }
    for (date, value) in levels.iter() {
        if value <= 0.0 {
            return Err(Error::NonPositivePrice { date, value });
        }
    }
    let short_ma = series::moving_average(levels, short_window)?;
    let long_ma = series::moving_average(levels, long_window)?;
    // Positive levels make every window sum positive, so the ratio is defined.
    let pair = series::align(&short_ma, &long_ma);
    let (values, unit): (Vec<f64>, &str) = match output {
        MomentumOutput::PercentDeviation => (
            pair.left
                .iter()
                .zip(&pair.right)
                .map(|(s, l)| 100.0 * (s / l - 1.0))
                .collect(),
            "percent deviation",
        ),
        MomentumOutput::RawRatio => (
            pair.left.iter().zip(&pair.right).map(|(s, l)| s / l).collect(),
            "ratio",
        ),
    };
    SentimentSeries::new(
        ObservationSeries::new(pair.dates, values, unit)?,
        kind,
        ConstructionParams {
            short_window: Some(short_window),
            long_window: Some(long_window),
            output: Some(output),
            ..ConstructionParams::default()
        },
    )
}

/// Put/call ratio outcome: the index plus the dates that had to be dropped
/// because no calls traded.
#[derive(Debug, Clone)]
pub struct PutCallOutcome {
    pub index: SentimentSeries,
    pub skipped_dates: Vec<NaiveDate>,
}

/// Strength indicator: daily put volume over call volume. Zero-call dates are
/// emitted as missing and reported, not errors; volumes must be nonnegative.
pub fn put_call_ratio(volumes: &[OptionVolume]) -> Result<PutCallOutcome> {
    let mut dates = Vec::new();
    let mut values = Vec::new();
    let mut skipped = Vec::new();
    for v in volumes {
        for (value, context) in [
            (v.put_volume, "put volume"),
            (v.call_volume, "call volume"),
        ] {
            if value < 0.0 {
                return Err(Error::NegativeValue {
                    date: v.date,
                    value,
                    context,
                });
            }
        }
        if v.call_volume == 0.0 {
            skipped.push(v.date);
        } else {
            dates.push(v.date);
            values.push(v.put_volume / v.call_volume);
        }
    }
    let index = SentimentSeries::new(
        ObservationSeries::new(dates, values, "put/call ratio")?,
        SentimentKind::Smsi,
        ConstructionParams::default(),
    )?;
    Ok(PutCallOutcome {
        index,
        skipped_dates: skipped,
    })
}

/// Implied-volatility indicator: validated pass-through of an externally
/// quoted series. Values must be nonnegative.
pub fn ingest_implied_vol(raw: &ObservationSeries) -> Result<SentimentSeries> {
    for (date, value) in raw.iter() {
        if value < 0.0 {
            return Err(Error::IndicatorRange {
                kind: SentimentKind::Svix,
                date,
                value,
                constraint: "implied volatility >= 0",
            });
        }
    }
    SentimentSeries::new(
        raw.clone().with_unit("implied volatility (annualized percent)"),
        SentimentKind::Svix,
        ConstructionParams::default(),
    )
}

/// Stability indicator: rolling sample standard deviation of bond returns.
/// Higher values mean a less stable bond market.
pub fn stability_index(
    bond_returns: &ObservationSeries,
    window: usize,
) -> Result<SentimentSeries> {
    SentimentSeries::new(
        series::rolling_std(bond_returns, window)?,
        SentimentKind::Bmsi,
        ConstructionParams {
            window: Some(window),
            ..ConstructionParams::default()
        },
    )
}

/// Default-risk indicator: per date, the market-value share of bonds whose
/// yield to maturity strictly exceeds `threshold_percent`.
pub fn default_risk_index(
    snapshots: &[BondSnapshot],
    threshold_percent: f64,
) -> Result<SentimentSeries> {
    if !threshold_percent.is_finite() {
        return Err(Error::BadParameter {
            name: "threshold_percent",
            reason: format!("must be finite, got {threshold_percent}"),
        });
    }
    let mut dates = Vec::with_capacity(snapshots.len());
    let mut values = Vec::with_capacity(snapshots.len());
    for snap in snapshots {
        let mut seen: Vec<&str> = Vec::with_capacity(snap.bonds.len());
        let mut total = 0.0;
        let mut distressed = 0.0;
        for bond in &snap.bonds {
            if seen.contains(&bond.bond_id.as_str()) {
                return Err(Error::DuplicateBondId {
                    date: snap.date,
                    bond_id: bond.bond_id.clone(),
                });
            }
            seen.push(&bond.bond_id);
            if bond.market_value < 0.0 {
                return Err(Error::NegativeValue {
                    date: snap.date,
                    value: bond.market_value,
                    context: "market value",
                });
            }
            if !bond.market_value.is_finite() || !bond.ytm_percent.is_finite() {
                return Err(Error::NonFiniteValue {
                    date: snap.date,
                    context: "bond record",
                });
            }
            total += bond.market_value;
            if bond.ytm_percent > threshold_percent {
                distressed += bond.market_value;
            }
        }
        if total == 0.0 {
            return Err(Error::ZeroTotalMarketValue { date: snap.date });
        }
        dates.push(snap.date);
        values.push(distressed / total);
    }
    SentimentSeries::new(
        ObservationSeries::new(dates, values, "market-value share")?,
        SentimentKind::Dri,
        ConstructionParams {
            threshold: Some(threshold_percent),
            ..ConstructionParams::default()
        },
    )
}

/// Day-over-day change of an indicator. Kind and construction parameters are
/// preserved; the result is marked differenced, which lifts level constraints.
pub fn delta(sent: &SentimentSeries) -> Result<SentimentSeries> {
    let mut params = sent.params().clone();
    params.differenced = true;
    SentimentSeries::new(series::diff(sent.series())?, sent.kind(), params)
}
