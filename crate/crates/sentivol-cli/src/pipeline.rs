//! Orchestration: ingest each index, build its sentiment proxies, run the
//! two-stage regressions, and fit the variance model per sub-period.
//!
//! Every (index, proxy, period) cell is independent: a failure is recorded
//! with its reason and the run continues. The run only stops early on an
//! invalid configuration, which is caught before this module is reached.

use std::path::Path;

use serde::{Deserialize, Serialize};

use sentivol_core::egarch::{self, EgarchFit, ExogenousRegressor};
use sentivol_core::io as core_io;
use sentivol_core::regression::{self, ProxyOutcome, ProxyResult, RegressionFit};
use sentivol_core::sentiment::{
    self, ConstructionParams, MomentumOutput, SentimentKind, SentimentSeries,
    DEFAULT_DISTRESS_YIELD_THRESHOLD, DEFAULT_MOMENTUM_LONG, DEFAULT_MOMENTUM_SHORT,
    DEFAULT_STABILITY_WINDOW,
};
use sentivol_core::series::{self, ObservationSeries};

use crate::config::{
    resolve, DeltaMode, IndexConfig, PeriodConfig, ProxyConfig, ProxySource, RunConfig,
};

/// One pipeline cell's outcome, as recorded in the manifest.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct CellStatus {
    pub cell: String,
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub detail: Option<String>,
}

impl CellStatus {
    pub fn ok(cell: impl Into<String>) -> Self {
        CellStatus {
            cell: cell.into(),
            status: "ok".to_string(),
            detail: None,
        }
    }

    pub fn failed(cell: impl Into<String>, reason: impl Into<String>) -> Self {
        CellStatus {
            cell: cell.into(),
            status: "failed".to_string(),
            detail: Some(reason.into()),
        }
    }

    pub fn is_ok(&self) -> bool {
        self.status == "ok"
    }
}

/// A variance-model cell: which index, period, and regressors, plus either
/// the fit or the failure reason.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct EgarchArtifact {
    pub index: String,
    pub period: String,
    /// Position of the period in the configured order, so re-rendering keeps
    /// the original column order without the config.
    pub period_index: usize,
    /// Set in separate-delta mode: the one regressor this cell carries.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bundle: Option<String>,
    pub regressors: Vec<String>,
    pub outcome: EgarchOutcome,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "status", content = "detail", rename_all = "snake_case")]
pub enum EgarchOutcome {
    Fit(EgarchFit),
    Failed(String),
}

/// Everything one index produced; the artifact writer walks this.
pub struct IndexRun {
    pub label: String,
    pub returns: ObservationSeries,
    pub proxies: Vec<(ProxyConfig, SentimentSeries)>,
    pub stage_one: Option<RegressionFit>,
    pub stage_two: Vec<ProxyResult>,
    pub egarch: Vec<EgarchArtifact>,
}

pub struct PipelineOutput {
    pub indices: Vec<IndexRun>,
    pub cells: Vec<CellStatus>,
}

impl PipelineOutput {
    pub fn successes(&self) -> usize {
        self.cells.iter().filter(|c| c.is_ok()).count()
    }

    pub fn failures(&self) -> usize {
        self.cells.len() - self.successes()
    }

    /// Successful statistical fits: stage-one/stage-two regressions and
    /// variance models, as opposed to ingestion or proxy construction.
    pub fn fit_successes(&self) -> usize {
        self.cells
            .iter()
            .filter(|c| c.is_ok() && is_fit_cell(&c.cell))
            .count()
    }

    /// Successfully built sentiment proxies.
    pub fn proxy_successes(&self) -> usize {
        self.cells
            .iter()
            .filter(|c| c.is_ok() && c.cell.contains("/proxy/"))
            .count()
    }
}

fn is_fit_cell(cell: &str) -> bool {
    cell.contains("/stage_one") || cell.contains("/stage_two/") || cell.contains("/egarch/")
}

/// Inclusive date split. Periods may overlap and may be empty; empty slices
/// are kept so the caller can flag them.
pub fn split_periods(
    series: &ObservationSeries,
    periods: &[PeriodConfig],
) -> Vec<(String, ObservationSeries)> {
    periods
        .iter()
        .map(|p| (p.label.clone(), series.window_by_date(p.start, p.end)))
        .collect()
}

/// How far the pipeline runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scope {
    /// Stop after building the sentiment proxies.
    Indices,
    /// Regressions and variance models too.
    Full,
}

/// Runs every cell of the configured study. Pure aside from reading the
/// configured input files; writing happens in the artifact layer.
pub fn run_pipeline(config: &RunConfig, base_dir: &Path, scope: Scope) -> PipelineOutput {
    let mut cells = Vec::new();
    let mut indices = Vec::new();
    for index in &config.indices {
        match run_index(config, index, base_dir, scope, &mut cells) {
            Some(run) => indices.push(run),
            None => continue,
        }
    }
    PipelineOutput { indices, cells }
}

fn run_index(
    config: &RunConfig,
    index: &IndexConfig,
    base_dir: &Path,
    scope: Scope,
    cells: &mut Vec<CellStatus>,
) -> Option<IndexRun> {
    let label = &index.label;
    let returns = match ingest_returns(index, base_dir) {
        Ok(r) => {
            cells.push(CellStatus::ok(format!("{label}/ingest")));
            r
        }
        Err(e) => {
            cells.push(CellStatus::failed(format!("{label}/ingest"), e.to_string()));
            return None;
        }
    };

    let mut proxies = Vec::new();
    for proxy in &index.proxies {
        let cell = format!("{label}/proxy/{}", proxy.kind);
        match build_proxy(proxy, index, &returns, base_dir) {
            Ok(sent) => {
                cells.push(CellStatus::ok(&cell));
                proxies.push((proxy.clone(), sent));
            }
            Err(e) => cells.push(CellStatus::failed(&cell, e.to_string())),
        }
    }

    if scope == Scope::Indices {
        return Some(IndexRun {
            label: label.clone(),
            returns,
            proxies,
            stage_one: None,
            stage_two: Vec::new(),
            egarch: Vec::new(),
        });
    }

    let stage_one = match regression::stage_one(&returns) {
        Ok(fit) => {
            cells.push(CellStatus::ok(format!("{label}/stage_one")));
            Some(fit)
        }
        Err(e) => {
            cells.push(CellStatus::failed(format!("{label}/stage_one"), e.to_string()));
            None
        }
    };

    let mut stage_two = Vec::new();
    if let Some(stage_one_fit) = &stage_one {
        let squared = regression::squared_residuals(stage_one_fit);
        for (_, sent) in &proxies {
            let cell = format!("{label}/stage_two/{}", sent.kind());
            let outcome = match regression::stage_two(&squared, sent) {
                Ok(fit) => {
                    cells.push(CellStatus::ok(&cell));
                    ProxyOutcome::Fit(fit)
                }
                Err(e) => {
                    cells.push(CellStatus::failed(&cell, e.to_string()));
                    ProxyOutcome::Failed(e.to_string())
                }
            };
            stage_two.push(ProxyResult {
                kind: sent.kind(),
                outcome,
            });
        }
    }

    let egarch = run_egarch_cells(config, label, &returns, &proxies, cells);

    Some(IndexRun {
        label: label.clone(),
        returns,
        proxies,
        stage_one,
        stage_two,
        egarch,
    })
}

/// Reads one named column of a CSV table, failing with the file location when
/// the header lacks it.
fn read_column(
    base_dir: &Path,
    path: &Path,
    column: &str,
) -> sentivol_core::Result<ObservationSeries> {
    let resolved = resolve(base_dir, path);
    let table = core_io::read_series_table(&resolved)?;
    table
        .column(column)
        .cloned()
        .ok_or_else(|| sentivol_core::Error::Table {
            path: resolved.display().to_string(),
            row: 1,
            problem: format!("no column named '{column}'"),
        })
}

fn ingest_returns(
    index: &IndexConfig,
    base_dir: &Path,
) -> sentivol_core::Result<ObservationSeries> {
    if let (Some(path), Some(column)) = (&index.returns_csv, &index.returns_column) {
        let series = read_column(base_dir, path, column)?;
        return Ok(series.with_unit("percent"));
    }
    let prices = read_column(
        base_dir,
        index.prices_csv.as_ref().expect("validated"),
        index.prices_column.as_ref().expect("validated"),
    )?;
    series::simple_returns(&prices)
}

/// Builds one sentiment proxy from its configured source.
pub fn build_proxy(
    proxy: &ProxyConfig,
    index: &IndexConfig,
    returns: &ObservationSeries,
    base_dir: &Path,
) -> sentivol_core::Result<SentimentSeries> {
    match proxy.from {
        ProxySource::Levels => {
            let path = index.prices_csv.as_ref().ok_or_else(|| {
                sentivol_core::Error::BadParameter {
                    name: "prices_csv",
                    reason: "momentum proxies need the index's price levels".to_string(),
                }
            })?;
            let prices = read_column(
                base_dir,
                path,
                index.prices_column.as_ref().expect("validated"),
            )?;
            sentiment::momentum_index(
                &prices,
                proxy.kind,
                proxy.short_window.unwrap_or(DEFAULT_MOMENTUM_SHORT),
                proxy.long_window.unwrap_or(DEFAULT_MOMENTUM_LONG),
                MomentumOutput::PercentDeviation,
            )
        }
        ProxySource::Returns => sentiment::stability_index(
            returns,
            proxy.window.unwrap_or(DEFAULT_STABILITY_WINDOW),
        ),
        ProxySource::Csv => {
            let series = read_column(
                base_dir,
                proxy.path.as_ref().expect("validated"),
                proxy.column.as_ref().expect("validated"),
            )?;
            if proxy.kind == SentimentKind::Svix {
                sentiment::ingest_implied_vol(&series)
            } else {
                SentimentSeries::new(
                    series.with_unit(proxy.kind.label()),
                    proxy.kind,
                    ConstructionParams::default(),
                )
            }
        }
        ProxySource::OptionVolumes => {
            let volumes = core_io::read_option_volumes(&resolve(
                base_dir,
                proxy.path.as_ref().expect("validated"),
            ))?;
            Ok(sentiment::put_call_ratio(&volumes)?.index)
        }
        ProxySource::BondSnapshots => {
            let snapshots = core_io::read_bond_snapshots(&resolve(
                base_dir,
                proxy.path.as_ref().expect("validated"),
            ))?;
            sentiment::default_risk_index(
                &snapshots,
                proxy.threshold.unwrap_or(DEFAULT_DISTRESS_YIELD_THRESHOLD),
            )
        }
    }
}

fn run_egarch_cells(
    config: &RunConfig,
    label: &str,
    returns: &ObservationSeries,
    proxies: &[(ProxyConfig, SentimentSeries)],
    cells: &mut Vec<CellStatus>,
) -> Vec<EgarchArtifact> {
    // Day-over-day changes of each eligible proxy become variance regressors.
    let mut eligible = Vec::new();
    for (proxy_config, sent) in proxies {
        if !proxy_config.egarch_eligible() {
            continue;
        }
        match sentiment::delta(sent) {
            Ok(d) => eligible.push(ExogenousRegressor::new(
                format!("d{}", sent.kind()),
                d.series().clone(),
            )),
            Err(e) => cells.push(CellStatus::failed(
                format!("{label}/delta/{}", sent.kind()),
                e.to_string(),
            )),
        }
    }

    let options = config.fit_options().expect("validated");
    let periods = config.periods();
    let mut artifacts = Vec::new();

    // Regressor bundles: all eligible deltas jointly, or one at a time.
    let bundles: Vec<(Option<String>, Vec<ExogenousRegressor>)> = match config.delta_mode() {
        DeltaMode::Joint => vec![(None, eligible)],
        DeltaMode::Separate => eligible
            .into_iter()
            .map(|r| (Some(r.name.clone()), vec![r]))
            .collect(),
    };

    for (bundle_name, regressors) in &bundles {
        for (period_index, (period_label, window)) in
            split_periods(returns, &periods).into_iter().enumerate()
        {
            let cell = match bundle_name {
                Some(name) => format!("{label}/egarch/{period_label}/{name}"),
                None => format!("{label}/egarch/{period_label}"),
            };
            let outcome = if window.is_empty() {
                Err("period contains no observations".to_string())
            } else {
                egarch::fit(&window, regressors, &options).map_err(|e| e.to_string())
            };
            let artifact = EgarchArtifact {
                index: label.to_string(),
                period: period_label.clone(),
                period_index,
                bundle: bundle_name.clone(),
                regressors: regressors.iter().map(|r| r.name.clone()).collect(),
                outcome: match outcome {
                    Ok(fit) => {
                        cells.push(CellStatus::ok(&cell));
                        EgarchOutcome::Fit(fit)
                    }
                    Err(reason) => {
                        cells.push(CellStatus::failed(&cell, &reason));
                        EgarchOutcome::Failed(reason)
                    }
                },
            };
            artifacts.push(artifact);
        }
    }
    artifacts
}
