//! Artifact emission: one JSON file per pipeline cell, rendered tables in the
//! requested formats, plot-ready CSVs, and a manifest tying it together.
//!
//! Every byte written here is deterministic in (config, seed) except the
//! manifest's timestamp, which exists only there. JSON field order follows
//! struct declaration order and floats print in shortest round-trip form, so
//! repeated runs produce identical payloads.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use serde::Serialize;

use sentivol_core::egarch::EgarchFit;
use sentivol_core::io::render_series_table;
use sentivol_core::regression::ProxyOutcome;
use sentivol_core::report;
use sentivol_core::sentiment;
use sentivol_core::series::{self, ObservationSeries};

use crate::config::{LoadedConfig, OutputFormat};
use crate::pipeline::{CellStatus, EgarchArtifact, EgarchOutcome, IndexRun, PipelineOutput};

/// Stage-one fit tagged with its index, so artifacts are self-describing.
#[derive(serde::Serialize, serde::Deserialize)]
pub struct StageOneArtifact {
    pub index: String,
    pub fit: sentivol_core::regression::RegressionFit,
}

/// Stage-two outcome tagged with its index.
#[derive(serde::Serialize, serde::Deserialize)]
pub struct StageTwoArtifact {
    pub index: String,
    pub result: sentivol_core::regression::ProxyResult,
}

#[derive(Serialize)]
struct Manifest<'a> {
    created_utc: String,
    tool_version: &'static str,
    config_path: String,
    config_sha256: &'a str,
    seed: u64,
    cells: &'a [CellStatus],
    artifacts: &'a [String],
}

pub struct Writer {
    out_dir: PathBuf,
    formats: Vec<OutputFormat>,
    written: Vec<String>,
}

impl Writer {
    pub fn new(out_dir: &Path, formats: Vec<OutputFormat>) -> Writer {
        Writer {
            out_dir: out_dir.to_path_buf(),
            formats,
            written: Vec::new(),
        }
    }

    fn emit(&mut self, relative: &str, content: &str) -> io::Result<()> {
        let path = self.out_dir.join(relative);
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent)?;
        }
        fs::write(&path, content)?;
        self.written.push(relative.to_string());
        Ok(())
    }

    fn emit_json<T: Serialize>(&mut self, relative: &str, value: &T) -> io::Result<()> {
        let mut body = serde_json::to_string_pretty(value)?;
        body.push('\n');
        self.emit(relative, &body)
    }

    fn wants(&self, format: OutputFormat) -> bool {
        self.formats.contains(&format)
    }

    /// Writes every artifact for a finished pipeline run plus the manifest.
    pub fn write_run(
        &mut self,
        loaded: &LoadedConfig,
        output: &PipelineOutput,
    ) -> io::Result<()> {
        for index in &output.indices {
            self.write_index(index)?;
        }
        let manifest = Manifest {
            created_utc: chrono::Utc::now().to_rfc3339(),
            tool_version: env!("CARGO_PKG_VERSION"),
            config_path: loaded.path.display().to_string(),
            config_sha256: &loaded.sha256,
            seed: loaded.config.seed,
            cells: &output.cells,
            artifacts: &self.written.clone(),
        };
        self.emit_json("manifest.json", &manifest)
    }

    /// Writes only the sentiment-index artifacts (the `indices` subcommand).
    pub fn write_indices_only(
        &mut self,
        loaded: &LoadedConfig,
        output: &PipelineOutput,
    ) -> io::Result<()> {
        for index in &output.indices {
            self.write_proxy_artifacts(index)?;
        }
        let manifest = Manifest {
            created_utc: chrono::Utc::now().to_rfc3339(),
            tool_version: env!("CARGO_PKG_VERSION"),
            config_path: loaded.path.display().to_string(),
            config_sha256: &loaded.sha256,
            seed: loaded.config.seed,
            cells: &output.cells,
            artifacts: &self.written.clone(),
        };
        self.emit_json("manifest.json", &manifest)
    }

    fn write_proxy_artifacts(&mut self, index: &IndexRun) -> io::Result<()> {
        for (_, sent) in &index.proxies {
            self.emit_json(
                &format!("indices/{}_{}.json", index.label, sent.kind()),
                sent,
            )?;
        }
        if self.wants(OutputFormat::Csv) && !index.proxies.is_empty() {
            let names: Vec<String> = index
                .proxies
                .iter()
                .map(|(_, sent)| sent.kind().to_string())
                .collect();
            let columns: Vec<(&str, &ObservationSeries)> = names
                .iter()
                .zip(&index.proxies)
                .map(|(name, (_, sent))| (name.as_str(), sent.series()))
                .collect();
            self.emit(
                &format!("tables/{}_indices.csv", index.label),
                &render_series_table(&columns),
            )?;
        }
        Ok(())
    }

    fn write_index(&mut self, index: &IndexRun) -> io::Result<()> {
        self.write_proxy_artifacts(index)?;

        if let Some(stage_one) = &index.stage_one {
            self.emit_json(
                &format!("stage_one/{}.json", index.label),
                &StageOneArtifact {
                    index: index.label.clone(),
                    fit: stage_one.clone(),
                },
            )?;
        }
        for result in &index.stage_two {
            self.emit_json(
                &format!("stage_two/{}_{}.json", index.label, result.kind),
                &StageTwoArtifact {
                    index: index.label.clone(),
                    result: result.clone(),
                },
            )?;
        }
        if let Some(stage_one) = &index.stage_one {
            let two_stage = sentivol_core::regression::TwoStageReport {
                stage_one: stage_one.clone(),
                proxies: index.stage_two.clone(),
            };
            if self.wants(OutputFormat::Text) {
                self.emit(
                    &format!("tables/{}_two_stage.txt", index.label),
                    &report::render_two_stage_text(&two_stage, &index.label),
                )?;
            }
            if self.wants(OutputFormat::Csv) {
                self.emit(
                    &format!("tables/{}_two_stage.csv", index.label),
                    &report::render_two_stage_csv(&two_stage),
                )?;
            }
            if self.wants(OutputFormat::Csv) {
                self.write_stage_two_plots(index, stage_one)?;
            }
        }

        for artifact in &index.egarch {
            self.emit_json(&egarch_json_name(artifact), artifact)?;
        }
        self.write_egarch_tables(&index.label, &index.egarch)?;
        if self.wants(OutputFormat::Csv) {
            for artifact in &index.egarch {
                self.write_egarch_plot(index, artifact)?;
            }
        }
        Ok(())
    }

    fn write_stage_two_plots(
        &mut self,
        index: &IndexRun,
        stage_one: &sentivol_core::regression::RegressionFit,
    ) -> io::Result<()> {
        let squared = sentivol_core::regression::squared_residuals(stage_one);
        for (result, (_, sent)) in index.stage_two.iter().zip(&index.proxies) {
            if !matches!(result.outcome, ProxyOutcome::Fit(_)) {
                continue;
            }
            let aligned = series::align(&squared, sent.series());
            let dates = aligned.dates.clone();
            let squared_col = ObservationSeries::new(
                dates.clone(),
                aligned.left.clone(),
                "percent squared",
            )
            .expect("aligned");
            let proxy_col = ObservationSeries::new(dates, aligned.right.clone(), "level")
                .expect("aligned");
            let kind_name = result.kind.to_string();
            let columns: [(&str, &ObservationSeries); 2] = [
                ("squared_residual", &squared_col),
                (kind_name.as_str(), &proxy_col),
            ];
            self.emit(
                &format!("plots/{}_stage_two_{}.csv", index.label, result.kind),
                &render_series_table(&columns),
            )?;
        }
        Ok(())
    }

    fn write_egarch_tables(
        &mut self,
        label: &str,
        artifacts: &[EgarchArtifact],
    ) -> io::Result<()> {
        // One comparison table per bundle (joint mode has a single unnamed
        // bundle), columns in configured period order.
        let mut bundles: Vec<Option<String>> = Vec::new();
        for a in artifacts {
            if !bundles.contains(&a.bundle) {
                bundles.push(a.bundle.clone());
            }
        }
        for bundle in bundles {
            let mut rows: Vec<&EgarchArtifact> = artifacts
                .iter()
                .filter(|a| a.bundle == bundle)
                .collect();
            rows.sort_by_key(|a| a.period_index);
            let columns: Vec<(String, Option<&EgarchFit>)> = rows
                .iter()
                .map(|a| {
                    let fit = match &a.outcome {
                        EgarchOutcome::Fit(f) => Some(f),
                        EgarchOutcome::Failed(_) => None,
                    };
                    (a.period.clone(), fit)
                })
                .collect();
            let suffix = bundle
                .as_ref()
                .map(|b| format!("_{b}"))
                .unwrap_or_default();
            let title = match &bundle {
                Some(b) => format!("Variance model for {label}: {b}"),
                None => format!("Variance model for {label}"),
            };
            if self.wants(OutputFormat::Text) {
                self.emit(
                    &format!("tables/{label}_egarch{suffix}.txt"),
                    &report::render_egarch_comparison(&columns, &title),
                )?;
            }
            if self.wants(OutputFormat::Csv) {
                self.emit(
                    &format!("tables/{label}_egarch{suffix}.csv"),
                    &report::render_egarch_csv(&columns),
                )?;
            }
        }
        Ok(())
    }

    fn write_egarch_plot(
        &mut self,
        index: &IndexRun,
        artifact: &EgarchArtifact,
    ) -> io::Result<()> {
        let EgarchOutcome::Fit(fit) = &artifact.outcome else {
            return Ok(());
        };
        let dates = fit.variance.dates().to_vec();
        let returns_aligned = series::align(&index.returns, &fit.variance);
        let returns_col = ObservationSeries::new(
            returns_aligned.dates.clone(),
            returns_aligned.left.clone(),
            "percent",
        )
        .expect("aligned");
        let mut owned: Vec<(String, ObservationSeries)> = vec![
            ("return_pct".to_string(), returns_col),
            ("sigma2".to_string(), fit.variance.clone()),
            ("std_residual".to_string(), fit.std_residuals.clone()),
        ];
        // The fitted regressor columns, re-derived and cut to the fit dates.
        for (_, sent) in &index.proxies {
            let name = format!("d{}", sent.kind());
            if !artifact.regressors.contains(&name) {
                continue;
            }
            if let Ok(d) = sentiment::delta(sent) {
                let aligned = series::align(d.series(), &fit.variance);
                if aligned.dates == dates {
                    let col = ObservationSeries::new(
                        aligned.dates.clone(),
                        aligned.left.clone(),
                        "sentiment change",
                    )
                    .expect("aligned");
                    owned.push((name, col));
                }
            }
        }
        let columns: Vec<(&str, &ObservationSeries)> = owned
            .iter()
            .map(|(name, series)| (name.as_str(), series))
            .collect();
        self.emit(&egarch_plot_name(artifact), &render_series_table(&columns))
    }
}

fn bundle_suffix(artifact: &EgarchArtifact) -> String {
    artifact
        .bundle
        .as_ref()
        .map(|b| format!("_{b}"))
        .unwrap_or_default()
}

pub fn egarch_json_name(artifact: &EgarchArtifact) -> String {
    format!(
        "egarch/{}_{}{}.json",
        artifact.index,
        artifact.period,
        bundle_suffix(artifact)
    )
}

pub fn egarch_plot_name(artifact: &EgarchArtifact) -> String {
    format!(
        "plots/{}_egarch_{}{}.csv",
        artifact.index,
        artifact.period,
        bundle_suffix(artifact)
    )
}
