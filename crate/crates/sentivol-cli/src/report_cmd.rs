//! Re-renders text tables from the JSON artifacts of an earlier run, without
//! the original config or input data.

use std::collections::BTreeMap;
use std::path::Path;

use sentivol_core::egarch::EgarchFit;
use sentivol_core::regression::TwoStageReport;
use sentivol_core::report;

use crate::artifacts::{StageOneArtifact, StageTwoArtifact};
use crate::pipeline::{EgarchArtifact, EgarchOutcome};

fn read_dir_sorted(dir: &Path) -> std::io::Result<Vec<std::path::PathBuf>> {
    let mut files = Vec::new();
    if dir.is_dir() {
        for entry in std::fs::read_dir(dir)? {
            let path = entry?.path();
            if path.extension().is_some_and(|e| e == "json") {
                files.push(path);
            }
        }
    }
    files.sort();
    Ok(files)
}

fn load_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, String> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    serde_json::from_str(&text).map_err(|e| format!("cannot parse {}: {e}", path.display()))
}

/// Renders everything under `artifact_dir` to one text report.
pub fn render(artifact_dir: &Path) -> Result<String, String> {
    let mut out = String::new();

    // Two-stage panels, one per index.
    let mut stage_one: BTreeMap<String, StageOneArtifact> = BTreeMap::new();
    for path in read_dir_sorted(&artifact_dir.join("stage_one")).map_err(|e| e.to_string())? {
        let artifact: StageOneArtifact = load_json(&path)?;
        stage_one.insert(artifact.index.clone(), artifact);
    }
    let mut stage_two: BTreeMap<String, Vec<StageTwoArtifact>> = BTreeMap::new();
    for path in read_dir_sorted(&artifact_dir.join("stage_two")).map_err(|e| e.to_string())? {
        let artifact: StageTwoArtifact = load_json(&path)?;
        stage_two.entry(artifact.index.clone()).or_default().push(artifact);
    }
    for (index, one) in &stage_one {
        let proxies = stage_two
            .remove(index)
            .unwrap_or_default()
            .into_iter()
            .map(|a| a.result)
            .collect();
        let report_data = TwoStageReport {
            stage_one: one.fit.clone(),
            proxies,
        };
        out.push_str(&report::render_two_stage_text(&report_data, index));
        out.push('\n');
    }

    // Variance-model comparisons, one per (index, bundle).
    let mut groups: BTreeMap<(String, Option<String>), Vec<EgarchArtifact>> = BTreeMap::new();
    for path in read_dir_sorted(&artifact_dir.join("egarch")).map_err(|e| e.to_string())? {
        let artifact: EgarchArtifact = load_json(&path)?;
        groups
            .entry((artifact.index.clone(), artifact.bundle.clone()))
            .or_default()
            .push(artifact);
    }
    for ((index, bundle), mut artifacts) in groups {
        artifacts.sort_by_key(|a| a.period_index);
        let columns: Vec<(String, Option<&EgarchFit>)> = artifacts
            .iter()
            .map(|a| {
                let fit = match &a.outcome {
                    EgarchOutcome::Fit(f) => Some(f),
                    EgarchOutcome::Failed(_) => None,
                };
                (a.period.clone(), fit)
            })
            .collect();
        let title = match &bundle {
            Some(b) => format!("Variance model for {index}: {b}"),
            None => format!("Variance model for {index}"),
        };
        out.push_str(&report::render_egarch_comparison(&columns, &title));
        out.push('\n');
    }

    if out.is_empty() {
        return Err(format!(
            "no artifacts found under {}",
            artifact_dir.display()
        ));
    }
    Ok(out)
}
