//! Depth-study rows as CSV and JSON.

use serde::{Deserialize, Serialize};

use lagless_core::depth_study::DepthStudy;

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StudyRowEntry {
    pub depth: usize,
    pub strategy: String,
    pub broken_clients: u64,
    pub client_impacting_apis: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct StudyFile {
    pub strategy: String,
    pub rows: Vec<StudyRowEntry>,
    pub skipped_manifests: u64,
    pub counting: String,
}

pub fn study_file(study: &DepthStudy) -> StudyFile {
    StudyFile {
        strategy: study.strategy.to_string(),
        rows: study
            .rows
            .iter()
            .map(|row| StudyRowEntry {
                depth: row.depth,
                strategy: row.strategy.to_string(),
                broken_clients: row.broken_clients,
                client_impacting_apis: row.client_impacting_apis,
            })
            .collect(),
        skipped_manifests: study.skipped_manifests,
        counting: study.counting.to_string(),
    }
}

/// Plain CSV: header plus one row per depth. None of the fields can contain
/// commas, so no quoting is needed.
pub fn study_csv(study: &DepthStudy) -> String {
    let mut out = String::from("depth,strategy,brokenClients,clientImpactingApis\n");
    for row in &study.rows {
        out.push_str(&format!(
            "{},{},{},{}\n",
            row.depth, row.strategy, row.broken_clients, row.client_impacting_apis
        ));
    }
    out
}
