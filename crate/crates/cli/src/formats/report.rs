//! Lag-report output: JSON for machines, an aligned-column table for humans.
//! Time lag renders as years/months/days with the 365/30 display convention;
//! exact day counts stay in the JSON.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use lagless_core::metrics::{BreakageFinding, LagDelta, LagReport};

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LevelCountsEntry {
    pub major: u64,
    pub minor: u64,
    pub patch: u64,
    pub pre_release: u64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct DependencyLagEntry {
    pub version_lag: u64,
    pub levels: LevelCountsEntry,
    pub time_lag_days: i64,
    pub direct: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LagTotalsEntry {
    pub version_lag: u64,
    pub version_lag_direct: u64,
    pub version_lag_transitive: u64,
    pub levels: LevelCountsEntry,
    pub time_lag_days: i64,
    pub time_lag_days_direct: i64,
    pub time_lag_days_transitive: i64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LagReportEntry {
    pub per_dependency: BTreeMap<String, DependencyLagEntry>,
    pub totals: LagTotalsEntry,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub warnings: Vec<String>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LevelDeltasEntry {
    pub major: i64,
    pub minor: i64,
    pub patch: i64,
    pub pre_release: i64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct LagDeltaEntry {
    pub version_lag: i64,
    pub version_lag_direct: i64,
    pub version_lag_transitive: i64,
    pub levels: LevelDeltasEntry,
    pub time_lag_days: i64,
    pub time_lag_days_direct: i64,
    pub time_lag_days_transitive: i64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct BreakageEntry {
    pub node: String,
    pub dependent: String,
    pub missing_apis: Vec<String>,
}

/// One module's before/after metrics.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ModuleReportEntry {
    pub module_id: String,
    pub before: LagReportEntry,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub after: Option<LagReportEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub reduced: Option<LagDeltaEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub redundant_delta: Option<i64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub breakages: Vec<BreakageEntry>,
}

/// Workspace-level aggregation: totals plus module averages.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct WorkspaceSummary {
    pub modules: usize,
    pub reduced_version_lag: i64,
    pub reduced_time_lag_days: i64,
    pub redundant_delta: i64,
    pub module_average_reduced_version_lag: f64,
    pub module_average_reduced_time_lag_days: f64,
    pub breakage_count: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(rename_all = "camelCase")]
pub struct ReportFile {
    pub modules: Vec<ModuleReportEntry>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub workspace: Option<WorkspaceSummary>,
}

fn levels_entry(report: &LagReport) -> LevelCountsEntry {
    LevelCountsEntry {
        major: report.totals.levels.major,
        minor: report.totals.levels.minor,
        patch: report.totals.levels.patch,
        pre_release: report.totals.levels.pre_release,
    }
}

pub fn lag_report_entry(report: &LagReport) -> LagReportEntry {
    LagReportEntry {
        per_dependency: report
            .per_dependency
            .iter()
            .map(|(id, lag)| {
                (
                    id.to_string(),
                    DependencyLagEntry {
                        version_lag: lag.version_lag,
                        levels: LevelCountsEntry {
                            major: lag.levels.major,
                            minor: lag.levels.minor,
                            patch: lag.levels.patch,
                            pre_release: lag.levels.pre_release,
                        },
                        time_lag_days: lag.time_lag_days,
                        direct: lag.direct,
                    },
                )
            })
            .collect(),
        totals: LagTotalsEntry {
            version_lag: report.totals.version_lag,
            version_lag_direct: report.totals.version_lag_direct,
            version_lag_transitive: report.totals.version_lag_transitive,
            levels: levels_entry(report),
            time_lag_days: report.totals.time_lag_days,
            time_lag_days_direct: report.totals.time_lag_days_direct,
            time_lag_days_transitive: report.totals.time_lag_days_transitive,
        },
        warnings: report.warnings.clone(),
    }
}

pub fn lag_delta_entry(delta: &LagDelta) -> LagDeltaEntry {
    LagDeltaEntry {
        version_lag: delta.version_lag,
        version_lag_direct: delta.version_lag_direct,
        version_lag_transitive: delta.version_lag_transitive,
        levels: LevelDeltasEntry {
            major: delta.levels.major,
            minor: delta.levels.minor,
            patch: delta.levels.patch,
            pre_release: delta.levels.pre_release,
        },
        time_lag_days: delta.time_lag_days,
        time_lag_days_direct: delta.time_lag_days_direct,
        time_lag_days_transitive: delta.time_lag_days_transitive,
    }
}

pub fn breakage_entry(finding: &BreakageFinding) -> BreakageEntry {
    BreakageEntry {
        node: finding.node.to_string(),
        dependent: finding.dependent.to_string(),
        missing_apis: finding.missing.iter().cloned().collect(),
    }
}

/// `days` as `XyYmZd` with 365-day years and 30-day months (display only).
pub fn render_ymd(days: i64) -> String {
    let sign = if days < 0 { "-" } else { "" };
    let days = days.abs();
    let years = days / 365;
    let months = (days % 365) / 30;
    let rest = (days % 365) % 30;
    format!("{sign}{years}y {months}m {rest}d")
}

/// Aligned-column table over module deltas, one row per module plus a total
/// row, mirroring the usual lag-report column layout.
pub fn render_table(report: &ReportFile) -> String {
    let mut out = String::new();
    out.push_str(&format!(
        "{:<14} {:>6} {:>6} {:>6} {:>8} | {:>6} {:>6} {:>7} | {:>14} {:>14} {:>14} | {:>7}\n",
        "Module", "Major", "Minor", "Patch", "Pre-rel", "Dir.", "Tran.", "All", "Dir.", "Tran.", "All", "Redunt"
    ));
    let dash = "-".repeat(132);
    out.push_str(&dash);
    out.push('\n');
    let mut totals = (0i64, 0i64, 0i64, 0i64, 0i64, 0i64, 0i64, 0i64, 0i64, 0i64, 0i64);
    for module in &report.modules {
        let (levels, vd, vt, va, td, tt, ta) = match (&module.reduced, &module.after) {
            (Some(reduced), _) => (
                (
                    reduced.levels.major,
                    reduced.levels.minor,
                    reduced.levels.patch,
                    reduced.levels.pre_release,
                ),
                reduced.version_lag_direct,
                reduced.version_lag_transitive,
                reduced.version_lag,
                reduced.time_lag_days_direct,
                reduced.time_lag_days_transitive,
                reduced.time_lag_days,
            ),
            _ => (
                (
                    module.before.totals.levels.major as i64,
                    module.before.totals.levels.minor as i64,
                    module.before.totals.levels.patch as i64,
                    module.before.totals.levels.pre_release as i64,
                ),
                module.before.totals.version_lag_direct as i64,
                module.before.totals.version_lag_transitive as i64,
                module.before.totals.version_lag as i64,
                module.before.totals.time_lag_days_direct,
                module.before.totals.time_lag_days_transitive,
                module.before.totals.time_lag_days,
            ),
        };
        let redundant = module.redundant_delta.unwrap_or(0);
        out.push_str(&format!(
            "{:<14} {:>6} {:>6} {:>6} {:>8} | {:>6} {:>6} {:>7} | {:>14} {:>14} {:>14} | {:>7}\n",
            module.module_id,
            levels.0,
            levels.1,
            levels.2,
            levels.3,
            vd,
            vt,
            va,
            render_ymd(td),
            render_ymd(tt),
            render_ymd(ta),
            redundant
        ));
        totals = (
            totals.0 + levels.0,
            totals.1 + levels.1,
            totals.2 + levels.2,
            totals.3 + levels.3,
            totals.4 + vd,
            totals.5 + vt,
            totals.6 + va,
            totals.7 + td,
            totals.8 + tt,
            totals.9 + ta,
            totals.10 + redundant,
        );
    }
    out.push_str(&dash);
    out.push('\n');
    out.push_str(&format!(
        "{:<14} {:>6} {:>6} {:>6} {:>8} | {:>6} {:>6} {:>7} | {:>14} {:>14} {:>14} | {:>7}\n",
        "total",
        totals.0,
        totals.1,
        totals.2,
        totals.3,
        totals.4,
        totals.5,
        totals.6,
        render_ymd(totals.7),
        render_ymd(totals.8),
        render_ymd(totals.9),
        totals.10
    ));
    out
}
