//! Upgrade-plan serialization: per-node decisions, processing order, and
//! added/removed coordinates, with stable key order throughout.

use std::collections::BTreeMap;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use lagless_core::graph::NodeId;
use lagless_core::planner::{
    ModulePlanOutcome, NodePlan, PlanMode, PlannerConfig, UpgradePlan, UpgradeStrategy,
};
use lagless_core::registry::ArtifactCoordinate;
use lagless_core::semver::Version;

use super::{parse_json, read_file, FormatError};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlanFile {
    pub modules: Vec<ModulePlanEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct ModulePlanEntry {
    pub module_id: String,
    pub mode: String,
    pub strategy: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_candidates_per_node: Option<usize>,
    pub per_node: BTreeMap<String, NodePlanEntry>,
    pub processing_order: Vec<String>,
    pub added_nodes: Vec<String>,
    pub removed_nodes: Vec<String>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct NodePlanEntry {
    pub original: String,
    pub selected: String,
    pub rejected_by_pruning: Vec<String>,
    pub rejected_by_compat: Vec<String>,
}

fn coordinate_key(id: &NodeId) -> String {
    id.to_string()
}

fn parse_coordinate(path: &str, key: &str) -> Result<ArtifactCoordinate, FormatError> {
    key.split_once(':')
        .map(|(g, n)| ArtifactCoordinate::new(g, n))
        .filter(|c| !c.group.is_empty() && !c.name.is_empty())
        .ok_or_else(|| FormatError::invalid(path, format!("bad coordinate key `{key}`")))
}

fn parse_version(path: &str, text: &str) -> Result<Version, FormatError> {
    Version::parse(text).map_err(|e| FormatError::invalid(path, e.to_string()))
}

pub fn plan_file(outcomes: &[ModulePlanOutcome]) -> PlanFile {
    PlanFile {
        modules: outcomes
            .iter()
            .map(|outcome| module_plan_entry(&outcome.module_id, &outcome.plan))
            .collect(),
    }
}

pub fn module_plan_entry(module_id: &str, plan: &UpgradePlan) -> ModulePlanEntry {
    ModulePlanEntry {
        module_id: module_id.to_string(),
        mode: plan.config.mode.to_string(),
        strategy: plan.config.strategy.to_string(),
        max_candidates_per_node: plan.config.max_candidates_per_node,
        per_node: plan
            .per_node
            .iter()
            .map(|(id, node_plan)| {
                (
                    coordinate_key(id),
                    NodePlanEntry {
                        original: node_plan.original.raw().to_string(),
                        selected: node_plan.selected.raw().to_string(),
                        rejected_by_pruning: node_plan
                            .rejected_by_pruning
                            .iter()
                            .map(|v| v.raw().to_string())
                            .collect(),
                        rejected_by_compat: node_plan
                            .rejected_by_compat
                            .iter()
                            .map(|v| v.raw().to_string())
                            .collect(),
                    },
                )
            })
            .collect(),
        processing_order: plan.processing_order.iter().map(coordinate_key).collect(),
        added_nodes: plan.added_nodes.iter().map(|c| c.to_string()).collect(),
        removed_nodes: plan.removed_nodes.iter().map(|c| c.to_string()).collect(),
    }
}

pub fn load_plan(path: &Path) -> Result<Vec<(String, UpgradePlan)>, FormatError> {
    let display = path.display().to_string();
    let text = read_file(path)?;
    let file: PlanFile = parse_json(&display, &text)?;
    file.modules
        .iter()
        .map(|entry| Ok((entry.module_id.clone(), plan_from_entry(&display, entry)?)))
        .collect()
}

pub fn plan_from_entry(path: &str, entry: &ModulePlanEntry) -> Result<UpgradePlan, FormatError> {
    let mode = PlanMode::from_str(&entry.mode).map_err(|e| FormatError::invalid(path, e))?;
    let strategy =
        UpgradeStrategy::from_str(&entry.strategy).map_err(|e| FormatError::invalid(path, e))?;
    let mut per_node = BTreeMap::new();
    for (key, node_entry) in &entry.per_node {
        let coordinate = parse_coordinate(path, key)?;
        per_node.insert(
            NodeId::Registry(coordinate),
            NodePlan {
                original: parse_version(path, &node_entry.original)?,
                selected: parse_version(path, &node_entry.selected)?,
                rejected_by_pruning: node_entry
                    .rejected_by_pruning
                    .iter()
                    .map(|v| parse_version(path, v))
                    .collect::<Result<_, _>>()?,
                rejected_by_compat: node_entry
                    .rejected_by_compat
                    .iter()
                    .map(|v| parse_version(path, v))
                    .collect::<Result<_, _>>()?,
            },
        );
    }
    Ok(UpgradePlan {
        config: PlannerConfig {
            mode,
            strategy,
            max_candidates_per_node: entry.max_candidates_per_node,
        },
        per_node,
        processing_order: entry
            .processing_order
            .iter()
            .map(|key| Ok(NodeId::Registry(parse_coordinate(path, key)?)))
            .collect::<Result<_, FormatError>>()?,
        added_nodes: entry
            .added_nodes
            .iter()
            .map(|key| parse_coordinate(path, key))
            .collect::<Result<_, _>>()?,
        removed_nodes: entry
            .removed_nodes
            .iter()
            .map(|key| parse_coordinate(path, key))
            .collect::<Result<_, _>>()?,
    })
}
