//! Workspace manifest file: the modules, their direct dependencies, client
//! API surfaces, invocation edges, and local-module references.

use std::path::Path;

use serde::{Deserialize, Serialize};

use lagless_core::graph::{ModuleManifest, WorkspaceManifest};

use super::snapshot::{
    api_entry, convert_api, convert_dependency, convert_invocation, dependency_entry,
    invocation_entry, ApiEntry, DependencyEntry, InvocationEntry,
};
use super::{parse_json, read_file, FormatError};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestFile {
    pub modules: Vec<ModuleEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields, rename_all = "camelCase")]
pub struct ModuleEntry {
    pub module_id: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub direct_deps: Vec<DependencyEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub client_api: Vec<ApiEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub client_invocations: Vec<InvocationEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub local_deps: Vec<String>,
}

pub fn load_manifest(path: &Path) -> Result<WorkspaceManifest, FormatError> {
    let display = path.display().to_string();
    let text = read_file(path)?;
    let file: ManifestFile = parse_json(&display, &text)?;
    manifest_from_file(&display, &file)
}

pub fn manifest_from_file(
    path: &str,
    file: &ManifestFile,
) -> Result<WorkspaceManifest, FormatError> {
    let mut modules = Vec::new();
    for module in &file.modules {
        let locus = format!("{path} (module {})", module.module_id);
        modules.push(ModuleManifest {
            module_id: module.module_id.clone(),
            direct_deps: module
                .direct_deps
                .iter()
                .map(|d| convert_dependency(&locus, d))
                .collect::<Result<_, _>>()?,
            client_api: module
                .client_api
                .iter()
                .map(|a| convert_api(&locus, a))
                .collect::<Result<_, _>>()?,
            client_invocations: module
                .client_invocations
                .iter()
                .map(|i| convert_invocation(&locus, i))
                .collect::<Result<_, _>>()?,
            local_deps: module.local_deps.clone(),
        });
    }
    let manifest = WorkspaceManifest { modules };
    manifest
        .topological_modules()
        .map_err(|e| FormatError::invalid(path, e.to_string()))?;
    Ok(manifest)
}

pub fn manifest_to_file(manifest: &WorkspaceManifest) -> ManifestFile {
    ManifestFile {
        modules: manifest
            .modules
            .iter()
            .map(|m| ModuleEntry {
                module_id: m.module_id.clone(),
                direct_deps: m.direct_deps.iter().map(dependency_entry).collect(),
                client_api: m.client_api.iter().map(api_entry).collect(),
                client_invocations: m.client_invocations.iter().map(invocation_entry).collect(),
                local_deps: m.local_deps.clone(),
            })
            .collect(),
    }
}
