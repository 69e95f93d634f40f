//! The registry snapshot file: one JSON document listing artifacts, their
//! version records, dependency declarations, API surfaces, and invocation
//! edges. Unknown fields are rejected.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use lagless_core::date::Date;
use lagless_core::registry::{
    ApiKind, ApiSymbol, ArtifactCoordinate, DependencyDecl, InvocationEdge, InvocationKind,
    RegistrySnapshot, Scope, VersionRecord,
};
use lagless_core::semver::{Version, VersionSpec};

use super::{parse_json, read_file, FormatError};

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SnapshotFile {
    pub artifacts: Vec<ArtifactEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ArtifactEntry {
    pub group: String,
    pub name: String,
    pub versions: Vec<VersionEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VersionEntry {
    pub version: String,
    pub released: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub stable: Option<bool>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub dependencies: Vec<DependencyEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub api: Vec<ApiEntry>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub invocations: Vec<InvocationEntry>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DependencyEntry {
    pub group: String,
    pub name: String,
    pub spec: String,
    pub scope: String,
    #[serde(default)]
    pub optional: bool,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ApiEntry {
    pub id: String,
    pub kind: String,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InvocationEntry {
    pub from: String,
    pub to: String,
    pub kind: String,
}

pub fn parse_api_kind(path: &str, kind: &str) -> Result<ApiKind, FormatError> {
    match kind {
        "method" => Ok(ApiKind::Method),
        "class" => Ok(ApiKind::Class),
        other => Err(FormatError::invalid(path, format!("unknown api kind `{other}`"))),
    }
}

pub fn parse_invocation_kind(path: &str, kind: &str) -> Result<InvocationKind, FormatError> {
    match kind {
        "call" => Ok(InvocationKind::Call),
        "type" => Ok(InvocationKind::Type),
        other => Err(FormatError::invalid(
            path,
            format!("unknown invocation kind `{other}`"),
        )),
    }
}

pub fn convert_dependency(path: &str, entry: &DependencyEntry) -> Result<DependencyDecl, FormatError> {
    let spec = VersionSpec::parse(&entry.spec)
        .map_err(|e| FormatError::invalid(path, e.to_string()))?;
    let scope = Scope::parse(&entry.scope)
        .ok_or_else(|| FormatError::invalid(path, format!("unknown scope `{}`", entry.scope)))?;
    Ok(DependencyDecl {
        target: ArtifactCoordinate::new(entry.group.clone(), entry.name.clone()),
        spec,
        scope,
        optional: entry.optional,
    })
}

pub fn convert_api(path: &str, entry: &ApiEntry) -> Result<ApiSymbol, FormatError> {
    Ok(ApiSymbol {
        id: entry.id.clone(),
        kind: parse_api_kind(path, &entry.kind)?,
    })
}

pub fn convert_invocation(path: &str, entry: &InvocationEntry) -> Result<InvocationEdge, FormatError> {
    Ok(InvocationEdge {
        from: entry.from.clone(),
        to: entry.to.clone(),
        kind: parse_invocation_kind(path, &entry.kind)?,
    })
}

/// Loads and fully validates a snapshot file.
pub fn load_snapshot(path: &Path) -> Result<RegistrySnapshot, FormatError> {
    let display = path.display().to_string();
    let text = read_file(path)?;
    let file: SnapshotFile = parse_json(&display, &text)?;
    snapshot_from_file(&display, &file)
}

pub fn snapshot_from_file(
    path: &str,
    file: &SnapshotFile,
) -> Result<RegistrySnapshot, FormatError> {
    let mut artifacts: BTreeMap<ArtifactCoordinate, Vec<VersionRecord>> = BTreeMap::new();
    for artifact in &file.artifacts {
        let coordinate = ArtifactCoordinate::new(artifact.group.clone(), artifact.name.clone());
        let mut records = Vec::new();
        for version in &artifact.versions {
            let locus = format!("{path} ({coordinate}@{})", version.version);
            let parsed = Version::parse(&version.version)
                .map_err(|e| FormatError::invalid(&locus, e.to_string()))?;
            let released = Date::parse(&version.released)
                .map_err(|e| FormatError::invalid(&locus, e.to_string()))?;
            let dependencies = version
                .dependencies
                .iter()
                .map(|d| convert_dependency(&locus, d))
                .collect::<Result<Vec<_>, _>>()?;
            let api = version
                .api
                .iter()
                .map(|a| convert_api(&locus, a))
                .collect::<Result<std::collections::BTreeSet<_>, _>>()?;
            let invocations = version
                .invocations
                .iter()
                .map(|i| convert_invocation(&locus, i))
                .collect::<Result<Vec<_>, _>>()?;
            let mut record = VersionRecord::new(parsed, released, dependencies, api, invocations);
            if let Some(stable) = version.stable {
                record = record.with_stability(stable);
            }
            records.push(record);
        }
        if artifacts.insert(coordinate.clone(), records).is_some() {
            return Err(FormatError::invalid(
                path,
                format!("artifact {coordinate} listed twice"),
            ));
        }
    }
    RegistrySnapshot::new(artifacts).map_err(|e| FormatError::invalid(path, e.to_string()))
}

fn scope_str(scope: Scope) -> &'static str {
    match scope {
        Scope::Compile => "compile",
        Scope::Runtime => "runtime",
        Scope::Test => "test",
        Scope::Provided => "provided",
    }
}

pub fn dependency_entry(decl: &DependencyDecl) -> DependencyEntry {
    DependencyEntry {
        group: decl.target.group.clone(),
        name: decl.target.name.clone(),
        spec: decl.spec.to_string(),
        scope: scope_str(decl.scope).to_string(),
        optional: decl.optional,
    }
}

pub fn api_entry(symbol: &ApiSymbol) -> ApiEntry {
    ApiEntry {
        id: symbol.id.clone(),
        kind: match symbol.kind {
            ApiKind::Method => "method",
            ApiKind::Class => "class",
        }
        .to_string(),
    }
}

pub fn invocation_entry(edge: &InvocationEdge) -> InvocationEntry {
    InvocationEntry {
        from: edge.from.clone(),
        to: edge.to.clone(),
        kind: match edge.kind {
            InvocationKind::Call => "call",
            InvocationKind::Type => "type",
        }
        .to_string(),
    }
}

/// Serializes a snapshot back to its file form (used by `gen`).
pub fn snapshot_to_file(snapshot: &RegistrySnapshot) -> SnapshotFile {
    let artifacts = snapshot
        .coordinates()
        .map(|coordinate| {
            let versions = snapshot
                .records(coordinate)
                .expect("listed coordinate")
                .iter()
                .map(|record| VersionEntry {
                    version: record.version.raw().to_string(),
                    released: record.released.to_string(),
                    stable: if record.stable != record.version.is_stable() {
                        Some(record.stable)
                    } else {
                        None
                    },
                    dependencies: record.dependencies.iter().map(dependency_entry).collect(),
                    api: record.api.iter().map(api_entry).collect(),
                    invocations: record.invocations.iter().map(invocation_entry).collect(),
                })
                .collect();
            ArtifactEntry {
                group: coordinate.group.clone(),
                name: coordinate.name.clone(),
                versions,
            }
        })
        .collect();
    SnapshotFile { artifacts }
}
