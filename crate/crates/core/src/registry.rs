//! The immutable registry snapshot: artifacts, version records with release
//! dates, dependency declarations, API surfaces, and invocation edges —
//! together with the queries the planner needs (candidate versions,
//! transitive closures, breaking diffs).

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::date::Date;
use crate::semver::{resolve_spec, Version, VersionSpec};

/// Group + artifact name (the GA half of GAV coordinates).
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ArtifactCoordinate {
    pub group: String,
    pub name: String,
}

impl ArtifactCoordinate {
    pub fn new(group: impl Into<String>, name: impl Into<String>) -> Self {
        Self {
            group: group.into(),
            name: name.into(),
        }
    }
}

impl fmt::Display for ArtifactCoordinate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.group, self.name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Scope {
    Compile,
    Runtime,
    Test,
    Provided,
}

impl Scope {
    /// Only compile and runtime dependencies exist at deployment time.
    pub fn is_deployed(self) -> bool {
        matches!(self, Scope::Compile | Scope::Runtime)
    }

    pub fn parse(text: &str) -> Option<Self> {
        match text {
            "compile" => Some(Scope::Compile),
            "runtime" => Some(Scope::Runtime),
            "test" => Some(Scope::Test),
            "provided" => Some(Scope::Provided),
            _ => None,
        }
    }
}

impl fmt::Display for Scope {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            Scope::Compile => "compile",
            Scope::Runtime => "runtime",
            Scope::Test => "test",
            Scope::Provided => "provided",
        };
        f.write_str(name)
    }
}

/// One dependency declaration of a version record.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyDecl {
    pub target: ArtifactCoordinate,
    pub spec: VersionSpec,
    pub scope: Scope,
    pub optional: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ApiKind {
    Method,
    Class,
}

/// A declared API: a method or class with a globally unique id.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct ApiSymbol {
    pub id: String,
    pub kind: ApiKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum InvocationKind {
    /// Method invocation (call-graph edge).
    Call,
    /// Type-level reference: field type, parameter, inheritance, interface.
    Type,
}

/// A directed invocation edge between API ids. `from` always belongs to the
/// declaring version's own surface; `to` may be external.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct InvocationEdge {
    pub from: String,
    pub to: String,
    pub kind: InvocationKind,
}

/// Everything the registry knows about one published version.
#[derive(Debug, Clone)]
pub struct VersionRecord {
    pub version: Version,
    pub released: Date,
    /// Stability resolved at load time: explicit override, or "no qualifier".
    pub stable: bool,
    pub dependencies: Vec<DependencyDecl>,
    pub api: BTreeSet<ApiSymbol>,
    pub invocations: Vec<InvocationEdge>,
}

impl VersionRecord {
    pub fn new(
        version: Version,
        released: Date,
        dependencies: Vec<DependencyDecl>,
        api: BTreeSet<ApiSymbol>,
        invocations: Vec<InvocationEdge>,
    ) -> Self {
        let stable = version.is_stable();
        Self {
            version,
            released,
            stable,
            dependencies,
            api,
            invocations,
        }
    }

    pub fn with_stability(mut self, stable: bool) -> Self {
        self.stable = stable;
        self
    }

    pub fn surface_ids(&self) -> BTreeSet<&str> {
        self.api.iter().map(|s| s.id.as_str()).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RegistryError {
    #[error("artifact coordinate with empty group or name")]
    EmptyCoordinate,
    #[error("duplicate version {version} for {coordinate}")]
    DuplicateVersion {
        coordinate: ArtifactCoordinate,
        version: String,
    },
    #[error("duplicate api id `{id}` in {coordinate}@{version}")]
    DuplicateApiId {
        coordinate: ArtifactCoordinate,
        version: String,
        id: String,
    },
    #[error("api id `{id}` declared by both {first} and {second}")]
    ApiIdOwnedTwice {
        id: String,
        first: ArtifactCoordinate,
        second: ArtifactCoordinate,
    },
    #[error("invocation from unknown own api `{from}` in {coordinate}@{version}")]
    DanglingInvocationSource {
        coordinate: ArtifactCoordinate,
        version: String,
        from: String,
    },
    #[error("unknown artifact {0}")]
    UnknownArtifact(ArtifactCoordinate),
    #[error("unknown version {version} of {coordinate}")]
    UnknownVersion {
        coordinate: ArtifactCoordinate,
        version: String,
    },
    #[error("cannot resolve {spec} of {coordinate} reached via {path}: {cause}")]
    Closure {
        coordinate: ArtifactCoordinate,
        spec: String,
        path: String,
        cause: String,
    },
    #[error("breaking diff requires old <= new, got {old} > {new}")]
    DiffNotAnUpgrade { old: String, new: String },
}

/// Immutable store of artifact version records, indexed by coordinate.
/// Version lists are kept ascending; API ids are globally unique.
#[derive(Debug, Clone)]
pub struct RegistrySnapshot {
    artifacts: BTreeMap<ArtifactCoordinate, Vec<VersionRecord>>,
    api_owner: BTreeMap<String, ArtifactCoordinate>,
}

impl RegistrySnapshot {
    pub fn new(
        artifacts: BTreeMap<ArtifactCoordinate, Vec<VersionRecord>>,
    ) -> Result<Self, RegistryError> {
        let mut api_owner: BTreeMap<String, ArtifactCoordinate> = BTreeMap::new();
        let mut sorted = BTreeMap::new();
        for (coordinate, mut records) in artifacts {
            if coordinate.group.is_empty() || coordinate.name.is_empty() {
                return Err(RegistryError::EmptyCoordinate);
            }
            records.sort_by(|a, b| a.version.cmp(&b.version));
            for pair in records.windows(2) {
                if pair[0].version == pair[1].version {
                    return Err(RegistryError::DuplicateVersion {
                        coordinate,
                        version: pair[1].version.raw().to_string(),
                    });
                }
            }
            for record in &records {
                if record.api.len() != record.surface_ids().len() {
                    // BTreeSet of ApiSymbol can hold one id under two kinds.
                    let mut seen = BTreeSet::new();
                    for symbol in &record.api {
                        if !seen.insert(symbol.id.as_str()) {
                            return Err(RegistryError::DuplicateApiId {
                                coordinate,
                                version: record.version.raw().to_string(),
                                id: symbol.id.clone(),
                            });
                        }
                    }
                }
                let own: BTreeSet<&str> = record.surface_ids();
                for edge in &record.invocations {
                    if !own.contains(edge.from.as_str()) {
                        return Err(RegistryError::DanglingInvocationSource {
                            coordinate,
                            version: record.version.raw().to_string(),
                            from: edge.from.clone(),
                        });
                    }
                }
                for symbol in &record.api {
                    match api_owner.get(&symbol.id) {
                        Some(owner) if *owner != coordinate => {
                            return Err(RegistryError::ApiIdOwnedTwice {
                                id: symbol.id.clone(),
                                first: owner.clone(),
                                second: coordinate,
                            });
                        }
                        Some(_) => {}
                        None => {
                            api_owner.insert(symbol.id.clone(), coordinate.clone());
                        }
                    }
                }
            }
            sorted.insert(coordinate, records);
        }
        Ok(Self {
            artifacts: sorted,
            api_owner,
        })
    }

    pub fn is_empty(&self) -> bool {
        self.artifacts.is_empty()
    }

    pub fn artifact_count(&self) -> usize {
        self.artifacts.len()
    }

    pub fn coordinates(&self) -> impl Iterator<Item = &ArtifactCoordinate> {
        self.artifacts.keys()
    }

    pub fn records(
        &self,
        coordinate: &ArtifactCoordinate,
    ) -> Result<&[VersionRecord], RegistryError> {
        self.artifacts
            .get(coordinate)
            .map(Vec::as_slice)
            .ok_or_else(|| RegistryError::UnknownArtifact(coordinate.clone()))
    }

    pub fn record(
        &self,
        coordinate: &ArtifactCoordinate,
        version: &Version,
    ) -> Result<&VersionRecord, RegistryError> {
        self.records(coordinate)?
            .iter()
            .find(|r| r.version == *version)
            .ok_or_else(|| RegistryError::UnknownVersion {
                coordinate: coordinate.clone(),
                version: version.raw().to_string(),
            })
    }

    /// Ascending version list of one artifact.
    pub fn versions(&self, coordinate: &ArtifactCoordinate) -> Result<Vec<Version>, RegistryError> {
        Ok(self.records(coordinate)?.iter().map(|r| r.version.clone()).collect())
    }

    /// Which artifact declares a given API id, if any.
    pub fn api_owner(&self, id: &str) -> Option<&ArtifactCoordinate> {
        self.api_owner.get(id)
    }
}

/// The upgrade candidates for a node: its current version plus every stable
/// version strictly newer, ascending. The current version is included even if
/// it is not itself stable.
pub fn candidate_versions(
    snapshot: &RegistrySnapshot,
    coordinate: &ArtifactCoordinate,
    current: &Version,
) -> Result<Vec<Version>, RegistryError> {
    let records = snapshot.records(coordinate)?;
    if !records.iter().any(|r| r.version == *current) {
        return Err(RegistryError::UnknownVersion {
            coordinate: coordinate.clone(),
            version: current.raw().to_string(),
        });
    }
    let mut out = Vec::new();
    out.push(current.clone());
    for record in records {
        if record.stable && record.version > *current {
            out.push(record.version.clone());
        }
    }
    Ok(out)
}

/// The set of transitive dependencies a version introduces, computed against
/// the registry alone (graph mediation does not apply here). Follows
/// non-optional compile/runtime declarations, resolving each spec against the
/// target's full version list; cycles terminate through the visited set.
pub fn transitive_closure(
    snapshot: &RegistrySnapshot,
    coordinate: &ArtifactCoordinate,
    version: &Version,
) -> Result<BTreeSet<ArtifactCoordinate>, RegistryError> {
    snapshot.record(coordinate, version)?;
    let mut visited: BTreeSet<ArtifactCoordinate> = BTreeSet::new();
    let mut queue: Vec<(ArtifactCoordinate, Version, Vec<ArtifactCoordinate>)> = Vec::new();
    queue.push((coordinate.clone(), version.clone(), Vec::new()));
    let mut head = 0;
    while head < queue.len() {
        let (coord, ver, path) = queue[head].clone();
        head += 1;
        let record = snapshot.record(&coord, &ver)?;
        for decl in &record.dependencies {
            if !decl.scope.is_deployed() || decl.optional {
                continue;
            }
            if decl.target == *coordinate || visited.contains(&decl.target) {
                continue;
            }
            let available = snapshot.versions(&decl.target).map_err(|e| RegistryError::Closure {
                coordinate: decl.target.clone(),
                spec: decl.spec.to_string(),
                path: render_path(&path, &coord),
                cause: e.to_string(),
            })?;
            let resolved =
                resolve_spec(&decl.spec, &available).map_err(|e| RegistryError::Closure {
                    coordinate: decl.target.clone(),
                    spec: decl.spec.to_string(),
                    path: render_path(&path, &coord),
                    cause: e.to_string(),
                })?;
            visited.insert(decl.target.clone());
            let mut next_path = path.clone();
            next_path.push(coord.clone());
            queue.push((decl.target.clone(), resolved.clone(), next_path));
        }
    }
    Ok(visited)
}

fn render_path(path: &[ArtifactCoordinate], last: &ArtifactCoordinate) -> String {
    let mut out = String::new();
    for coord in path {
        out.push_str(&coord.to_string());
        out.push_str(" -> ");
    }
    out.push_str(&last.to_string());
    out
}

/// API ids present in the old version's surface and absent from the new one.
/// Signature changes are encoded as id removals, so removal is the breaking
/// criterion.
pub fn breaking_diff(
    snapshot: &RegistrySnapshot,
    coordinate: &ArtifactCoordinate,
    old: &Version,
    new: &Version,
) -> Result<BTreeSet<String>, RegistryError> {
    if old > new {
        return Err(RegistryError::DiffNotAnUpgrade {
            old: old.raw().to_string(),
            new: new.raw().to_string(),
        });
    }
    let old_record = snapshot.record(coordinate, old)?;
    let new_record = snapshot.record(coordinate, new)?;
    let new_ids = new_record.surface_ids();
    Ok(old_record
        .api
        .iter()
        .filter(|s| !new_ids.contains(s.id.as_str()))
        .map(|s| s.id.clone())
        .collect())
}
