//! Seeded synthetic registry and manifest generation for desk-scale
//! verification. Same seed, same registry — everything derives from one
//! ChaCha8 stream.
//!
//! Artifacts are indexed and dependencies only point toward higher indices,
//! so generated registries are acyclic by construction. Release dates are
//! strictly monotone per artifact. API surfaces evolve by removing one symbol
//! (with the breaking probability) or adding a fresh one.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::date::Date;
use crate::graph::{ModuleManifest, WorkspaceManifest};
use crate::registry::{
    ApiKind, ApiSymbol, ArtifactCoordinate, DependencyDecl, InvocationEdge, InvocationKind,
    RegistryError, RegistrySnapshot, Scope, VersionRecord,
};
use crate::semver::{Version, VersionSpec};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GenParams {
    pub seed: u64,
    pub artifact_count: usize,
    pub max_versions_per_artifact: usize,
    pub max_deps_per_version: usize,
    pub api_per_version: usize,
    pub breaking_change_probability: f64,
    pub new_dependency_probability: f64,
    pub invocation_density: f64,
}

impl Default for GenParams {
    fn default() -> Self {
        Self {
            seed: 0,
            artifact_count: 8,
            max_versions_per_artifact: 5,
            max_deps_per_version: 3,
            api_per_version: 5,
            breaking_change_probability: 0.2,
            new_dependency_probability: 0.25,
            invocation_density: 0.5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GenError {
    #[error("probability {name} = {value} outside [0, 1]")]
    BadProbability { name: &'static str, value: String },
    #[error("{name} must be positive")]
    ZeroCount { name: &'static str },
    #[error("invocation density {density} requires a non-empty API surface (api_per_version = 0)")]
    Infeasible { density: String },
    #[error(transparent)]
    Registry(#[from] RegistryError),
}

impl GenParams {
    pub fn validate(&self) -> Result<(), GenError> {
        for (name, value) in [
            ("breaking_change_probability", self.breaking_change_probability),
            ("new_dependency_probability", self.new_dependency_probability),
            ("invocation_density", self.invocation_density),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(GenError::BadProbability {
                    name,
                    value: format_f64(value),
                });
            }
        }
        for (name, value) in [
            ("artifact_count", self.artifact_count),
            ("max_versions_per_artifact", self.max_versions_per_artifact),
            ("max_deps_per_version", self.max_deps_per_version),
        ] {
            if value == 0 {
                return Err(GenError::ZeroCount { name });
            }
        }
        if self.api_per_version == 0 && self.invocation_density > 0.0 {
            return Err(GenError::Infeasible {
                density: format_f64(self.invocation_density),
            });
        }
        Ok(())
    }
}

fn format_f64(value: f64) -> String {
    let mut out = String::new();
    core::fmt::write(&mut out, format_args!("{value}")).expect("formatting into a string");
    out
}

fn artifact_name(index: usize) -> ArtifactCoordinate {
    ArtifactCoordinate::new("gen", alloc::format!("art{index:02}"))
}

struct ArtifactDraft {
    records: Vec<VersionRecord>,
}

/// Generates one registry snapshot plus a single-module client manifest.
pub fn generate_registry(
    params: &GenParams,
) -> Result<(RegistrySnapshot, WorkspaceManifest), GenError> {
    params.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let n = params.artifact_count;
    let mut drafts: BTreeMap<usize, ArtifactDraft> = BTreeMap::new();
    // Deepest artifacts first so declarations can pin existing versions.
    for index in (0..n).rev() {
        let draft = generate_artifact(params, index, n, &drafts, &mut rng);
        drafts.insert(index, draft);
    }

    let manifest = generate_manifest(params, n, &drafts, &mut rng);

    let mut artifacts = BTreeMap::new();
    for (index, draft) in drafts {
        artifacts.insert(artifact_name(index), draft.records);
    }
    let snapshot = RegistrySnapshot::new(artifacts)?;
    Ok((snapshot, manifest))
}

fn generate_artifact(
    params: &GenParams,
    index: usize,
    n: usize,
    deeper: &BTreeMap<usize, ArtifactDraft>,
    rng: &mut ChaCha8Rng,
) -> ArtifactDraft {
    let version_count = rng.gen_range(1..=params.max_versions_per_artifact);
    let mut date = Date::new(2020, 1, 1)
        .expect("base date is valid")
        .epoch_days()
        + rng.gen_range(0..365);
    let mut numbers = (1u64, 0u64, 0u64);
    let mut surface: Vec<ApiSymbol> = (0..params.api_per_version)
        .map(|i| symbol(index, i))
        .collect();
    let mut next_api = params.api_per_version;
    let mut deps = initial_deps(params, index, n, deeper, rng);
    let mut records = Vec::new();
    for step in 0..version_count {
        if step > 0 {
            // Bump one digit; mostly patches, as real registries do.
            let roll = rng.gen_range(0..10);
            if roll < 6 {
                numbers.2 += 1;
            } else if roll < 9 {
                numbers.1 += 1;
                numbers.2 = 0;
            } else {
                numbers.0 += 1;
                numbers.1 = 0;
                numbers.2 = 0;
            }
            date += rng.gen_range(1..120);
            if rng.gen_bool(params.breaking_change_probability) && !surface.is_empty() {
                let victim = rng.gen_range(0..surface.len());
                surface.remove(victim);
            } else {
                surface.push(symbol(index, next_api));
                next_api += 1;
            }
            if rng.gen_bool(params.new_dependency_probability) {
                if let Some(decl) = fresh_dep(params, index, n, deeper, &deps, rng) {
                    deps.push(decl);
                }
            } else if !deps.is_empty() && rng.gen_bool(0.3) {
                // Re-pin one existing dependency at its target's newest
                // version; the coordinate set stays unchanged.
                let which = rng.gen_range(0..deps.len());
                let target_index = coordinate_index(&deps[which].target);
                if let Some(target) = deeper.get(&target_index) {
                    let newest = target.records.last().expect("artifacts have versions");
                    deps[which].spec = VersionSpec::Exact(newest.version.clone());
                }
            }
        }
        let qualifier = rng.gen_bool(0.08) && step + 1 != version_count;
        let version_text = if qualifier {
            alloc::format!("{}.{}.{}-rc1", numbers.0, numbers.1, numbers.2)
        } else {
            alloc::format!("{}.{}.{}", numbers.0, numbers.1, numbers.2)
        };
        let version = Version::parse(&version_text).expect("generated versions parse");
        if qualifier {
            // The qualifier consumed this numeric triple; the next stable
            // release moves past it.
            numbers.2 += 1;
        }
        let invocations = generate_invocations(params, &surface, &deps, deeper, rng);
        let released = Date::from_epoch_days(date);
        records.push(VersionRecord::new(
            version,
            released,
            deps.clone(),
            surface.iter().cloned().collect(),
            invocations,
        ));
    }
    ArtifactDraft { records }
}

fn symbol(artifact: usize, api: usize) -> ApiSymbol {
    ApiSymbol {
        id: alloc::format!("gen:art{artifact:02}/api{api}"),
        kind: if api % 3 == 0 {
            ApiKind::Class
        } else {
            ApiKind::Method
        },
    }
}

fn coordinate_index(coordinate: &ArtifactCoordinate) -> usize {
    coordinate.name.trim_start_matches("art").parse().unwrap_or(0)
}

fn initial_deps(
    params: &GenParams,
    index: usize,
    n: usize,
    deeper: &BTreeMap<usize, ArtifactDraft>,
    rng: &mut ChaCha8Rng,
) -> Vec<DependencyDecl> {
    let reachable = n.saturating_sub(index + 1);
    if reachable == 0 {
        return Vec::new();
    }
    let count = rng.gen_range(0..=params.max_deps_per_version.min(reachable));
    let mut deps = Vec::new();
    let mut used = BTreeSet::new();
    for _ in 0..count {
        if let Some(decl) = pick_dep(params, index, n, deeper, &used, rng) {
            used.insert(coordinate_index(&decl.target));
            deps.push(decl);
        }
    }
    deps
}

fn fresh_dep(
    params: &GenParams,
    index: usize,
    n: usize,
    deeper: &BTreeMap<usize, ArtifactDraft>,
    existing: &[DependencyDecl],
    rng: &mut ChaCha8Rng,
) -> Option<DependencyDecl> {
    let used: BTreeSet<usize> = existing
        .iter()
        .map(|d| coordinate_index(&d.target))
        .collect();
    pick_dep(params, index, n, deeper, &used, rng)
}

fn pick_dep(
    _params: &GenParams,
    index: usize,
    n: usize,
    deeper: &BTreeMap<usize, ArtifactDraft>,
    used: &BTreeSet<usize>,
    rng: &mut ChaCha8Rng,
) -> Option<DependencyDecl> {
    let free: Vec<usize> = (index + 1..n).filter(|i| !used.contains(i)).collect();
    if free.is_empty() {
        return None;
    }
    let target_index = free[rng.gen_range(0..free.len())];
    let records = &deeper.get(&target_index)?.records;
    // Bias toward newer pins: newly declared dependencies arrive mostly
    // up to date, which is what keeps added nodes from dragging lag in.
    let a = rng.gen_range(0..records.len());
    let b = rng.gen_range(0..records.len());
    let pick = a.max(b);
    let spec = if rng.gen_bool(0.12) {
        VersionSpec::Range {
            lower: Some((records[0].version.clone(), true)),
            upper: None,
        }
    } else {
        VersionSpec::Exact(records[pick].version.clone())
    };
    let scope = match rng.gen_range(0..20) {
        0 => Scope::Test,
        1 => Scope::Provided,
        2 | 3 => Scope::Runtime,
        _ => Scope::Compile,
    };
    Some(DependencyDecl {
        target: artifact_name(target_index),
        spec,
        scope,
        optional: rng.gen_range(0..20) == 0,
    })
}

fn generate_invocations(
    params: &GenParams,
    surface: &[ApiSymbol],
    deps: &[DependencyDecl],
    deeper: &BTreeMap<usize, ArtifactDraft>,
    rng: &mut ChaCha8Rng,
) -> Vec<InvocationEdge> {
    let mut invocations = Vec::new();
    for own in surface {
        if !rng.gen_bool(params.invocation_density) {
            continue;
        }
        let into_dep = !deps.is_empty() && rng.gen_bool(0.5);
        let target = if into_dep {
            let decl = &deps[rng.gen_range(0..deps.len())];
            dep_surface_symbol(decl, deeper, rng)
        } else if surface.len() > 1 {
            let other = &surface[rng.gen_range(0..surface.len())];
            (other.id != own.id).then(|| other.clone())
        } else {
            None
        };
        if let Some(target) = target {
            invocations.push(InvocationEdge {
                from: own.id.clone(),
                to: target.id.clone(),
                kind: match target.kind {
                    ApiKind::Method => InvocationKind::Call,
                    ApiKind::Class => InvocationKind::Type,
                },
            });
        }
    }
    invocations
}

/// A random symbol from the declared version of a dependency, resolved the
/// simple way: exact pins use that record, ranges use the newest.
fn dep_surface_symbol(
    decl: &DependencyDecl,
    deeper: &BTreeMap<usize, ArtifactDraft>,
    rng: &mut ChaCha8Rng,
) -> Option<ApiSymbol> {
    let records = &deeper.get(&coordinate_index(&decl.target))?.records;
    let record = match &decl.spec {
        VersionSpec::Exact(v) => records.iter().find(|r| r.version == *v)?,
        VersionSpec::Range { .. } => records.last()?,
    };
    if record.api.is_empty() {
        return None;
    }
    let pick = rng.gen_range(0..record.api.len());
    record.api.iter().nth(pick).cloned()
}

fn generate_manifest(
    params: &GenParams,
    n: usize,
    drafts: &BTreeMap<usize, ArtifactDraft>,
    rng: &mut ChaCha8Rng,
) -> WorkspaceManifest {
    let direct_pool = n.min(5);
    let count = rng.gen_range(1..=direct_pool.min(3).max(1));
    let mut used = BTreeSet::new();
    let mut direct_deps = Vec::new();
    for _ in 0..count {
        let free: Vec<usize> = (0..direct_pool).filter(|i| !used.contains(i)).collect();
        if free.is_empty() {
            break;
        }
        let target_index = free[rng.gen_range(0..free.len())];
        used.insert(target_index);
        let records = &drafts[&target_index].records;
        // Bias the client toward older pins: that is where the lag lives.
        let a = rng.gen_range(0..records.len());
        let b = rng.gen_range(0..records.len());
        let pick = a.min(b);
        direct_deps.push(DependencyDecl {
            target: artifact_name(target_index),
            spec: VersionSpec::Exact(records[pick].version.clone()),
            scope: Scope::Compile,
            optional: false,
        });
    }

    let api_count = params.api_per_version.max(1);
    let client_api: BTreeSet<ApiSymbol> = (0..api_count)
        .map(|i| ApiSymbol {
            id: alloc::format!("app/main{i}"),
            kind: ApiKind::Method,
        })
        .collect();
    let mut client_invocations = Vec::new();
    for own in &client_api {
        if !rng.gen_bool(params.invocation_density.max(0.3)) || direct_deps.is_empty() {
            continue;
        }
        let decl = &direct_deps[rng.gen_range(0..direct_deps.len())];
        let target_index = coordinate_index(&decl.target);
        let records = &drafts[&target_index].records;
        let record = match &decl.spec {
            VersionSpec::Exact(v) => records.iter().find(|r| r.version == *v),
            VersionSpec::Range { .. } => records.last(),
        };
        if let Some(record) = record {
            if record.api.is_empty() {
                continue;
            }
            let pick = rng.gen_range(0..record.api.len());
            let target = record.api.iter().nth(pick).expect("index in range");
            client_invocations.push(InvocationEdge {
                from: own.id.clone(),
                to: target.id.clone(),
                kind: match target.kind {
                    ApiKind::Method => InvocationKind::Call,
                    ApiKind::Class => InvocationKind::Type,
                },
            });
        }
    }

    WorkspaceManifest::single(ModuleManifest {
        module_id: "app".to_string(),
        direct_deps,
        client_api,
        client_invocations,
        local_deps: Vec::new(),
    })
}
