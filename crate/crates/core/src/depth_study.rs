//! Depth-impact study: upgrade each transitive dependency in isolation under
//! a trivial strategy (mmP/mMP/MMP) and tabulate, by dependency depth, how
//! many clients would break and how many client-impacting APIs appear.

use alloc::collections::BTreeMap;
use alloc::vec::Vec;

use crate::graph::{build_graph, WorkspaceManifest};
use crate::planner::UpgradeStrategy;
use crate::reachability::compute_reachability;
use crate::registry::{breaking_diff, ArtifactCoordinate, RegistryError, RegistrySnapshot};
use crate::semver::Version;

/// Counts for one (depth, strategy) cell. A "broken client" is a
/// (client, dependency) pair whose isolated upgrade removes a reachable API;
/// a client broken by several dependencies at the same depth counts once per
/// pair.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepthImpactRow {
    pub depth: usize,
    pub strategy: UpgradeStrategy,
    pub broken_clients: u64,
    pub client_impacting_apis: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DepthStudy {
    pub strategy: UpgradeStrategy,
    /// Rows ascending by depth; fully zero depths are omitted.
    pub rows: Vec<DepthImpactRow>,
    pub skipped_manifests: u64,
    /// How broken clients are counted, recorded alongside the data.
    pub counting: &'static str,
}

pub const PAIR_COUNTING_NOTE: &str =
    "broken_clients counts (client, dependency) pairs; client_impacting_apis sums |breaking ∩ reachable| per pair without cross-client deduplication";

/// The newest stable version the strategy admits from `current`; `current`
/// itself when nothing newer qualifies.
pub fn strategy_target(
    snapshot: &RegistrySnapshot,
    coordinate: &ArtifactCoordinate,
    current: &Version,
    strategy: UpgradeStrategy,
) -> Result<Version, RegistryError> {
    let records = snapshot.records(coordinate)?;
    Ok(records
        .iter()
        .filter(|r| r.stable && r.version > *current && strategy.admits(current, &r.version))
        .map(|r| r.version.clone())
        .max()
        .unwrap_or_else(|| current.clone()))
}

/// Runs the study over every module of every manifest. Manifests whose
/// modules fail to build are skipped (with a warning) and counted.
pub fn depth_impact_study(
    snapshot: &RegistrySnapshot,
    manifests: &[WorkspaceManifest],
    strategy: UpgradeStrategy,
) -> DepthStudy {
    let mut cells: BTreeMap<usize, (u64, u64)> = BTreeMap::new();
    let mut skipped = 0u64;
    'manifests: for manifest in manifests {
        let mut graphs = Vec::new();
        for module in &manifest.modules {
            match build_graph(snapshot, manifest, &module.module_id) {
                Ok(graph) => graphs.push(graph),
                Err(e) => {
                    log::warn!("skipping manifest: module `{}` failed to build: {e}", module.module_id);
                    skipped += 1;
                    continue 'manifests;
                }
            }
        }
        for graph in &graphs {
            let reach = match compute_reachability(graph, snapshot) {
                Ok(r) => r,
                Err(e) => {
                    log::warn!("skipping manifest: reachability failed: {e}");
                    skipped += 1;
                    continue 'manifests;
                }
            };
            for node in graph.registry_nodes() {
                let info = graph.node(&node).expect("listed node");
                if info.depth < 2 {
                    continue;
                }
                let coordinate = node.coordinate().expect("registry node");
                let Ok(target) = strategy_target(snapshot, coordinate, &info.version, strategy)
                else {
                    continue;
                };
                if target == info.version {
                    continue;
                }
                let Ok(breaking) = breaking_diff(snapshot, coordinate, &info.version, &target)
                else {
                    continue;
                };
                let impacted = breaking
                    .iter()
                    .filter(|id| reach[&node].union.contains(*id))
                    .count() as u64;
                if impacted > 0 {
                    let cell = cells.entry(info.depth).or_default();
                    cell.0 += 1;
                    cell.1 += impacted;
                }
            }
        }
    }
    DepthStudy {
        strategy,
        rows: cells
            .into_iter()
            .map(|(depth, (broken, apis))| DepthImpactRow {
                depth,
                strategy,
                broken_clients: broken,
                client_impacting_apis: apis,
            })
            .collect(),
        skipped_manifests: skipped,
        counting: PAIR_COUNTING_NOTE,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::date::Date;
    use crate::graph::ModuleManifest;
    use crate::registry::{ApiKind, ApiSymbol, DependencyDecl, Scope, VersionRecord};
    use alloc::collections::{BTreeMap, BTreeSet};
    use alloc::string::ToString;
    use alloc::vec;

    fn v(s: &str) -> Version {
        Version::parse(s).unwrap()
    }

    fn coord(g: &str, n: &str) -> ArtifactCoordinate {
        ArtifactCoordinate::new(g, n)
    }

    fn record(version: &str, api: &[&str]) -> VersionRecord {
        VersionRecord::new(
            v(version),
            Date::parse("2020-01-01").unwrap(),
            vec![],
            api.iter()
                .map(|id| ApiSymbol {
                    id: id.to_string(),
                    kind: ApiKind::Method,
                })
                .collect(),
            Vec::new(),
        )
    }

    #[test]
    fn strategy_targets_cap_examples() {
        let mut artifacts = BTreeMap::new();
        artifacts.insert(
            coord("g", "lib"),
            vec![
                record("1.2.3", &[]),
                record("1.2.9", &[]),
                record("1.9.0", &[]),
                record("2.0.0", &[]),
            ],
        );
        let s = RegistrySnapshot::new(artifacts).unwrap();
        let c = coord("g", "lib");
        let cur = v("1.2.3");
        assert_eq!(
            strategy_target(&s, &c, &cur, UpgradeStrategy::PatchOnly).unwrap(),
            v("1.2.9")
        );
        assert_eq!(
            strategy_target(&s, &c, &cur, UpgradeStrategy::WithinMajor).unwrap(),
            v("1.9.0")
        );
        assert_eq!(
            strategy_target(&s, &c, &cur, UpgradeStrategy::Latest).unwrap(),
            v("2.0.0")
        );
        assert!(strategy_target(&s, &coord("g", "zzz"), &cur, UpgradeStrategy::Latest).is_err());
    }

    #[test]
    fn strategy_target_without_newer_is_current() {
        let mut artifacts = BTreeMap::new();
        artifacts.insert(coord("g", "lib"), vec![record("1.2.3", &[])]);
        let s = RegistrySnapshot::new(artifacts).unwrap();
        let got = strategy_target(&s, &coord("g", "lib"), &v("1.2.3"), UpgradeStrategy::Latest).unwrap();
        assert_eq!(got, v("1.2.3"));
    }

    #[test]
    fn targets_nest_across_strategies() {
        let mut artifacts = BTreeMap::new();
        artifacts.insert(
            coord("g", "lib"),
            vec![
                record("1.2.3", &[]),
                record("1.2.9", &[]),
                record("1.9.0", &[]),
                record("2.0.0", &[]),
            ],
        );
        let s = RegistrySnapshot::new(artifacts).unwrap();
        let c = coord("g", "lib");
        let cur = v("1.2.3");
        let mmp = strategy_target(&s, &c, &cur, UpgradeStrategy::PatchOnly).unwrap();
        let mmajor = strategy_target(&s, &c, &cur, UpgradeStrategy::WithinMajor).unwrap();
        let latest = strategy_target(&s, &c, &cur, UpgradeStrategy::Latest).unwrap();
        assert!(mmp <= mmajor && mmajor <= latest);
    }

    fn chain_registry() -> (RegistrySnapshot, WorkspaceManifest) {
        // client -> mid -> leaf; leaf's MMP target removes a reachable API.
        let mid = VersionRecord::new(
            v("1.0.0"),
            Date::parse("2020-01-01").unwrap(),
            vec![DependencyDecl {
                target: coord("g", "leaf"),
                spec: crate::semver::VersionSpec::parse("1.0.0").unwrap(),
                scope: Scope::Compile,
                optional: false,
            }],
            [ApiSymbol {
                id: "mid.go".to_string(),
                kind: ApiKind::Method,
            }]
            .into_iter()
            .collect(),
            vec![crate::registry::InvocationEdge {
                from: "mid.go".to_string(),
                to: "leaf.f".to_string(),
                kind: crate::registry::InvocationKind::Call,
            }],
        );
        let mut artifacts = BTreeMap::new();
        artifacts.insert(coord("g", "mid"), vec![mid]);
        artifacts.insert(
            coord("g", "leaf"),
            vec![record("1.0.0", &["leaf.f"]), record("2.0.0", &["leaf.g"])],
        );
        let snapshot = RegistrySnapshot::new(artifacts).unwrap();
        let manifest = WorkspaceManifest::single(ModuleManifest {
            module_id: "client".to_string(),
            direct_deps: vec![DependencyDecl {
                target: coord("g", "mid"),
                spec: crate::semver::VersionSpec::parse("1.0.0").unwrap(),
                scope: Scope::Compile,
                optional: false,
            }],
            client_api: [ApiSymbol {
                id: "c.main".to_string(),
                kind: ApiKind::Method,
            }]
            .into_iter()
            .collect(),
            client_invocations: vec![crate::registry::InvocationEdge {
                from: "c.main".to_string(),
                to: "mid.go".to_string(),
                kind: crate::registry::InvocationKind::Call,
            }],
            local_deps: vec![],
        });
        (snapshot, manifest)
    }

    #[test]
    fn reachable_removal_at_depth_two_counts() {
        let (snapshot, manifest) = chain_registry();
        let study = depth_impact_study(&snapshot, &[manifest], UpgradeStrategy::Latest);
        assert_eq!(study.rows.len(), 1);
        let row = &study.rows[0];
        assert_eq!((row.depth, row.broken_clients, row.client_impacting_apis), (2, 1, 1));
        assert_eq!(study.skipped_manifests, 0);
    }

    #[test]
    fn unreachable_dependency_contributes_nothing() {
        let (snapshot, mut manifest) = chain_registry();
        // Cut the client's call into mid: nothing in leaf is reachable.
        manifest.modules[0].client_invocations.clear();
        let study = depth_impact_study(&snapshot, &[manifest], UpgradeStrategy::Latest);
        assert!(study.rows.is_empty());
    }

    #[test]
    fn patch_only_strategy_sees_no_breaking_target() {
        let (snapshot, manifest) = chain_registry();
        let study = depth_impact_study(&snapshot, &[manifest], UpgradeStrategy::PatchOnly);
        assert!(study.rows.is_empty());
    }

    #[test]
    fn unbuildable_manifest_is_skipped_and_counted() {
        let (snapshot, good) = chain_registry();
        let bad = WorkspaceManifest::single(ModuleManifest {
            module_id: "broken".to_string(),
            direct_deps: vec![DependencyDecl {
                target: coord("g", "ghost"),
                spec: crate::semver::VersionSpec::parse("1.0.0").unwrap(),
                scope: Scope::Compile,
                optional: false,
            }],
            client_api: BTreeSet::new(),
            client_invocations: vec![],
            local_deps: vec![],
        });
        let study = depth_impact_study(&snapshot, &[bad, good], UpgradeStrategy::Latest);
        assert_eq!(study.skipped_manifests, 1);
        assert_eq!(study.rows.len(), 1);
    }
}
