//! The upgrade planner: modified topological traversal of the dynamic
//! dependency graph, per-node candidate filtering (pruning, then
//! compatibility), latest-survivor selection, and graph updates after every
//! upgrade.
//!
//! A node becomes ready only once every dependent (predecessor over retained
//! plus omitted edges) has been processed, so each compatibility check sees
//! settled dependents. The client is processed from the start and never
//! upgraded; workspace-local modules are fixed as well.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use thiserror::Error;

use crate::graph::{
    build_graph, update_after_upgrade, DependencyGraph, GraphError, NodeId, WorkspaceManifest,
};
use crate::reachability::{compute_reachability, ReachError, ReachableSet};
use crate::registry::{
    breaking_diff, candidate_versions, transitive_closure, ArtifactCoordinate, RegistryError,
    RegistrySnapshot,
};
use crate::semver::{Version, VersionSpec};

/// Which filters run during planning.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PlanMode {
    /// Pruning first, then compatibility.
    Full,
    PruningOnly,
    CompatOnly,
    /// No filtering: always the newest candidate.
    Naive,
}

impl fmt::Display for PlanMode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            PlanMode::Full => "full",
            PlanMode::PruningOnly => "pruning-only",
            PlanMode::CompatOnly => "compat-only",
            PlanMode::Naive => "naive",
        };
        f.write_str(name)
    }
}

impl FromStr for PlanMode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "full" => Ok(PlanMode::Full),
            "pruning-only" => Ok(PlanMode::PruningOnly),
            "compat-only" => Ok(PlanMode::CompatOnly),
            "naive" => Ok(PlanMode::Naive),
            other => Err(alloc::format!("unknown mode `{other}`")),
        }
    }
}

/// How far an upgrade may move: patch-only (`mmP`), within the same major
/// (`mMP`), or to the overall latest (`MMP`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum UpgradeStrategy {
    PatchOnly,
    WithinMajor,
    Latest,
}

impl UpgradeStrategy {
    pub fn admits(&self, current: &Version, candidate: &Version) -> bool {
        match self {
            UpgradeStrategy::PatchOnly => {
                candidate.major() == current.major() && candidate.minor() == current.minor()
            }
            UpgradeStrategy::WithinMajor => candidate.major() == current.major(),
            UpgradeStrategy::Latest => true,
        }
    }
}

impl fmt::Display for UpgradeStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let name = match self {
            UpgradeStrategy::PatchOnly => "mmP",
            UpgradeStrategy::WithinMajor => "mMP",
            UpgradeStrategy::Latest => "MMP",
        };
        f.write_str(name)
    }
}

impl FromStr for UpgradeStrategy {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "mmP" => Ok(UpgradeStrategy::PatchOnly),
            "mMP" => Ok(UpgradeStrategy::WithinMajor),
            "MMP" => Ok(UpgradeStrategy::Latest),
            other => Err(alloc::format!("unknown strategy `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PlannerConfig {
    pub mode: PlanMode,
    pub strategy: UpgradeStrategy,
    /// Safety valve: keep the current version plus at most this many of the
    /// newest candidates.
    pub max_candidates_per_node: Option<usize>,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        Self {
            mode: PlanMode::Full,
            strategy: UpgradeStrategy::Latest,
            max_candidates_per_node: None,
        }
    }
}

impl PlannerConfig {
    pub fn with_mode(mode: PlanMode) -> Self {
        Self {
            mode,
            ..Self::default()
        }
    }
}

/// The decision record for one node.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodePlan {
    pub original: Version,
    pub selected: Version,
    pub rejected_by_pruning: Vec<Version>,
    pub rejected_by_compat: Vec<Version>,
}

/// The full plan for one module's graph.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UpgradePlan {
    pub config: PlannerConfig,
    pub per_node: BTreeMap<NodeId, NodePlan>,
    pub processing_order: Vec<NodeId>,
    pub added_nodes: Vec<ArtifactCoordinate>,
    pub removed_nodes: Vec<ArtifactCoordinate>,
}

impl UpgradePlan {
    fn empty(config: &PlannerConfig) -> Self {
        Self {
            config: *config,
            per_node: BTreeMap::new(),
            processing_order: Vec::new(),
            added_nodes: Vec::new(),
            removed_nodes: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum PlanError {
    #[error("no ready node while {remaining} nodes remain unprocessed")]
    Stuck {
        remaining: usize,
        partial: UpgradePlan,
    },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error(transparent)]
    Reach(#[from] ReachError),
}

/// Planner output: the plan plus the fully updated graph.
#[derive(Debug, Clone)]
pub struct PlanOutcome {
    pub plan: UpgradePlan,
    pub graph: DependencyGraph,
}

/// Nodes whose dependents are all processed, ordered by (depth, id) for a
/// deterministic traversal. Returns an error when nothing is ready although
/// unprocessed nodes remain.
pub fn ready_nodes(
    graph: &DependencyGraph,
    processed: &BTreeSet<NodeId>,
) -> Result<Vec<NodeId>, PlanError> {
    let mut ready: Vec<(usize, NodeId)> = Vec::new();
    let mut remaining = 0usize;
    for (id, info) in graph.nodes() {
        if processed.contains(id) {
            continue;
        }
        remaining += 1;
        if graph.dependents_of(id).iter().all(|d| processed.contains(d)) {
            ready.push((info.depth, id.clone()));
        }
    }
    if ready.is_empty() && remaining > 0 {
        return Err(PlanError::Stuck {
            remaining,
            partial: UpgradePlan::empty(&PlannerConfig::default()),
        });
    }
    ready.sort();
    Ok(ready.into_iter().map(|(_, id)| id).collect())
}

/// Pruning filter: a candidate survives only if every transitive dependency
/// it would pull in already exists in the current graph — upgrading to it
/// adds no new node. A new declaration whose target is already present via
/// another path is fine. The current version always survives; candidates
/// whose closure cannot be computed are rejected, not fatal.
pub fn filter_by_pruning(
    graph: &DependencyGraph,
    snapshot: &RegistrySnapshot,
    node: &NodeId,
    candidates: &[Version],
) -> (Vec<Version>, Vec<Version>) {
    let coordinate = match node.coordinate() {
        Some(c) => c,
        None => return (candidates.to_vec(), Vec::new()),
    };
    let current = &candidates[0];
    let mut survivors = Vec::new();
    let mut rejected = Vec::new();
    for candidate in candidates {
        if candidate == current {
            survivors.push(candidate.clone());
            continue;
        }
        match transitive_closure(snapshot, coordinate, candidate) {
            Ok(closure) => {
                if closure.iter().all(|c| graph.contains_coordinate(c)) {
                    survivors.push(candidate.clone());
                } else {
                    rejected.push(candidate.clone());
                }
            }
            Err(_) => rejected.push(candidate.clone()),
        }
    }
    (survivors, rejected)
}

/// Compatibility filter: a candidate survives only if its breaking diff
/// against the current version touches no dependent's reachable set. The
/// current version always survives.
pub fn filter_by_compatibility(
    graph: &DependencyGraph,
    snapshot: &RegistrySnapshot,
    node: &NodeId,
    candidates: &[Version],
    reach: &ReachableSet,
) -> (Vec<Version>, Vec<Version>) {
    let coordinate = match node.coordinate() {
        Some(c) => c,
        None => return (candidates.to_vec(), Vec::new()),
    };
    let current = &candidates[0];
    let mut survivors = Vec::new();
    let mut rejected = Vec::new();
    for candidate in candidates {
        if candidate == current {
            survivors.push(candidate.clone());
            continue;
        }
        match breaking_diff(snapshot, coordinate, current, candidate) {
            Ok(breaking) => {
                let breaks_someone = graph.dependents_of(node).iter().any(|dependent| {
                    reach
                        .per_dependent
                        .get(dependent)
                        .map(|reachable| breaking.iter().any(|id| reachable.contains(id)))
                        .unwrap_or(false)
                });
                if breaks_someone {
                    rejected.push(candidate.clone());
                } else {
                    survivors.push(candidate.clone());
                }
            }
            Err(_) => rejected.push(candidate.clone()),
        }
    }
    (survivors, rejected)
}

/// The newest candidate the strategy admits relative to `current`. The
/// current version itself always qualifies, so the result is total.
pub fn select_version(
    candidates: &[Version],
    current: &Version,
    strategy: UpgradeStrategy,
) -> Version {
    candidates
        .iter()
        .filter(|v| strategy.admits(current, v))
        .max()
        .cloned()
        .unwrap_or_else(|| current.clone())
}

/// Restricts the candidate list to the strategy cap and the optional
/// per-node candidate budget (current version plus the newest survivors).
fn cap_candidates(
    candidates: Vec<Version>,
    current: &Version,
    config: &PlannerConfig,
) -> Vec<Version> {
    let mut capped: Vec<Version> = candidates
        .into_iter()
        .filter(|v| v == current || config.strategy.admits(current, v))
        .collect();
    if let Some(max) = config.max_candidates_per_node {
        if capped.len() > max + 1 {
            let newest = capped.split_off(capped.len() - max);
            capped = core::iter::once(current.clone()).chain(newest).collect();
        }
    }
    capped
}

/// Plans every registry node of the graph under the given configuration and
/// returns the plan together with the fully updated graph.
pub fn plan_upgrades(
    initial: &DependencyGraph,
    snapshot: &RegistrySnapshot,
    config: &PlannerConfig,
) -> Result<PlanOutcome, PlanError> {
    let mut graph = initial.clone();
    let mut plan = UpgradePlan::empty(config);
    let mut processed: BTreeSet<NodeId> = graph
        .nodes()
        .filter(|(id, _)| !matches!(id, NodeId::Registry(_)))
        .map(|(id, _)| id.clone())
        .collect();
    let initial_coords: BTreeSet<ArtifactCoordinate> = graph
        .registry_nodes()
        .into_iter()
        .filter_map(|id| id.coordinate().cloned())
        .collect();

    loop {
        let unprocessed: Vec<NodeId> = graph
            .nodes()
            .map(|(id, _)| id.clone())
            .filter(|id| !processed.contains(id))
            .collect();
        if unprocessed.is_empty() {
            break;
        }
        let ready = match ready_nodes(&graph, &processed) {
            Ok(r) => r,
            Err(PlanError::Stuck { remaining, .. }) => {
                return Err(PlanError::Stuck {
                    remaining,
                    partial: plan,
                });
            }
            Err(other) => return Err(other),
        };
        let node = ready[0].clone();
        let coordinate = node
            .coordinate()
            .expect("only registry nodes remain unprocessed")
            .clone();
        let reach = compute_reachability(&graph, snapshot)?;
        let current = graph.node(&node)?.version.clone();
        let candidates = candidate_versions(snapshot, &coordinate, &current)?;
        let capped = cap_candidates(candidates, &current, config);

        let (survivors, mut rejected_by_pruning) = match config.mode {
            PlanMode::Full | PlanMode::PruningOnly => {
                filter_by_pruning(&graph, snapshot, &node, &capped)
            }
            _ => (capped, Vec::new()),
        };
        let (mut survivors, rejected_by_compat) = match config.mode {
            PlanMode::Full | PlanMode::CompatOnly => {
                filter_by_compatibility(&graph, snapshot, &node, &survivors, &reach[&node])
            }
            _ => (survivors, Vec::new()),
        };

        let selected = loop {
            let selected = select_version(&survivors, &current, config.strategy);
            if selected == current {
                break selected;
            }
            match update_after_upgrade(&mut graph, &node, &selected, snapshot) {
                Ok(outcome) => {
                    // Nodes introduced by this upgrade enter at their resolved
                    // versions and are not upgraded themselves.
                    for added in outcome.added {
                        processed.insert(added);
                    }
                    break selected;
                }
                Err(_) => {
                    // The candidate cannot be applied (unresolvable subtree):
                    // infeasible in every mode, bucketed with pruning.
                    survivors.retain(|v| *v != selected);
                    rejected_by_pruning.push(selected);
                }
            }
        };

        rejected_by_pruning.sort();
        let mut rejected_by_compat = rejected_by_compat;
        rejected_by_compat.sort();
        plan.per_node.insert(
            node.clone(),
            NodePlan {
                original: current,
                selected,
                rejected_by_pruning,
                rejected_by_compat,
            },
        );
        plan.processing_order.push(node.clone());
        processed.insert(node);
    }

    let final_coords: BTreeSet<ArtifactCoordinate> = graph
        .registry_nodes()
        .into_iter()
        .filter_map(|id| id.coordinate().cloned())
        .collect();
    plan.added_nodes = final_coords.difference(&initial_coords).cloned().collect();
    plan.removed_nodes = initial_coords.difference(&final_coords).cloned().collect();
    graph.check_invariants()?;
    Ok(PlanOutcome { plan, graph })
}

/// The plan for one module of a workspace, with the graphs before and after.
#[derive(Debug, Clone)]
pub struct ModulePlanOutcome {
    pub module_id: String,
    pub plan: UpgradePlan,
    pub initial_graph: DependencyGraph,
    pub final_graph: DependencyGraph,
}

/// Plans all modules of a workspace in local-dependency order. Each planned
/// module's direct dependencies are pinned to their selected versions in the
/// working manifest, so dependents build against the upgraded state.
pub fn plan_workspace(
    snapshot: &RegistrySnapshot,
    manifest: &WorkspaceManifest,
    config: &PlannerConfig,
) -> Result<Vec<ModulePlanOutcome>, PlanError> {
    let order = manifest.topological_modules()?;
    let mut working = manifest.clone();
    let mut outcomes = Vec::new();
    for module_id in order {
        let initial_graph = build_graph(snapshot, &working, &module_id)?;
        let outcome = plan_upgrades(&initial_graph, snapshot, config)?;
        let module = working
            .modules
            .iter_mut()
            .find(|m| m.module_id == module_id)
            .expect("topological order lists workspace modules");
        for decl in &mut module.direct_deps {
            let node = NodeId::Registry(decl.target.clone());
            if let Some(node_plan) = outcome.plan.per_node.get(&node) {
                decl.spec = VersionSpec::Exact(node_plan.selected.clone());
            }
        }
        outcomes.push(ModulePlanOutcome {
            module_id,
            plan: outcome.plan,
            initial_graph,
            final_graph: outcome.graph,
        });
    }
    Ok(outcomes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::date::Date;
    use crate::graph::ModuleManifest;
    use crate::registry::{ApiKind, ApiSymbol, DependencyDecl, Scope, VersionRecord};
    use alloc::string::ToString;
    use alloc::vec;

    fn v(s: &str) -> Version {
        Version::parse(s).unwrap()
    }

    fn coord(g: &str, n: &str) -> ArtifactCoordinate {
        ArtifactCoordinate::new(g, n)
    }

    fn decl(g: &str, n: &str, spec: &str) -> DependencyDecl {
        DependencyDecl {
            target: coord(g, n),
            spec: VersionSpec::parse(spec).unwrap(),
            scope: Scope::Compile,
            optional: false,
        }
    }

    fn record(version: &str, deps: Vec<DependencyDecl>, api: &[&str]) -> VersionRecord {
        VersionRecord::new(
            v(version),
            Date::parse("2020-01-01").unwrap(),
            deps,
            api.iter()
                .map(|id| ApiSymbol {
                    id: id.to_string(),
                    kind: ApiKind::Method,
                })
                .collect(),
            Vec::new(),
        )
    }

    fn snapshot(artifacts: Vec<(&str, &str, Vec<VersionRecord>)>) -> RegistrySnapshot {
        let mut map = BTreeMap::new();
        for (g, n, records) in artifacts {
            map.insert(coord(g, n), records);
        }
        RegistrySnapshot::new(map).unwrap()
    }

    fn manifest(deps: Vec<DependencyDecl>) -> WorkspaceManifest {
        WorkspaceManifest::single(ModuleManifest {
            module_id: "client".to_string(),
            direct_deps: deps,
            client_api: BTreeSet::new(),
            client_invocations: Vec::new(),
            local_deps: Vec::new(),
        })
    }

    fn diamond() -> (RegistrySnapshot, DependencyGraph) {
        let s = snapshot(vec![
            ("g", "n1", vec![record("1.0.0", vec![decl("g", "n3", "1.0.0")], &[])]),
            ("g", "n2", vec![record("1.0.0", vec![decl("g", "n3", "1.0.0")], &[])]),
            ("g", "n3", vec![record("1.0.0", vec![], &[])]),
        ]);
        let m = manifest(vec![decl("g", "n1", "1.0.0"), decl("g", "n2", "1.0.0")]);
        let g = build_graph(&s, &m, "client").unwrap();
        (s, g)
    }

    #[test]
    fn ready_diamond_roots_first() {
        let (_, g) = diamond();
        let mut processed: BTreeSet<NodeId> = BTreeSet::new();
        processed.insert(g.client().clone());
        let ready = ready_nodes(&g, &processed).unwrap();
        assert_eq!(ready, vec![NodeId::registry("g", "n1"), NodeId::registry("g", "n2")]);
    }

    #[test]
    fn ready_waits_for_all_dependents() {
        let (_, g) = diamond();
        let mut processed: BTreeSet<NodeId> = BTreeSet::new();
        processed.insert(g.client().clone());
        processed.insert(NodeId::registry("g", "n1"));
        let ready = ready_nodes(&g, &processed).unwrap();
        // n3 still waits on n2.
        assert_eq!(ready, vec![NodeId::registry("g", "n2")]);
    }

    #[test]
    fn ready_chain_advances_one_level() {
        let s = snapshot(vec![
            ("g", "x", vec![record("1.0.0", vec![decl("g", "y", "1.0.0")], &[])]),
            ("g", "y", vec![record("1.0.0", vec![], &[])]),
        ]);
        let m = manifest(vec![decl("g", "x", "1.0.0")]);
        let g = build_graph(&s, &m, "client").unwrap();
        let mut processed: BTreeSet<NodeId> = BTreeSet::new();
        processed.insert(g.client().clone());
        let ready = ready_nodes(&g, &processed).unwrap();
        assert_eq!(ready, vec![NodeId::registry("g", "x")]);
    }

    #[test]
    fn select_version_picks_maximum_under_cap() {
        let survivors = vec![v("1.0.0"), v("1.1.0")];
        assert_eq!(select_version(&survivors, &v("1.0.0"), UpgradeStrategy::Latest), v("1.1.0"));
        let single = vec![v("1.0.0")];
        assert_eq!(select_version(&single, &v("1.0.0"), UpgradeStrategy::Latest), v("1.0.0"));
        let survivors = vec![v("1.2.0"), v("1.9.0"), v("2.0.0")];
        assert_eq!(
            select_version(&survivors, &v("1.2.0"), UpgradeStrategy::WithinMajor),
            v("1.9.0")
        );
        assert_eq!(
            select_version(&survivors, &v("1.2.0"), UpgradeStrategy::PatchOnly),
            v("1.2.0")
        );
    }

    #[test]
    fn pruning_rejects_new_transitive_coordinates() {
        let s = snapshot(vec![
            (
                "g",
                "b",
                vec![
                    record("1.0.0", vec![], &["b.x"]),
                    record("1.0.1", vec![decl("g", "c", "1.0.0")], &["b.x"]),
                ],
            ),
            ("g", "c", vec![record("1.0.0", vec![], &["c.y"])]),
        ]);
        let m = manifest(vec![decl("g", "b", "1.0.0")]);
        let g = build_graph(&s, &m, "client").unwrap();
        let node = NodeId::registry("g", "b");
        let candidates = vec![v("1.0.0"), v("1.0.1")];
        let (survivors, rejected) = filter_by_pruning(&g, &s, &node, &candidates);
        assert_eq!(survivors, vec![v("1.0.0")]);
        assert_eq!(rejected, vec![v("1.0.1")]);
    }

    #[test]
    fn pruning_keeps_identical_dependency_sets() {
        let s = snapshot(vec![(
            "g",
            "a",
            vec![record("1.0.0", vec![], &[]), record("1.1.0", vec![], &[])],
        )]);
        let m = manifest(vec![decl("g", "a", "1.0.0")]);
        let g = build_graph(&s, &m, "client").unwrap();
        let node = NodeId::registry("g", "a");
        let (survivors, rejected) = filter_by_pruning(&g, &s, &node, &[v("1.0.0"), v("1.1.0")]);
        assert_eq!(survivors, vec![v("1.0.0"), v("1.1.0")]);
        assert!(rejected.is_empty());
    }

    #[test]
    fn pruning_allows_new_dep_already_in_graph() {
        // b 1.0.1 adds a dependency on c, but the client already pulls c in.
        let s = snapshot(vec![
            (
                "g",
                "b",
                vec![
                    record("1.0.0", vec![], &["b.x"]),
                    record("1.0.1", vec![decl("g", "c", "1.0.0")], &["b.x"]),
                ],
            ),
            ("g", "c", vec![record("1.0.0", vec![], &["c.y"])]),
        ]);
        let m = manifest(vec![decl("g", "b", "1.0.0"), decl("g", "c", "1.0.0")]);
        let g = build_graph(&s, &m, "client").unwrap();
        let node = NodeId::registry("g", "b");
        let (survivors, _) = filter_by_pruning(&g, &s, &node, &[v("1.0.0"), v("1.0.1")]);
        // The new declaration lands on a node the graph already has, so no
        // node would be added: not redundant.
        assert_eq!(survivors, vec![v("1.0.0"), v("1.0.1")]);
    }

    #[test]
    fn empty_dependency_client_yields_empty_plan() {
        let s = snapshot(vec![]);
        let m = manifest(vec![]);
        let g = build_graph(&s, &m, "client").unwrap();
        let outcome = plan_upgrades(&g, &s, &PlannerConfig::default()).unwrap();
        assert!(outcome.plan.per_node.is_empty());
        assert!(outcome.plan.processing_order.is_empty());
    }

    #[test]
    fn candidate_budget_keeps_current_plus_newest() {
        let candidates = vec![v("1.0.0"), v("1.1.0"), v("1.2.0"), v("1.3.0")];
        let config = PlannerConfig {
            max_candidates_per_node: Some(2),
            ..PlannerConfig::default()
        };
        let capped = cap_candidates(candidates, &v("1.0.0"), &config);
        assert_eq!(capped, vec![v("1.0.0"), v("1.2.0"), v("1.3.0")]);
    }

    #[test]
    fn mode_and_strategy_round_trip_strings() {
        for mode in [PlanMode::Full, PlanMode::PruningOnly, PlanMode::CompatOnly, PlanMode::Naive] {
            assert_eq!(mode.to_string().parse::<PlanMode>().unwrap(), mode);
        }
        for strategy in [
            UpgradeStrategy::PatchOnly,
            UpgradeStrategy::WithinMajor,
            UpgradeStrategy::Latest,
        ] {
            assert_eq!(strategy.to_string().parse::<UpgradeStrategy>().unwrap(), strategy);
        }
        assert!("bogus".parse::<PlanMode>().is_err());
        assert!("mmp".parse::<UpgradeStrategy>().is_err());
    }
}
