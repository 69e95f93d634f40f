//! Independent brute-force oracle for candidate feasibility.
//!
//! Everything here re-derives the planner's filter decisions from scratch —
//! naive exhaustive set construction, recursion, and linear scans — sharing
//! only the graph/snapshot state accessors and the elementary version
//! comparator with the main path. Plans are verified by replaying their
//! processing order and comparing each selected version against the oracle's
//! maximum feasible candidate.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::vec::Vec;

use thiserror::Error;

use crate::graph::{update_after_upgrade, DependencyGraph, GraphError, NodeData, NodeId};
use crate::planner::{PlanError, PlanMode, UpgradePlan};
use crate::registry::{
    candidate_versions, ArtifactCoordinate, InvocationEdge, RegistryError, RegistrySnapshot,
};
use crate::semver::{Version, VersionSpec};

/// Spec-level classification of one candidate.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OracleVerdict {
    Feasible,
    RejectedByPruning,
    RejectedByCompat,
}

/// The raw facts behind a verdict. A candidate can fail several ways at
/// once; mode interpretation picks the relevant ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct OracleAssessment {
    /// The registry-wide transitive closure cannot be resolved.
    pub closure_unresolvable: bool,
    /// The closure contains a coordinate the current graph lacks.
    pub redundant: bool,
    /// A removed API is reachable from some dependent.
    pub incompatible: bool,
    /// Applying the upgrade to the graph would fail (unresolvable subtree or
    /// a cycle), which no mode can accept.
    pub inapplicable: bool,
}

impl OracleAssessment {
    pub fn verdict(&self) -> OracleVerdict {
        if self.closure_unresolvable || self.redundant {
            OracleVerdict::RejectedByPruning
        } else if self.incompatible {
            OracleVerdict::RejectedByCompat
        } else if self.inapplicable {
            // Resolution failures surface in the pruning bucket.
            OracleVerdict::RejectedByPruning
        } else {
            OracleVerdict::Feasible
        }
    }

    pub fn feasible_under(&self, mode: PlanMode) -> bool {
        if self.inapplicable {
            return false;
        }
        match mode {
            PlanMode::Full => !self.closure_unresolvable && !self.redundant && !self.incompatible,
            PlanMode::PruningOnly => !self.closure_unresolvable && !self.redundant,
            PlanMode::CompatOnly => !self.incompatible,
            PlanMode::Naive => true,
        }
    }
}

/// Exhaustive spec resolution: scan every version, keep the matches, return
/// the newest.
fn naive_resolve(spec: &VersionSpec, available: &[Version]) -> Option<Version> {
    let mut best: Option<&Version> = None;
    for version in available {
        if spec.matches(version) {
            match best {
                Some(b) if b >= version => {}
                _ => best = Some(version),
            }
        }
    }
    best.cloned()
}

/// Registry-wide transitive closure by plain recursion over declared
/// dependencies (compile/runtime, non-optional).
fn naive_closure(
    snapshot: &RegistrySnapshot,
    root: &ArtifactCoordinate,
    version: &Version,
) -> Result<BTreeSet<ArtifactCoordinate>, ()> {
    fn walk(
        snapshot: &RegistrySnapshot,
        root: &ArtifactCoordinate,
        coordinate: &ArtifactCoordinate,
        version: &Version,
        seen: &mut BTreeSet<ArtifactCoordinate>,
    ) -> Result<(), ()> {
        let record = snapshot.record(coordinate, version).map_err(|_| ())?;
        for decl in &record.dependencies {
            if !decl.scope.is_deployed() || decl.optional {
                continue;
            }
            if decl.target == *root || seen.contains(&decl.target) {
                continue;
            }
            let available = snapshot.versions(&decl.target).map_err(|_| ())?;
            let resolved = naive_resolve(&decl.spec, &available).ok_or(())?;
            seen.insert(decl.target.clone());
            walk(snapshot, root, &decl.target, &resolved, seen)?;
        }
        Ok(())
    }
    let mut seen = BTreeSet::new();
    walk(snapshot, root, root, version, &mut seen)?;
    Ok(seen)
}

/// Breaking APIs by linear scan: ids in the old surface that the new surface
/// lacks.
fn naive_breaking(
    snapshot: &RegistrySnapshot,
    coordinate: &ArtifactCoordinate,
    old: &Version,
    new: &Version,
) -> Option<BTreeSet<alloc::string::String>> {
    let old_record = snapshot.record(coordinate, old).ok()?;
    let new_record = snapshot.record(coordinate, new).ok()?;
    let mut removed = BTreeSet::new();
    for symbol in &old_record.api {
        let mut still_there = false;
        for candidate in &new_record.api {
            if candidate.id == symbol.id {
                still_there = true;
                break;
            }
        }
        if !still_there {
            removed.insert(symbol.id.clone());
        }
    }
    Some(removed)
}

fn node_api_ids(
    graph: &DependencyGraph,
    snapshot: &RegistrySnapshot,
    node: &NodeId,
) -> BTreeSet<alloc::string::String> {
    match graph.node(node) {
        Ok(info) => match &info.data {
            NodeData::Workspace { api, .. } => api.iter().map(|s| s.id.clone()).collect(),
            NodeData::Registry => node
                .coordinate()
                .and_then(|c| snapshot.record(c, &info.version).ok())
                .map(|r| r.api.iter().map(|s| s.id.clone()).collect())
                .unwrap_or_default(),
        },
        Err(_) => BTreeSet::new(),
    }
}

fn node_invocations(
    graph: &DependencyGraph,
    snapshot: &RegistrySnapshot,
    node: &NodeId,
) -> Vec<InvocationEdge> {
    match graph.node(node) {
        Ok(info) => match &info.data {
            NodeData::Workspace { invocations, .. } => invocations.clone(),
            NodeData::Registry => node
                .coordinate()
                .and_then(|c| snapshot.record(c, &info.version).ok())
                .map(|r| r.invocations.clone())
                .unwrap_or_default(),
        },
        Err(_) => Vec::new(),
    }
}

/// Per-dependent reachable sets for every node, recomputed from scratch by
/// repeated passes until nothing grows (no topological bookkeeping).
fn naive_reachability(
    graph: &DependencyGraph,
    snapshot: &RegistrySnapshot,
) -> BTreeMap<NodeId, BTreeMap<NodeId, BTreeSet<alloc::string::String>>> {
    let mut unions: BTreeMap<NodeId, BTreeSet<alloc::string::String>> = BTreeMap::new();
    for (id, _) in graph.nodes() {
        if id == graph.client() {
            unions.insert(id.clone(), node_api_ids(graph, snapshot, id));
        } else {
            unions.insert(id.clone(), BTreeSet::new());
        }
    }
    let mut per_dependent: BTreeMap<NodeId, BTreeMap<NodeId, BTreeSet<alloc::string::String>>> =
        BTreeMap::new();
    loop {
        let mut changed = false;
        for (node, _) in graph.nodes() {
            if node == graph.client() {
                continue;
            }
            let surface = node_api_ids(graph, snapshot, node);
            let own_invocations = node_invocations(graph, snapshot, node);
            let mut rebuilt: BTreeMap<NodeId, BTreeSet<alloc::string::String>> = BTreeMap::new();
            for dependent in graph.dependents_of(node) {
                let dependent_reach = unions.get(&dependent).cloned().unwrap_or_default();
                let mut reached: BTreeSet<alloc::string::String> = BTreeSet::new();
                for edge in node_invocations(graph, snapshot, &dependent) {
                    if dependent_reach.contains(&edge.from) && surface.contains(&edge.to) {
                        reached.insert(edge.to.clone());
                    }
                }
                loop {
                    let mut grew = false;
                    for edge in &own_invocations {
                        if reached.contains(&edge.from)
                            && surface.contains(&edge.to)
                            && !reached.contains(&edge.to)
                        {
                            reached.insert(edge.to.clone());
                            grew = true;
                        }
                    }
                    if !grew {
                        break;
                    }
                }
                rebuilt.insert(dependent, reached);
            }
            let union: BTreeSet<alloc::string::String> =
                rebuilt.values().flatten().cloned().collect();
            if unions.get(node) != Some(&union) {
                unions.insert(node.clone(), union);
                changed = true;
            }
            per_dependent.insert(node.clone(), rebuilt);
        }
        if !changed {
            break;
        }
    }
    per_dependent
}

/// Whether the graph could actually apply this upgrade: every declaration of
/// the candidate's subtree (recursing only into coordinates the graph lacks)
/// resolves, and no edge to an existing node closes a cycle.
fn naive_applicable(
    graph: &DependencyGraph,
    snapshot: &RegistrySnapshot,
    node: &NodeId,
    candidate: &Version,
) -> bool {
    let Some(coordinate) = node.coordinate() else {
        return false;
    };
    let Ok(record) = snapshot.record(coordinate, candidate) else {
        return false;
    };
    let mut queue: Vec<&crate::registry::DependencyDecl> = record
        .dependencies
        .iter()
        .filter(|d| d.scope.is_deployed() && !d.optional)
        .collect();
    let mut visited: BTreeSet<ArtifactCoordinate> = BTreeSet::new();
    while let Some(decl) = queue.pop() {
        let Ok(available) = snapshot.versions(&decl.target) else {
            return false;
        };
        let Some(resolved) = naive_resolve(&decl.spec, &available) else {
            return false;
        };
        if graph.contains_coordinate(&decl.target) {
            // An edge back into an ancestor of `node` would close a cycle.
            if reaches_naive(graph, &NodeId::Registry(decl.target.clone()), node) {
                return false;
            }
            continue;
        }
        if visited.insert(decl.target.clone()) {
            let Ok(target_record) = snapshot.record(&decl.target, &resolved) else {
                return false;
            };
            queue.extend(
                target_record
                    .dependencies
                    .iter()
                    .filter(|d| d.scope.is_deployed() && !d.optional),
            );
        }
    }
    true
}

/// Plain DFS reachability over the graph's edge union.
fn reaches_naive(graph: &DependencyGraph, from: &NodeId, to: &NodeId) -> bool {
    if from == to {
        return true;
    }
    let mut seen = BTreeSet::new();
    let mut stack = alloc::vec![from.clone()];
    while let Some(current) = stack.pop() {
        if !seen.insert(current.clone()) {
            continue;
        }
        for next in graph.dependencies_of(&current) {
            if next == *to {
                return true;
            }
            stack.push(next);
        }
    }
    false
}

/// Classifies one candidate version of `node` against the given graph state
/// (the state at the node's processing step).
pub fn oracle_feasible(
    graph: &DependencyGraph,
    snapshot: &RegistrySnapshot,
    node: &NodeId,
    candidate: &Version,
) -> OracleAssessment {
    let coordinate = node.coordinate().expect("oracle runs on registry nodes");
    let current = graph
        .node(node)
        .map(|info| info.version.clone())
        .expect("oracle runs on graph nodes");
    if *candidate == current {
        // The current version is retained by both filters and needs no
        // update, so it is feasible by definition.
        return OracleAssessment {
            closure_unresolvable: false,
            redundant: false,
            incompatible: false,
            inapplicable: false,
        };
    }

    let (closure_unresolvable, redundant) = match naive_closure(snapshot, coordinate, candidate) {
        Ok(closure) => {
            let missing = closure.iter().any(|c| !graph.contains_coordinate(c));
            (false, missing)
        }
        Err(()) => (true, false),
    };

    let incompatible = match naive_breaking(snapshot, coordinate, &current, candidate) {
        Some(removed) if removed.is_empty() => false,
        Some(removed) => {
            let reach = naive_reachability(graph, snapshot);
            let empty = BTreeMap::new();
            let per_dependent = reach.get(node).unwrap_or(&empty);
            graph.dependents_of(node).iter().any(|dependent| {
                per_dependent
                    .get(dependent)
                    .map(|set| removed.iter().any(|id| set.contains(id)))
                    .unwrap_or(false)
            })
        }
        None => true,
    };

    let inapplicable = !naive_applicable(graph, snapshot, node, candidate);

    OracleAssessment {
        closure_unresolvable,
        redundant,
        incompatible,
        inapplicable,
    }
}

#[derive(Debug, Clone)]
pub struct StepCheck {
    pub node: NodeId,
    pub selected: Version,
    pub oracle_best: Version,
    pub agrees: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReplayError {
    #[error("plan lists {node} at step {step}, but the replayed graph has no such node")]
    MissingNode { node: NodeId, step: usize },
    #[error("replaying upgrade of {node} to {version} failed: {cause}")]
    UpdateFailed {
        node: NodeId,
        version: alloc::string::String,
        cause: GraphError,
    },
    #[error(transparent)]
    Registry(#[from] RegistryError),
    #[error(transparent)]
    Plan(#[from] PlanError),
}

/// Replays a plan from the initial graph, re-deriving every step's candidate
/// set and comparing the planner's selection with the oracle's maximum
/// feasible candidate under the plan's mode.
pub fn replay_plan(
    snapshot: &RegistrySnapshot,
    initial: &DependencyGraph,
    plan: &UpgradePlan,
) -> Result<Vec<StepCheck>, ReplayError> {
    let mut graph = initial.clone();
    let mut checks = Vec::new();
    for (step, node) in plan.processing_order.iter().enumerate() {
        if !graph.contains(node) {
            return Err(ReplayError::MissingNode {
                node: node.clone(),
                step,
            });
        }
        let coordinate = node.coordinate().expect("plans cover registry nodes");
        let current = graph.node(node).expect("checked above").version.clone();
        let candidates = candidate_versions(snapshot, coordinate, &current)?;
        let capped: Vec<Version> = {
            let strategy = plan.config.strategy;
            let mut kept: Vec<Version> = candidates
                .into_iter()
                .filter(|v| *v == current || strategy.admits(&current, v))
                .collect();
            if let Some(max) = plan.config.max_candidates_per_node {
                if kept.len() > max + 1 {
                    let newest = kept.split_off(kept.len() - max);
                    kept = core::iter::once(current.clone()).chain(newest).collect();
                }
            }
            kept
        };
        let oracle_best = capped
            .iter()
            .filter(|v| oracle_feasible(&graph, snapshot, node, v).feasible_under(plan.config.mode))
            .max()
            .cloned()
            .unwrap_or_else(|| current.clone());
        let node_plan = &plan.per_node[node];
        checks.push(StepCheck {
            node: node.clone(),
            selected: node_plan.selected.clone(),
            oracle_best: oracle_best.clone(),
            agrees: node_plan.selected == oracle_best,
        });
        if node_plan.selected != current {
            update_after_upgrade(&mut graph, node, &node_plan.selected, snapshot).map_err(
                |cause| ReplayError::UpdateFailed {
                    node: node.clone(),
                    version: alloc::string::ToString::to_string(node_plan.selected.raw()),
                    cause,
                },
            )?;
        }
    }
    Ok(checks)
}
