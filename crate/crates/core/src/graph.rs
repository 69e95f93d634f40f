//! The client dependency graph: construction from a workspace manifest with
//! nearest-wins mediation, and in-place updates after a node upgrade.
//!
//! The graph keeps both the retained dependency edges and the edges hidden by
//! mediation (omitted edges); reachability, readiness, and depth all operate
//! over their union.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::format;
use alloc::string::{String, ToString};
use alloc::vec::Vec;
use core::fmt;

use thiserror::Error;

use crate::registry::{
    ApiSymbol, ArtifactCoordinate, DependencyDecl, InvocationEdge, RegistryError, RegistrySnapshot,
};
use crate::semver::{resolve_spec, Version, VersionSpec};

/// Identity of a graph node. Client and workspace-local modules use reserved
/// identifiers so they can never collide with registry coordinates.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum NodeId {
    Client(String),
    Local(String),
    Registry(ArtifactCoordinate),
}

impl NodeId {
    pub fn registry(group: &str, name: &str) -> Self {
        NodeId::Registry(ArtifactCoordinate::new(group, name))
    }

    pub fn coordinate(&self) -> Option<&ArtifactCoordinate> {
        match self {
            NodeId::Registry(c) => Some(c),
            _ => None,
        }
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            NodeId::Client(m) => write!(f, "@client/{m}"),
            NodeId::Local(m) => write!(f, "@local/{m}"),
            NodeId::Registry(c) => write!(f, "{c}"),
        }
    }
}

/// Where a node's API surface and invocation edges come from.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum NodeData {
    /// Surfaces supplied by the workspace manifest (client or local module).
    Workspace {
        api: BTreeSet<ApiSymbol>,
        invocations: Vec<InvocationEdge>,
    },
    /// Surfaces looked up in the registry snapshot at the resolved version.
    Registry,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NodeInfo {
    pub version: Version,
    pub depth: usize,
    pub data: NodeData,
}

pub type Edge = (NodeId, NodeId);

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("node {0} is not reachable from the client")]
    NotRooted(NodeId),
    #[error("dependency cycle through {from} -> {to}")]
    Cycle { from: NodeId, to: NodeId },
    #[error("workspace module `{0}` not found")]
    UnknownModule(String),
    #[error("workspace local dependencies form a cycle at `{0}`")]
    LocalCycle(String),
    #[error("cannot resolve {spec} declared by {declarer} on {target}: {cause}")]
    Unresolvable {
        declarer: NodeId,
        target: ArtifactCoordinate,
        spec: String,
        cause: String,
    },
    #[error(transparent)]
    Registry(#[from] RegistryError),
}

/// One module of a workspace manifest.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModuleManifest {
    pub module_id: String,
    pub direct_deps: Vec<DependencyDecl>,
    pub client_api: BTreeSet<ApiSymbol>,
    pub client_invocations: Vec<InvocationEdge>,
    pub local_deps: Vec<String>,
}

/// A multi-module workspace; `local_deps` references form a DAG.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct WorkspaceManifest {
    pub modules: Vec<ModuleManifest>,
}

impl WorkspaceManifest {
    pub fn single(module: ModuleManifest) -> Self {
        Self {
            modules: alloc::vec![module],
        }
    }

    pub fn module(&self, id: &str) -> Option<&ModuleManifest> {
        self.modules.iter().find(|m| m.module_id == id)
    }

    /// Module ids in an order where every local dependency precedes its
    /// dependents.
    pub fn topological_modules(&self) -> Result<Vec<String>, GraphError> {
        let mut order = Vec::new();
        let mut state: BTreeMap<&str, u8> = BTreeMap::new(); // 1 = visiting, 2 = done
        fn visit<'a>(
            manifest: &'a WorkspaceManifest,
            id: &'a str,
            state: &mut BTreeMap<&'a str, u8>,
            order: &mut Vec<String>,
        ) -> Result<(), GraphError> {
            match state.get(id) {
                Some(2) => return Ok(()),
                Some(_) => return Err(GraphError::LocalCycle(id.to_string())),
                None => {}
            }
            state.insert(id, 1);
            let module = manifest
                .module(id)
                .ok_or_else(|| GraphError::UnknownModule(id.to_string()))?;
            for dep in &module.local_deps {
                visit(manifest, dep, state, order)?;
            }
            state.insert(id, 2);
            order.push(id.to_string());
            Ok(())
        }
        for module in &self.modules {
            visit(self, &module.module_id, &mut state, &mut order)?;
        }
        Ok(order)
    }
}

/// A version placeholder for nodes that have no registry version (client and
/// local modules).
fn workspace_version() -> Version {
    Version::parse("0").expect("constant parses")
}

/// The dependency graph of one client module.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DependencyGraph {
    client: NodeId,
    nodes: BTreeMap<NodeId, NodeInfo>,
    edges: BTreeSet<Edge>,
    omitted: BTreeSet<Edge>,
    specs: BTreeMap<Edge, VersionSpec>,
}

/// Nodes added to or removed from the graph by one update.
#[derive(Debug, Clone, Default)]
pub struct UpdateOutcome {
    pub added: Vec<NodeId>,
    pub removed: Vec<NodeId>,
}

impl DependencyGraph {
    pub fn client(&self) -> &NodeId {
        &self.client
    }

    pub fn nodes(&self) -> impl Iterator<Item = (&NodeId, &NodeInfo)> {
        self.nodes.iter()
    }

    pub fn node(&self, id: &NodeId) -> Result<&NodeInfo, GraphError> {
        self.nodes.get(id).ok_or_else(|| GraphError::UnknownNode(id.clone()))
    }

    pub fn contains(&self, id: &NodeId) -> bool {
        self.nodes.contains_key(id)
    }

    pub fn contains_coordinate(&self, coordinate: &ArtifactCoordinate) -> bool {
        self.nodes.contains_key(&NodeId::Registry(coordinate.clone()))
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn edges(&self) -> &BTreeSet<Edge> {
        &self.edges
    }

    pub fn omitted_edges(&self) -> &BTreeSet<Edge> {
        &self.omitted
    }

    pub fn declared_spec(&self, edge: &Edge) -> Option<&VersionSpec> {
        self.specs.get(edge)
    }

    /// Direct successors over retained plus omitted edges, sorted.
    pub fn dependencies_of(&self, id: &NodeId) -> Vec<NodeId> {
        self.all_edges()
            .filter(|(from, _)| from == id)
            .map(|(_, to)| to.clone())
            .collect()
    }

    /// Direct predecessors (dependents) over retained plus omitted edges,
    /// sorted.
    pub fn dependents_of(&self, id: &NodeId) -> Vec<NodeId> {
        self.all_edges()
            .filter(|(_, to)| to == id)
            .map(|(from, _)| from.clone())
            .collect()
    }

    fn all_edges(&self) -> impl Iterator<Item = &Edge> {
        self.edges.iter().chain(self.omitted.iter())
    }

    /// Registry nodes only (the upgradeable part of the graph).
    pub fn registry_nodes(&self) -> Vec<NodeId> {
        self.nodes
            .keys()
            .filter(|id| matches!(id, NodeId::Registry(_)))
            .cloned()
            .collect()
    }

    /// True when `target` is reachable from `start` over retained + omitted
    /// edges.
    fn reaches(&self, start: &NodeId, target: &NodeId) -> bool {
        if start == target {
            return true;
        }
        let mut visited = BTreeSet::new();
        let mut stack = alloc::vec![start.clone()];
        while let Some(node) = stack.pop() {
            if !visited.insert(node.clone()) {
                continue;
            }
            for next in self.dependencies_of(&node) {
                if next == *target {
                    return true;
                }
                stack.push(next);
            }
        }
        false
    }

    fn recompute_depths(&mut self) {
        let mut depths: BTreeMap<NodeId, usize> = BTreeMap::new();
        depths.insert(self.client.clone(), 0);
        let mut frontier = alloc::vec![self.client.clone()];
        let mut depth = 0;
        while !frontier.is_empty() {
            depth += 1;
            let mut next = Vec::new();
            for node in &frontier {
                for succ in self.dependencies_of(node) {
                    if !depths.contains_key(&succ) {
                        depths.insert(succ.clone(), depth);
                        next.push(succ);
                    }
                }
            }
            frontier = next;
        }
        for (id, info) in &mut self.nodes {
            if let Some(d) = depths.get(id) {
                info.depth = *d;
            }
        }
    }

    /// Drops nodes that lost every path from the client, with their edges.
    fn remove_orphans(&mut self) -> Vec<NodeId> {
        let mut reachable = BTreeSet::new();
        reachable.insert(self.client.clone());
        let mut stack = alloc::vec![self.client.clone()];
        while let Some(node) = stack.pop() {
            for succ in self.dependencies_of(&node) {
                if reachable.insert(succ.clone()) {
                    stack.push(succ);
                }
            }
        }
        let orphans: Vec<NodeId> = self
            .nodes
            .keys()
            .filter(|id| !reachable.contains(*id))
            .cloned()
            .collect();
        for orphan in &orphans {
            self.nodes.remove(orphan);
        }
        self.edges
            .retain(|(from, to)| reachable.contains(from) && reachable.contains(to));
        self.omitted
            .retain(|(from, to)| reachable.contains(from) && reachable.contains(to));
        self.specs
            .retain(|(from, to), _| reachable.contains(from) && reachable.contains(to));
        orphans
    }

    /// Internal consistency: acyclic, client-rooted, depths correct.
    pub fn check_invariants(&self) -> Result<(), GraphError> {
        // Kahn's algorithm detects cycles over the edge union.
        let mut indegree: BTreeMap<&NodeId, usize> = self.nodes.keys().map(|n| (n, 0)).collect();
        for (_, to) in self.all_edges() {
            if let Some(d) = indegree.get_mut(to) {
                *d += 1;
            }
        }
        let mut queue: Vec<&NodeId> = indegree
            .iter()
            .filter(|(_, d)| **d == 0)
            .map(|(n, _)| *n)
            .collect();
        let mut seen = 0;
        while let Some(node) = queue.pop() {
            seen += 1;
            for (from, to) in self.all_edges() {
                if from == node {
                    let d = indegree.get_mut(to).expect("edge endpoints are nodes");
                    *d -= 1;
                    if *d == 0 {
                        queue.push(to);
                    }
                }
            }
        }
        if seen != self.nodes.len() {
            return Err(GraphError::Cycle {
                from: self.client.clone(),
                to: self.client.clone(),
            });
        }
        for id in self.nodes.keys() {
            if id != &self.client && !self.reaches(&self.client, id) {
                return Err(GraphError::NotRooted(id.clone()));
            }
        }
        Ok(())
    }
}

/// A mediation candidate: one declaration of a coordinate somewhere in the
/// expansion, at a given depth and global declaration index.
#[derive(Debug, Clone)]
pub struct MediationCandidate {
    pub coordinate: ArtifactCoordinate,
    pub version: Version,
    pub depth: usize,
    pub declaration_index: usize,
}

/// Nearest-wins conflict mediation: for every coordinate, the declaration at
/// minimal depth wins; ties break toward the smallest declaration index
/// (first declared).
pub fn mediate(candidates: &[MediationCandidate]) -> BTreeMap<ArtifactCoordinate, Version> {
    let mut winners: BTreeMap<ArtifactCoordinate, &MediationCandidate> = BTreeMap::new();
    for candidate in candidates {
        match winners.get(&candidate.coordinate) {
            Some(best)
                if (best.depth, best.declaration_index)
                    <= (candidate.depth, candidate.declaration_index) => {}
            _ => {
                winners.insert(candidate.coordinate.clone(), candidate);
            }
        }
    }
    winners
        .into_iter()
        .map(|(coordinate, c)| (coordinate, c.version.clone()))
        .collect()
}

/// A declaration queued for breadth-first expansion.
enum PendingDecl {
    Registry(DependencyDecl),
    Local(String),
}

/// Builds the dependency graph of `module_id`: breadth-first expansion from
/// the module's direct dependencies, skipping test/provided scopes, skipping
/// optional declarations unless direct, resolving local modules from the
/// workspace, and recording mediation losers as omitted edges.
pub fn build_graph(
    snapshot: &RegistrySnapshot,
    manifest: &WorkspaceManifest,
    module_id: &str,
) -> Result<DependencyGraph, GraphError> {
    let module = manifest
        .module(module_id)
        .ok_or_else(|| GraphError::UnknownModule(module_id.to_string()))?;
    let client = NodeId::Client(module.module_id.clone());
    let mut graph = DependencyGraph {
        client: client.clone(),
        nodes: BTreeMap::new(),
        edges: BTreeSet::new(),
        omitted: BTreeSet::new(),
        specs: BTreeMap::new(),
    };
    graph.nodes.insert(
        client.clone(),
        NodeInfo {
            version: workspace_version(),
            depth: 0,
            data: NodeData::Workspace {
                api: module.client_api.clone(),
                invocations: module.client_invocations.clone(),
            },
        },
    );

    // Breadth-first expansion: the first declaration of a coordinate (level
    // ascending, declaration order within a level) wins mediation, so winner
    // selection needs no explicit candidate list here.
    let mut frontier: Vec<(NodeId, PendingDecl)> = module_declarations(module, true)
        .into_iter()
        .map(|d| (client.clone(), d))
        .collect();
    let mut depth = 0usize;
    while !frontier.is_empty() {
        depth += 1;
        let mut next: Vec<(NodeId, PendingDecl)> = Vec::new();
        for (parent, pending) in frontier {
            let (target, version, spec) = match &pending {
                PendingDecl::Local(id) => (NodeId::Local(id.clone()), None, None),
                PendingDecl::Registry(decl) => {
                    let available = snapshot.versions(&decl.target).map_err(|e| {
                        GraphError::Unresolvable {
                            declarer: parent.clone(),
                            target: decl.target.clone(),
                            spec: decl.spec.to_string(),
                            cause: e.to_string(),
                        }
                    })?;
                    let version = resolve_spec(&decl.spec, &available)
                        .map_err(|e| GraphError::Unresolvable {
                            declarer: parent.clone(),
                            target: decl.target.clone(),
                            spec: decl.spec.to_string(),
                            cause: e.to_string(),
                        })?
                        .clone();
                    (
                        NodeId::Registry(decl.target.clone()),
                        Some(version),
                        Some(decl.spec.clone()),
                    )
                }
            };
            if graph.contains(&target) {
                // First declaration won (it sits at the same or a shallower
                // level, or earlier at this level): this one is an omitted
                // edge pointing at the mediated winner.
                if graph.reaches(&target, &parent) {
                    return Err(GraphError::Cycle {
                        from: parent,
                        to: target,
                    });
                }
                graph.omitted.insert((parent.clone(), target.clone()));
                if let Some(spec) = spec {
                    graph.specs.insert((parent, target), spec);
                }
                continue;
            }
            let (info, declarations) = match &pending {
                PendingDecl::Local(id) => {
                    let local = manifest
                        .module(id)
                        .ok_or_else(|| GraphError::UnknownModule(id.clone()))?;
                    (
                        NodeInfo {
                            version: workspace_version(),
                            depth,
                            data: NodeData::Workspace {
                                api: local.client_api.clone(),
                                invocations: local.client_invocations.clone(),
                            },
                        },
                        module_declarations(local, false),
                    )
                }
                PendingDecl::Registry(decl) => {
                    let version = version.expect("registry target resolved above");
                    let record = snapshot.record(&decl.target, &version)?;
                    let declarations = record
                        .dependencies
                        .iter()
                        .filter(|d| d.scope.is_deployed() && !d.optional)
                        .map(|d| PendingDecl::Registry(d.clone()))
                        .collect();
                    (
                        NodeInfo {
                            version,
                            depth,
                            data: NodeData::Registry,
                        },
                        declarations,
                    )
                }
            };
            graph.nodes.insert(target.clone(), info);
            graph.edges.insert((parent.clone(), target.clone()));
            if let Some(spec) = spec {
                graph.specs.insert((parent, target.clone()), spec);
            }
            next.extend(declarations.into_iter().map(|d| (target.clone(), d)));
        }
        frontier = next;
    }
    graph.recompute_depths();
    Ok(graph)
}

/// The outgoing declarations of a workspace module, in declaration order:
/// local modules first, then registry dependencies. Test/provided scopes are
/// always dropped; optional declarations survive only for the client module
/// itself.
fn module_declarations(module: &ModuleManifest, is_client: bool) -> Vec<PendingDecl> {
    let mut out: Vec<PendingDecl> = module
        .local_deps
        .iter()
        .map(|id| PendingDecl::Local(id.clone()))
        .collect();
    out.extend(
        module
            .direct_deps
            .iter()
            .filter(|d| d.scope.is_deployed() && (is_client || !d.optional))
            .map(|d| PendingDecl::Registry(d.clone())),
    );
    out
}

/// Replaces `node`'s outgoing edges with `new_version`'s declarations,
/// expanding newly introduced coordinates, dropping orphaned nodes, and
/// recomputing depths. Existing nodes keep their resolved versions; a new
/// declaration that disagrees with an existing node's version becomes an
/// omitted edge against the mediated winner.
///
/// On error the graph is left untouched and the caller must treat
/// `new_version` as infeasible.
pub fn update_after_upgrade(
    graph: &mut DependencyGraph,
    node: &NodeId,
    new_version: &Version,
    snapshot: &RegistrySnapshot,
) -> Result<UpdateOutcome, GraphError> {
    let coordinate = match node {
        NodeId::Registry(c) => c.clone(),
        _ => return Err(GraphError::UnknownNode(node.clone())),
    };
    graph.node(node)?;
    let record = snapshot.record(&coordinate, new_version)?;

    let mut work = graph.clone();
    work.nodes.get_mut(node).expect("checked above").version = new_version.clone();
    work.edges.retain(|(from, _)| from != node);
    work.omitted.retain(|(from, _)| from != node);
    work.specs.retain(|(from, _), _| from != node);

    let before: BTreeSet<NodeId> = graph.nodes.keys().cloned().collect();
    let mut frontier: Vec<(NodeId, DependencyDecl)> = record
        .dependencies
        .iter()
        .filter(|d| d.scope.is_deployed() && !d.optional)
        .map(|d| (node.clone(), d.clone()))
        .collect();
    while !frontier.is_empty() {
        let mut next = Vec::new();
        for (parent, decl) in frontier {
            let available =
                snapshot
                    .versions(&decl.target)
                    .map_err(|e| GraphError::Unresolvable {
                        declarer: parent.clone(),
                        target: decl.target.clone(),
                        spec: decl.spec.to_string(),
                        cause: e.to_string(),
                    })?;
            let version = resolve_spec(&decl.spec, &available)
                .map_err(|e| GraphError::Unresolvable {
                    declarer: parent.clone(),
                    target: decl.target.clone(),
                    spec: decl.spec.to_string(),
                    cause: e.to_string(),
                })?
                .clone();
            let target = NodeId::Registry(decl.target.clone());
            if work.contains(&target) {
                if work.reaches(&target, &parent) {
                    return Err(GraphError::Cycle {
                        from: parent,
                        to: target,
                    });
                }
                let existing = work.node(&target)?.version.clone();
                if existing == version {
                    work.edges.insert((parent.clone(), target.clone()));
                } else {
                    work.omitted.insert((parent.clone(), target.clone()));
                }
                work.specs.insert((parent, target), decl.spec.clone());
                continue;
            }
            let target_record = snapshot.record(&decl.target, &version)?;
            work.nodes.insert(
                target.clone(),
                NodeInfo {
                    version: version.clone(),
                    depth: usize::MAX, // recomputed below
                    data: NodeData::Registry,
                },
            );
            work.edges.insert((parent.clone(), target.clone()));
            work.specs.insert((parent, target.clone()), decl.spec.clone());
            next.extend(
                target_record
                    .dependencies
                    .iter()
                    .filter(|d| d.scope.is_deployed() && !d.optional)
                    .map(|d| (target.clone(), d.clone())),
            );
        }
        frontier = next;
    }

    let removed = work.remove_orphans();
    work.recompute_depths();
    let after: BTreeSet<NodeId> = work.nodes.keys().cloned().collect();
    let added: Vec<NodeId> = after.difference(&before).cloned().collect();
    let removed: Vec<NodeId> = removed
        .into_iter()
        .filter(|n| before.contains(n))
        .collect();
    *graph = work;
    Ok(UpdateOutcome { added, removed })
}

/// Test-oriented description of a graph as sorted multisets.
pub fn graph_facts(graph: &DependencyGraph) -> GraphFacts {
    GraphFacts {
        nodes: graph
            .nodes()
            .map(|(id, info)| (id.to_string(), info.version.raw().to_string(), info.depth))
            .collect(),
        edges: graph
            .edges()
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect(),
        omitted: graph
            .omitted_edges()
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect(),
        specs: graph
            .specs
            .iter()
            .map(|((a, b), s)| (format!("{a} -> {b}"), s.to_string()))
            .collect(),
    }
}

/// Sorted node/edge/omitted/spec views used by tests and the round-trip
/// property.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphFacts {
    pub nodes: Vec<(String, String, usize)>,
    pub edges: Vec<(String, String)>,
    pub omitted: Vec<(String, String)>,
    pub specs: Vec<(String, String)>,
}

pub(crate) fn graph_from_parts(
    client: NodeId,
    nodes: BTreeMap<NodeId, NodeInfo>,
    edges: BTreeSet<Edge>,
    omitted: BTreeSet<Edge>,
    specs: BTreeMap<Edge, VersionSpec>,
) -> DependencyGraph {
    let mut graph = DependencyGraph {
        client,
        nodes,
        edges,
        omitted,
        specs,
    };
    graph.recompute_depths();
    graph
}
