//! Per-node reachable-API computation: which APIs of each dependency are
//! invoked, directly or indirectly, from the client's code.
//!
//! Method calls and type-level references live in one usage graph with typed
//! edges; closure traverses both kinds uniformly. A node's reachable set is
//! computed per dependent — seeds are the dependent's reachable usage edges
//! that land in the node's surface, then closed forward through the node's
//! own usage graph.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

use crate::graph::{DependencyGraph, GraphError, NodeData, NodeId};
use crate::registry::{InvocationEdge, InvocationKind, RegistryError, RegistrySnapshot};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReachError {
    #[error("dependent {dependent} of {node} has no reachable set yet (processing order violated)")]
    MissingDependent { node: NodeId, dependent: NodeId },
    #[error(transparent)]
    Graph(#[from] GraphError),
    #[error(transparent)]
    Registry(#[from] RegistryError),
}

/// Call graph and class dependency graph of one node, merged with edge kinds
/// preserved.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct UsageGraph {
    pub owner: NodeId,
    /// The owner's own API surface ids.
    pub nodes: BTreeSet<String>,
    pub edges: BTreeSet<(String, String, InvocationKind)>,
}

impl UsageGraph {
    pub fn new(owner: NodeId, surface: BTreeSet<String>, invocations: &[InvocationEdge]) -> Self {
        let edges = invocations
            .iter()
            .map(|e| (e.from.clone(), e.to.clone(), e.kind))
            .collect();
        Self {
            owner,
            nodes: surface,
            edges,
        }
    }
}

/// The reachable APIs of one node, split by dependent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReachableSet {
    pub node: NodeId,
    pub per_dependent: BTreeMap<NodeId, BTreeSet<String>>,
    pub union: BTreeSet<String>,
}

impl ReachableSet {
    fn from_parts(node: NodeId, per_dependent: BTreeMap<NodeId, BTreeSet<String>>) -> Self {
        let union = per_dependent.values().flatten().cloned().collect();
        Self {
            node,
            per_dependent,
            union,
        }
    }
}

/// The node's own API surface ids, from the workspace manifest or the
/// registry record at the resolved version.
pub fn node_surface(
    graph: &DependencyGraph,
    snapshot: &RegistrySnapshot,
    id: &NodeId,
) -> Result<BTreeSet<String>, ReachError> {
    let info = graph.node(id)?;
    match &info.data {
        NodeData::Workspace { api, .. } => Ok(api.iter().map(|s| s.id.clone()).collect()),
        NodeData::Registry => {
            let coordinate = id.coordinate().expect("registry node has a coordinate");
            let record = snapshot.record(coordinate, &info.version)?;
            Ok(record.api.iter().map(|s| s.id.clone()).collect())
        }
    }
}

/// The node's usage graph at its current resolved version.
pub fn build_usage_graph(
    graph: &DependencyGraph,
    snapshot: &RegistrySnapshot,
    id: &NodeId,
) -> Result<UsageGraph, ReachError> {
    let info = graph.node(id)?;
    match &info.data {
        NodeData::Workspace { api, invocations } => Ok(UsageGraph::new(
            id.clone(),
            api.iter().map(|s| s.id.clone()).collect(),
            invocations,
        )),
        NodeData::Registry => {
            let coordinate = id.coordinate().expect("registry node has a coordinate");
            let record = snapshot.record(coordinate, &info.version)?;
            Ok(UsageGraph::new(
                id.clone(),
                record.api.iter().map(|s| s.id.clone()).collect(),
                &record.invocations,
            ))
        }
    }
}

/// Entry points into a dependency: targets of the dependent's usage edges
/// whose source is reachable in the dependent and whose target belongs to the
/// dependency's surface. Edge targets outside `dep_surface` belong to other
/// dependencies and are ignored here.
pub fn entry_callees(
    dependent_usage: &UsageGraph,
    dependent_reachable: &BTreeSet<String>,
    dep_surface: &BTreeSet<String>,
) -> BTreeSet<String> {
    dependent_usage
        .edges
        .iter()
        .filter(|(from, to, _)| dependent_reachable.contains(from) && dep_surface.contains(to))
        .map(|(_, to, _)| to.clone())
        .collect()
}

/// Forward closure of `seeds` through `usage`, restricted to the owner's own
/// surface.
fn forward_closure(usage: &UsageGraph, seeds: BTreeSet<String>) -> BTreeSet<String> {
    let mut reached = seeds;
    let mut frontier: Vec<String> = reached.iter().cloned().collect();
    while let Some(api) = frontier.pop() {
        for (from, to, _) in &usage.edges {
            if *from == api && usage.nodes.contains(to) && reached.insert(to.clone()) {
                frontier.push(to.clone());
            }
        }
    }
    reached
}

/// Computes the reachable set of `node` from its dependents' already-computed
/// reachable sets (topological precondition). The client itself is fully
/// live: its reachable set is its whole API surface.
pub fn reachable_apis(
    graph: &DependencyGraph,
    snapshot: &RegistrySnapshot,
    node: &NodeId,
    dependents_reachable: &BTreeMap<NodeId, ReachableSet>,
) -> Result<ReachableSet, ReachError> {
    if node == graph.client() {
        // All client code is live: the client's own surface seeds everything.
        let surface = node_surface(graph, snapshot, node)?;
        return Ok(ReachableSet {
            node: node.clone(),
            per_dependent: BTreeMap::new(),
            union: surface,
        });
    }
    let surface = node_surface(graph, snapshot, node)?;
    let own_usage = build_usage_graph(graph, snapshot, node)?;
    let mut per_dependent = BTreeMap::new();
    for dependent in graph.dependents_of(node) {
        let dependent_reach = dependents_reachable
            .get(&dependent)
            .ok_or_else(|| ReachError::MissingDependent {
                node: node.clone(),
                dependent: dependent.clone(),
            })?;
        let dependent_usage = build_usage_graph(graph, snapshot, &dependent)?;
        let seeds = entry_callees(&dependent_usage, &dependent_reach.union, &surface);
        per_dependent.insert(dependent, forward_closure(&own_usage, seeds));
    }
    Ok(ReachableSet::from_parts(node.clone(), per_dependent))
}

/// Reachable sets for every node, computed in topological order from the
/// client over retained + omitted edges.
pub fn compute_reachability(
    graph: &DependencyGraph,
    snapshot: &RegistrySnapshot,
) -> Result<BTreeMap<NodeId, ReachableSet>, ReachError> {
    let mut indegree: BTreeMap<NodeId, usize> = graph.nodes().map(|(id, _)| (id.clone(), 0)).collect();
    for (id, _) in graph.nodes() {
        for dep in graph.dependencies_of(id) {
            *indegree.get_mut(&dep).expect("edge endpoints are nodes") += 1;
        }
    }
    let mut ready: Vec<NodeId> = indegree
        .iter()
        .filter(|(_, d)| **d == 0)
        .map(|(id, _)| id.clone())
        .collect();
    let mut result: BTreeMap<NodeId, ReachableSet> = BTreeMap::new();
    while let Some(node) = ready.pop() {
        let set = reachable_apis(graph, snapshot, &node, &result)?;
        result.insert(node.clone(), set);
        for dep in graph.dependencies_of(&node) {
            let d = indegree.get_mut(&dep).expect("edge endpoints are nodes");
            *d -= 1;
            if *d == 0 {
                ready.push(dep);
            }
        }
    }
    if result.len() != indegree.len() {
        return Err(ReachError::Graph(GraphError::Cycle {
            from: graph.client().clone(),
            to: graph.client().clone(),
        }));
    }
    Ok(result)
}

/// Renders a reachable-set map deterministically (tests and diagnostics).
pub fn reach_summary(reach: &BTreeMap<NodeId, ReachableSet>) -> Vec<(String, Vec<String>)> {
    reach
        .iter()
        .map(|(id, set)| (id.to_string(), set.union.iter().cloned().collect()))
        .collect()
}
