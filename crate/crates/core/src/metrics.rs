//! Technical-lag metrics over a dependency graph: version lag (by level,
//! direct vs transitive), time lag in days, before/after reductions, the
//! redundant-dependency delta, and the post-hoc breakage check.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use crate::graph::{DependencyGraph, NodeId};
use crate::reachability::{build_usage_graph, compute_reachability, node_surface, ReachError};
use crate::registry::{RegistrySnapshot, VersionRecord};
use crate::semver::{classify_step, LagLevel};

/// Version-lag counts split by the SemVer level each pending upgrade touches.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LevelCounts {
    pub major: u64,
    pub minor: u64,
    pub patch: u64,
    pub pre_release: u64,
}

impl LevelCounts {
    pub fn total(&self) -> u64 {
        self.major + self.minor + self.patch + self.pre_release
    }

    fn bump(&mut self, level: LagLevel) {
        match level {
            LagLevel::Major => self.major += 1,
            LagLevel::Minor => self.minor += 1,
            LagLevel::Patch => self.patch += 1,
            LagLevel::PreRelease => self.pre_release += 1,
            LagLevel::None => {}
        }
    }

    fn add(&mut self, other: &LevelCounts) {
        self.major += other.major;
        self.minor += other.minor;
        self.patch += other.patch;
        self.pre_release += other.pre_release;
    }
}

/// Per-dependency lag numbers.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DependencyLag {
    pub version_lag: u64,
    pub levels: LevelCounts,
    pub time_lag_days: i64,
    pub direct: bool,
}

/// Whole-graph totals.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LagTotals {
    pub levels: LevelCounts,
    pub version_lag: u64,
    pub version_lag_direct: u64,
    pub version_lag_transitive: u64,
    pub time_lag_days: i64,
    pub time_lag_days_direct: i64,
    pub time_lag_days_transitive: i64,
}

/// Version and time lag of one graph. Nodes whose version data is missing
/// from the snapshot are excluded from totals and listed in `warnings`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LagReport {
    pub per_dependency: BTreeMap<NodeId, DependencyLag>,
    pub totals: LagTotals,
    pub warnings: Vec<String>,
}

/// The most recently released stable version of an artifact, if any. Release
/// dates are monotone in well-formed registries, but the tie-break on equal
/// dates (higher version) keeps this deterministic regardless.
fn latest_stable_release<'a>(records: &'a [VersionRecord]) -> Option<&'a VersionRecord> {
    records
        .iter()
        .filter(|r| r.stable)
        .max_by(|a, b| (a.released, &a.version).cmp(&(b.released, &b.version)))
}

/// Version lag per Def 3: for each dependency, the number of stable versions
/// newer than the deployed one, classified by upgrade level.
pub fn version_lag(snapshot: &RegistrySnapshot, graph: &DependencyGraph) -> LagReport {
    let mut report = LagReport::default();
    for node in graph.registry_nodes() {
        let info = match graph.node(&node) {
            Ok(info) => info,
            Err(_) => continue,
        };
        let coordinate = node.coordinate().expect("registry node");
        let records = match snapshot.records(coordinate) {
            Ok(r) => r,
            Err(e) => {
                report.warnings.push(e.to_string());
                continue;
            }
        };
        if !records.iter().any(|r| r.version == info.version) {
            report
                .warnings
                .push(alloc::format!("{node}: version {} not in snapshot", info.version));
            continue;
        }
        let mut lag = DependencyLag {
            direct: info.depth == 1,
            ..DependencyLag::default()
        };
        for record in records {
            if record.stable && record.version > info.version {
                lag.version_lag += 1;
                if let Ok(level) = classify_step(&info.version, &record.version) {
                    lag.levels.bump(level);
                }
            }
        }
        accumulate(&mut report.totals, &lag);
        report.per_dependency.insert(node, lag);
    }
    report
}

/// Time lag per Def 2, restricted to stable versions on both ends of the
/// comparison: days between the deployed version's release and the most
/// recently released stable version. Clamped at zero so an unstable deployed
/// version released after every stable one carries no lag.
pub fn time_lag(snapshot: &RegistrySnapshot, graph: &DependencyGraph) -> LagReport {
    let mut report = LagReport::default();
    for node in graph.registry_nodes() {
        let info = match graph.node(&node) {
            Ok(info) => info,
            Err(_) => continue,
        };
        let coordinate = node.coordinate().expect("registry node");
        let records = match snapshot.records(coordinate) {
            Ok(r) => r,
            Err(e) => {
                report.warnings.push(e.to_string());
                continue;
            }
        };
        let Some(current) = records.iter().find(|r| r.version == info.version) else {
            report
                .warnings
                .push(alloc::format!("{node}: version {} not in snapshot", info.version));
            continue;
        };
        let days = latest_stable_release(records)
            .map(|latest| latest.released.days_since(&current.released).max(0))
            .unwrap_or(0);
        let lag = DependencyLag {
            time_lag_days: days,
            direct: info.depth == 1,
            ..DependencyLag::default()
        };
        accumulate(&mut report.totals, &lag);
        report.per_dependency.insert(node, lag);
    }
    report
}

fn accumulate(totals: &mut LagTotals, lag: &DependencyLag) {
    totals.levels.add(&lag.levels);
    totals.version_lag += lag.version_lag;
    totals.time_lag_days += lag.time_lag_days;
    if lag.direct {
        totals.version_lag_direct += lag.version_lag;
        totals.time_lag_days_direct += lag.time_lag_days;
    } else {
        totals.version_lag_transitive += lag.version_lag;
        totals.time_lag_days_transitive += lag.time_lag_days;
    }
}

impl LagReport {
    /// Version and time lag combined into one report.
    pub fn compute(snapshot: &RegistrySnapshot, graph: &DependencyGraph) -> Self {
        let versions = version_lag(snapshot, graph);
        let times = time_lag(snapshot, graph);
        let mut per_dependency = versions.per_dependency;
        for (node, time_entry) in times.per_dependency {
            per_dependency
                .entry(node)
                .and_modify(|e| e.time_lag_days = time_entry.time_lag_days)
                .or_insert(time_entry);
        }
        let mut warnings = versions.warnings;
        for w in times.warnings {
            if !warnings.contains(&w) {
                warnings.push(w);
            }
        }
        let totals = LagTotals {
            levels: versions.totals.levels,
            version_lag: versions.totals.version_lag,
            version_lag_direct: versions.totals.version_lag_direct,
            version_lag_transitive: versions.totals.version_lag_transitive,
            time_lag_days: times.totals.time_lag_days,
            time_lag_days_direct: times.totals.time_lag_days_direct,
            time_lag_days_transitive: times.totals.time_lag_days_transitive,
        };
        Self {
            per_dependency,
            totals,
            warnings,
        }
    }
}

/// Signed level-wise deltas (before − after).
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LevelDeltas {
    pub major: i64,
    pub minor: i64,
    pub patch: i64,
    pub pre_release: i64,
}

/// before − after over graph totals. Removed nodes count as reduced lag,
/// added nodes as increased lag.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct LagDelta {
    pub levels: LevelDeltas,
    pub version_lag: i64,
    pub version_lag_direct: i64,
    pub version_lag_transitive: i64,
    pub time_lag_days: i64,
    pub time_lag_days_direct: i64,
    pub time_lag_days_transitive: i64,
}

pub fn reduced_lag(before: &LagReport, after: &LagReport) -> LagDelta {
    let b = &before.totals;
    let a = &after.totals;
    LagDelta {
        levels: LevelDeltas {
            major: b.levels.major as i64 - a.levels.major as i64,
            minor: b.levels.minor as i64 - a.levels.minor as i64,
            patch: b.levels.patch as i64 - a.levels.patch as i64,
            pre_release: b.levels.pre_release as i64 - a.levels.pre_release as i64,
        },
        version_lag: b.version_lag as i64 - a.version_lag as i64,
        version_lag_direct: b.version_lag_direct as i64 - a.version_lag_direct as i64,
        version_lag_transitive: b.version_lag_transitive as i64 - a.version_lag_transitive as i64,
        time_lag_days: b.time_lag_days - a.time_lag_days,
        time_lag_days_direct: b.time_lag_days_direct - a.time_lag_days_direct,
        time_lag_days_transitive: b.time_lag_days_transitive - a.time_lag_days_transitive,
    }
}

/// Net change in graph size (client excluded): positive when the upgrade run
/// introduced dependencies, negative when it pruned them.
pub fn redundant_delta(before: &DependencyGraph, after: &DependencyGraph) -> i64 {
    let count = |g: &DependencyGraph| g.nodes().filter(|(id, _)| *id != g.client()).count() as i64;
    count(after) - count(before)
}

/// A dependent that references APIs absent from a node's selected version.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BreakageFinding {
    pub node: NodeId,
    pub dependent: NodeId,
    pub missing: BTreeSet<String>,
}

/// Post-hoc safety check on a fully planned graph: for every node and every
/// dependent, reports the dependent's reachable references into the node that
/// the node's current API surface no longer declares. References are
/// attributed to the node through the snapshot's global API-id index.
pub fn breakage_check(
    graph: &DependencyGraph,
    snapshot: &RegistrySnapshot,
) -> Result<Vec<BreakageFinding>, ReachError> {
    let reach = compute_reachability(graph, snapshot)?;
    let mut findings = Vec::new();
    for node in graph.registry_nodes() {
        let coordinate = node.coordinate().expect("registry node");
        let surface = node_surface(graph, snapshot, &node)?;
        for dependent in graph.dependents_of(&node) {
            let dependent_usage = build_usage_graph(graph, snapshot, &dependent)?;
            let dependent_reach = &reach[&dependent].union;
            let missing: BTreeSet<String> = dependent_usage
                .edges
                .iter()
                .filter(|(from, to, _)| {
                    dependent_reach.contains(from)
                        && snapshot.api_owner(to) == Some(coordinate)
                        && !surface.contains(to)
                })
                .map(|(_, to, _)| to.clone())
                .collect();
            if !missing.is_empty() {
                findings.push(BreakageFinding {
                    node: node.clone(),
                    dependent,
                    missing,
                });
            }
        }
    }
    Ok(findings)
}
