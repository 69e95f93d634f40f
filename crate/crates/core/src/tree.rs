//! Parser for Maven `dependency:tree -Dverbose` text output, restoring the
//! full dependency graph including relationships hidden by mediation.
//!
//! Grammar handled per line (an optional `[INFO] ` prefix is stripped):
//!
//! ```text
//! com.example:app:jar:1.0.0
//! +- g:a:jar:1.0.0:compile
//! |  \- (g:c:jar:2.0.0:compile - omitted for conflict with 1.0.0)
//! \- g:b:jar:1.0.0:compile
//!    \- g:c:jar:1.0.0:compile
//! ```
//!
//! Indentation is three characters per level (`+- `, `\- `, `|  `, or three
//! spaces). Test- and provided-scope lines are dropped together with their
//! subtrees. Omitted lines become omitted edges whose target node carries the
//! mediation winner's version.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::{String, ToString};
use alloc::vec::Vec;

use thiserror::Error;

use crate::graph::{graph_from_parts, DependencyGraph, Edge, NodeData, NodeId, NodeInfo};
use crate::registry::{ArtifactCoordinate, Scope};
use crate::semver::{Version, VersionSpec};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum TreeError {
    #[error("line {line}: malformed dependency tree line `{content}`")]
    Malformed { line: usize, content: String },
    #[error("line {line}: unknown scope `{scope}`")]
    UnknownScope { line: usize, scope: String },
    #[error("line {line}: indentation jumps more than one level")]
    IndentJump { line: usize },
    #[error("line {line}: node nested under an omitted dependency")]
    ChildOfOmitted { line: usize },
    #[error("line {line}: {coordinate} already retained elsewhere in the tree")]
    DuplicateRetained { line: usize, coordinate: ArtifactCoordinate },
    #[error("empty dependency tree")]
    Empty,
    #[error("missing root line before indented entries")]
    MissingRoot,
    #[error("omitted edge references {coordinate}@{version}, but the tree retains no such node")]
    DanglingOmitted {
        coordinate: ArtifactCoordinate,
        version: String,
    },
    #[error("restored graph is not a DAG (cycle touching {0})")]
    Cyclic(ArtifactCoordinate),
}

#[derive(Debug)]
struct Coords {
    coordinate: ArtifactCoordinate,
    version: Version,
    scope: Option<Scope>,
}

fn parse_coords(text: &str, line: usize) -> Result<Coords, TreeError> {
    let malformed = || TreeError::Malformed {
        line,
        content: text.to_string(),
    };
    let parts: Vec<&str> = text.split(':').collect();
    let (group, name, version, scope) = match parts.len() {
        // group:artifact:packaging:version (root form, no scope)
        4 => (parts[0], parts[1], parts[3], None),
        // group:artifact:packaging:version:scope
        5 => (parts[0], parts[1], parts[3], Some(parts[4])),
        // group:artifact:packaging:classifier:version:scope
        6 => (parts[0], parts[1], parts[4], Some(parts[5])),
        _ => return Err(malformed()),
    };
    if group.is_empty() || name.is_empty() {
        return Err(malformed());
    }
    let version = Version::parse(version).map_err(|_| malformed())?;
    let scope = match scope {
        None => None,
        Some(s) => Some(Scope::parse(s).ok_or_else(|| TreeError::UnknownScope {
            line,
            scope: s.to_string(),
        })?),
    };
    Ok(Coords {
        coordinate: ArtifactCoordinate::new(group, name),
        version,
        scope,
    })
}

enum LineKind {
    Retained(Coords),
    OmittedConflict(Coords, Version),
    OmittedDuplicate(Coords),
}

fn parse_content(content: &str, line: usize) -> Result<LineKind, TreeError> {
    let malformed = || TreeError::Malformed {
        line,
        content: content.to_string(),
    };
    if let Some(inner) = content.strip_prefix('(') {
        let inner = inner.strip_suffix(')').ok_or_else(malformed)?;
        let (coords, reason) = inner.split_once(" - omitted for ").ok_or_else(malformed)?;
        let coords = parse_coords(coords.trim(), line)?;
        if reason == "duplicate" {
            return Ok(LineKind::OmittedDuplicate(coords));
        }
        if let Some(winner) = reason.strip_prefix("conflict with ") {
            let winner = Version::parse(winner.trim()).map_err(|_| malformed())?;
            return Ok(LineKind::OmittedConflict(coords, winner));
        }
        return Err(malformed());
    }
    Ok(LineKind::Retained(parse_coords(content, line)?))
}

/// Splits the indentation prefix off a line, returning (depth, content).
fn split_indent(line_text: &str, line: usize) -> Result<(usize, &str), TreeError> {
    let mut rest = line_text;
    let mut depth = 0usize;
    loop {
        if rest.starts_with("+- ") || rest.starts_with("\\- ") {
            return Ok((depth + 1, &rest[3..]));
        }
        if rest.starts_with("|  ") || rest.starts_with("   ") {
            depth += 1;
            rest = &rest[3..];
            continue;
        }
        if depth == 0 {
            return Ok((0, rest));
        }
        return Err(TreeError::Malformed {
            line,
            content: line_text.to_string(),
        });
    }
}

enum Slot {
    Retained(NodeId),
    /// Scope-filtered node: the whole subtree is silently dropped.
    Filtered,
    /// Omitted line: never has children.
    OmittedLeaf,
}

/// Parses verbose dependency-tree text into a graph skeleton: coordinates,
/// versions, retained and omitted edges, exact declared specs — no API data.
pub fn parse_verbose_tree(text: &str) -> Result<DependencyGraph, TreeError> {
    let mut nodes: BTreeMap<NodeId, NodeInfo> = BTreeMap::new();
    let mut edges: BTreeSet<Edge> = BTreeSet::new();
    let mut omitted: BTreeSet<Edge> = BTreeSet::new();
    let mut specs: BTreeMap<Edge, VersionSpec> = BTreeMap::new();
    // Omitted edges to check after the whole tree is known:
    // (parent, coordinate, declared version, winner version).
    let mut pending_omitted: Vec<(NodeId, ArtifactCoordinate, Version, Version)> = Vec::new();
    let mut client: Option<NodeId> = None;
    let mut path: Vec<Slot> = Vec::new();

    for (index, raw_line) in text.lines().enumerate() {
        let line = index + 1;
        let line_text = raw_line.strip_prefix("[INFO] ").unwrap_or(raw_line);
        if line_text.trim().is_empty() {
            continue;
        }
        let (depth, content) = split_indent(line_text, line)?;
        if depth == 0 {
            if client.is_some() {
                return Err(TreeError::Malformed {
                    line,
                    content: content.to_string(),
                });
            }
            let coords = parse_coords(content, line)?;
            let id = NodeId::Registry(coords.coordinate);
            nodes.insert(
                id.clone(),
                NodeInfo {
                    version: coords.version,
                    depth: 0,
                    data: NodeData::Workspace {
                        api: BTreeSet::new(),
                        invocations: Vec::new(),
                    },
                },
            );
            client = Some(id.clone());
            path = alloc::vec![Slot::Retained(id)];
            continue;
        }
        if client.is_none() {
            return Err(TreeError::MissingRoot);
        }
        if depth > path.len() {
            return Err(TreeError::IndentJump { line });
        }
        path.truncate(depth);
        let parent = match &path[depth - 1] {
            Slot::Retained(id) => id.clone(),
            Slot::Filtered => {
                path.push(Slot::Filtered);
                continue;
            }
            Slot::OmittedLeaf => return Err(TreeError::ChildOfOmitted { line }),
        };
        match parse_content(content, line)? {
            LineKind::Retained(coords) => {
                let scope = coords.scope.ok_or_else(|| TreeError::Malformed {
                    line,
                    content: content.to_string(),
                })?;
                if !scope.is_deployed() {
                    path.push(Slot::Filtered);
                    continue;
                }
                let id = NodeId::Registry(coords.coordinate.clone());
                if nodes.contains_key(&id) {
                    return Err(TreeError::DuplicateRetained {
                        line,
                        coordinate: coords.coordinate,
                    });
                }
                nodes.insert(
                    id.clone(),
                    NodeInfo {
                        version: coords.version.clone(),
                        depth,
                        data: NodeData::Registry,
                    },
                );
                edges.insert((parent.clone(), id.clone()));
                specs.insert((parent, id.clone()), VersionSpec::Exact(coords.version));
                path.push(Slot::Retained(id));
            }
            LineKind::OmittedConflict(coords, winner) => {
                let scope = coords.scope.ok_or_else(|| TreeError::Malformed {
                    line,
                    content: content.to_string(),
                })?;
                if !scope.is_deployed() {
                    path.push(Slot::Filtered);
                    continue;
                }
                pending_omitted.push((parent, coords.coordinate, coords.version, winner));
                path.push(Slot::OmittedLeaf);
            }
            LineKind::OmittedDuplicate(coords) => {
                let scope = coords.scope.ok_or_else(|| TreeError::Malformed {
                    line,
                    content: content.to_string(),
                })?;
                if !scope.is_deployed() {
                    path.push(Slot::Filtered);
                    continue;
                }
                let winner = coords.version.clone();
                pending_omitted.push((parent, coords.coordinate, coords.version, winner));
                path.push(Slot::OmittedLeaf);
            }
        }
    }

    let client = client.ok_or(TreeError::Empty)?;
    for (parent, coordinate, declared, winner) in pending_omitted {
        let id = NodeId::Registry(coordinate.clone());
        let known = nodes.get(&id).ok_or_else(|| TreeError::DanglingOmitted {
            coordinate: coordinate.clone(),
            version: winner.raw().to_string(),
        })?;
        if known.version != winner {
            return Err(TreeError::DanglingOmitted {
                coordinate,
                version: winner.raw().to_string(),
            });
        }
        omitted.insert((parent.clone(), id.clone()));
        specs.insert((parent, id), VersionSpec::Exact(declared));
    }

    let graph = graph_from_parts(client, nodes, edges, omitted, specs);
    if let Err(_e) = graph.check_invariants() {
        let coord = graph
            .client()
            .coordinate()
            .cloned()
            .unwrap_or_else(|| ArtifactCoordinate::new("unknown", "unknown"));
        return Err(TreeError::Cyclic(coord));
    }
    Ok(graph)
}

/// Renders a graph back to verbose-tree text. Retained edges form the tree;
/// omitted edges append as omitted leaf lines (conflict when the declared
/// version differs from the node's resolved version, duplicate otherwise).
/// Packaging and scope render as `jar`/`compile`; node and edge multisets are
/// preserved, which is what the round-trip property checks.
pub fn render_verbose_tree(graph: &DependencyGraph) -> String {
    let client = graph.client();
    let (root_coord, root_version) = match client {
        NodeId::Registry(c) => (c.clone(), graph.node(client).map(|n| n.version.clone())),
        NodeId::Client(m) | NodeId::Local(m) => (
            ArtifactCoordinate::new("workspace", m.clone()),
            graph.node(client).map(|n| n.version.clone()),
        ),
    };
    let root_version = root_version.map(|v| v.raw().to_string()).unwrap_or_else(|_| "0".to_string());
    let mut out = String::new();
    out.push_str(&alloc::format!("{root_coord}:jar:{root_version}\n"));
    render_children(graph, client, &mut Vec::new(), &mut out);
    out
}

fn render_children(graph: &DependencyGraph, node: &NodeId, ancestors: &mut Vec<bool>, out: &mut String) {
    // Retained children first (each node has exactly one retained parent),
    // then this node's omitted declarations; both sorted for determinism.
    let retained: Vec<&NodeId> = graph
        .edges()
        .iter()
        .filter(|(from, _)| from == node)
        .map(|(_, to)| to)
        .collect();
    let omitted: Vec<&NodeId> = graph
        .omitted_edges()
        .iter()
        .filter(|(from, _)| from == node)
        .map(|(_, to)| to)
        .collect();
    let total = retained.len() + omitted.len();
    for (i, child) in retained.iter().chain(omitted.iter()).enumerate() {
        let last = i + 1 == total;
        let mut prefix = String::new();
        for continues in ancestors.iter() {
            prefix.push_str(if *continues { "|  " } else { "   " });
        }
        prefix.push_str(if last { "\\- " } else { "+- " });
        let info = match graph.node(child) {
            Ok(info) => info,
            Err(_) => continue,
        };
        let coord = match child {
            NodeId::Registry(c) => c.clone(),
            NodeId::Client(m) | NodeId::Local(m) => ArtifactCoordinate::new("workspace", m.clone()),
        };
        if i < retained.len() {
            out.push_str(&alloc::format!(
                "{prefix}{coord}:jar:{}:compile\n",
                info.version.raw()
            ));
            ancestors.push(!last);
            render_children(graph, child, ancestors, out);
            ancestors.pop();
        } else {
            let declared = graph
                .declared_spec(&((*node).clone(), (*child).clone()))
                .and_then(|spec| match spec {
                    VersionSpec::Exact(v) => Some(v.clone()),
                    _ => None,
                })
                .unwrap_or_else(|| info.version.clone());
            if declared == info.version {
                out.push_str(&alloc::format!(
                    "{prefix}({coord}:jar:{}:compile - omitted for duplicate)\n",
                    declared.raw()
                ));
            } else {
                out.push_str(&alloc::format!(
                    "{prefix}({coord}:jar:{}:compile - omitted for conflict with {})\n",
                    declared.raw(),
                    info.version.raw()
                ));
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::graph_facts;

    fn v(s: &str) -> Version {
        Version::parse(s).unwrap()
    }

    const CONFLICT_TREE: &str = "\
com.example:app:jar:1.0.0
+- g:a:jar:1.0.0:compile
|  \\- (g:c:jar:2.0.0:compile - omitted for conflict with 1.0.0)
\\- g:b:jar:1.0.0:compile
   \\- g:c:jar:1.0.0:compile
";

    #[test]
    fn conflict_line_restores_omitted_edge() {
        let g = parse_verbose_tree(CONFLICT_TREE).unwrap();
        assert_eq!(g.node_count(), 4);
        let a = NodeId::registry("g", "a");
        let c = NodeId::registry("g", "c");
        assert!(g.omitted_edges().contains(&(a.clone(), c.clone())));
        assert_eq!(g.node(&c).unwrap().version, v("1.0.0"));
        // The declared (losing) version survives in the edge spec.
        assert_eq!(
            g.declared_spec(&(a, c)),
            Some(&VersionSpec::Exact(v("2.0.0")))
        );
    }

    #[test]
    fn single_root_line_is_client_only() {
        let g = parse_verbose_tree("com.example:app:jar:1.0.0\n").unwrap();
        assert_eq!(g.node_count(), 1);
        assert_eq!(g.client(), &NodeId::registry("com.example", "app"));
        assert_eq!(g.node(g.client()).unwrap().version, v("1.0.0"));
    }

    #[test]
    fn test_scope_lines_are_dropped_with_subtree() {
        let text = "\
com.example:app:jar:1.0.0
+- junit:junit:jar:4.12:test
|  \\- org.hamcrest:hamcrest-core:jar:1.3:test
\\- g:a:jar:1.0.0:compile
";
        let g = parse_verbose_tree(text).unwrap();
        assert_eq!(g.node_count(), 2);
        assert!(!g.contains_coordinate(&ArtifactCoordinate::new("junit", "junit")));
        assert!(!g.contains_coordinate(&ArtifactCoordinate::new("org.hamcrest", "hamcrest-core")));
    }

    #[test]
    fn provided_scope_dropped_runtime_kept() {
        let text = "\
com.example:app:jar:1.0.0
+- g:servlet:jar:3.0.0:provided
\\- g:driver:jar:1.2.0:runtime
";
        let g = parse_verbose_tree(text).unwrap();
        assert!(!g.contains_coordinate(&ArtifactCoordinate::new("g", "servlet")));
        assert!(g.contains_coordinate(&ArtifactCoordinate::new("g", "driver")));
    }

    #[test]
    fn duplicate_omission_points_at_same_version() {
        let text = "\
com.example:app:jar:1.0.0
+- g:a:jar:1.0.0:compile
|  \\- g:c:jar:1.0.0:compile
\\- g:b:jar:1.0.0:compile
   \\- (g:c:jar:1.0.0:compile - omitted for duplicate)
";
        let g = parse_verbose_tree(text).unwrap();
        let b = NodeId::registry("g", "b");
        let c = NodeId::registry("g", "c");
        assert!(g.omitted_edges().contains(&(b.clone(), c.clone())));
        assert_eq!(g.declared_spec(&(b, c.clone())), Some(&VersionSpec::Exact(v("1.0.0"))));
        assert_eq!(g.node(&c).unwrap().depth, 2);
    }

    #[test]
    fn info_prefix_and_classifier_lines_parse() {
        let text = "\
[INFO] com.example:app:jar:1.0.0
[INFO] \\- g:native:jar:linux-x86_64:1.4.0:compile
";
        let g = parse_verbose_tree(text).unwrap();
        let n = NodeId::registry("g", "native");
        assert_eq!(g.node(&n).unwrap().version, v("1.4.0"));
    }

    #[test]
    fn malformed_line_reports_line_number() {
        let text = "\
com.example:app:jar:1.0.0
\\- not-a-coordinate
";
        match parse_verbose_tree(text) {
            Err(TreeError::Malformed { line, .. }) => assert_eq!(line, 2),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn unknown_scope_is_an_error() {
        let text = "\
com.example:app:jar:1.0.0
\\- g:a:jar:1.0.0:system
";
        assert!(matches!(
            parse_verbose_tree(text),
            Err(TreeError::UnknownScope { line: 2, .. })
        ));
    }

    #[test]
    fn indentation_jump_is_an_error() {
        let text = "\
com.example:app:jar:1.0.0
   \\- g:a:jar:1.0.0:compile
";
        assert!(matches!(parse_verbose_tree(text), Err(TreeError::IndentJump { line: 2 })));
    }

    #[test]
    fn children_of_omitted_lines_are_errors() {
        let text = "\
com.example:app:jar:1.0.0
+- g:a:jar:1.0.0:compile
\\- (g:b:jar:1.0.0:compile - omitted for duplicate)
   \\- g:c:jar:1.0.0:compile
";
        assert!(matches!(parse_verbose_tree(text), Err(TreeError::ChildOfOmitted { line: 4 })));
    }

    #[test]
    fn dangling_omitted_reference_is_an_error() {
        let text = "\
com.example:app:jar:1.0.0
\\- (g:ghost:jar:1.0.0:compile - omitted for duplicate)
";
        assert!(matches!(parse_verbose_tree(text), Err(TreeError::DanglingOmitted { .. })));
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(parse_verbose_tree(""), Err(TreeError::Empty)));
        assert!(matches!(parse_verbose_tree("\n\n"), Err(TreeError::Empty)));
    }

    #[test]
    fn deep_nesting_depths() {
        let text = "\
com.example:app:jar:1.0.0
\\- g:a:jar:1.0.0:compile
   \\- g:b:jar:1.0.0:compile
      \\- g:c:jar:1.0.0:compile
";
        let g = parse_verbose_tree(text).unwrap();
        assert_eq!(g.node(&NodeId::registry("g", "c")).unwrap().depth, 3);
    }

    #[test]
    fn round_trip_preserves_fact_multisets() {
        let fixtures = [
            CONFLICT_TREE,
            "com.example:app:jar:1.0.0\n",
            "\
com.example:app:jar:1.0.0
+- g:a:jar:1.0.0:compile
|  +- g:x:jar:0.9:compile
|  \\- (g:y:jar:1.0:compile - omitted for conflict with 1.1)
+- g:b:jar:2.0.0:compile
|  \\- g:y:jar:1.1:compile
\\- g:c:jar:3.0.0-rc1:compile
",
            "\
com.example:app:jar:1.0.0
+- g:a:jar:1.0.0:compile
|  \\- g:c:jar:1.0.0:compile
\\- g:b:jar:1.0.0:compile
   \\- (g:c:jar:1.0.0:compile - omitted for duplicate)
",
        ];
        for fixture in fixtures {
            let first = parse_verbose_tree(fixture).unwrap();
            let rendered = render_verbose_tree(&first);
            let second = parse_verbose_tree(&rendered).unwrap();
            assert_eq!(graph_facts(&first), graph_facts(&second), "fixture:\n{fixture}");
        }
    }
}
