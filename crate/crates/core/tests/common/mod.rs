//! Shared fixture: a client using `g:a` (whose 2.0.0 removes a reachable
//! API) and `g:b` (whose 1.0.1 drags in a new dependency `g:c`).
#![allow(dead_code)]

use std::collections::BTreeMap;

use lagless_core::date::Date;
use lagless_core::graph::{ModuleManifest, WorkspaceManifest};
use lagless_core::registry::{
    ApiKind, ApiSymbol, ArtifactCoordinate, DependencyDecl, InvocationEdge, InvocationKind,
    RegistrySnapshot, Scope, VersionRecord,
};
use lagless_core::semver::{Version, VersionSpec};

pub fn v(s: &str) -> Version {
    Version::parse(s).unwrap()
}

pub fn coord(g: &str, n: &str) -> ArtifactCoordinate {
    ArtifactCoordinate::new(g, n)
}

pub fn method(id: &str) -> ApiSymbol {
    ApiSymbol {
        id: id.to_string(),
        kind: ApiKind::Method,
    }
}

pub fn call(from: &str, to: &str) -> InvocationEdge {
    InvocationEdge {
        from: from.to_string(),
        to: to.to_string(),
        kind: InvocationKind::Call,
    }
}

pub fn decl(g: &str, n: &str, spec: &str) -> DependencyDecl {
    DependencyDecl {
        target: coord(g, n),
        spec: VersionSpec::parse(spec).unwrap(),
        scope: Scope::Compile,
        optional: false,
    }
}

pub fn record(
    version: &str,
    released: &str,
    deps: Vec<DependencyDecl>,
    api: &[&str],
    invocations: Vec<InvocationEdge>,
) -> VersionRecord {
    VersionRecord::new(
        v(version),
        Date::parse(released).unwrap(),
        deps,
        api.iter().map(|id| method(id)).collect(),
        invocations,
    )
}

pub fn fix1_snapshot() -> RegistrySnapshot {
    let mut artifacts = BTreeMap::new();
    artifacts.insert(
        coord("g", "a"),
        vec![
            record("1.0.0", "2020-01-01", vec![], &["a.f"], vec![]),
            record("1.1.0", "2020-06-01", vec![], &["a.f", "a.g"], vec![]),
            record("2.0.0", "2021-01-01", vec![], &["a.g"], vec![]),
        ],
    );
    artifacts.insert(
        coord("g", "b"),
        vec![
            record("1.0.0", "2020-01-01", vec![], &["b.x"], vec![]),
            record(
                "1.0.1",
                "2020-03-01",
                vec![decl("g", "c", "1.0.0")],
                &["b.x"],
                vec![],
            ),
        ],
    );
    artifacts.insert(
        coord("g", "c"),
        vec![record("1.0.0", "2020-01-01", vec![], &["c.y"], vec![])],
    );
    RegistrySnapshot::new(artifacts).unwrap()
}

pub fn fix1_manifest() -> WorkspaceManifest {
    WorkspaceManifest::single(ModuleManifest {
        module_id: "client".to_string(),
        direct_deps: vec![decl("g", "a", "1.0.0"), decl("g", "b", "1.0.0")],
        client_api: [method("client.main")].into_iter().collect(),
        client_invocations: vec![call("client.main", "a.f")],
        local_deps: vec![],
    })
}

/// FIX1 with the client also depending on `g:c` directly, so b's 1.0.1 no
/// longer adds a node.
pub fn fix1_with_direct_c() -> (RegistrySnapshot, WorkspaceManifest) {
    let snapshot = fix1_snapshot();
    let manifest = WorkspaceManifest::single(ModuleManifest {
        module_id: "client".to_string(),
        direct_deps: vec![
            decl("g", "a", "1.0.0"),
            decl("g", "b", "1.0.0"),
            decl("g", "c", "1.0.0"),
        ],
        client_api: [method("client.main")].into_iter().collect(),
        client_invocations: vec![call("client.main", "a.f")],
        local_deps: vec![],
    });
    (snapshot, manifest)
}
