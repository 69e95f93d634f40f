//! Planner behavior over seeded synthetic registries: safety, redundancy,
//! oracle agreement, determinism, and the metric algebra.

mod common;

use lagless_core::graph::{build_graph, NodeId};
use lagless_core::metrics::{breakage_check, redundant_delta, reduced_lag, LagReport};
use lagless_core::oracle::replay_plan;
use lagless_core::planner::{plan_upgrades, PlanMode, PlannerConfig};
use lagless_core::synth::{generate_registry, GenParams};

fn params(seed: u64) -> GenParams {
    GenParams {
        seed,
        artifact_count: 6 + (seed as usize % 5),
        max_versions_per_artifact: 4,
        ..GenParams::default()
    }
}

#[test]
fn full_mode_is_safe_and_lean_on_small_corpora() {
    for seed in 0..25 {
        let (snapshot, manifest) = generate_registry(&params(seed)).unwrap();
        let graph = build_graph(&snapshot, &manifest, "app").unwrap();
        let outcome = plan_upgrades(&graph, &snapshot, &PlannerConfig::default()).unwrap();
        let findings = breakage_check(&outcome.graph, &snapshot).unwrap();
        assert!(findings.is_empty(), "seed {seed}: {findings:?}");
        assert!(outcome.plan.added_nodes.is_empty(), "seed {seed}");
        assert!(redundant_delta(&graph, &outcome.graph) <= 0, "seed {seed}");
    }
}

#[test]
fn pruning_only_never_adds_nodes() {
    for seed in 0..25 {
        let (snapshot, manifest) = generate_registry(&params(seed)).unwrap();
        let graph = build_graph(&snapshot, &manifest, "app").unwrap();
        let config = PlannerConfig::with_mode(PlanMode::PruningOnly);
        let outcome = plan_upgrades(&graph, &snapshot, &config).unwrap();
        assert!(outcome.plan.added_nodes.is_empty(), "seed {seed}");
        assert!(redundant_delta(&graph, &outcome.graph) <= 0, "seed {seed}");
    }
}

#[test]
fn compat_only_final_graphs_stay_safe() {
    for seed in 0..25 {
        let (snapshot, manifest) = generate_registry(&params(seed)).unwrap();
        let graph = build_graph(&snapshot, &manifest, "app").unwrap();
        let config = PlannerConfig::with_mode(PlanMode::CompatOnly);
        let outcome = plan_upgrades(&graph, &snapshot, &config).unwrap();
        let findings = breakage_check(&outcome.graph, &snapshot).unwrap();
        assert!(findings.is_empty(), "seed {seed}: {findings:?}");
    }
}

#[test]
fn oracle_agrees_on_every_step_in_every_mode() {
    for seed in 0..20 {
        let gen = GenParams {
            seed,
            artifact_count: 5 + (seed as usize % 4),
            max_versions_per_artifact: 5,
            ..GenParams::default()
        };
        let (snapshot, manifest) = generate_registry(&gen).unwrap();
        let graph = build_graph(&snapshot, &manifest, "app").unwrap();
        for mode in [
            PlanMode::Full,
            PlanMode::PruningOnly,
            PlanMode::CompatOnly,
            PlanMode::Naive,
        ] {
            let config = PlannerConfig::with_mode(mode);
            let outcome = plan_upgrades(&graph, &snapshot, &config).unwrap();
            let checks = replay_plan(&snapshot, &graph, &outcome.plan).unwrap();
            for check in &checks {
                assert!(
                    check.agrees,
                    "seed {seed} mode {mode}: {} selected {}, oracle {}",
                    check.node, check.selected, check.oracle_best
                );
            }
        }
    }
}

#[test]
fn planning_makes_progress_within_the_iteration_bound() {
    for seed in 0..15 {
        let (snapshot, manifest) = generate_registry(&params(seed)).unwrap();
        let graph = build_graph(&snapshot, &manifest, "app").unwrap();
        let initial_nodes = graph.registry_nodes().len();
        let config = PlannerConfig::with_mode(PlanMode::Naive);
        let outcome = plan_upgrades(&graph, &snapshot, &config).unwrap();
        let added = outcome.plan.added_nodes.len();
        assert!(
            outcome.plan.processing_order.len() <= initial_nodes + added,
            "seed {seed}"
        );
    }
}

#[test]
fn scope_invariant_holds_after_planning() {
    for seed in 0..15 {
        let (snapshot, manifest) = generate_registry(&params(seed)).unwrap();
        let graph = build_graph(&snapshot, &manifest, "app").unwrap();
        let config = PlannerConfig::with_mode(PlanMode::Naive);
        let outcome = plan_upgrades(&graph, &snapshot, &config).unwrap();
        outcome.graph.check_invariants().unwrap();
        // Every surviving edge's declaration must be deployed scope and
        // non-optional (or a direct declaration of the client).
        for (from, to) in outcome.graph.edges().iter().chain(outcome.graph.omitted_edges()) {
            if let (NodeId::Registry(fc), NodeId::Registry(tc)) = (from, to) {
                let version = &outcome.graph.node(from).unwrap().version;
                let record = snapshot.record(fc, version).unwrap();
                let decl = record
                    .dependencies
                    .iter()
                    .find(|d| d.target == *tc)
                    .expect("edge has a declaration");
                assert!(decl.scope.is_deployed() && !decl.optional);
            }
        }
    }
}

#[test]
fn level_counts_partition_version_lag() {
    for seed in 0..20 {
        let (snapshot, manifest) = generate_registry(&params(seed)).unwrap();
        let graph = build_graph(&snapshot, &manifest, "app").unwrap();
        let report = LagReport::compute(&snapshot, &graph);
        for (node, lag) in &report.per_dependency {
            assert_eq!(lag.levels.total(), lag.version_lag, "{node}");
        }
        assert_eq!(report.totals.levels.total(), report.totals.version_lag);
        assert_eq!(
            report.totals.version_lag,
            report.totals.version_lag_direct + report.totals.version_lag_transitive
        );
        assert_eq!(
            report.totals.time_lag_days,
            report.totals.time_lag_days_direct + report.totals.time_lag_days_transitive
        );
    }
}

#[test]
fn reduced_lag_of_identical_reports_is_zero() {
    let (snapshot, manifest) = generate_registry(&params(3)).unwrap();
    let graph = build_graph(&snapshot, &manifest, "app").unwrap();
    let report = LagReport::compute(&snapshot, &graph);
    let delta = reduced_lag(&report, &report);
    assert_eq!(delta, Default::default());
}

#[test]
fn time_lag_zero_iff_all_nodes_at_latest_released_stable() {
    for seed in 0..30 {
        let (snapshot, manifest) = generate_registry(&params(seed)).unwrap();
        let graph = build_graph(&snapshot, &manifest, "app").unwrap();
        let report = LagReport::compute(&snapshot, &graph);
        let all_at_latest = graph.registry_nodes().iter().all(|node| {
            let info = graph.node(node).unwrap();
            let coordinate = node.coordinate().unwrap();
            let records = snapshot.records(coordinate).unwrap();
            let current = records.iter().find(|r| r.version == info.version).unwrap();
            records
                .iter()
                .filter(|r| r.stable)
                .all(|r| r.released <= current.released)
        });
        assert_eq!(
            report.totals.time_lag_days == 0,
            all_at_latest,
            "seed {seed}"
        );
    }
}

#[test]
fn plans_serialize_identically_across_runs() {
    for seed in [5, 17] {
        let (snapshot, manifest) = generate_registry(&params(seed)).unwrap();
        let graph = build_graph(&snapshot, &manifest, "app").unwrap();
        let config = PlannerConfig::default();
        let a = plan_upgrades(&graph, &snapshot, &config).unwrap();
        let b = plan_upgrades(&graph, &snapshot, &config).unwrap();
        assert_eq!(a.plan, b.plan);
        assert_eq!(format!("{:?}", a.plan), format!("{:?}", b.plan));
    }
}
