use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use evotrack_core::condense::collapse_unchanged;
use evotrack_core::graph_diff::{DiffEdgeStatus, DiffNodeStatus, NodeKey};
use evotrack_core::gui_match::WidgetStatus;
use evotrack_core::model::{
    canonical_sig, load_call_graph, load_gui_model, load_project, CallGraph, GuiModel, MethodSig,
};
use evotrack_core::pipeline::{compare, explore, write_bundle, PipelineError, COMPARISON_FILE};
use evotrack_core::report::WidgetCounts;
use evotrack_core::textdiff::{extract_method_source, method_fingerprint, DiffOp};

fn fixture(version: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR"))
        .join("tests/fixtures")
        .join(version)
        .join("project.json")
}

fn sig(s: &str) -> MethodSig {
    canonical_sig(s).unwrap()
}

const SAVE: &str = "com.acme.editor.EditorActions#save():void";
const OPEN: &str = "com.acme.editor.EditorActions#open():void";
const SERIALIZE: &str = "com.acme.editor.Document#serialize():java.lang.String";

#[test]
fn fixture_fingerprints_match_sources() {
    for v in ["v1", "v2"] {
        let loaded = load_project(&fixture(v)).unwrap().load_artifacts().unwrap();
        let root = loaded.project.source_root.clone().unwrap();
        for rec in loaded.graph.methods().iter().filter(|r| r.source.is_some()) {
            let view = extract_method_source(&root, rec).unwrap();
            assert_eq!(
                method_fingerprint(&view.lines),
                rec.fingerprint,
                "{}",
                rec.sig
            );
        }
    }
}

#[test]
fn fixture_shape() {
    for v in ["v1", "v2"] {
        let loaded = load_project(&fixture(v)).unwrap().load_artifacts().unwrap();
        assert_eq!(loaded.gui.windows.len(), 2);
        assert_eq!(loaded.gui.widget_count(), 11);
        assert_eq!(loaded.graph.len(), 10);
    }
}

#[test]
fn explore_v1() {
    let ex = explore(&fixture("v1")).unwrap();
    let b = &ex.bundle;
    assert_eq!(b.version_label, "1.0");
    assert!(b.warnings.is_empty(), "{:?}", b.warnings);
    assert_eq!(b.slices.len(), 4);
    assert_eq!(ex.dot_files.len(), 4);
    let save = &b.slices[&sig(SAVE)];
    assert_eq!(save.app_nodes.len(), 3);
    assert_eq!(save.app_edges.len(), 3);
    let open = &b.slices[&sig(OPEN)];
    assert_eq!(open.app_nodes.len(), 4);
    let apply = &b.slices[&sig("com.acme.editor.PrefsActions#apply():void")];
    assert_eq!(apply.abstraction_edges.len(), 1);
    // every application method reached by some handler has a source view
    let reached: BTreeSet<_> = b.slices.values().flat_map(|s| s.app_nodes.iter()).collect();
    assert_eq!(b.source_views.len(), reached.len());
    assert_eq!(b.source_views[&sig(SERIALIZE)].lines.len(), 5);
}

#[test]
fn compare_fixture() {
    let cmp = compare(&fixture("v1"), &fixture("v2")).unwrap();
    let b = &cmp.bundle;
    assert_eq!(
        b.report.counts,
        WidgetCounts {
            added: 1,
            removed: 1,
            handler_changed: 1,
            unchanged: 9
        }
    );
    let statuses: Vec<_> = b.report.focus_list.iter().map(|e| e.status).collect();
    assert_eq!(
        statuses,
        vec![
            WidgetStatus::HandlerChanged,
            WidgetStatus::Removed,
            WidgetStatus::Added
        ]
    );
    // Print (removed) follows its old predecessor Save; Export (added) keeps its new slot after it.
    let paths: Vec<_> = b.report.focus_list.iter().map(|e| e.path.clone()).collect();
    assert_eq!(paths, vec![vec![0, 1], vec![0, 2], vec![0, 3]]);
    assert_eq!(b.report.focus_list[0].handlers, vec![sig(SAVE)]);

    let save_diff = b
        .handler_diffs
        .values()
        .find_map(|m| m.get(&sig(SAVE)))
        .unwrap();
    assert_eq!(
        save_diff.nodes[&NodeKey::Method(sig(SERIALIZE))],
        DiffNodeStatus::Changed
    );
    let removed: Vec<_> = save_diff
        .edges
        .iter()
        .filter(|(_, s)| **s == DiffEdgeStatus::Removed)
        .collect();
    assert_eq!(removed.len(), 1);

    let hunks = &b.source_diffs[&sig(SERIALIZE)];
    let ops: Vec<_> = hunks
        .iter()
        .map(|h| h.op)
        .filter(|op| *op != DiffOp::Equal)
        .collect();
    assert_eq!(ops, vec![DiffOp::Delete, DiffOp::Insert]);
    assert_eq!(b.source_diffs.len(), 1);

    // the unchanged open() chain collapses from 4 vertices to 2
    let open_diff = b
        .handler_diffs
        .values()
        .find_map(|m| m.get(&sig(OPEN)))
        .unwrap();
    assert_eq!(open_diff.nodes.len(), 4);
    assert_eq!(collapse_unchanged(open_diff).vertex_count(), 2);

    assert!(cmp
        .report_text
        .contains("1 added, 1 removed, 1 handler_changed, 9 unchanged"));
}

#[test]
fn bundles_round_trip_through_json() {
    let cmp = compare(&fixture("v1"), &fixture("v2")).unwrap();
    let json = serde_json::to_string(&cmp.bundle).unwrap();
    let back: evotrack_core::pipeline::ComparisonBundle = serde_json::from_str(&json).unwrap();
    assert_eq!(back, cmp.bundle);

    let ex = explore(&fixture("v2")).unwrap();
    let json = serde_json::to_string(&ex.bundle).unwrap();
    let back: evotrack_core::pipeline::ExplorationBundle = serde_json::from_str(&json).unwrap();
    assert_eq!(back, ex.bundle);
}

#[test]
fn artifacts_round_trip() {
    for v in ["v1", "v2"] {
        let p = load_project(&fixture(v)).unwrap();
        let gui = load_gui_model(&p.gui_model_path).unwrap();
        assert_eq!(GuiModel::from_json_str(&gui.to_json_string()).unwrap(), gui);
        let graph = load_call_graph(&p.call_graph_path).unwrap();
        assert_eq!(
            CallGraph::from_json_str(&graph.to_json_string()).unwrap(),
            graph
        );
    }
}

fn copy_dir(from: &Path, to: &Path) {
    fs::create_dir_all(to).unwrap();
    for entry in fs::read_dir(from).unwrap() {
        let entry = entry.unwrap();
        let target = to.join(entry.file_name());
        if entry.file_type().unwrap().is_dir() {
            copy_dir(&entry.path(), &target);
        } else {
            fs::copy(entry.path(), target).unwrap();
        }
    }
}

#[test]
fn missing_gui_model_fails_without_output() {
    let dir = tempfile::tempdir().unwrap();
    let v2 = dir.path().join("v2");
    copy_dir(fixture("v2").parent().unwrap(), &v2);
    fs::remove_file(v2.join("gui.json")).unwrap();
    let err = compare(&fixture("v1"), &v2.join("project.json")).unwrap_err();
    assert!(matches!(err, PipelineError::MissingArtifact(_)));
    assert_eq!(err.exit_code(), 2);
}

#[test]
fn corrupt_call_graph_exits_1() {
    let dir = tempfile::tempdir().unwrap();
    let v1 = dir.path().join("v1");
    copy_dir(fixture("v1").parent().unwrap(), &v1);
    fs::write(v1.join("callgraph.json"), "{\"methods\": [}").unwrap();
    let err = explore(&v1.join("project.json")).unwrap_err();
    assert_eq!(err.exit_code(), 1);
}

#[test]
fn written_bundle_contains_all_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let cmp = compare(&fixture("v1"), &fixture("v2")).unwrap();
    write_bundle(&out, &cmp.files()).unwrap();
    let names: BTreeSet<_> = fs::read_dir(&out)
        .unwrap()
        .map(|e| e.unwrap().file_name().into_string().unwrap())
        .collect();
    assert!(names.contains(COMPARISON_FILE));
    assert!(names.contains("report.txt"));
    assert_eq!(
        names.iter().filter(|n| n.ends_with(".dot")).count(),
        cmp.dot_files.len()
    );
}

#[test]
fn comparison_bundle_invariants() {
    use evotrack_core::graph_diff::has_changes;
    let cmp = compare(&fixture("v1"), &fixture("v2")).unwrap();
    let b = &cmp.bundle;

    let mut counts = WidgetCounts::default();
    for n in b.merged_tree.nodes() {
        match n.status {
            WidgetStatus::Added => counts.added += 1,
            WidgetStatus::Removed => counts.removed += 1,
            WidgetStatus::HandlerChanged => counts.handler_changed += 1,
            WidgetStatus::Unchanged => counts.unchanged += 1,
        }
        if n.status == WidgetStatus::HandlerChanged {
            let diffs = &b.handler_diffs[&n.merged_id];
            assert!(diffs.values().any(has_changes), "{}", n.merged_id);
        }
    }
    assert_eq!(counts, b.report.counts);
    assert_eq!(counts.total(), b.merged_tree.len());

    for d in b.handler_diffs.values().flat_map(|m| m.values()) {
        for (k, s) in &d.nodes {
            if *s == DiffNodeStatus::Changed {
                assert!(b.source_diffs.contains_key(k.as_method().unwrap()));
            }
        }
    }
    assert_eq!(
        b.condensed.keys().collect::<Vec<_>>(),
        b.handler_diffs.keys().collect::<Vec<_>>()
    );
}
