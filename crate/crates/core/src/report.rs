//! Regression-focus report: which widgets need retesting after a change.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::graph_diff::{has_changes, HandlerKey, SliceDiff};
use crate::gui_match::{MergedGuiTree, MergedNode, WidgetStatus};
use crate::model::MethodSig;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct WidgetCounts {
    pub added: usize,
    pub removed: usize,
    pub handler_changed: usize,
    pub unchanged: usize,
}

impl WidgetCounts {
    pub fn total(&self) -> usize {
        self.added + self.removed + self.handler_changed + self.unchanged
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FocusEntry {
    pub window: String,
    /// Child indices from the window root of the merged tree.
    pub path: Vec<usize>,
    pub status: WidgetStatus,
    pub widget_class: String,
    pub handlers: Vec<MethodSig>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegressionReport {
    pub counts: WidgetCounts,
    pub focus_list: Vec<FocusEntry>,
}

fn affected_handlers(node: &MergedNode, diffs: &BTreeMap<HandlerKey, SliceDiff>) -> Vec<MethodSig> {
    match node.status {
        WidgetStatus::HandlerChanged => node
            .handlers
            .iter()
            .filter(|h| {
                diffs
                    .get(&(node.merged_id.clone(), (*h).clone()))
                    .is_some_and(has_changes)
            })
            .cloned()
            .collect(),
        _ => node.handlers.clone(),
    }
}

pub fn build_report(
    tree: &MergedGuiTree,
    diffs: &BTreeMap<HandlerKey, SliceDiff>,
) -> RegressionReport {
    fn walk(
        node: &MergedNode,
        window: &str,
        path: &mut Vec<usize>,
        diffs: &BTreeMap<HandlerKey, SliceDiff>,
        report: &mut RegressionReport,
    ) {
        let counts = &mut report.counts;
        match node.status {
            WidgetStatus::Added => counts.added += 1,
            WidgetStatus::Removed => counts.removed += 1,
            WidgetStatus::HandlerChanged => counts.handler_changed += 1,
            WidgetStatus::Unchanged => counts.unchanged += 1,
        }
        if node.status != WidgetStatus::Unchanged {
            report.focus_list.push(FocusEntry {
                window: window.to_string(),
                path: path.clone(),
                status: node.status,
                widget_class: node.widget_class.clone(),
                handlers: affected_handlers(node, diffs),
            });
        }
        for (i, child) in node.children.iter().enumerate() {
            path.push(i);
            walk(child, window, path, diffs, report);
            path.pop();
        }
    }

    let mut report = RegressionReport {
        counts: WidgetCounts::default(),
        focus_list: Vec::new(),
    };
    for w in &tree.windows {
        walk(&w.root, &w.title, &mut Vec::new(), diffs, &mut report);
    }
    report
}

fn status_word(s: WidgetStatus) -> &'static str {
    match s {
        WidgetStatus::Added => "added",
        WidgetStatus::Removed => "removed",
        WidgetStatus::HandlerChanged => "handler_changed",
        WidgetStatus::Unchanged => "unchanged",
    }
}

impl RegressionReport {
    pub fn to_text(&self, old_label: &str, new_label: &str) -> String {
        let c = &self.counts;
        let mut out = String::new();
        writeln!(out, "regression report: {old_label} -> {new_label}").unwrap();
        writeln!(
            out,
            "widgets: {} total, {} added, {} removed, {} handler_changed, {} unchanged",
            c.total(),
            c.added,
            c.removed,
            c.handler_changed,
            c.unchanged
        )
        .unwrap();
        writeln!(out).unwrap();
        if self.focus_list.is_empty() {
            writeln!(out, "retest focus: none").unwrap();
        } else {
            writeln!(out, "retest focus ({}):", self.focus_list.len()).unwrap();
            for e in &self.focus_list {
                let path: String = e.path.iter().map(|i| format!("/{i}")).collect();
                let path = if path.is_empty() {
                    "/".to_string()
                } else {
                    path
                };
                writeln!(
                    out,
                    "  {:<16} {} {}  {}",
                    status_word(e.status),
                    e.window,
                    path,
                    e.widget_class
                )
                .unwrap();
                for h in &e.handlers {
                    writeln!(out, "      {h}").unwrap();
                }
            }
        }
        writeln!(out).unwrap();
        writeln!(
            out,
            "unchanged: {} widgets need no regression testing",
            c.unchanged
        )
        .unwrap();
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gui_match::MergedWindow;
    use crate::model::canonical_sig;

    fn n(id: &str, status: WidgetStatus, children: Vec<MergedNode>) -> MergedNode {
        MergedNode {
            merged_id: id.into(),
            status,
            old_id: None,
            new_id: None,
            widget_class: "javax.swing.JButton".into(),
            properties: Default::default(),
            handlers: vec![canonical_sig("a.A#f():void").unwrap()],
            screenshot: None,
            children,
        }
    }

    #[test]
    fn counts_and_paths() {
        use WidgetStatus::*;
        let tree = MergedGuiTree {
            windows: vec![MergedWindow {
                title: "Main".into(),
                window_class: "F".into(),
                root: n(
                    "m0",
                    Unchanged,
                    vec![
                        n("m1", Added, vec![]),
                        n("m2", Unchanged, vec![n("m3", Removed, vec![])]),
                    ],
                ),
            }],
        };
        let r = build_report(&tree, &BTreeMap::new());
        assert_eq!(
            r.counts,
            WidgetCounts {
                added: 1,
                removed: 1,
                handler_changed: 0,
                unchanged: 2
            }
        );
        assert_eq!(r.counts.total(), tree.len());
        assert_eq!(r.focus_list.len(), 2);
        assert_eq!(r.focus_list[0].path, vec![0]);
        assert_eq!(r.focus_list[1].path, vec![1, 0]);
        assert_eq!(r.focus_list[1].handlers.len(), 1);
        let text = r.to_text("1.0", "1.1");
        assert!(text.contains("1 added, 1 removed, 0 handler_changed, 2 unchanged"));
        assert!(text.contains("removed          Main /1/0"));
    }

    #[test]
    fn json_round_trip() {
        let tree = MergedGuiTree {
            windows: vec![MergedWindow {
                title: "Main".into(),
                window_class: "F".into(),
                root: n("m0", WidgetStatus::Added, vec![]),
            }],
        };
        let r = build_report(&tree, &BTreeMap::new());
        let json = serde_json::to_string(&r).unwrap();
        assert!(json.contains("\"status\":\"added\""));
        assert_eq!(serde_json::from_str::<RegressionReport>(&json).unwrap(), r);
    }
}
