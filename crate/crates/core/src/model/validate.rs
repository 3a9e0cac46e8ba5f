use std::collections::{BTreeSet, HashMap};
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{
    load_call_graph, load_gui_model, load_rules, CallGraph, Category, ClassificationRules,
    GuiModel, ModelError, Project,
};
use crate::classify::categorize;
use crate::gui_match::widget_key;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    Error,
    Warning,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IssueKind {
    /// A required artifact file does not exist or cannot be read.
    MissingArtifact,
    /// An artifact exists but does not parse or violates an invariant.
    SchemaError,
    /// A GUI handler that is not part of the call graph.
    DanglingHandler,
    /// A GUI handler categorized as library or framework code.
    NonApplicationHandler,
    /// Two widgets in one window share a match key; pairing falls back to
    /// preorder position.
    AmbiguousMatchKey,
    MissingSourceRoot,
    /// Source text for a method could not be extracted.
    SourceUnavailable,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ValidationIssue {
    pub severity: Severity,
    pub kind: IssueKind,
    pub message: String,
}

impl ValidationIssue {
    pub(crate) fn error(kind: IssueKind, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Error,
            kind,
            message: message.into(),
        }
    }

    pub(crate) fn warning(kind: IssueKind, message: impl Into<String>) -> Self {
        Self {
            severity: Severity::Warning,
            kind,
            message: message.into(),
        }
    }

    pub fn is_error(&self) -> bool {
        self.severity == Severity::Error
    }
}

impl fmt::Display for ValidationIssue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let sev = match self.severity {
            Severity::Error => "error",
            Severity::Warning => "warning",
        };
        let kind = serde_json::to_value(self.kind).expect("kind serializes");
        write!(
            f,
            "{sev}[{}]: {}",
            kind.as_str().unwrap_or_default(),
            self.message
        )
    }
}

pub(crate) fn load_issue(path: &Path, err: ModelError) -> ValidationIssue {
    match err {
        ModelError::Io { .. } => ValidationIssue::error(
            IssueKind::MissingArtifact,
            format!("cannot read {}: {err}", path.display()),
        ),
        other => ValidationIssue::error(
            IssueKind::SchemaError,
            format!("{}: {other}", path.display()),
        ),
    }
}

/// Collects every problem with a project. Never fails; issues are data.
pub fn validate_project(project: &Project) -> Vec<ValidationIssue> {
    let mut issues = Vec::new();

    let mut load = |path: &Path| -> bool {
        if path.is_file() {
            true
        } else {
            issues.push(ValidationIssue::error(
                IssueKind::MissingArtifact,
                format!("artifact not found: {}", path.display()),
            ));
            false
        }
    };
    let gui_present = load(&project.gui_model_path);
    let graph_present = load(&project.call_graph_path);
    let rules_present = project.rules_path.as_deref().map(&mut load);

    let gui = gui_present
        .then(|| load_gui_model(&project.gui_model_path))
        .and_then(|r| {
            r.map_err(|e| issues.push(load_issue(&project.gui_model_path, e)))
                .ok()
        });
    let graph = graph_present
        .then(|| load_call_graph(&project.call_graph_path))
        .and_then(|r| {
            r.map_err(|e| issues.push(load_issue(&project.call_graph_path, e)))
                .ok()
        });
    let rules = match (&project.rules_path, rules_present) {
        (Some(path), Some(true)) => load_rules(path)
            .map_err(|e| issues.push(load_issue(path, e)))
            .ok(),
        (Some(_), _) => None,
        (None, _) => Some(ClassificationRules::default()),
    };

    if let Some(root) = &project.source_root {
        if !root.is_dir() {
            issues.push(ValidationIssue::warning(
                IssueKind::MissingSourceRoot,
                format!("source root not found: {}", root.display()),
            ));
        }
    }

    if let (Some(gui), Some(graph)) = (&gui, &graph) {
        issues.extend(handler_issues(gui, graph, rules.as_ref()));
    }
    if let Some(gui) = &gui {
        let props = rules
            .as_ref()
            .map(|r| r.match_properties.clone())
            .unwrap_or_else(|| ClassificationRules::default().match_properties);
        issues.extend(ambiguity_issues(gui, &props));
    }
    issues
}

fn handler_issues(
    gui: &GuiModel,
    graph: &CallGraph,
    rules: Option<&ClassificationRules>,
) -> Vec<ValidationIssue> {
    let handlers: BTreeSet<_> = gui.widgets().flat_map(|w| w.handlers.iter()).collect();
    let mut out = Vec::new();
    for sig in handlers {
        if !graph.contains(sig) {
            out.push(ValidationIssue::warning(
                IssueKind::DanglingHandler,
                format!("handler {sig} is not in the call graph"),
            ));
        } else if let Some(rules) = rules {
            let category = categorize(sig, rules);
            if category != Category::Application {
                out.push(ValidationIssue::warning(
                    IssueKind::NonApplicationHandler,
                    format!(
                        "handler {sig} is {} code and will not be sliced",
                        category.label()
                    ),
                ));
            }
        }
    }
    out
}

fn ambiguity_issues(gui: &GuiModel, key_props: &[String]) -> Vec<ValidationIssue> {
    let mut out = Vec::new();
    for window in &gui.windows {
        let mut by_key: HashMap<_, Vec<&str>> = HashMap::new();
        for w in window.root.preorder().into_iter().skip(1) {
            by_key
                .entry(widget_key(w, key_props))
                .or_default()
                .push(&w.id);
        }
        let mut groups: Vec<_> = by_key.into_values().filter(|ids| ids.len() > 1).collect();
        groups.sort();
        for ids in groups {
            out.push(ValidationIssue::warning(
                IssueKind::AmbiguousMatchKey,
                format!(
                    "window '{}': widgets {} are indistinguishable by match key",
                    window.title,
                    ids.join(", ")
                ),
            ));
        }
    }
    out
}
