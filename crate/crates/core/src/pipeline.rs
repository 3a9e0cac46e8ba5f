//! The explore and compare pipelines and bundle output.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::{annotate_graph, CategorizedCallGraph};
use crate::condense::{collapse_unchanged, CondensedGraph};
use crate::dot::{export_dot, node_id};
use crate::graph_diff::{
    diff_slices, propagate_to_widgets, unmatched_handler_diff, DiffError, DiffNodeStatus,
    HandlerKey, NodeKey, Side, SliceDiff,
};
use crate::gui_match::{build_merged_tree, match_models, MatchError, MergedGuiTree, MergedNode};
use crate::model::{
    load_issue, load_project, validate_project, GuiModel, IssueKind, LoadedProject, MethodSig,
    ModelError, ValidationIssue, Widget,
};
use crate::report::{build_report, RegressionReport};
use crate::slicer::{slice, HandlerSlice};
use crate::textdiff::{extract_method_source, line_diff, DiffHunk, MethodSourceView};

pub const EXPLORATION_FILE: &str = "exploration.json";
pub const COMPARISON_FILE: &str = "comparison.json";
pub const REPORT_FILE: &str = "report.txt";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("missing artifact:\n{}", list(.0))]
    MissingArtifact(Vec<ValidationIssue>),
    #[error("invalid project:\n{}", list(.0))]
    Invalid(Vec<ValidationIssue>),
    #[error(transparent)]
    Match(#[from] MatchError),
    #[error(transparent)]
    Diff(#[from] DiffError),
    #[error("cannot write bundle to {path}: {source}")]
    Output {
        path: PathBuf,
        #[source]
        source: io::Error,
    },
}

fn list(issues: &[ValidationIssue]) -> String {
    issues
        .iter()
        .map(|i| format!("  {i}"))
        .collect::<Vec<_>>()
        .join("\n")
}

impl PipelineError {
    /// Process exit status: 2 for a missing artifact, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        match self {
            PipelineError::MissingArtifact(_) => 2,
            _ => 1,
        }
    }

    fn from_issues(issues: Vec<ValidationIssue>) -> Self {
        let errors: Vec<_> = issues
            .into_iter()
            .filter(ValidationIssue::is_error)
            .collect();
        if errors.iter().any(|i| i.kind == IssueKind::MissingArtifact) {
            PipelineError::MissingArtifact(errors)
        } else {
            PipelineError::Invalid(errors)
        }
    }
}

/// Loads and validates a project. Warnings are returned alongside it.
pub fn prepare(manifest: &Path) -> Result<(LoadedProject, Vec<ValidationIssue>), PipelineError> {
    let project = load_project(manifest)
        .map_err(|e| PipelineError::from_issues(vec![load_issue(manifest, e)]))?;
    let issues = validate_project(&project);
    if issues.iter().any(ValidationIssue::is_error) {
        return Err(PipelineError::from_issues(issues));
    }
    let loaded = project.load_artifacts().map_err(|e| {
        let path = match &e {
            ModelError::Io { path, .. } | ModelError::Schema { path, .. } => path.clone(),
            _ => project.manifest_path.clone(),
        };
        PipelineError::from_issues(vec![load_issue(&path, e)])
    })?;
    Ok((loaded, issues))
}

fn handler_set(gui: &GuiModel) -> Vec<MethodSig> {
    let set: BTreeSet<&MethodSig> = gui.widgets().flat_map(|w| w.handlers.iter()).collect();
    set.into_iter().cloned().collect()
}

/// Slices every handler that is an application method of `cg`.
fn slice_handlers(cg: &CategorizedCallGraph, gui: &GuiModel) -> BTreeMap<MethodSig, HandlerSlice> {
    handler_set(gui)
        .par_iter()
        .filter_map(|h| slice(cg, h).ok().map(|s| (h.clone(), s)))
        .collect()
}

/// Hex part of a method's DOT node id; used in file names.
pub fn sig_hex(sig: &MethodSig) -> String {
    node_id(&NodeKey::Method(sig.clone()))[1..].to_string()
}

fn to_json<T: Serialize>(value: &T) -> Vec<u8> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("bundle serializes");
    bytes.push(b'\n');
    bytes
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExplorationBundle {
    pub version_label: String,
    pub gui: GuiModel,
    pub slices: BTreeMap<MethodSig, HandlerSlice>,
    pub source_views: BTreeMap<MethodSig, MethodSourceView>,
    pub warnings: Vec<ValidationIssue>,
}

#[derive(Debug, Clone)]
pub struct Exploration {
    pub bundle: ExplorationBundle,
    pub dot_files: BTreeMap<String, String>,
}

impl Exploration {
    pub fn files(&self) -> Vec<(String, Vec<u8>)> {
        let mut files = vec![(EXPLORATION_FILE.to_string(), to_json(&self.bundle))];
        files.extend(
            self.dot_files
                .iter()
                .map(|(name, dot)| (name.clone(), dot.as_bytes().to_vec())),
        );
        files
    }
}

pub fn explore(manifest: &Path) -> Result<Exploration, PipelineError> {
    let (loaded, mut warnings) = prepare(manifest)?;
    let cg = annotate_graph(loaded.graph, &loaded.rules);
    let slices = slice_handlers(&cg, &loaded.gui);

    let mut source_views = BTreeMap::new();
    if let Some(root) = loaded.project.source_root.as_deref().filter(|r| r.is_dir()) {
        let methods: BTreeSet<&MethodSig> = slices.values().flat_map(|s| &s.app_nodes).collect();
        for sig in methods {
            let Some(rec) = cg.graph.record(sig).filter(|r| r.source.is_some()) else {
                continue;
            };
            match extract_method_source(root, rec) {
                Ok(view) => {
                    source_views.insert(sig.clone(), view);
                }
                Err(e) => warnings.push(ValidationIssue::warning(
                    IssueKind::SourceUnavailable,
                    e.to_string(),
                )),
            }
        }
    }

    let dot_files = slices
        .iter()
        .map(|(h, s)| (format!("handler_{}.dot", sig_hex(h)), export_dot(s)))
        .collect();
    Ok(Exploration {
        bundle: ExplorationBundle {
            version_label: loaded.project.version_label,
            gui: loaded.gui,
            slices,
            source_views,
            warnings,
        },
        dot_files,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VersionLabels {
    pub old_label: String,
    pub new_label: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComparisonBundle {
    pub versions: VersionLabels,
    pub merged_tree: MergedGuiTree,
    /// merged widget id -> handler -> diff
    pub handler_diffs: BTreeMap<String, BTreeMap<MethodSig, SliceDiff>>,
    pub condensed: BTreeMap<String, BTreeMap<MethodSig, CondensedGraph>>,
    /// Line diffs for changed methods whose source is available in both versions.
    pub source_diffs: BTreeMap<MethodSig, Vec<DiffHunk>>,
    pub report: RegressionReport,
    pub warnings: Vec<ValidationIssue>,
}

#[derive(Debug, Clone)]
pub struct Comparison {
    pub bundle: ComparisonBundle,
    pub dot_files: BTreeMap<String, String>,
    pub report_text: String,
}

impl Comparison {
    pub fn files(&self) -> Vec<(String, Vec<u8>)> {
        let mut files = vec![
            (COMPARISON_FILE.to_string(), to_json(&self.bundle)),
            (
                REPORT_FILE.to_string(),
                self.report_text.clone().into_bytes(),
            ),
        ];
        files.extend(
            self.dot_files
                .iter()
                .map(|(name, dot)| (name.clone(), dot.as_bytes().to_vec())),
        );
        files
    }
}

struct Version {
    label: String,
    source_root: Option<PathBuf>,
    gui: GuiModel,
    cg: CategorizedCallGraph,
    slices: BTreeMap<MethodSig, HandlerSlice>,
}

impl Version {
    fn new(loaded: LoadedProject) -> Self {
        let cg = annotate_graph(loaded.graph, &loaded.rules);
        let slices = slice_handlers(&cg, &loaded.gui);
        Version {
            label: loaded.project.version_label,
            source_root: loaded.project.source_root.filter(|r| r.is_dir()),
            gui: loaded.gui,
            cg,
            slices,
        }
    }

    fn widgets(&self) -> HashMap<&str, &Widget> {
        self.gui.widgets().map(|w| (w.id.as_str(), w)).collect()
    }
}

/// The slice of `handler` on one side, if the widget exists there, carries
/// the handler, and the handler could be sliced in that version.
fn side_slice<'a>(
    widget_id: Option<&String>,
    widgets: &HashMap<&str, &Widget>,
    slices: &'a BTreeMap<MethodSig, HandlerSlice>,
    handler: &MethodSig,
) -> Option<&'a HandlerSlice> {
    let widget = widgets.get(widget_id?.as_str())?;
    if !widget.handlers.contains(handler) {
        return None;
    }
    slices.get(handler)
}

fn label_issues(
    label: &str,
    issues: Vec<ValidationIssue>,
) -> impl Iterator<Item = ValidationIssue> + '_ {
    issues.into_iter().map(move |mut i| {
        i.message = format!("{label}: {}", i.message);
        i
    })
}

fn nest<T: Clone>(flat: &BTreeMap<HandlerKey, T>) -> BTreeMap<String, BTreeMap<MethodSig, T>> {
    let mut out: BTreeMap<String, BTreeMap<MethodSig, T>> = BTreeMap::new();
    for ((widget, handler), v) in flat {
        out.entry(widget.clone())
            .or_default()
            .insert(handler.clone(), v.clone());
    }
    out
}

pub fn compare(old_manifest: &Path, new_manifest: &Path) -> Result<Comparison, PipelineError> {
    let (old_loaded, old_issues) = prepare(old_manifest)?;
    let (new_loaded, new_issues) = prepare(new_manifest)?;
    let key_props = new_loaded.rules.match_properties.clone();
    let old = Version::new(old_loaded);
    let new = Version::new(new_loaded);
    let mut warnings: Vec<_> = label_issues(&old.label, old_issues)
        .chain(label_issues(&new.label, new_issues))
        .collect();

    let matching = match_models(&old.gui, &new.gui, &key_props);
    let tree = build_merged_tree(&matching, &old.gui, &new.gui)?;

    let old_widgets = old.widgets();
    let new_widgets = new.widgets();
    let sides = |node: &MergedNode, h: &MethodSig| {
        (
            side_slice(node.old_id.as_ref(), &old_widgets, &old.slices, h),
            side_slice(node.new_id.as_ref(), &new_widgets, &new.slices, h),
        )
    };

    let old_fp = old.cg.graph.fingerprints();
    let new_fp = new.cg.graph.fingerprints();
    let tasks: Vec<(&MergedNode, &MethodSig)> = tree
        .nodes()
        .flat_map(|n| n.handlers.iter().map(move |h| (n, h)))
        .collect();
    let diffs: BTreeMap<HandlerKey, SliceDiff> = tasks
        .par_iter()
        .filter_map(|&(node, h)| {
            let diff = match sides(node, h) {
                (Some(a), Some(b)) => diff_slices(a, b, &old_fp, &new_fp),
                (Some(a), None) => Ok(unmatched_handler_diff(a, Side::Old)),
                (None, Some(b)) => Ok(unmatched_handler_diff(b, Side::New)),
                (None, None) => return None,
            };
            Some(diff.map(|d| ((node.merged_id.clone(), h.clone()), d)))
        })
        .collect::<Result<_, _>>()?;

    let tree = propagate_to_widgets(tree, &diffs, |node, h| {
        let (a, b) = sides(node, h);
        a.is_some() || b.is_some()
    })?;

    let condensed: BTreeMap<HandlerKey, CondensedGraph> = diffs
        .par_iter()
        .map(|(k, d)| (k.clone(), collapse_unchanged(d)))
        .collect();

    let changed: BTreeSet<&MethodSig> = diffs
        .values()
        .flat_map(|d| &d.nodes)
        .filter(|(_, s)| **s == DiffNodeStatus::Changed)
        .filter_map(|(k, _)| k.as_method())
        .collect();
    let mut source_diffs = BTreeMap::new();
    if let (Some(old_root), Some(new_root)) = (&old.source_root, &new.source_root) {
        for sig in changed {
            let (Some(a), Some(b)) = (old.cg.graph.record(sig), new.cg.graph.record(sig)) else {
                continue;
            };
            if a.source.is_none() || b.source.is_none() {
                continue;
            }
            match (
                extract_method_source(old_root, a),
                extract_method_source(new_root, b),
            ) {
                (Ok(va), Ok(vb)) => {
                    source_diffs.insert(sig.clone(), line_diff(&va.lines, &vb.lines));
                }
                (Err(e), _) | (_, Err(e)) => warnings.push(ValidationIssue::warning(
                    IssueKind::SourceUnavailable,
                    e.to_string(),
                )),
            }
        }
    }

    let report = build_report(&tree, &diffs);
    let report_text = report.to_text(&old.label, &new.label);
    let dot_files = diffs
        .iter()
        .map(|((widget, h), d)| (format!("diff_{widget}_{}.dot", sig_hex(h)), export_dot(d)))
        .collect();

    Ok(Comparison {
        bundle: ComparisonBundle {
            versions: VersionLabels {
                old_label: old.label.clone(),
                new_label: new.label.clone(),
            },
            merged_tree: tree,
            handler_diffs: nest(&diffs),
            condensed: nest(&condensed),
            source_diffs,
            report,
            warnings,
        },
        dot_files,
        report_text,
    })
}

/// Writes `files` into `out_dir`, replacing any previous contents.
///
/// Files are staged in a sibling temporary directory and moved into place
/// with a rename, so `out_dir` never holds a partial bundle.
pub fn write_bundle(out_dir: &Path, files: &[(String, Vec<u8>)]) -> Result<(), PipelineError> {
    let io_err = |source| PipelineError::Output {
        path: out_dir.to_path_buf(),
        source,
    };
    let parent = match out_dir.parent() {
        Some(p) if !p.as_os_str().is_empty() => p.to_path_buf(),
        _ => PathBuf::from("."),
    };
    fs::create_dir_all(&parent).map_err(io_err)?;
    let staging = tempfile::Builder::new()
        .prefix(".evotrack-staging-")
        .tempdir_in(&parent)
        .map_err(io_err)?;
    for (name, bytes) in files {
        fs::write(staging.path().join(name), bytes).map_err(io_err)?;
    }

    let backup = if out_dir.exists() {
        let slot = tempfile::Builder::new()
            .prefix(".evotrack-previous-")
            .tempdir_in(&parent)
            .map_err(io_err)?
            .keep();
        fs::remove_dir(&slot).map_err(io_err)?;
        fs::rename(out_dir, &slot).map_err(io_err)?;
        Some(slot)
    } else {
        None
    };
    let staged = staging.keep();
    if let Err(e) = fs::rename(&staged, out_dir) {
        if let Some(slot) = &backup {
            let _ = fs::rename(slot, out_dir);
        }
        let _ = fs::remove_dir_all(&staged);
        return Err(io_err(e));
    }
    if let Some(slot) = backup {
        let _ = fs::remove_dir_all(slot);
    }
    Ok(())
}
