use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::{
    load_call_graph, load_gui_model, load_rules, read_file, schema_error, CallGraph,
    ClassificationRules, GuiModel, ModelError,
};

/// One captured application version: where its artifacts live.
///
/// Paths are resolved against the manifest's directory at load time but the
/// files themselves are only opened by [`Project::load_artifacts`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Project {
    pub version_label: String,
    pub manifest_path: PathBuf,
    pub gui_model_path: PathBuf,
    pub call_graph_path: PathBuf,
    pub source_root: Option<PathBuf>,
    pub rules_path: Option<PathBuf>,
}

#[derive(Deserialize)]
struct RawManifest {
    version_label: String,
    gui_model: PathBuf,
    call_graph: PathBuf,
    #[serde(default)]
    source_root: Option<PathBuf>,
    #[serde(default)]
    rules: Option<PathBuf>,
}

pub fn load_project(path: &Path) -> Result<Project, ModelError> {
    let text = read_file(path)?;
    let raw: RawManifest = serde_json::from_str(&text).map_err(|e| schema_error(path, e))?;
    if raw.version_label.trim().is_empty() {
        return Err(ModelError::Schema {
            path: path.to_path_buf(),
            message: "version_label must be non-empty".into(),
        });
    }

    let manifest_path = std::path::absolute(path).map_err(|source| ModelError::Io {
        path: path.to_path_buf(),
        source,
    })?;
    let base = manifest_path
        .parent()
        .map(Path::to_path_buf)
        .unwrap_or_default();
    let resolve = |p: PathBuf| base.join(p);

    Ok(Project {
        version_label: raw.version_label,
        gui_model_path: resolve(raw.gui_model),
        call_graph_path: resolve(raw.call_graph),
        source_root: raw.source_root.map(resolve),
        rules_path: raw.rules.map(resolve),
        manifest_path,
    })
}

/// A project with every artifact parsed and checked.
#[derive(Debug, Clone)]
pub struct LoadedProject {
    pub project: Project,
    pub gui: GuiModel,
    pub graph: CallGraph,
    pub rules: ClassificationRules,
}

impl Project {
    pub fn load_artifacts(&self) -> Result<LoadedProject, ModelError> {
        let gui = load_gui_model(&self.gui_model_path)?;
        let graph = load_call_graph(&self.call_graph_path)?;
        let rules = match &self.rules_path {
            Some(p) => load_rules(p)?,
            None => ClassificationRules::default(),
        };
        Ok(LoadedProject {
            project: self.clone(),
            gui,
            graph,
            rules,
        })
    }
}
