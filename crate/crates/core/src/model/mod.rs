//! Domain types shared by every stage, plus loading and validation of the
//! artifact files (project manifest, GUI model, call graph, rules).

use std::path::{Path, PathBuf};

use thiserror::Error;

mod callgraph;
mod gui;
mod project;
mod rules;
mod sig;
mod validate;

pub use callgraph::{load_call_graph, CallGraph, Fingerprint, MethodRecord, SourceLocation};
pub use gui::{load_gui_model, GuiModel, Widget, Window};
pub use project::{load_project, LoadedProject, Project};
pub use rules::{load_rules, Category, ClassificationRules, PrefixRule, DEFAULT_MATCH_PROPERTIES};
pub use sig::{canonical_sig, MethodSig};
pub(crate) use validate::load_issue;
pub use validate::{validate_project, IssueKind, Severity, ValidationIssue};

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("schema error in {path}: {message}")]
    Schema { path: PathBuf, message: String },
    #[error("malformed method signature {raw:?}: {reason}")]
    MalformedSignature { raw: String, reason: &'static str },
    #[error("duplicate widget id {0:?}")]
    DuplicateWidgetId(String),
    #[error("duplicate method {0}")]
    DuplicateMethod(MethodSig),
    #[error("edge {caller} -> {callee} references undeclared method {missing}")]
    UnknownEndpoint {
        caller: MethodSig,
        callee: MethodSig,
        missing: MethodSig,
    },
    #[error("duplicate edge {caller} -> {callee}")]
    DuplicateEdge {
        caller: MethodSig,
        callee: MethodSig,
    },
    #[error("fingerprint {0:?} is not 16 lowercase hex digits")]
    InvalidFingerprint(String),
    #[error("method {sig} has invalid source range {start_line}..={end_line}")]
    InvalidSourceRange {
        sig: MethodSig,
        start_line: usize,
        end_line: usize,
    },
    #[error("classification rule #{0} has an empty prefix")]
    EmptyRulePrefix(usize),
}

pub(crate) fn read_file(path: &Path) -> Result<String, ModelError> {
    std::fs::read_to_string(path).map_err(|source| ModelError::Io {
        path: path.to_path_buf(),
        source,
    })
}

pub(crate) fn schema_error(path: &Path, err: serde_json::Error) -> ModelError {
    ModelError::Schema {
        path: path.to_path_buf(),
        message: err.to_string(),
    }
}
