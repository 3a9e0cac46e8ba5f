//! Union diff of one handler's slices across two versions.
//!
//! Nodes are methods plus the `Framework` / `Library` abstraction nodes.
//! A method is `Changed` only when it is present on both sides with
//! different fingerprints; differing call edges are carried by the edges
//! alone.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::gui_match::{MergedGuiTree, MergedNode, WidgetStatus};
use crate::model::{canonical_sig, Category, Fingerprint, MethodSig};
use crate::slicer::HandlerSlice;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiffNodeStatus {
    Added,
    Removed,
    Changed,
    Unchanged,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiffEdgeStatus {
    Added,
    Removed,
    Unchanged,
}

/// A diff-graph vertex: a method or an abstraction node.
///
/// Ordered by its text form, so method signatures and the category labels
/// sort together lexicographically.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum NodeKey {
    Method(MethodSig),
    Abstraction(Category),
}

impl NodeKey {
    pub fn as_str(&self) -> &str {
        match self {
            NodeKey::Method(sig) => sig.as_str(),
            NodeKey::Abstraction(c) => c.label(),
        }
    }

    pub fn as_method(&self) -> Option<&MethodSig> {
        match self {
            NodeKey::Method(sig) => Some(sig),
            NodeKey::Abstraction(_) => None,
        }
    }

    pub fn is_abstraction(&self) -> bool {
        matches!(self, NodeKey::Abstraction(_))
    }

    pub fn parse(text: &str) -> Result<Self, crate::model::ModelError> {
        match text {
            "Framework" => Ok(NodeKey::Abstraction(Category::Framework)),
            "Library" => Ok(NodeKey::Abstraction(Category::Library)),
            _ => canonical_sig(text).map(NodeKey::Method),
        }
    }
}

impl Ord for NodeKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.as_str().cmp(other.as_str())
    }
}

impl PartialOrd for NodeKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for NodeKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl From<MethodSig> for NodeKey {
    fn from(sig: MethodSig) -> Self {
        NodeKey::Method(sig)
    }
}

impl Serialize for NodeKey {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for NodeKey {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        NodeKey::parse(&raw).map_err(serde::de::Error::custom)
    }
}

pub type EdgeKey = (NodeKey, NodeKey);

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SliceDiff {
    pub root: MethodSig,
    pub nodes: BTreeMap<NodeKey, DiffNodeStatus>,
    #[serde(with = "edge_list")]
    pub edges: BTreeMap<EdgeKey, DiffEdgeStatus>,
}

/// Edge maps serialize as `[{"from", "to", "status"}]` sorted by key.
pub(crate) mod edge_list {
    use super::*;

    #[derive(Serialize, Deserialize)]
    struct Row<S> {
        from: NodeKey,
        to: NodeKey,
        status: S,
    }

    pub fn serialize<S: Serializer, T: Serialize + Clone>(
        map: &BTreeMap<EdgeKey, T>,
        serializer: S,
    ) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(map.iter().map(|((from, to), status)| Row {
            from: from.clone(),
            to: to.clone(),
            status: status.clone(),
        }))
    }

    pub fn deserialize<'de, D: Deserializer<'de>, T: Deserialize<'de>>(
        deserializer: D,
    ) -> Result<BTreeMap<EdgeKey, T>, D::Error> {
        let rows: Vec<Row<T>> = Vec::deserialize(deserializer)?;
        Ok(rows
            .into_iter()
            .map(|r| ((r.from, r.to), r.status))
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum DiffError {
    #[error("slices have different roots: {old} vs {new}")]
    RootMismatch { old: MethodSig, new: MethodSig },
    #[error("widget {widget} handler {handler} has no diff")]
    MissingDiff { widget: String, handler: MethodSig },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Side {
    Old,
    New,
}

/// Node and edge sets of a slice in diff-key form.
pub fn slice_elements(s: &HandlerSlice) -> (BTreeSet<NodeKey>, BTreeSet<EdgeKey>) {
    let mut nodes: BTreeSet<NodeKey> = s.app_nodes.iter().cloned().map(NodeKey::Method).collect();
    let mut edges: BTreeSet<EdgeKey> = s
        .app_edges
        .iter()
        .map(|(a, b)| (NodeKey::Method(a.clone()), NodeKey::Method(b.clone())))
        .collect();
    for (caller, category) in &s.abstraction_edges {
        nodes.insert(NodeKey::Abstraction(*category));
        edges.insert((
            NodeKey::Method(caller.clone()),
            NodeKey::Abstraction(*category),
        ));
    }
    (nodes, edges)
}

pub fn diff_slices(
    old: &HandlerSlice,
    new: &HandlerSlice,
    old_fp: &HashMap<MethodSig, Fingerprint>,
    new_fp: &HashMap<MethodSig, Fingerprint>,
) -> Result<SliceDiff, DiffError> {
    if old.root != new.root {
        return Err(DiffError::RootMismatch {
            old: old.root.clone(),
            new: new.root.clone(),
        });
    }
    let (old_nodes, old_edges) = slice_elements(old);
    let (new_nodes, new_edges) = slice_elements(new);

    let nodes = old_nodes
        .union(&new_nodes)
        .map(|key| {
            let status = match (old_nodes.contains(key), new_nodes.contains(key)) {
                (true, true) => match key {
                    NodeKey::Method(sig) if old_fp.get(sig) != new_fp.get(sig) => {
                        DiffNodeStatus::Changed
                    }
                    _ => DiffNodeStatus::Unchanged,
                },
                (true, false) => DiffNodeStatus::Removed,
                _ => DiffNodeStatus::Added,
            };
            (key.clone(), status)
        })
        .collect();
    let edges = old_edges
        .union(&new_edges)
        .map(|key| {
            let status = match (old_edges.contains(key), new_edges.contains(key)) {
                (true, true) => DiffEdgeStatus::Unchanged,
                (true, false) => DiffEdgeStatus::Removed,
                _ => DiffEdgeStatus::Added,
            };
            (key.clone(), status)
        })
        .collect();

    Ok(SliceDiff {
        root: new.root.clone(),
        nodes,
        edges,
    })
}

/// Diff for a handler that exists on one side only: everything is
/// `Removed` (old side) or `Added` (new side).
pub fn unmatched_handler_diff(slice: &HandlerSlice, side: Side) -> SliceDiff {
    let (node_status, edge_status) = match side {
        Side::Old => (DiffNodeStatus::Removed, DiffEdgeStatus::Removed),
        Side::New => (DiffNodeStatus::Added, DiffEdgeStatus::Added),
    };
    let (nodes, edges) = slice_elements(slice);
    SliceDiff {
        root: slice.root.clone(),
        nodes: nodes.into_iter().map(|k| (k, node_status)).collect(),
        edges: edges.into_iter().map(|k| (k, edge_status)).collect(),
    }
}

pub fn has_changes(d: &SliceDiff) -> bool {
    d.nodes.values().any(|s| *s != DiffNodeStatus::Unchanged)
        || d.edges.values().any(|s| *s != DiffEdgeStatus::Unchanged)
}

/// `(merged widget id, handler)`.
pub type HandlerKey = (String, MethodSig);

/// Sets every matched widget to `HandlerChanged` or `Unchanged` from its
/// handler diffs. Added and removed widgets keep their status.
///
/// `needs_diff` says which widget handlers must have a diff entry; handlers that
/// could not be sliced in either version (platform-attached ones) are
/// exempt and never make a widget `HandlerChanged`.
pub fn propagate_to_widgets(
    mut tree: MergedGuiTree,
    per_handler_diffs: &BTreeMap<HandlerKey, SliceDiff>,
    needs_diff: impl Fn(&MergedNode, &MethodSig) -> bool,
) -> Result<MergedGuiTree, DiffError> {
    let mut failure = None;
    tree.nodes_mut(|node| {
        if failure.is_some() || matches!(node.status, WidgetStatus::Added | WidgetStatus::Removed) {
            return;
        }
        let mut changed = false;
        for handler in &node.handlers {
            match per_handler_diffs.get(&(node.merged_id.clone(), handler.clone())) {
                Some(d) => changed |= has_changes(d),
                None if needs_diff(node, handler) => {
                    failure = Some(DiffError::MissingDiff {
                        widget: node.merged_id.clone(),
                        handler: handler.clone(),
                    });
                    return;
                }
                None => {}
            }
        }
        node.status = if changed {
            WidgetStatus::HandlerChanged
        } else {
            WidgetStatus::Unchanged
        };
    });
    match failure {
        Some(e) => Err(e),
        None => Ok(tree),
    }
}
