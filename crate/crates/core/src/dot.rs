//! Graphviz DOT rendering of slices, diffs and condensed diffs.
//!
//! Output is a pure function of the input: nodes, then edges, each in
//! lexicographic key order. Status colors are fixed:
//! removed = red, added = blue, changed = green, unchanged = gray.

use std::fmt::Write as _;
use std::hash::Hasher;

use fnv::FnvHasher;

use crate::condense::{CondensedGraph, GroupKey};
use crate::graph_diff::{slice_elements, DiffEdgeStatus, DiffNodeStatus, NodeKey, SliceDiff};
use crate::slicer::HandlerSlice;

pub enum DotSource<'a> {
    Slice(&'a HandlerSlice),
    Diff(&'a SliceDiff),
    Condensed(&'a CondensedGraph),
}

impl<'a> From<&'a HandlerSlice> for DotSource<'a> {
    fn from(s: &'a HandlerSlice) -> Self {
        DotSource::Slice(s)
    }
}

impl<'a> From<&'a SliceDiff> for DotSource<'a> {
    fn from(d: &'a SliceDiff) -> Self {
        DotSource::Diff(d)
    }
}

impl<'a> From<&'a CondensedGraph> for DotSource<'a> {
    fn from(c: &'a CondensedGraph) -> Self {
        DotSource::Condensed(c)
    }
}

pub fn node_status_color(s: DiffNodeStatus) -> &'static str {
    match s {
        DiffNodeStatus::Removed => "red",
        DiffNodeStatus::Added => "blue",
        DiffNodeStatus::Changed => "green",
        DiffNodeStatus::Unchanged => "gray",
    }
}

pub fn edge_status_color(s: DiffEdgeStatus) -> &'static str {
    match s {
        DiffEdgeStatus::Removed => "red",
        DiffEdgeStatus::Added => "blue",
        DiffEdgeStatus::Unchanged => "gray",
    }
}

/// DOT node id for a diff key: `n` + FNV-1a/64 of its text.
pub fn node_id(key: &NodeKey) -> String {
    let mut h = FnvHasher::default();
    h.write(key.as_str().as_bytes());
    format!("n{:016x}", h.finish())
}

fn group_id(key: &GroupKey) -> String {
    match key {
        GroupKey::Node(k) => node_id(k),
        GroupKey::Super(id) => id.clone(),
    }
}

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn node_line(out: &mut String, id: &str, label: &str, shape: Option<&str>, color: Option<&str>) {
    write!(out, "  \"{id}\" [label=\"{}\"", escape(label)).unwrap();
    if let Some(shape) = shape {
        write!(out, ", shape=\"{shape}\"").unwrap();
    }
    if let Some(color) = color {
        write!(out, ", color=\"{color}\"").unwrap();
    }
    out.push_str("];\n");
}

fn edge_line(out: &mut String, from: &str, to: &str, color: Option<&str>) {
    write!(out, "  \"{from}\" -> \"{to}\"").unwrap();
    if let Some(color) = color {
        write!(out, " [color=\"{color}\"]").unwrap();
    }
    out.push_str(";\n");
}

fn shape_of(key: &NodeKey) -> Option<&'static str> {
    key.is_abstraction().then_some("box")
}

pub fn export_dot<'a>(graph: impl Into<DotSource<'a>>) -> String {
    let mut out = String::new();
    match graph.into() {
        DotSource::Slice(s) => {
            out.push_str("digraph slice {\n");
            let (nodes, edges) = slice_elements(s);
            for k in &nodes {
                node_line(&mut out, &node_id(k), k.as_str(), shape_of(k), None);
            }
            for (a, b) in &edges {
                edge_line(&mut out, &node_id(a), &node_id(b), None);
            }
        }
        DotSource::Diff(d) => {
            out.push_str("digraph diff {\n");
            for (k, s) in &d.nodes {
                node_line(
                    &mut out,
                    &node_id(k),
                    k.as_str(),
                    shape_of(k),
                    Some(node_status_color(*s)),
                );
            }
            for ((a, b), s) in &d.edges {
                edge_line(
                    &mut out,
                    &node_id(a),
                    &node_id(b),
                    Some(edge_status_color(*s)),
                );
            }
        }
        DotSource::Condensed(c) => {
            out.push_str("digraph condensed {\n");
            let mut vertices: Vec<(GroupKey, String, Option<&str>, &str)> = c
                .visible_nodes
                .iter()
                .map(|(k, s)| {
                    (
                        GroupKey::Node(k.clone()),
                        k.as_str().to_string(),
                        shape_of(k),
                        node_status_color(*s),
                    )
                })
                .collect();
            vertices.extend(c.super_nodes.iter().map(|sn| {
                (
                    GroupKey::Super(sn.id.clone()),
                    sn.label.clone(),
                    Some("box3d"),
                    node_status_color(DiffNodeStatus::Unchanged),
                )
            }));
            vertices.sort_by(|a, b| a.0.cmp(&b.0));
            for (key, label, shape, color) in &vertices {
                node_line(&mut out, &group_id(key), label, *shape, Some(color));
            }
            for ((a, b), statuses) in &c.edges {
                for s in statuses {
                    edge_line(
                        &mut out,
                        &group_id(a),
                        &group_id(b),
                        Some(edge_status_color(*s)),
                    );
                }
            }
        }
    }
    out.push_str("}\n");
    out
}
