//! Cross-version GUI matching and the merged, status-annotated widget tree.
//!
//! Windows pair on exact `(class, title)`. Inside a window pair, widgets pair
//! on a [`MatchKey`] built from the widget class, a configurable list of
//! properties and the sorted handler signatures. Geometry never takes part,
//! so moved or resized widgets still match. Duplicate keys are resolved
//! greedily in preorder.

use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::model::{GuiModel, MethodSig, Widget, Window};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WidgetStatus {
    Added,
    Removed,
    HandlerChanged,
    Unchanged,
}

/// SHA-256 over an unambiguous, length-prefixed encoding of the key inputs.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MatchKey([u8; 32]);

impl fmt::Debug for MatchKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "MatchKey({self})")
    }
}

impl fmt::Display for MatchKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0[..8] {
            write!(f, "{b:02x}")?;
        }
        Ok(())
    }
}

fn put_str(hasher: &mut Sha256, s: &str) {
    hasher.update((s.len() as u64).to_le_bytes());
    hasher.update(s.as_bytes());
}

pub fn widget_key(w: &Widget, key_props: &[String]) -> MatchKey {
    let mut hasher = Sha256::new();
    put_str(&mut hasher, &w.widget_class);
    hasher.update((key_props.len() as u64).to_le_bytes());
    for prop in key_props {
        match w.properties.get(prop) {
            Some(value) => {
                hasher.update([1u8]);
                put_str(&mut hasher, value);
            }
            None => hasher.update([0u8]),
        }
    }
    let mut handlers: Vec<&str> = w.handlers.iter().map(MethodSig::as_str).collect();
    handlers.sort_unstable();
    hasher.update((handlers.len() as u64).to_le_bytes());
    for h in handlers {
        put_str(&mut hasher, h);
    }
    MatchKey(hasher.finalize().into())
}

/// Window indices into the old and new models.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WindowMatching {
    pub pairs: Vec<(usize, usize)>,
    pub removed: Vec<usize>,
    pub added: Vec<usize>,
}

pub fn match_windows(old: &GuiModel, new: &GuiModel) -> WindowMatching {
    let mut taken = vec![false; new.windows.len()];
    let mut out = WindowMatching::default();
    for (i, ow) in old.windows.iter().enumerate() {
        let hit = new.windows.iter().enumerate().position(|(j, nw)| {
            !taken[j] && nw.window_class == ow.window_class && nw.title == ow.title
        });
        match hit {
            Some(j) => {
                taken[j] = true;
                out.pairs.push((i, j));
            }
            None => out.removed.push(i),
        }
    }
    out.added = (0..new.windows.len()).filter(|&j| !taken[j]).collect();
    out
}

/// Widget ids of one window pair. `pairs` is `(old_id, new_id)`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct WidgetMatching {
    pub pairs: Vec<(String, String)>,
    pub removed: Vec<String>,
    pub added: Vec<String>,
}

pub fn match_widgets(old_root: &Widget, new_root: &Widget, key_props: &[String]) -> WidgetMatching {
    let mut out = WidgetMatching {
        pairs: vec![(old_root.id.clone(), new_root.id.clone())],
        ..Default::default()
    };

    let mut pending: HashMap<MatchKey, VecDeque<&str>> = HashMap::new();
    for w in new_root.preorder().into_iter().skip(1) {
        pending
            .entry(widget_key(w, key_props))
            .or_default()
            .push_back(&w.id);
    }
    let mut paired_new = HashSet::new();
    for w in old_root.preorder().into_iter().skip(1) {
        match pending
            .get_mut(&widget_key(w, key_props))
            .and_then(VecDeque::pop_front)
        {
            Some(new_id) => {
                paired_new.insert(new_id);
                out.pairs.push((w.id.clone(), new_id.to_string()));
            }
            None => out.removed.push(w.id.clone()),
        }
    }
    out.added = new_root
        .preorder()
        .into_iter()
        .skip(1)
        .filter(|w| !paired_new.contains(w.id.as_str()))
        .map(|w| w.id.clone())
        .collect();
    out
}

/// Full matching of two models; `widgets[i]` belongs to `windows.pairs[i]`.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GuiMatching {
    pub windows: WindowMatching,
    pub widgets: Vec<WidgetMatching>,
}

pub fn match_models(old: &GuiModel, new: &GuiModel, key_props: &[String]) -> GuiMatching {
    let windows = match_windows(old, new);
    let widgets = windows
        .pairs
        .iter()
        .map(|&(i, j)| match_widgets(&old.windows[i].root, &new.windows[j].root, key_props))
        .collect();
    GuiMatching { windows, widgets }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergedNode {
    pub merged_id: String,
    pub status: WidgetStatus,
    pub old_id: Option<String>,
    pub new_id: Option<String>,
    pub widget_class: String,
    pub properties: BTreeMap<String, String>,
    pub handlers: Vec<MethodSig>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub screenshot: Option<String>,
    pub children: Vec<MergedNode>,
}

impl MergedNode {
    pub fn preorder(&self) -> Vec<&MergedNode> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(n) = stack.pop() {
            out.push(n);
            stack.extend(n.children.iter().rev());
        }
        out
    }

    fn preorder_mut(&mut self, f: &mut impl FnMut(&mut MergedNode)) {
        f(self);
        for c in &mut self.children {
            c.preorder_mut(f);
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergedWindow {
    pub title: String,
    pub window_class: String,
    pub root: MergedNode,
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MergedGuiTree {
    pub windows: Vec<MergedWindow>,
}

impl MergedGuiTree {
    pub fn nodes(&self) -> impl Iterator<Item = &MergedNode> {
        self.windows.iter().flat_map(|w| w.root.preorder())
    }

    pub fn nodes_mut(&mut self, mut f: impl FnMut(&mut MergedNode)) {
        for w in &mut self.windows {
            w.root.preorder_mut(&mut f);
        }
    }

    pub fn find(&self, merged_id: &str) -> Option<&MergedNode> {
        self.nodes().find(|n| n.merged_id == merged_id)
    }

    pub fn len(&self) -> usize {
        self.nodes().count()
    }

    pub fn is_empty(&self) -> bool {
        self.windows.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum MatchError {
    #[error("inconsistent match: {0}")]
    InconsistentMatch(String),
}

fn inconsistent(msg: impl Into<String>) -> MatchError {
    MatchError::InconsistentMatch(msg.into())
}

// Arena used while building; converted into the nested tree at the end.
struct Draft<'a> {
    status: WidgetStatus,
    old: Option<&'a Widget>,
    new: Option<&'a Widget>,
    children: Vec<usize>,
    parent: Option<usize>,
}

#[derive(Default)]
struct Arena<'a> {
    nodes: Vec<Draft<'a>>,
}

impl<'a> Arena<'a> {
    fn push(&mut self, draft: Draft<'a>) -> usize {
        self.nodes.push(draft);
        self.nodes.len() - 1
    }

    fn attach_tree(&mut self, w: &'a Widget, parent: Option<usize>, status: WidgetStatus) -> usize {
        let (old, new) = match status {
            WidgetStatus::Removed => (Some(w), None),
            _ => (None, Some(w)),
        };
        let id = self.push(Draft {
            status,
            old,
            new,
            children: Vec::new(),
            parent,
        });
        for c in &w.children {
            let child = self.attach_tree(c, Some(id), status);
            self.nodes[id].children.push(child);
        }
        id
    }

    fn finish(&self, id: usize, counter: &mut usize) -> MergedNode {
        let d = &self.nodes[id];
        let merged_id = format!("m{counter}");
        *counter += 1;
        let primary = d.new.or(d.old).expect("every draft has a widget");
        let mut handlers = primary.handlers.clone();
        if let (Some(old), Some(_)) = (d.old, d.new) {
            for h in &old.handlers {
                if !handlers.contains(h) {
                    handlers.push(h.clone());
                }
            }
        }
        MergedNode {
            merged_id,
            status: d.status,
            old_id: d.old.map(|w| w.id.clone()),
            new_id: d.new.map(|w| w.id.clone()),
            widget_class: primary.widget_class.clone(),
            properties: primary.properties.clone(),
            handlers,
            screenshot: d
                .new
                .and_then(|w| w.screenshot.clone())
                .or_else(|| d.old.and_then(|w| w.screenshot.clone())),
            children: d
                .children
                .iter()
                .map(|&c| self.finish(c, counter))
                .collect(),
        }
    }
}

fn index_tree(root: &Widget) -> (HashMap<&str, &Widget>, HashMap<&str, &Widget>) {
    let mut by_id = HashMap::new();
    let mut parent = HashMap::new();
    for w in root.preorder() {
        by_id.insert(w.id.as_str(), w);
        for c in &w.children {
            parent.insert(c.id.as_str(), w);
        }
    }
    (by_id, parent)
}

fn merge_window_pair<'a>(
    arena: &mut Arena<'a>,
    old_win: &'a Window,
    new_win: &'a Window,
    m: &WidgetMatching,
) -> Result<usize, MatchError> {
    let (old_by_id, old_parent) = index_tree(&old_win.root);
    let (new_by_id, _) = index_tree(&new_win.root);

    let mut old_to_new: HashMap<&str, &str> = HashMap::new();
    let mut new_to_old: HashMap<&str, &str> = HashMap::new();
    let mut removed: HashSet<&str> = HashSet::new();
    let mut added: HashSet<&str> = HashSet::new();
    for (o, n) in &m.pairs {
        if !old_by_id.contains_key(o.as_str()) || !new_by_id.contains_key(n.as_str()) {
            return Err(inconsistent(format!(
                "pair ({o}, {n}) names an unknown widget"
            )));
        }
        if old_to_new.insert(o, n).is_some() {
            return Err(inconsistent(format!("old widget {o} appears in two pairs")));
        }
        if new_to_old.insert(n, o).is_some() {
            return Err(inconsistent(format!("new widget {n} appears in two pairs")));
        }
    }
    for o in &m.removed {
        if old_to_new.contains_key(o.as_str()) || !removed.insert(o) {
            return Err(inconsistent(format!(
                "old widget {o} is both removed and paired"
            )));
        }
    }
    for n in &m.added {
        if new_to_old.contains_key(n.as_str()) || !added.insert(n) {
            return Err(inconsistent(format!(
                "new widget {n} is both added and paired"
            )));
        }
    }
    if old_to_new.len() + removed.len() != old_by_id.len()
        || new_to_old.len() + added.len() != new_by_id.len()
    {
        return Err(inconsistent(format!(
            "window '{}': matching does not cover every widget",
            new_win.title
        )));
    }
    if old_to_new.get(old_win.root.id.as_str()) != Some(&new_win.root.id.as_str()) {
        return Err(inconsistent(format!(
            "window '{}': roots must be paired with each other",
            new_win.title
        )));
    }

    // new-version structure first
    let mut old_to_merged: HashMap<&str, usize> = HashMap::new();
    let mut stack: Vec<(&Widget, Option<usize>)> = vec![(&new_win.root, None)];
    let mut root_id = None;
    while let Some((w, parent)) = stack.pop() {
        let old = new_to_old.get(w.id.as_str()).map(|o| old_by_id[o]);
        let id = arena.push(Draft {
            status: if old.is_some() {
                WidgetStatus::Unchanged
            } else {
                WidgetStatus::Added
            },
            old,
            new: Some(w),
            children: Vec::new(),
            parent,
        });
        if let Some(o) = old {
            old_to_merged.insert(&o.id, id);
        }
        match parent {
            Some(p) => arena.nodes[p].children.push(id),
            None => root_id = Some(id),
        }
        stack.extend(w.children.iter().rev().map(|c| (c, Some(id))));
    }

    // removed widgets go under their old parent's merged node, right after
    // the nearest preceding old sibling that already sits there
    for w in old_win.root.preorder() {
        if !removed.contains(w.id.as_str()) {
            continue;
        }
        let old_parent = old_parent[w.id.as_str()];
        let parent = old_to_merged[old_parent.id.as_str()];
        let pos = old_parent
            .children
            .iter()
            .position(|c| c.id == w.id)
            .unwrap();
        let insert_at = old_parent.children[..pos]
            .iter()
            .rev()
            .filter_map(|sib| old_to_merged.get(sib.id.as_str()))
            .find_map(|&m| {
                (arena.nodes[m].parent == Some(parent))
                    .then(|| arena.nodes[parent].children.iter().position(|&c| c == m))
                    .flatten()
            })
            .map_or(0, |i| i + 1);
        let id = arena.push(Draft {
            status: WidgetStatus::Removed,
            old: Some(w),
            new: None,
            children: Vec::new(),
            parent: Some(parent),
        });
        arena.nodes[parent].children.insert(insert_at, id);
        old_to_merged.insert(&w.id, id);
    }

    Ok(root_id.expect("window has a root"))
}

/// Builds the merged tree. Matched widgets start out `Unchanged`;
/// `HandlerChanged` is assigned later from the handler diffs.
pub fn build_merged_tree(
    matching: &GuiMatching,
    old: &GuiModel,
    new: &GuiModel,
) -> Result<MergedGuiTree, MatchError> {
    let wm = &matching.windows;
    if wm.pairs.len() != matching.widgets.len() {
        return Err(inconsistent("one widget matching per window pair required"));
    }
    let mut seen_old = HashSet::new();
    let mut seen_new = HashSet::new();
    for &(i, j) in &wm.pairs {
        if i >= old.windows.len() || j >= new.windows.len() {
            return Err(inconsistent(format!("window pair ({i}, {j}) out of range")));
        }
        if !seen_old.insert(i) || !seen_new.insert(j) {
            return Err(inconsistent(format!(
                "window pair ({i}, {j}) repeats a window"
            )));
        }
    }
    for &i in &wm.removed {
        if i >= old.windows.len() || !seen_old.insert(i) {
            return Err(inconsistent(format!(
                "old window {i} removed twice or also paired"
            )));
        }
    }
    for &j in &wm.added {
        if j >= new.windows.len() || !seen_new.insert(j) {
            return Err(inconsistent(format!(
                "new window {j} added twice or also paired"
            )));
        }
    }
    if seen_old.len() != old.windows.len() || seen_new.len() != new.windows.len() {
        return Err(inconsistent("window matching does not cover every window"));
    }

    let mut arena = Arena::default();
    // (arena root, window taken from)
    let mut slots: Vec<(usize, &Window)> = Vec::new();
    let mut old_slot: HashMap<usize, usize> = HashMap::new();
    let pair_of_new: HashMap<usize, usize> = wm
        .pairs
        .iter()
        .enumerate()
        .map(|(k, &(_, j))| (j, k))
        .collect();

    for (j, nw) in new.windows.iter().enumerate() {
        let root = match pair_of_new.get(&j) {
            Some(&k) => {
                let (i, _) = wm.pairs[k];
                let root =
                    merge_window_pair(&mut arena, &old.windows[i], nw, &matching.widgets[k])?;
                old_slot.insert(i, slots.len());
                root
            }
            None => arena.attach_tree(&nw.root, None, WidgetStatus::Added),
        };
        slots.push((root, nw));
    }
    for (i, ow) in old.windows.iter().enumerate() {
        if old_slot.contains_key(&i) {
            continue;
        }
        let root = arena.attach_tree(&ow.root, None, WidgetStatus::Removed);
        let insert_at = (0..i)
            .rev()
            .find_map(|p| old_slot.get(&p))
            .map_or(0, |&s| s + 1);
        slots.insert(insert_at, (root, ow));
        for s in old_slot.values_mut() {
            if *s >= insert_at {
                *s += 1;
            }
        }
        old_slot.insert(i, insert_at);
    }

    let mut counter = 0;
    let windows = slots
        .into_iter()
        .map(|(root, w)| MergedWindow {
            title: w.title.clone(),
            window_class: w.window_class.clone(),
            root: arena.finish(root, &mut counter),
        })
        .collect();
    Ok(MergedGuiTree { windows })
}
