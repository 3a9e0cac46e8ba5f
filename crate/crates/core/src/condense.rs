//! Collapsing unchanged regions of a [`SliceDiff`].
//!
//! Unchanged methods (other than the handler root) are grouped into
//! super-nodes, one per weakly connected component of the subgraph they
//! induce. Everything that changed, the root and the abstraction nodes stay
//! visible. Edges are lifted to the groups of their endpoints and keep the
//! set of statuses of the edges they stand for. Edges internal to a
//! super-node are hidden when all of them are unchanged; otherwise the
//! super-node gets a self-loop carrying their statuses.

use std::cmp::Ordering;
use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

use crate::graph_diff::{DiffEdgeStatus, DiffNodeStatus, NodeKey, SliceDiff};
use crate::model::MethodSig;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SuperNode {
    pub id: String,
    pub members: BTreeSet<MethodSig>,
    pub label: String,
}

/// A vertex of the condensed graph: a visible node or a super-node.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum GroupKey {
    Node(NodeKey),
    Super(String),
}

impl GroupKey {
    pub fn as_str(&self) -> &str {
        match self {
            GroupKey::Node(k) => k.as_str(),
            GroupKey::Super(id) => id,
        }
    }
}

impl Ord for GroupKey {
    fn cmp(&self, other: &Self) -> Ordering {
        self.as_str().cmp(other.as_str())
    }
}

impl PartialOrd for GroupKey {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for GroupKey {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

fn is_super_id(s: &str) -> bool {
    s.len() > 1 && s.starts_with('U') && s[1..].bytes().all(|b| b.is_ascii_digit())
}

impl Serialize for GroupKey {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(self.as_str())
    }
}

impl<'de> Deserialize<'de> for GroupKey {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        if is_super_id(&raw) {
            Ok(GroupKey::Super(raw))
        } else {
            NodeKey::parse(&raw)
                .map(GroupKey::Node)
                .map_err(serde::de::Error::custom)
        }
    }
}

/// Quotient edges: group pair -> statuses of the edges it stands for.
pub type QuotientEdges = BTreeMap<(GroupKey, GroupKey), BTreeSet<DiffEdgeStatus>>;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CondensedGraph {
    pub root: MethodSig,
    pub visible_nodes: BTreeMap<NodeKey, DiffNodeStatus>,
    pub super_nodes: Vec<SuperNode>,
    #[serde(with = "group_edge_list")]
    pub edges: QuotientEdges,
}

mod group_edge_list {
    use super::*;

    #[derive(Serialize, Deserialize)]
    struct Row {
        from: GroupKey,
        to: GroupKey,
        statuses: BTreeSet<DiffEdgeStatus>,
    }

    pub fn serialize<S: Serializer>(map: &QuotientEdges, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_seq(map.iter().map(|((from, to), statuses)| Row {
            from: from.clone(),
            to: to.clone(),
            statuses: statuses.clone(),
        }))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(
        deserializer: D,
    ) -> Result<QuotientEdges, D::Error> {
        let rows: Vec<Row> = Vec::deserialize(deserializer)?;
        Ok(rows
            .into_iter()
            .map(|r| ((r.from, r.to), r.statuses))
            .collect())
    }
}

impl CondensedGraph {
    pub fn super_node(&self, id: &str) -> Option<&SuperNode> {
        self.super_nodes.iter().find(|s| s.id == id)
    }

    /// Number of vertices drawn: visible nodes plus super-nodes.
    pub fn vertex_count(&self) -> usize {
        self.visible_nodes.len() + self.super_nodes.len()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum CondenseError {
    #[error("condensation does not belong to this diff: {0}")]
    ForeignCondensation(String),
}

fn collapsible(d: &SliceDiff, key: &NodeKey, status: DiffNodeStatus) -> Option<MethodSig> {
    match key {
        NodeKey::Method(sig) if status == DiffNodeStatus::Unchanged && *sig != d.root => {
            Some(sig.clone())
        }
        _ => None,
    }
}

fn find(parent: &mut [usize], mut x: usize) -> usize {
    while parent[x] != x {
        parent[x] = parent[parent[x]];
        x = parent[x];
    }
    x
}

pub fn collapse_unchanged(d: &SliceDiff) -> CondensedGraph {
    let members: Vec<MethodSig> = d
        .nodes
        .iter()
        .filter_map(|(k, s)| collapsible(d, k, *s))
        .collect();
    let index: HashMap<&MethodSig, usize> =
        members.iter().enumerate().map(|(i, s)| (s, i)).collect();

    let mut parent: Vec<usize> = (0..members.len()).collect();
    for (from, to) in d.edges.keys() {
        let ends = from
            .as_method()
            .and_then(|a| index.get(a))
            .zip(to.as_method().and_then(|b| index.get(b)));
        if let Some((&a, &b)) = ends {
            let (ra, rb) = (find(&mut parent, a), find(&mut parent, b));
            if ra != rb {
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
    }

    // members are sorted, so grouping in index order and numbering by first
    // member gives lexicographic numbering by smallest member
    let mut groups: BTreeMap<usize, BTreeSet<MethodSig>> = BTreeMap::new();
    for (i, sig) in members.iter().enumerate() {
        let r = find(&mut parent, i);
        groups.entry(r).or_default().insert(sig.clone());
    }
    let mut groups: Vec<BTreeSet<MethodSig>> = groups.into_values().collect();
    groups.sort_by(|a, b| a.first().cmp(&b.first()));

    let super_nodes: Vec<SuperNode> = groups
        .into_iter()
        .enumerate()
        .map(|(i, members)| SuperNode {
            id: format!("U{}", i + 1),
            label: format!("{} unchanged methods", members.len()),
            members,
        })
        .collect();

    let mut group_of: HashMap<&MethodSig, &str> = HashMap::new();
    for s in &super_nodes {
        for m in &s.members {
            group_of.insert(m, &s.id);
        }
    }
    let lift = |k: &NodeKey| match k.as_method().and_then(|m| group_of.get(m)) {
        Some(id) => GroupKey::Super(id.to_string()),
        None => GroupKey::Node(k.clone()),
    };

    let mut edges: QuotientEdges = BTreeMap::new();
    for ((from, to), status) in &d.edges {
        edges
            .entry((lift(from), lift(to)))
            .or_default()
            .insert(*status);
    }
    edges.retain(|(f, t), statuses| {
        !(f == t
            && matches!(f, GroupKey::Super(_))
            && statuses.iter().all(|s| *s == DiffEdgeStatus::Unchanged))
    });

    CondensedGraph {
        root: d.root.clone(),
        visible_nodes: d
            .nodes
            .iter()
            .filter(|(k, s)| collapsible(d, k, **s).is_none())
            .map(|(k, s)| (k.clone(), *s))
            .collect(),
        super_nodes,
        edges,
    }
}

/// Undoes [`collapse_unchanged`] against the diff it came from, checking
/// on the way that every group and quotient edge is accounted for.
pub fn expand(c: &CondensedGraph, source: &SliceDiff) -> Result<SliceDiff, CondenseError> {
    let foreign = |msg: String| Err(CondenseError::ForeignCondensation(msg));
    if c.root != source.root {
        return foreign(format!("root {} vs {}", c.root, source.root));
    }

    let mut nodes: BTreeMap<NodeKey, DiffNodeStatus> = c.visible_nodes.clone();
    let mut group_of: HashMap<NodeKey, GroupKey> = c
        .visible_nodes
        .keys()
        .map(|k| (k.clone(), GroupKey::Node(k.clone())))
        .collect();
    for s in &c.super_nodes {
        if s.members.is_empty() {
            return foreign(format!("super-node {} is empty", s.id));
        }
        for m in &s.members {
            let key = NodeKey::Method(m.clone());
            if source.nodes.get(&key) != Some(&DiffNodeStatus::Unchanged) || *m == source.root {
                return foreign(format!("{m} cannot be collapsed in this diff"));
            }
            if nodes
                .insert(key.clone(), DiffNodeStatus::Unchanged)
                .is_some()
            {
                return foreign(format!("{m} appears in more than one group"));
            }
            group_of.insert(key, GroupKey::Super(s.id.clone()));
        }
    }
    if nodes != source.nodes {
        return foreign("node sets or statuses differ".into());
    }

    let mut witnessed: BTreeSet<(GroupKey, GroupKey, DiffEdgeStatus)> = BTreeSet::new();
    let mut internal: BTreeMap<GroupKey, BTreeSet<DiffEdgeStatus>> = BTreeMap::new();
    for ((from, to), status) in &source.edges {
        let (gf, gt) = (&group_of[from], &group_of[to]);
        if gf == gt && matches!(gf, GroupKey::Super(_)) {
            internal.entry(gf.clone()).or_default().insert(*status);
            continue;
        }
        let lifted = c.edges.get(&(gf.clone(), gt.clone()));
        if !lifted.is_some_and(|set| set.contains(status)) {
            return foreign(format!("edge {from} -> {to} has no quotient edge"));
        }
        witnessed.insert((gf.clone(), gt.clone(), *status));
    }
    for (group, statuses) in internal {
        if statuses.iter().any(|s| *s != DiffEdgeStatus::Unchanged) {
            if c.edges.get(&(group.clone(), group.clone())) != Some(&statuses) {
                return foreign(format!(
                    "changed edges inside {} have no self-loop",
                    group.as_str()
                ));
            }
            witnessed.extend(
                statuses
                    .into_iter()
                    .map(|s| (group.clone(), group.clone(), s)),
            );
        }
    }
    let quotient: BTreeSet<_> = c
        .edges
        .iter()
        .flat_map(|((f, t), set)| set.iter().map(move |s| (f.clone(), t.clone(), *s)))
        .collect();
    if quotient != witnessed {
        return foreign("quotient edges without a source edge".into());
    }

    Ok(SliceDiff {
        root: source.root.clone(),
        nodes,
        edges: source.edges.clone(),
    })
}
