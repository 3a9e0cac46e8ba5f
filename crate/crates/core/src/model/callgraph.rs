use std::collections::{HashMap, HashSet};
use std::fmt;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::{read_file, schema_error, MethodSig, ModelError};

/// 64-bit change digest of a method body, rendered as 16 lowercase hex digits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Fingerprint(u64);

impl Fingerprint {
    pub fn from_u64(value: u64) -> Self {
        Self(value)
    }

    pub fn as_u64(self) -> u64 {
        self.0
    }
}

impl FromStr for Fingerprint {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let well_formed = s.len() == 16
            && s.bytes()
                .all(|b| b.is_ascii_digit() || (b'a'..=b'f').contains(&b));
        if !well_formed {
            return Err(ModelError::InvalidFingerprint(s.to_string()));
        }
        Ok(Self(u64::from_str_radix(s, 16).expect("checked hex")))
    }
}

impl fmt::Display for Fingerprint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:016x}", self.0)
    }
}

impl Serialize for Fingerprint {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Fingerprint {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        raw.parse().map_err(serde::de::Error::custom)
    }
}

/// Where a method's source lives, relative to the project's source root.
/// Lines are 1-based and inclusive.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct SourceLocation {
    pub path: String,
    pub start_line: usize,
    pub end_line: usize,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodRecord {
    pub sig: MethodSig,
    pub fingerprint: Fingerprint,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub source: Option<SourceLocation>,
}

impl MethodRecord {
    fn check(&self) -> Result<(), ModelError> {
        if let Some(src) = &self.source {
            if src.start_line == 0 || src.start_line > src.end_line {
                return Err(ModelError::InvalidSourceRange {
                    sig: self.sig.clone(),
                    start_line: src.start_line,
                    end_line: src.end_line,
                });
            }
        }
        Ok(())
    }
}

/// Static call graph of one application version.
///
/// Methods keep their file order; edges keep their file order and are
/// guaranteed unique with both endpoints declared. Self-loops are legal.
#[derive(Debug, Clone)]
pub struct CallGraph {
    methods: Vec<MethodRecord>,
    edges: Vec<(MethodSig, MethodSig)>,
    index: HashMap<MethodSig, usize>,
    // callee indices per method, sorted by callee signature
    callees: Vec<Vec<usize>>,
}

impl CallGraph {
    pub fn new(
        methods: Vec<MethodRecord>,
        edges: Vec<(MethodSig, MethodSig)>,
    ) -> Result<Self, ModelError> {
        let mut index = HashMap::with_capacity(methods.len());
        for (i, record) in methods.iter().enumerate() {
            record.check()?;
            if index.insert(record.sig.clone(), i).is_some() {
                return Err(ModelError::DuplicateMethod(record.sig.clone()));
            }
        }

        let mut seen = HashSet::with_capacity(edges.len());
        let mut callees = vec![Vec::new(); methods.len()];
        for (caller, callee) in &edges {
            let lookup = |sig: &MethodSig| {
                index
                    .get(sig)
                    .copied()
                    .ok_or_else(|| ModelError::UnknownEndpoint {
                        caller: caller.clone(),
                        callee: callee.clone(),
                        missing: sig.clone(),
                    })
            };
            let from = lookup(caller)?;
            let to = lookup(callee)?;
            if !seen.insert((from, to)) {
                return Err(ModelError::DuplicateEdge {
                    caller: caller.clone(),
                    callee: callee.clone(),
                });
            }
            callees[from].push(to);
        }
        for list in &mut callees {
            list.sort_by(|&a, &b| methods[a].sig.cmp(&methods[b].sig));
        }

        Ok(Self {
            methods,
            edges,
            index,
            callees,
        })
    }

    pub fn from_json_str(text: &str) -> Result<Self, ModelError> {
        let raw: RawCallGraph =
            serde_json::from_str(text).map_err(|e| schema_error(Path::new("<memory>"), e))?;
        Self::new(raw.methods, raw.edges)
    }

    pub fn to_json_string(&self) -> String {
        let raw = RawCallGraphRef {
            methods: &self.methods,
            edges: &self.edges,
        };
        serde_json::to_string_pretty(&raw).expect("call graph serializes")
    }

    pub fn methods(&self) -> &[MethodRecord] {
        &self.methods
    }

    pub fn edges(&self) -> &[(MethodSig, MethodSig)] {
        &self.edges
    }

    pub fn len(&self) -> usize {
        self.methods.len()
    }

    pub fn is_empty(&self) -> bool {
        self.methods.is_empty()
    }

    pub fn contains(&self, sig: &MethodSig) -> bool {
        self.index.contains_key(sig)
    }

    pub fn record(&self, sig: &MethodSig) -> Option<&MethodRecord> {
        self.index.get(sig).map(|&i| &self.methods[i])
    }

    /// Direct callees of `sig` in lexicographic signature order.
    pub fn callees(&self, sig: &MethodSig) -> impl Iterator<Item = &MethodRecord> + '_ {
        let list = self
            .index
            .get(sig)
            .map(|&i| self.callees[i].as_slice())
            .unwrap_or(&[]);
        list.iter().map(move |&j| &self.methods[j])
    }

    pub fn fingerprints(&self) -> HashMap<MethodSig, Fingerprint> {
        self.methods
            .iter()
            .map(|m| (m.sig.clone(), m.fingerprint))
            .collect()
    }
}

impl PartialEq for CallGraph {
    fn eq(&self, other: &Self) -> bool {
        self.methods == other.methods && self.edges == other.edges
    }
}

impl Eq for CallGraph {}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCallGraph {
    methods: Vec<MethodRecord>,
    #[serde(default)]
    edges: Vec<(MethodSig, MethodSig)>,
}

#[derive(Serialize)]
struct RawCallGraphRef<'a> {
    methods: &'a [MethodRecord],
    edges: &'a [(MethodSig, MethodSig)],
}

pub fn load_call_graph(path: &Path) -> Result<CallGraph, ModelError> {
    let text = read_file(path)?;
    let raw: RawCallGraph = serde_json::from_str(&text).map_err(|e| schema_error(path, e))?;
    CallGraph::new(raw.methods, raw.edges)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::canonical_sig;

    fn sig(s: &str) -> MethodSig {
        canonical_sig(s).unwrap()
    }

    fn rec(s: &str) -> MethodRecord {
        MethodRecord {
            sig: sig(s),
            fingerprint: Fingerprint::from_u64(1),
            source: None,
        }
    }

    #[test]
    fn fingerprint_format() {
        let fp: Fingerprint = "cbf29ce484222325".parse().unwrap();
        assert_eq!(fp.as_u64(), 0xcbf29ce484222325);
        assert_eq!(fp.to_string(), "cbf29ce484222325");
        assert_eq!(Fingerprint::from_u64(10).to_string(), "000000000000000a");
        for bad in [
            "CBF29CE484222325",
            "cbf29ce48422232",
            "cbf29ce4842223250",
            "xbf29ce484222325",
        ] {
            assert!(bad.parse::<Fingerprint>().is_err(), "{bad}");
        }
    }

    #[test]
    fn happy_path_sizes() {
        let text = r#"{
            "methods": [
                {"sig": "a.A#f():void", "fingerprint": "0000000000000001"},
                {"sig": "a.A#g():void", "fingerprint": "0000000000000002",
                 "source": {"path": "a/A.java", "start_line": 3, "end_line": 5}},
                {"sig": "a.A#h():void", "fingerprint": "0000000000000003"}
            ],
            "edges": [["a.A#f():void", "a.A#g():void"], ["a.A#g():void", "a.A#h():void"]]
        }"#;
        let g = CallGraph::from_json_str(text).unwrap();
        assert_eq!((g.len(), g.edges().len()), (3, 2));
        assert_eq!(
            g.record(&sig("a.A#g():void"))
                .unwrap()
                .source
                .as_ref()
                .unwrap()
                .end_line,
            5
        );
    }

    #[test]
    fn unknown_endpoint_rejected() {
        let err = CallGraph::new(
            vec![rec("a.A#f():void")],
            vec![(sig("a.A#f():void"), sig("a.A#zz():void"))],
        )
        .unwrap_err();
        assert!(
            matches!(err, ModelError::UnknownEndpoint { missing, .. } if missing == sig("a.A#zz():void"))
        );
    }

    #[test]
    fn duplicate_edge_rejected() {
        let e = (sig("a.A#f():void"), sig("a.A#g():void"));
        let err = CallGraph::new(
            vec![rec("a.A#f():void"), rec("a.A#g():void")],
            vec![e.clone(), e],
        )
        .unwrap_err();
        assert!(matches!(err, ModelError::DuplicateEdge { .. }));
    }

    #[test]
    fn duplicate_method_rejected() {
        let err =
            CallGraph::new(vec![rec("a.A#f():void"), rec("a.A#f( ):void")], vec![]).unwrap_err();
        assert!(matches!(err, ModelError::DuplicateMethod(_)));
    }

    #[test]
    fn self_loop_accepted() {
        let a = sig("a.A#f():void");
        let g = CallGraph::new(vec![rec("a.A#f():void")], vec![(a.clone(), a.clone())]).unwrap();
        assert_eq!(g.callees(&a).map(|m| &m.sig).collect::<Vec<_>>(), vec![&a]);
    }

    #[test]
    fn bad_source_range_rejected() {
        let mut r = rec("a.A#f():void");
        r.source = Some(SourceLocation {
            path: "A.java".into(),
            start_line: 9,
            end_line: 3,
        });
        assert!(matches!(
            CallGraph::new(vec![r], vec![]),
            Err(ModelError::InvalidSourceRange { .. })
        ));
    }

    #[test]
    fn callees_sorted_lexicographically() {
        let methods = vec![
            rec("a.A#f():void"),
            rec("a.A#z():void"),
            rec("a.A#b():void"),
        ];
        let edges = vec![
            (sig("a.A#f():void"), sig("a.A#z():void")),
            (sig("a.A#f():void"), sig("a.A#b():void")),
        ];
        let g = CallGraph::new(methods, edges).unwrap();
        let order: Vec<_> = g
            .callees(&sig("a.A#f():void"))
            .map(|m| m.sig.as_str())
            .collect();
        assert_eq!(order, vec!["a.A#b():void", "a.A#z():void"]);
    }
}
