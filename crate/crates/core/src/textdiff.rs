//! Method source extraction, line diffs and the reference fingerprint.

use std::hash::Hasher;
use std::path::{Path, PathBuf};

use fnv::FnvHasher;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Fingerprint, MethodRecord, MethodSig, SourceLocation};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DiffOp {
    Equal,
    Insert,
    Delete,
}

/// A maximal run of lines sharing one operation.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct DiffHunk {
    pub op: DiffOp,
    pub lines: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct MethodSourceView {
    pub sig: MethodSig,
    pub lines: Vec<String>,
    pub origin: SourceLocation,
}

#[derive(Debug, Error)]
pub enum SourceError {
    #[error("method {0} has no source location")]
    NoSourceLocation(MethodSig),
    #[error("source file {path} not readable: {source}")]
    FileNotFound {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("{path}: lines {start_line}..={end_line} exceed file length {file_lines}")]
    RangeOutOfBounds {
        path: PathBuf,
        start_line: usize,
        end_line: usize,
        file_lines: usize,
    },
}

/// Splits text into lines, treating `\r\n` and lone `\r` as line breaks.
pub fn split_lines(text: &str) -> Vec<String> {
    text.replace("\r\n", "\n")
        .replace('\r', "\n")
        .lines()
        .map(str::to_string)
        .collect()
}

pub fn extract_method_source(
    source_root: &Path,
    rec: &MethodRecord,
) -> Result<MethodSourceView, SourceError> {
    let origin = rec
        .source
        .clone()
        .ok_or_else(|| SourceError::NoSourceLocation(rec.sig.clone()))?;
    let path = source_root.join(&origin.path);
    let text = std::fs::read_to_string(&path).map_err(|source| SourceError::FileNotFound {
        path: path.clone(),
        source,
    })?;
    let all = split_lines(&text);
    if origin.start_line == 0 || origin.end_line < origin.start_line || origin.end_line > all.len()
    {
        return Err(SourceError::RangeOutOfBounds {
            path,
            start_line: origin.start_line,
            end_line: origin.end_line,
            file_lines: all.len(),
        });
    }
    Ok(MethodSourceView {
        sig: rec.sig.clone(),
        lines: all[origin.start_line - 1..origin.end_line].to_vec(),
        origin,
    })
}

/// Minimal line diff (Myers' greedy O(ND) shortest edit script).
///
/// When several shortest scripts exist, deletions are preferred before
/// insertions at the same position.
pub fn line_diff<S: AsRef<str>>(a: &[S], b: &[S]) -> Vec<DiffHunk> {
    let ops = shortest_edit_script(a, b);
    let mut hunks: Vec<DiffHunk> = Vec::new();
    let (mut i, mut j) = (0, 0);
    for op in ops {
        let line = match op {
            DiffOp::Equal => {
                i += 1;
                j += 1;
                &b[j - 1]
            }
            DiffOp::Delete => {
                i += 1;
                &a[i - 1]
            }
            DiffOp::Insert => {
                j += 1;
                &b[j - 1]
            }
        };
        match hunks.last_mut() {
            Some(h) if h.op == op => h.lines.push(line.as_ref().to_string()),
            _ => hunks.push(DiffHunk {
                op,
                lines: vec![line.as_ref().to_string()],
            }),
        }
    }
    hunks
}

fn shortest_edit_script<S: AsRef<str>>(a: &[S], b: &[S]) -> Vec<DiffOp> {
    let n = a.len() as isize;
    let m = b.len() as isize;
    let max = (n + m) as usize;
    if max == 0 {
        return Vec::new();
    }
    let offset = max as isize;
    let idx = |k: isize| (k + offset) as usize;
    let eq = |x: isize, y: isize| a[x as usize].as_ref() == b[y as usize].as_ref();

    // v[k] = furthest x on diagonal k; one snapshot per edit distance d
    let mut v = vec![0isize; 2 * max + 1];
    let mut trace: Vec<Vec<isize>> = Vec::new();
    'search: for d in 0..=max as isize {
        trace.push(v.clone());
        let mut k = -d;
        while k <= d {
            let mut x = if k == -d || (k != d && v[idx(k - 1)] < v[idx(k + 1)]) {
                v[idx(k + 1)]
            } else {
                v[idx(k - 1)] + 1
            };
            let mut y = x - k;
            while x < n && y < m && eq(x, y) {
                x += 1;
                y += 1;
            }
            v[idx(k)] = x;
            if x >= n && y >= m {
                break 'search;
            }
            k += 2;
        }
    }

    // walk the snapshots backwards from (n, m)
    let mut ops = Vec::with_capacity(max);
    let (mut x, mut y) = (n, m);
    for (d, v) in trace.iter().enumerate().rev() {
        let d = d as isize;
        let k = x - y;
        let prev_k = if k == -d || (k != d && v[idx(k - 1)] < v[idx(k + 1)]) {
            k + 1
        } else {
            k - 1
        };
        let prev_x = if d == 0 { 0 } else { v[idx(prev_k)] };
        let prev_y = if d == 0 { 0 } else { prev_x - prev_k };
        while x > prev_x && y > prev_y {
            ops.push(DiffOp::Equal);
            x -= 1;
            y -= 1;
        }
        if d > 0 {
            ops.push(if x == prev_x {
                DiffOp::Insert
            } else {
                DiffOp::Delete
            });
        }
        x = prev_x;
        y = prev_y;
    }
    ops.reverse();
    ops
}

/// Replays `hunks` against `a`. Returns `None` when the script does not fit.
pub fn apply_hunks<S: AsRef<str>>(a: &[S], hunks: &[DiffHunk]) -> Option<Vec<String>> {
    let mut out = Vec::new();
    let mut i = 0;
    for h in hunks {
        match h.op {
            DiffOp::Equal | DiffOp::Delete => {
                for line in &h.lines {
                    if a.get(i).map(AsRef::as_ref) != Some(line.as_str()) {
                        return None;
                    }
                    i += 1;
                }
                if h.op == DiffOp::Equal {
                    out.extend(h.lines.iter().cloned());
                }
            }
            DiffOp::Insert => out.extend(h.lines.iter().cloned()),
        }
    }
    (i == a.len()).then_some(out)
}

/// Number of inserted plus deleted lines.
pub fn edit_length(hunks: &[DiffHunk]) -> usize {
    hunks
        .iter()
        .filter(|h| h.op != DiffOp::Equal)
        .map(|h| h.lines.len())
        .sum()
}

/// FNV-1a/64 over the lines with trailing whitespace removed, joined by `\n`.
pub fn method_fingerprint<S: AsRef<str>>(lines: &[S]) -> Fingerprint {
    let mut hasher = FnvHasher::default();
    for (i, line) in lines.iter().enumerate() {
        if i > 0 {
            hasher.write(b"\n");
        }
        hasher.write(line.as_ref().trim_end().as_bytes());
    }
    Fingerprint::from_u64(hasher.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::canonical_sig;
    use proptest::prelude::*;

    fn lines(v: &[&str]) -> Vec<String> {
        v.iter().map(|s| s.to_string()).collect()
    }

    fn hunk(op: DiffOp, v: &[&str]) -> DiffHunk {
        DiffHunk {
            op,
            lines: lines(v),
        }
    }

    fn lcs_oracle(a: &[String], b: &[String]) -> usize {
        let mut dp = vec![vec![0usize; b.len() + 1]; a.len() + 1];
        for i in 1..=a.len() {
            for j in 1..=b.len() {
                dp[i][j] = if a[i - 1] == b[j - 1] {
                    dp[i - 1][j - 1] + 1
                } else {
                    dp[i - 1][j].max(dp[i][j - 1])
                };
            }
        }
        dp[a.len()][b.len()]
    }

    // plain FNV-1a/64 from its definition, for checking the fnv crate usage
    fn fnv1a_oracle(bytes: &[u8]) -> u64 {
        let mut h: u64 = 0xcbf29ce484222325;
        for &b in bytes {
            h ^= b as u64;
            h = h.wrapping_mul(0x100000001b3);
        }
        h
    }

    #[test]
    fn identity_is_one_equal_hunk() {
        let x = lines(&["a", "b"]);
        assert_eq!(line_diff(&x, &x), vec![hunk(DiffOp::Equal, &["a", "b"])]);
        assert!(line_diff::<String>(&[], &[]).is_empty());
    }

    #[test]
    fn single_deletion() {
        let a = lines(&["a", "b", "c"]);
        let b = lines(&["a", "c"]);
        let d = line_diff(&a, &b);
        assert_eq!(
            d,
            vec![
                hunk(DiffOp::Equal, &["a"]),
                hunk(DiffOp::Delete, &["b"]),
                hunk(DiffOp::Equal, &["c"])
            ]
        );
        assert_eq!(edit_length(&d), a.len() + b.len() - 2 * lcs_oracle(&a, &b));
        assert_eq!(edit_length(&d), 1);
    }

    #[test]
    fn insert_into_empty() {
        assert_eq!(
            line_diff(&[] as &[&str], &["x"]),
            vec![hunk(DiffOp::Insert, &["x"])]
        );
        assert_eq!(
            line_diff(&["x"], &[] as &[&str]),
            vec![hunk(DiffOp::Delete, &["x"])]
        );
    }

    #[test]
    fn replacement_is_delete_then_insert() {
        let d = line_diff(&["a", "old", "z"], &["a", "new", "z"]);
        assert_eq!(
            d,
            vec![
                hunk(DiffOp::Equal, &["a"]),
                hunk(DiffOp::Delete, &["old"]),
                hunk(DiffOp::Insert, &["new"]),
                hunk(DiffOp::Equal, &["z"]),
            ]
        );
    }

    #[test]
    fn fingerprint_values() {
        assert_eq!(
            method_fingerprint::<&str>(&[]).to_string(),
            "cbf29ce484222325"
        );
        assert_eq!(method_fingerprint(&["a"]), method_fingerprint(&["a  "]));
        assert_eq!(method_fingerprint(&["a"]).as_u64(), fnv1a_oracle(b"a"));
        assert_eq!(method_fingerprint(&["a"]).to_string(), "af63dc4c8601ec8c");
        assert_ne!(method_fingerprint(&["a"]), method_fingerprint(&["b"]));
        assert_eq!(method_fingerprint(&["b"]).as_u64(), fnv1a_oracle(b"b"));
        assert_eq!(
            method_fingerprint(&["int x;\t", "return x;"]).as_u64(),
            fnv1a_oracle(b"int x;\nreturn x;")
        );
        // line structure matters
        assert_ne!(method_fingerprint(&["ab"]), method_fingerprint(&["a", "b"]));
    }

    #[test]
    fn extract_ranges_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        let body: String = (1..=20).map(|i| format!("line {i}\r\n")).collect();
        std::fs::create_dir_all(dir.path().join("pkg")).unwrap();
        std::fs::write(dir.path().join("pkg/A.java"), body).unwrap();
        let mut rec = MethodRecord {
            sig: canonical_sig("pkg.A#f():void").unwrap(),
            fingerprint: Fingerprint::from_u64(0),
            source: Some(SourceLocation {
                path: "pkg/A.java".into(),
                start_line: 10,
                end_line: 12,
            }),
        };
        let view = extract_method_source(dir.path(), &rec).unwrap();
        assert_eq!(view.lines, lines(&["line 10", "line 11", "line 12"]));
        assert!(view.lines.iter().all(|l| !l.contains('\r')));

        rec.source.as_mut().unwrap().end_line = 50;
        assert!(matches!(
            extract_method_source(dir.path(), &rec),
            Err(SourceError::RangeOutOfBounds { file_lines: 20, .. })
        ));
        rec.source.as_mut().unwrap().path = "pkg/Missing.java".into();
        assert!(matches!(
            extract_method_source(dir.path(), &rec),
            Err(SourceError::FileNotFound { .. })
        ));
        rec.source = None;
        assert!(matches!(
            extract_method_source(dir.path(), &rec),
            Err(SourceError::NoSourceLocation(_))
        ));
    }

    fn small_lines(max: usize) -> impl Strategy<Value = Vec<String>> {
        proptest::collection::vec("[abc]", 0..max)
    }

    proptest! {
        #[test]
        fn patch_reconstructs_target(a in small_lines(40), b in small_lines(40)) {
            let d = line_diff(&a, &b);
            prop_assert_eq!(apply_hunks(&a, &d), Some(b.clone()));
        }

        #[test]
        fn edit_length_is_minimal(a in small_lines(25), b in small_lines(25)) {
            let d = line_diff(&a, &b);
            prop_assert_eq!(edit_length(&d), a.len() + b.len() - 2 * lcs_oracle(&a, &b));
        }

        #[test]
        fn hunks_are_maximal_runs(a in small_lines(30), b in small_lines(30)) {
            let d = line_diff(&a, &b);
            prop_assert!(d.iter().all(|h| !h.lines.is_empty()));
            prop_assert!(d.windows(2).all(|w| w[0].op != w[1].op));
        }

        #[test]
        fn fingerprint_ignores_trailing_whitespace(v in proptest::collection::vec("[a-z ]{0,6}", 0..6), pad in "[ \t]{0,3}") {
            let padded: Vec<String> = v.iter().map(|l| format!("{l}{pad}")).collect();
            prop_assert_eq!(method_fingerprint(&v), method_fingerprint(&padded));
        }
    }
}
