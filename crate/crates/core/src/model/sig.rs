//! Canonical method signatures.
//!
//! Every join in the tool (GUI handler to call-graph node, call-graph node to
//! source location, old version to new version) goes through [`MethodSig`],
//! so the canonical text form is fixed:
//!
//! ```text
//! package.Class#method(paramType1,paramType2):returnType
//! ```

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::ModelError;

/// A validated, whitespace-free method signature.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct MethodSig(String);

impl MethodSig {
    /// Returns the canonical text.
    pub fn as_str(&self) -> &str {
        &self.0
    }

    /// The `package.Class` part in front of `#`.
    pub fn class_part(&self) -> &str {
        let hash = self.0.find('#').expect("validated signature has '#'");
        &self.0[..hash]
    }

    pub fn method_name(&self) -> &str {
        let hash = self.0.find('#').expect("validated signature has '#'");
        let open = self.0.find('(').expect("validated signature has '('");
        &self.0[hash + 1..open]
    }

    pub fn params(&self) -> Vec<&str> {
        let open = self.0.find('(').expect("validated signature has '('");
        let close = self.0.find(')').expect("validated signature has ')'");
        let inner = &self.0[open + 1..close];
        if inner.is_empty() {
            Vec::new()
        } else {
            inner.split(',').collect()
        }
    }

    pub fn return_type(&self) -> &str {
        let close = self.0.find(')').expect("validated signature has ')'");
        &self.0[close + 2..]
    }
}

/// Normalizes `raw` into a [`MethodSig`].
///
/// All whitespace is removed (signatures never contain meaningful spaces),
/// then the delimiter structure is checked.
pub fn canonical_sig(raw: &str) -> Result<MethodSig, ModelError> {
    let text: String = raw.chars().filter(|c| !c.is_whitespace()).collect();
    let fail = |reason: &'static str| ModelError::MalformedSignature {
        raw: raw.to_string(),
        reason,
    };

    if text.is_empty() {
        return Err(fail("empty signature"));
    }
    if text.matches('#').count() != 1 {
        return Err(fail("expected exactly one '#'"));
    }
    if text.matches('(').count() != 1 || text.matches(')').count() != 1 {
        return Err(fail("unbalanced parentheses"));
    }
    if text.matches(':').count() != 1 {
        return Err(fail("expected exactly one ':' before the return type"));
    }

    let hash = text.find('#').unwrap();
    let open = text.find('(').unwrap();
    let close = text.find(')').unwrap();
    let colon = text.find(':').unwrap();

    if !(hash < open && open < close) {
        return Err(fail("unbalanced parentheses"));
    }
    if colon != close + 1 {
        return Err(fail("missing return type"));
    }
    if hash == 0 {
        return Err(fail("empty class part"));
    }
    if open == hash + 1 {
        return Err(fail("empty method name"));
    }
    if colon + 1 == text.len() {
        return Err(fail("missing return type"));
    }
    let params = &text[open + 1..close];
    if !params.is_empty() && params.split(',').any(str::is_empty) {
        return Err(fail("empty parameter type"));
    }

    Ok(MethodSig(text))
}

impl FromStr for MethodSig {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        canonical_sig(s)
    }
}

impl fmt::Display for MethodSig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl AsRef<str> for MethodSig {
    fn as_ref(&self) -> &str {
        &self.0
    }
}

impl Serialize for MethodSig {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.0)
    }
}

impl<'de> Deserialize<'de> for MethodSig {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = String::deserialize(deserializer)?;
        canonical_sig(&raw).map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn already_canonical() {
        let sig = canonical_sig("com.app.Main#run():void").unwrap();
        assert_eq!(sig.as_str(), "com.app.Main#run():void");
        assert_eq!(sig.class_part(), "com.app.Main");
        assert_eq!(sig.method_name(), "run");
        assert!(sig.params().is_empty());
        assert_eq!(sig.return_type(), "void");
    }

    #[test]
    fn strips_whitespace() {
        let sig = canonical_sig("com.app.Main#run( ):void").unwrap();
        assert_eq!(sig.as_str(), "com.app.Main#run():void");
        let sig = canonical_sig(" a.B # f ( int , java.lang.String ) : int ").unwrap();
        assert_eq!(sig.as_str(), "a.B#f(int,java.lang.String):int");
        assert_eq!(sig.params(), vec!["int", "java.lang.String"]);
    }

    #[test]
    fn rejects_missing_delimiters() {
        for raw in [
            "com.app.Main.run",
            "",
            "   ",
            "a.B#f(:void",
            "a.B#f)(:void",
            "a.B#f()",
            "a.B#f():",
            "a.B#f()void",
            "#f():void",
            "a.B#():void",
            "a.B#f#g():void",
            "a.B#f(int,):void",
            "a.B#f(int)::void",
        ] {
            assert!(
                matches!(
                    canonical_sig(raw),
                    Err(ModelError::MalformedSignature { .. })
                ),
                "{raw:?} should be rejected"
            );
        }
    }

    #[test]
    fn serde_goes_through_canonicalization() {
        let sig: MethodSig = serde_json::from_str("\"a.B#f( int ):void\"").unwrap();
        assert_eq!(sig.as_str(), "a.B#f(int):void");
        assert!(serde_json::from_str::<MethodSig>("\"a.B.f\"").is_err());
    }

    proptest! {
        #[test]
        fn canonicalization_is_idempotent(raw in "[a-c. #(),:\t]{0,16}") {
            if let Ok(once) = canonical_sig(&raw) {
                let twice = canonical_sig(once.as_str()).unwrap();
                prop_assert_eq!(once, twice);
            }
        }

        #[test]
        fn valid_shapes_survive_padding(
            class in "[a-z]{1,4}(\\.[A-Z][a-z]{0,3}){1,2}",
            method in "[a-z]{1,5}",
            params in proptest::collection::vec("[a-z]{1,4}", 0..3),
            ret in "[a-z]{1,4}",
        ) {
            let canonical = format!("{class}#{method}({}):{ret}", params.join(","));
            let padded = format!(" {class} #{method} ( {} ) : {ret} ", params.join(" , "));
            let sig = canonical_sig(&padded).unwrap();
            prop_assert_eq!(sig.as_str(), canonical.as_str());
        }
    }
}
