use std::path::Path;

use serde::{Deserialize, Serialize};

use super::{read_file, schema_error, ModelError};

/// Coarse provenance of a method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Category {
    Application,
    Library,
    Framework,
}

impl Category {
    /// Display label used for abstraction nodes.
    pub fn label(self) -> &'static str {
        match self {
            Category::Application => "Application",
            Category::Library => "Library",
            Category::Framework => "Framework",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PrefixRule {
    pub prefix: String,
    pub category: Category,
}

pub const DEFAULT_MATCH_PROPERTIES: [&str; 3] = ["text", "name", "actionCommand"];

/// Ordered prefix rules; the first matching prefix decides.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClassificationRules {
    #[serde(default)]
    pub rules: Vec<PrefixRule>,
    #[serde(rename = "default", default = "default_category")]
    pub default_category: Category,
    /// Widget properties that take part in cross-version matching.
    #[serde(default = "default_match_properties")]
    pub match_properties: Vec<String>,
}

fn default_category() -> Category {
    Category::Application
}

fn default_match_properties() -> Vec<String> {
    DEFAULT_MATCH_PROPERTIES
        .iter()
        .map(|s| s.to_string())
        .collect()
}

impl Default for ClassificationRules {
    fn default() -> Self {
        Self {
            rules: Vec::new(),
            default_category: default_category(),
            match_properties: default_match_properties(),
        }
    }
}

impl ClassificationRules {
    pub fn validate(&self) -> Result<(), ModelError> {
        if let Some(i) = self.rules.iter().position(|r| r.prefix.is_empty()) {
            return Err(ModelError::EmptyRulePrefix(i));
        }
        Ok(())
    }
}

pub fn load_rules(path: &Path) -> Result<ClassificationRules, ModelError> {
    let text = read_file(path)?;
    let rules: ClassificationRules =
        serde_json::from_str(&text).map_err(|e| schema_error(path, e))?;
    rules.validate()?;
    Ok(rules)
}
