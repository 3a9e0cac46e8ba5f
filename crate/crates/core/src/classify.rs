//! Method categorization: application, library or framework code.

use std::collections::BTreeMap;

use crate::model::{CallGraph, Category, ClassificationRules, MethodSig};

/// Class prefixes treated as platform code when no user rule matches.
pub const BUILTIN_FRAMEWORK_PREFIXES: [&str; 5] = ["java.", "javax.", "sun.", "com.sun.", "jdk."];

/// User rules first (first match wins), then the built-in platform
/// prefixes, then the rules' default.
pub fn categorize(sig: &MethodSig, rules: &ClassificationRules) -> Category {
    let class = sig.class_part();
    if let Some(rule) = rules.rules.iter().find(|r| class.starts_with(&r.prefix)) {
        return rule.category;
    }
    if BUILTIN_FRAMEWORK_PREFIXES
        .iter()
        .any(|p| class.starts_with(p))
    {
        return Category::Framework;
    }
    rules.default_category
}

#[derive(Debug, Clone)]
pub struct CategorizedCallGraph {
    pub graph: CallGraph,
    pub category_of: BTreeMap<MethodSig, Category>,
}

impl CategorizedCallGraph {
    pub fn category(&self, sig: &MethodSig) -> Option<Category> {
        self.category_of.get(sig).copied()
    }

    pub fn is_application(&self, sig: &MethodSig) -> bool {
        self.category(sig) == Some(Category::Application)
    }
}

pub fn annotate_graph(graph: CallGraph, rules: &ClassificationRules) -> CategorizedCallGraph {
    let category_of = graph
        .methods()
        .iter()
        .map(|m| (m.sig.clone(), categorize(&m.sig, rules)))
        .collect();
    CategorizedCallGraph { graph, category_of }
}
