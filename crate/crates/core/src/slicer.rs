//! Handler slices: the application code an event handler may run.
//!
//! Traversal starts at the handler and only ever steps onto application
//! methods. Calls into library or framework code are recorded as an edge to
//! that category's abstraction node and go no further, so callbacks from
//! library code back into the application are not followed.

use std::collections::{BTreeSet, HashSet, VecDeque};

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::classify::CategorizedCallGraph;
use crate::model::{Category, MethodSig};

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HandlerSlice {
    pub root: MethodSig,
    pub app_nodes: BTreeSet<MethodSig>,
    pub app_edges: BTreeSet<(MethodSig, MethodSig)>,
    pub abstraction_edges: BTreeSet<(MethodSig, Category)>,
}

impl HandlerSlice {
    /// A slice holding only its root.
    pub fn singleton(root: MethodSig) -> Self {
        Self {
            app_nodes: BTreeSet::from([root.clone()]),
            root,
            app_edges: BTreeSet::new(),
            abstraction_edges: BTreeSet::new(),
        }
    }

    /// Categories referenced by abstraction edges.
    pub fn abstraction_categories(&self) -> BTreeSet<Category> {
        self.abstraction_edges.iter().map(|(_, c)| *c).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum SliceError {
    #[error("handler {0} is not in the call graph")]
    MissingHandler(MethodSig),
    #[error("handler {sig} is {category:?} code, not application code")]
    HandlerNotApplication { sig: MethodSig, category: Category },
}

/// Breadth-first from `handler`, callees visited in signature order.
pub fn slice(cg: &CategorizedCallGraph, handler: &MethodSig) -> Result<HandlerSlice, SliceError> {
    let category = cg
        .category(handler)
        .ok_or_else(|| SliceError::MissingHandler(handler.clone()))?;
    if category != Category::Application {
        return Err(SliceError::HandlerNotApplication {
            sig: handler.clone(),
            category,
        });
    }

    let mut out = HandlerSlice::singleton(handler.clone());
    let mut visited: HashSet<&MethodSig> = HashSet::from([handler]);
    let mut queue = VecDeque::from([handler]);

    while let Some(caller) = queue.pop_front() {
        for callee in cg.graph.callees(caller) {
            let callee_sig = &callee.sig;
            match cg.category(callee_sig).unwrap_or(Category::Application) {
                Category::Application => {
                    out.app_edges.insert((caller.clone(), callee_sig.clone()));
                    if visited.insert(callee_sig) {
                        out.app_nodes.insert(callee_sig.clone());
                        queue.push_back(callee_sig);
                    }
                }
                other => {
                    out.abstraction_edges.insert((caller.clone(), other));
                }
            }
        }
    }
    Ok(out)
}
