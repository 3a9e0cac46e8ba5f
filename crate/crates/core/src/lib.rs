//! Core library for tracking GUI-level behavioural change between two
//! versions of a desktop application.

pub mod classify;
pub mod condense;
pub mod dot;
pub mod graph_diff;
pub mod gui_match;
pub mod model;
pub mod pipeline;
pub mod report;
pub mod slicer;
pub mod textdiff;
