//! Core library for a three-rung benchmark of multi-agent announcement
//! puzzles: an exhaustive possible-worlds solver, instance generation,
//! narrative prompt rendering, response grading, and an evaluation harness
//! with pluggable responders.

pub mod config;
pub mod epistemic;
pub mod grader;
pub mod harness;
pub mod instance;
pub mod io;
pub mod narrative;
