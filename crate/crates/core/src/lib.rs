//! Detection, filtering, dynamic validation and recovery of persistent
//! read-after-write (PRAW) dependencies between end-to-end tests.
//!
//! The pipeline reads a test suite written in a small line DSL together with
//! an application manifest that gives the ground-truth persistent effects of
//! every statement. Candidate dependencies are extracted by string analysis
//! (or by connecting every pair of tests in original order), optionally
//! filtered, then validated and recovered by executing schedules on a
//! deterministic simulator. The validated graph yields parallel schedules.

pub mod error;
pub mod filter;
pub mod graph;
pub mod manifest;
pub mod pipeline;
pub mod schedule;
pub mod sim;
pub mod suite;
pub mod synth;
pub mod validate;

pub use error::{
    FilterError, GraphError, ManifestError, ParseError, PipelineError, ScheduleError, SimError,
    ValidationError,
};
pub use graph::{DependencyGraph, Edge, EdgeOrigin, EdgeStatus};
pub use manifest::{ActionCatalog, AppManifest, Effect, EffectKind};
pub use sim::{Outcome, OutcomeVector, Schedule, SimState, Simulator};
pub use suite::{Statement, TestCase, TestSuite};
