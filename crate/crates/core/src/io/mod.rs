//! JSON problem files in, canonical JSON reports and OBJ frames out.

pub mod json;
pub mod obj;
pub mod problem;
pub mod run;

pub use problem::{LengthSpec, Mode, ProblemFile, SweepRange, SweepSpec};
pub use run::{run, verify_report, Artifact, Outcome, Status, Verification};
