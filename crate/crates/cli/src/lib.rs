//! Library side of the `tmsv` command-line tool.

pub mod commands;
pub mod report;
pub mod scenario;

pub use report::{Format, Report};
pub use scenario::{ScenarioFile, SynthOverrides};
