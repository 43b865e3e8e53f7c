//! Scenario files, the batch runner and its reports.

pub mod report;
pub mod run;
pub mod scenario;
