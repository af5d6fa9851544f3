//! Scenario files, the runner that maps them onto the core pipelines, and
//! the reference fixtures checked by `moltrap verify-paper`.

pub mod fixture;
pub mod run;
pub mod scenario;
pub mod units;
