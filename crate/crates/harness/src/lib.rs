//! Scenario harness for the continuum-segment dynamics toolkit: TOML-driven
//! simulation studies, estimator comparisons, calibration runs, and replay
//! of recorded trajectories, reduced to JSON reports and CSV plot data.

pub mod config;
pub mod error;
pub mod pipeline;
pub mod pool;
pub mod reports;
pub mod scenarios;
