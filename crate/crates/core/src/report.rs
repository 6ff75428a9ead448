//! Machine-readable result reports.
//!
//! Study runs emit JSON summaries with a stable field order so that repeated
//! runs under the same configuration and seed are byte-identical. All report
//! types are concrete `f64` records regardless of the scalar the computation
//! ran with.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::Result;

/// Summary of one contact-estimation run.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct EstimationReport {
    /// RMSE of the estimated contact-force x component, newtons.
    #[serde(rename = "rmse_x_N")]
    pub rmse_x_n: f64,
    /// RMSE of the estimated contact-force y component, newtons.
    #[serde(rename = "rmse_y_N")]
    pub rmse_y_n: f64,
    /// Observer gain diagonal used (empty for the dynamic-balance path).
    pub gain: Vec<f64>,
    /// Smoothing/observer window length in samples.
    pub window: usize,
    /// Detection thresholds per residual component.
    pub thresholds: Vec<f64>,
    /// Detected contact intervals `[start, end)` in seconds.
    pub detected_spans: Vec<(f64, f64)>,
}

/// Summary of one parameter-identification run.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CalibrationReport {
    /// Identified `[EI_x, EI_y, mu_1, mu_2]`.
    pub alpha: [f64; 4],
    /// Tip-position RMSE of the fitted replay per axis, millimetres.
    pub rmse_mm: [f64; 3],
    /// Objective evaluations spent by the search.
    pub iterations: usize,
}

/// Pretty JSON with a trailing newline (stable across runs).
pub fn to_json<T: Serialize>(report: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(report)
        .map_err(|e| crate::error::Error::InvalidParams(format!("report serialization: {e}")))?;
    s.push('\n');
    Ok(s)
}

/// Writes a report next to the other artifacts of a run.
pub fn save_json<T: Serialize>(report: &T, path: &Path) -> Result<()> {
    std::fs::write(path, to_json(report)?)?;
    Ok(())
}

/// Reads a report back (used by tests and downstream tooling).
pub fn load_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path)?;
    serde_json::from_str(&text)
        .map_err(|e| crate::error::Error::InvalidParams(format!("report parse: {e}")))
}
