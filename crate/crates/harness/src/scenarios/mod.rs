//! Scenario runners: one per study family, each reducing to report and plot
//! artifacts under an output directory.

pub mod cal;
pub mod multiseg;
pub mod noise;
pub mod oracle;
pub mod replay;
pub mod sweep;

use std::path::Path;

use nalgebra::{SVector, Vector2, Vector6};

use continuum_dynamics::kinematics::circularness;
use continuum_dynamics::observer::{detect, detected_spans, detection_thresholds, residual_sensitivity};
use continuum_dynamics::report::EstimationReport;
use continuum_dynamics::{SegmentModel, SegmentState};

use crate::config::EstimatorSettings;
use crate::error::Result;
use crate::pipeline::rmse_component;

/// Grid resolution for the curvature-constancy series.
const BETA_GRID: usize = 50;

/// Force norm (N) below which an estimated direction is not meaningful.
pub const MIN_DIRECTION_NORM: f64 = 0.5;

/// Detection thresholds for a run: worst-case residual response to state
/// error bounded by `settings.state_error_bound`, evaluated at straight rest
/// over one full observer horizon.
pub fn thresholds_for(
    model: &SegmentModel,
    settings: &EstimatorSettings,
    dt: f64,
) -> Result<Vector6<f64>> {
    let state = SegmentState::zero();
    let drdx = residual_sensitivity(
        model,
        &state,
        &Vector2::zeros(),
        &settings.gain,
        dt,
        settings.reset_horizon,
    )?;
    let bound = SVector::<f64, 12>::repeat(settings.state_error_bound);
    Ok(detection_thresholds(&drdx, &bound))
}

/// Per-sample curvature-constancy measure along a coefficient series: the
/// spread of each bending-axis curvature over the arclength grid (zero for a
/// constant-curvature shape).
pub fn beta_series(length: f64, coeffs: &[Vector6<f64>]) -> Result<Vec<(f64, f64)>> {
    coeffs
        .iter()
        .map(|c| circularness(c, length, BETA_GRID).map_err(Into::into))
        .collect()
}

/// Builds the standard estimation summary for one residual/wrench series.
pub fn estimation_report(
    residuals: &[Vector6<f64>],
    wrench: &[Vector6<f64>],
    truth: &[Vector6<f64>],
    settings: &EstimatorSettings,
    thresholds: &Vector6<f64>,
    dt: f64,
) -> EstimationReport {
    let flags: Vec<bool> = residuals
        .iter()
        .map(|r| detect(r, thresholds).into_iter().any(|b| b))
        .collect();
    EstimationReport {
        rmse_x_n: rmse_component(wrench, truth, 0),
        rmse_y_n: rmse_component(wrench, truth, 1),
        gain: settings.gain.iter().copied().collect(),
        window: settings.window.unwrap_or(0),
        thresholds: thresholds.iter().copied().collect(),
        detected_spans: detected_spans(&flags, dt),
    }
}

/// Creates the output directory (and parents) if needed.
pub fn ensure_out_dir(out: &Path) -> Result<()> {
    std::fs::create_dir_all(out)?;
    Ok(())
}
