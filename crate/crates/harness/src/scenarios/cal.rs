//! The `calibrate` verb: synthesize a closed-loop chirp record with the
//! configured segment, then identify stiffness and friction from it.

use std::io::Write;
use std::path::Path;

use continuum_dynamics::calibrate::{
    calibrate, synthesize_chirp_response, CalibrationProblem, DEFAULT_TRACKING_KD,
    DEFAULT_TRACKING_KP,
};
use continuum_dynamics::report::{save_json, CalibrationReport};
use continuum_dynamics::sim::{Chirp, DopriOptions};
use continuum_dynamics::SegmentModel;

use crate::config::Scenario;
use crate::error::Result;

use super::ensure_out_dir;

/// Runs the identification and writes `recorded.csv`, `history.csv`, and
/// `report.json` under `out`.
pub fn run(scenario: &Scenario, out: &Path) -> Result<()> {
    ensure_out_dir(out)?;
    let settings = scenario.calibration()?;
    let model = SegmentModel::with_reference_routing(scenario.segment.clone())?;
    let chirp = Chirp {
        amplitude: settings.amplitude,
        f_start: settings.f_start,
        f_end: settings.f_end,
        duration: settings.duration,
        phase: std::f64::consts::FRAC_PI_2,
    };

    let recorded = synthesize_chirp_response(
        &model,
        &chirp,
        DEFAULT_TRACKING_KP,
        DEFAULT_TRACKING_KD,
        settings.sample_rate,
        &DopriOptions::default(),
    )?;
    recorded.save_csv(out.join("recorded.csv"))?;

    let mut problem = CalibrationProblem::new(&scenario.segment, &recorded);
    problem.max_evaluations = settings.max_evaluations;
    let result = calibrate(&problem)?;

    let mut history = std::io::BufWriter::new(std::fs::File::create(out.join("history.csv"))?);
    writeln!(history, "evaluation,best_objective")?;
    for (k, best) in result.objective_history.iter().enumerate() {
        writeln!(history, "{},{}", k + 1, best)?;
    }
    history.flush()?;

    let report = CalibrationReport {
        alpha: result.alpha,
        rmse_mm: result.tip_rmse_mm,
        iterations: result.evaluations,
    };
    save_json(&report, &out.join("report.json"))?;

    let truth = [
        scenario.segment.bending_stiffness.0,
        scenario.segment.bending_stiffness.1,
        scenario.segment.friction_coeffs[0],
        scenario.segment.friction_coeffs[1],
    ];
    println!(
        "calibrate: {} samples, {} evaluations, converged {}",
        recorded.len(),
        result.evaluations,
        result.converged
    );
    for (i, name) in ["EI_x", "EI_y", "mu_1", "mu_2"].iter().enumerate() {
        let rel = if truth[i].abs() > 0.0 {
            (result.alpha[i] - truth[i]).abs() / truth[i].abs() * 100.0
        } else {
            f64::NAN
        };
        println!(
            "  {name:>4}: identified {:.5} (segment value {:.5}, {:.2}% off)",
            result.alpha[i], truth[i], rel
        );
    }
    println!(
        "  fitted tip rmse: ({:.3}, {:.3}, {:.3}) mm",
        report.rmse_mm[0], report.rmse_mm[1], report.rmse_mm[2]
    );
    Ok(())
}
