use std::time::Instant;

use continuum_dynamics::calibrate::{
    calibrate, synthesize_chirp_response, CalibrationProblem, DEFAULT_TRACKING_KD,
    DEFAULT_TRACKING_KP,
};
use continuum_dynamics::dynamics::{SegmentModelT, SegmentParamsT};
use continuum_dynamics::sim::{Chirp, DopriOptions};

#[test]
#[ignore]
fn probe_full_calibration() {
    let truth = [1.1440_f64, 1.0373, 0.0312, 0.1637];
    let params = SegmentParamsT::<f64>::reference_distal();
    let model = SegmentModelT::with_reference_routing(params.clone()).unwrap();
    let chirp = Chirp {
        amplitude: std::f64::consts::TAU,
        f_start: 0.25,
        f_end: 1.25,
        duration: 2.0,
        phase: std::f64::consts::FRAC_PI_2,
    };
    let recorded = synthesize_chirp_response(
        &model,
        &chirp,
        DEFAULT_TRACKING_KP,
        DEFAULT_TRACKING_KD,
        100.0,
        &DopriOptions::default(),
    )
    .unwrap();
    let problem = CalibrationProblem::new(&params, &recorded);

    let t0 = Instant::now();
    let result = calibrate(&problem).unwrap();
    let wall = t0.elapsed();
    eprintln!(
        "\ncalibrate: {wall:?}, {} evals, converged={}, objective {:.6e}",
        result.evaluations, result.converged, result.objective
    );
    for i in 0..4 {
        let err = 100.0 * (result.alpha[i] - truth[i]).abs() / truth[i];
        eprintln!(
            "  alpha[{i}] = {:.5}  (truth {:.5}, {err:.2}% off)",
            result.alpha[i], truth[i]
        );
    }
    eprintln!(
        "  tip rmse mm: [{:.3}, {:.3}, {:.3}]",
        result.tip_rmse_mm[0], result.tip_rmse_mm[1], result.tip_rmse_mm[2]
    );
    for (k, v) in result.objective_history.iter().enumerate() {
        if k % 10 == 0 || k + 1 == result.objective_history.len() {
            eprintln!("  history[{k}] = {v:.6e}");
        }
    }
}
