//! The `estimate` verb: run both estimators over a previously recorded
//! trajectory file.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use continuum_dynamics::report::save_json;
use continuum_dynamics::sim::Trajectory;
use continuum_dynamics::SegmentModel;

use crate::config::Scenario;
use crate::error::Result;
use crate::pipeline::{exact_states, run_estimators, truth_wrenches, RecoverySite};
use crate::reports::write_timeseries_csv;

use super::{beta_series, ensure_out_dir, estimation_report, thresholds_for};

/// Replays `record` through both estimators and writes `timeseries.csv`,
/// `report_gmo.json`, and `report_jfd.json` under `out`.
///
/// The wrench is recovered at each sample's recorded contact arclength; when
/// a sample carries none, the segment tip is used.
pub fn run(scenario: &Scenario, record: &Path, out: &Path) -> Result<()> {
    ensure_out_dir(out)?;
    let model = SegmentModel::with_reference_routing(scenario.segment.clone())?;
    let traj = Trajectory::read_csv(File::open(record)?)?;

    let states = exact_states(&traj);
    let taus = traj.torques();
    let tip = scenario.segment.length;
    let sites: Vec<f64> = traj
        .samples
        .iter()
        .map(|s| {
            if s.contact_arclength.is_finite() && s.contact_arclength > 0.0 {
                s.contact_arclength
            } else {
                tip
            }
        })
        .collect();

    let series = run_estimators(
        &model,
        &states,
        &taus,
        None,
        RecoverySite::PerSample(&sites),
        &scenario.estimator,
    )?;
    let truth = truth_wrenches(&traj);
    let thresholds = thresholds_for(&model, &scenario.estimator, states.dt)?;
    let beta = beta_series(tip, &states.c)?;

    let writer = BufWriter::new(File::create(out.join("timeseries.csv"))?);
    write_timeseries_csv(&series, &thresholds, &beta, writer)?;
    let gmo = estimation_report(
        &series.residual,
        &series.wrench_gmo,
        &truth,
        &scenario.estimator,
        &thresholds,
        states.dt,
    );
    let jfd = estimation_report(
        &series.deviation,
        &series.wrench_jfd,
        &truth,
        &scenario.estimator,
        &thresholds,
        states.dt,
    );
    save_json(&gmo, &out.join("report_gmo.json"))?;
    save_json(&jfd, &out.join("report_jfd.json"))?;

    println!("estimate: {} samples replayed from {}", traj.len(), record.display());
    println!(
        "momentum observer   rmse x {:.4} N, y {:.4} N vs recorded wrench",
        gmo.rmse_x_n, gmo.rmse_y_n
    );
    println!(
        "dynamic balance     rmse x {:.4} N, y {:.4} N vs recorded wrench",
        jfd.rmse_x_n, jfd.rmse_y_n
    );
    Ok(())
}
