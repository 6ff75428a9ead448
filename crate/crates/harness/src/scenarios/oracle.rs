//! The `simulate` verb: one ramped-contact simulation with exact measured
//! states, both estimators, and the full artifact set.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use continuum_dynamics::report::save_json;
use continuum_dynamics::sim::{DopriOptions, DEFAULT_SAMPLE_RATE};
use continuum_dynamics::SegmentModel;

use crate::config::Scenario;
use crate::error::Result;
use crate::pipeline::{
    exact_states, ramp_schedule_sim, run_estimators, truth_wrenches, RecoverySite,
};
use crate::reports::write_timeseries_csv;

use super::{beta_series, ensure_out_dir, estimation_report, thresholds_for};

/// Runs the scenario and writes `trajectory.csv`, `timeseries.csv`,
/// `report_gmo.json`, and `report_jfd.json` under `out`.
pub fn run(scenario: &Scenario, out: &Path) -> Result<()> {
    ensure_out_dir(out)?;
    let schedule = scenario.contact()?;
    let model = SegmentModel::with_reference_routing(scenario.segment.clone())?;

    let traj = ramp_schedule_sim(&model, schedule, DEFAULT_SAMPLE_RATE, &DopriOptions::default())?;
    let states = exact_states(&traj);
    let taus = traj.torques();
    let series = run_estimators(
        &model,
        &states,
        &taus,
        None,
        RecoverySite::Fixed(schedule.location),
        &scenario.estimator,
    )?;
    let truth = truth_wrenches(&traj);

    let thresholds = thresholds_for(&model, &scenario.estimator, states.dt)?;
    let beta = beta_series(scenario.segment.length, &states.c)?;

    traj.save_csv(out.join("trajectory.csv"))?;
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

    println!(
        "simulate: {} samples over {:.2} s, contact at {:.4} m",
        traj.len(),
        schedule.duration,
        schedule.location
    );
    println!(
        "momentum observer   rmse x {:.4} N, y {:.4} N",
        gmo.rmse_x_n, gmo.rmse_y_n
    );
    println!(
        "dynamic balance     rmse x {:.4} N, y {:.4} N",
        jfd.rmse_x_n, jfd.rmse_y_n
    );
    Ok(())
}
