//! The `noise-study` verb: one simulated motion re-measured under a range of
//! sensor-noise amplitudes, comparing both estimators at each level.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use continuum_dynamics::sim::{DopriOptions, DEFAULT_SAMPLE_RATE};
use continuum_dynamics::SegmentModel;

use crate::config::Scenario;
use crate::error::Result;
use crate::pipeline::{
    exact_states, noisy_states, ramp_schedule_sim, rmse_component, run_estimators,
    truth_wrenches, RecoverySite,
};
use crate::pool::ordered_map;
use crate::reports::{save_json, write_timeseries_csv, AxisRmse, NoiseStudyReport};

use super::{beta_series, ensure_out_dir, thresholds_for};

/// Runs the study and writes `report.json` plus one `timeseries_<k>.csv` per
/// amplitude under `out`.
pub fn run(scenario: &Scenario, out: &Path, jobs: usize) -> Result<()> {
    ensure_out_dir(out)?;
    let schedule = scenario.contact()?;
    let noise = scenario.noise()?;
    if noise.amplitudes.is_empty() {
        return Err(crate::error::HarnessError::Validation(
            "noise study needs at least one amplitude".into(),
        ));
    }
    let model = SegmentModel::with_reference_routing(scenario.segment.clone())?;

    let traj = ramp_schedule_sim(&model, schedule, DEFAULT_SAMPLE_RATE, &DopriOptions::default())?;
    let truth = truth_wrenches(&traj);
    let taus = traj.torques();
    let thresholds = thresholds_for(&model, &scenario.estimator, traj.dt)?;

    let per_amplitude = ordered_map(noise.amplitudes.len(), jobs, |k| -> Result<_> {
        let amplitude = noise.amplitudes[k];
        let states = if amplitude == 0.0 {
            exact_states(&traj)
        } else {
            let mut rng = ChaCha8Rng::seed_from_u64(scenario.seed.wrapping_add(k as u64));
            noisy_states(&traj, amplitude, noise.smoothing, &mut rng)?
        };
        let series = run_estimators(
            &model,
            &states,
            &taus,
            None,
            RecoverySite::Fixed(schedule.location),
            &scenario.estimator,
        )?;
        let gmo = AxisRmse {
            rmse_x_n: rmse_component(&series.wrench_gmo, &truth, 0),
            rmse_y_n: rmse_component(&series.wrench_gmo, &truth, 1),
        };
        let jfd = AxisRmse {
            rmse_x_n: rmse_component(&series.wrench_jfd, &truth, 0),
            rmse_y_n: rmse_component(&series.wrench_jfd, &truth, 1),
        };
        let beta = beta_series(scenario.segment.length, &states.c)?;
        Ok((gmo, jfd, series, beta))
    });

    let mut report = NoiseStudyReport {
        amplitudes: noise.amplitudes.clone(),
        gmo: Vec::new(),
        jfd: Vec::new(),
    };
    for (k, item) in per_amplitude.into_iter().enumerate() {
        let (gmo, jfd, series, beta) = item?;
        let writer = BufWriter::new(File::create(out.join(format!("timeseries_{k}.csv")))?);
        write_timeseries_csv(&series, &thresholds, &beta, writer)?;
        println!(
            "amplitude {:>9.2e}: momentum rmse ({:.4}, {:.4}) N, balance rmse ({:.4}, {:.4}) N",
            report.amplitudes[k], gmo.rmse_x_n, gmo.rmse_y_n, jfd.rmse_x_n, jfd.rmse_y_n
        );
        report.gmo.push(gmo);
        report.jfd.push(jfd);
    }
    save_json(&report, out.join("report.json"))?;
    Ok(())
}
