//! The `sweep-state-error` verb: randomized contact trials replayed under a
//! ladder of proportional state-error levels, reduced to per-level error
//! statistics and a polar scatter per estimator.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use nalgebra::{Vector2, Vector6};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use continuum_dynamics::sim::{DopriOptions, DEFAULT_SAMPLE_RATE};
use continuum_dynamics::SegmentModel;

use crate::config::{ContactSchedule, Scenario, SweepSettings};
use crate::error::{HarnessError, Result};
use crate::pipeline::{
    biased_states, ramp_schedule_sim, rmse_force_direction, rmse_force_norm, run_estimators,
    truth_wrenches, RecoverySite,
};
use crate::pool::ordered_map;
use crate::reports::{
    save_json, write_polar_csv, PolarRow, SweepLevel, SweepReport,
};

use super::{ensure_out_dir, MIN_DIRECTION_NORM};

/// Simulated span of each trial (s); the wrench and torques ramp over the
/// whole span, so the estimators track a continuously growing load.
const TRIAL_DURATION: f64 = 1.0;

/// One trial's drawn targets.
#[derive(Debug, Clone, Copy)]
struct Draw {
    force: Vector2<f64>,
    torque: Vector2<f64>,
}

/// Draws the trial loads: forces uniform in `±force_bound`, torques uniform
/// in `±torque_bound`, in trial order (fx, fy, tau1, tau2 per trial).
fn draw_trials(settings: &SweepSettings, seed: u64) -> Vec<Draw> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..settings.trials)
        .map(|_| {
            let fx = rng.gen_range(-settings.force_bound..=settings.force_bound);
            let fy = rng.gen_range(-settings.force_bound..=settings.force_bound);
            let t1 = rng.gen_range(-settings.torque_bound..=settings.torque_bound);
            let t2 = rng.gen_range(-settings.torque_bound..=settings.torque_bound);
            Draw {
                force: Vector2::new(fx, fy),
                torque: Vector2::new(t1, t2),
            }
        })
        .collect()
}

/// Evenly spaced error levels from zero to the configured maximum.
fn error_levels(settings: &SweepSettings) -> Vec<f64> {
    let n = settings.levels;
    (0..n)
        .map(|j| {
            if n == 1 {
                0.0
            } else {
                settings.max_state_error * j as f64 / (n - 1) as f64
            }
        })
        .collect()
}

/// Error statistics of one (trial, level) condition for one estimator.
#[derive(Debug, Clone, Copy, Default)]
struct ConditionStats {
    sum_abs_x: f64,
    sum_abs_y: f64,
    max_abs_x: f64,
    max_abs_y: f64,
    samples: usize,
    radial_rmse: f64,
    direction_rmse: f64,
}

fn condition_stats(estimate: &[Vector6<f64>], truth: &[Vector6<f64>]) -> ConditionStats {
    let mut stats = ConditionStats::default();
    for (e, t) in estimate.iter().zip(truth.iter()) {
        let ex = (e[0] - t[0]).abs();
        let ey = (e[1] - t[1]).abs();
        stats.sum_abs_x += ex;
        stats.sum_abs_y += ey;
        stats.max_abs_x = stats.max_abs_x.max(ex);
        stats.max_abs_y = stats.max_abs_y.max(ey);
        stats.samples += 1;
    }
    stats.radial_rmse = rmse_force_norm(estimate, truth);
    stats.direction_rmse = rmse_force_direction(estimate, truth, MIN_DIRECTION_NORM);
    stats
}

/// Per-trial outcome: one stats pair per error level, or a flag when the
/// trial's simulation failed to integrate.
enum TrialOutcome {
    Flagged,
    Done(Vec<(ConditionStats, ConditionStats)>),
}

/// Runs the sweep and writes `report.json`, `polar_gmo.csv`, and
/// `polar_jfd.csv` under `out`.
pub fn run(scenario: &Scenario, out: &Path, jobs: usize) -> Result<()> {
    ensure_out_dir(out)?;
    let settings = scenario.sweep()?;
    if settings.trials == 0 || settings.levels == 0 {
        return Err(HarnessError::Validation(
            "sweep needs at least one trial and one level".into(),
        ));
    }
    let model = SegmentModel::with_reference_routing(scenario.segment.clone())?;
    let length = scenario.segment.length;
    let draws = draw_trials(settings, scenario.seed);
    let levels = error_levels(settings);

    let trial_results = ordered_map(settings.trials, jobs, |trial| -> Result<TrialOutcome> {
        let draw = draws[trial];
        let schedule = ContactSchedule {
            location: length,
            wrench: Vector6::new(draw.force[0], draw.force[1], 0.0, 0.0, 0.0, 0.0),
            torque: draw.torque,
            ramp: TRIAL_DURATION,
            duration: TRIAL_DURATION,
        };
        let traj = match ramp_schedule_sim(
            &model,
            &schedule,
            DEFAULT_SAMPLE_RATE,
            &DopriOptions::default(),
        ) {
            Ok(traj) => traj,
            Err(_) => return Ok(TrialOutcome::Flagged),
        };
        let truth = truth_wrenches(&traj);
        let taus = traj.torques();
        let mut per_level = Vec::with_capacity(levels.len());
        for &epsilon in &levels {
            let states = biased_states(&traj, epsilon);
            let series = run_estimators(
                &model,
                &states,
                &taus,
                None,
                RecoverySite::Fixed(length),
                &scenario.estimator,
            )?;
            per_level.push((
                condition_stats(&series.wrench_gmo, &truth),
                condition_stats(&series.wrench_jfd, &truth),
            ));
        }
        Ok(TrialOutcome::Done(per_level))
    });

    let mut flagged = Vec::new();
    let mut polar_gmo = Vec::new();
    let mut polar_jfd = Vec::new();
    // Aggregates indexed by level: (sum_x, sum_y, max_x, max_y, samples).
    let mut agg_gmo = vec![(0.0, 0.0, 0.0_f64, 0.0_f64, 0usize); levels.len()];
    let mut agg_jfd = agg_gmo.clone();

    for (trial, outcome) in trial_results.into_iter().enumerate() {
        match outcome? {
            TrialOutcome::Flagged => {
                flagged.push(trial);
                for &epsilon in &levels {
                    for rows in [&mut polar_gmo, &mut polar_jfd] {
                        rows.push(PolarRow {
                            trial,
                            state_error: epsilon,
                            force_x_n: draws[trial].force[0],
                            force_y_n: draws[trial].force[1],
                            radial_rmse_n: f64::NAN,
                            direction_rmse_rad: f64::NAN,
                        });
                    }
                }
            }
            TrialOutcome::Done(per_level) => {
                for (j, (gmo, jfd)) in per_level.into_iter().enumerate() {
                    for (stats, rows, agg) in [
                        (gmo, &mut polar_gmo, &mut agg_gmo[j]),
                        (jfd, &mut polar_jfd, &mut agg_jfd[j]),
                    ] {
                        rows.push(PolarRow {
                            trial,
                            state_error: levels[j],
                            force_x_n: draws[trial].force[0],
                            force_y_n: draws[trial].force[1],
                            radial_rmse_n: stats.radial_rmse,
                            direction_rmse_rad: stats.direction_rmse,
                        });
                        agg.0 += stats.sum_abs_x;
                        agg.1 += stats.sum_abs_y;
                        agg.2 = agg.2.max(stats.max_abs_x);
                        agg.3 = agg.3.max(stats.max_abs_y);
                        agg.4 += stats.samples;
                    }
                }
            }
        }
    }

    let report = SweepReport {
        trials: settings.trials,
        flagged_trials: flagged,
        levels: levels
            .iter()
            .enumerate()
            .map(|(j, &epsilon)| {
                let g = agg_gmo[j];
                let d = agg_jfd[j];
                let denom = |n: usize| if n == 0 { 1.0 } else { n as f64 };
                SweepLevel {
                    state_error: epsilon,
                    gmo_mean_x_n: g.0 / denom(g.4),
                    gmo_mean_y_n: g.1 / denom(g.4),
                    gmo_max_x_n: g.2,
                    gmo_max_y_n: g.3,
                    jfd_mean_x_n: d.0 / denom(d.4),
                    jfd_mean_y_n: d.1 / denom(d.4),
                    jfd_max_x_n: d.2,
                    jfd_max_y_n: d.3,
                }
            })
            .collect(),
    };

    save_json(&report, out.join("report.json"))?;
    let writer = BufWriter::new(File::create(out.join("polar_gmo.csv"))?);
    write_polar_csv(&polar_gmo, writer)?;
    let writer = BufWriter::new(File::create(out.join("polar_jfd.csv"))?);
    write_polar_csv(&polar_jfd, writer)?;

    println!(
        "sweep: {} trials x {} levels ({} flagged)",
        report.trials,
        report.levels.len(),
        report.flagged_trials.len()
    );
    for level in &report.levels {
        println!(
            "  error {:>5.1}%: momentum mean ({:.2}, {:.2}) max ({:.2}, {:.2}) N | balance mean ({:.2}, {:.2}) max ({:.2}, {:.2}) N",
            level.state_error * 100.0,
            level.gmo_mean_x_n,
            level.gmo_mean_y_n,
            level.gmo_max_x_n,
            level.gmo_max_y_n,
            level.jfd_mean_x_n,
            level.jfd_mean_y_n,
            level.jfd_max_x_n,
            level.jfd_max_y_n
        );
    }
    Ok(())
}
