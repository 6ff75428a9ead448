//! The `multiseg` verb: a two-segment arm treated as two single-segment
//! estimation problems.
//!
//! The distal segment's mass is statically lumped into the proximal end
//! disk, and the reaction moments of the elbow bracket and the pass-through
//! distal actuation are injected at the proximal tip as a known wrench. The
//! contact force is then estimated independently on each segment: at the tip
//! of the (lumped) proximal model and at the configured disk of the distal
//! model.

use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use nalgebra::{Matrix3, Vector2, Vector3, Vector6};

use continuum_dynamics::dynamics::{ContactInput, SegmentStateT, WrenchT};
use continuum_dynamics::sim::{simulate, DopriOptions, Trajectory, DEFAULT_SAMPLE_RATE};
use continuum_dynamics::{SegmentModel, SegmentParams, SegmentState};

use crate::config::{MultisegSettings, Scenario};
use crate::error::{HarnessError, Result};
use crate::pipeline::{derived_states, rmse_component, run_estimators, RecoverySite};
use crate::reports::{save_json, write_timeseries_csv, MultisegReport, SegmentRmse};

use super::{beta_series, ensure_out_dir, thresholds_for};

/// Parallel-axis term for a point mass at offset `d` from the reference.
fn parallel_axis(mass: f64, d: &Vector3<f64>) -> Matrix3<f64> {
    Matrix3::identity() * (mass * d.dot(d)) - d * d.transpose() * mass
}

/// Statically lumps the distal segment's full mass (backbone rod plus disks)
/// into the proximal end disk, assuming the distal base frame coincides with
/// the proximal end-disk frame in the straight reference.
pub fn lump_distal(proximal: &SegmentParams, distal: &SegmentParams) -> Result<SegmentParams> {
    // Inventory the distal bodies in the distal base frame.
    let rod_mass = distal.backbone_density * distal.length;
    let rod_com = Vector3::new(0.0, 0.0, distal.length / 2.0);
    let r2 = distal.backbone_radius * distal.backbone_radius;
    let l2 = distal.length * distal.length;
    let rod_inertia = Matrix3::from_diagonal(&Vector3::new(
        rod_mass * (3.0 * r2 + l2) / 12.0,
        rod_mass * (3.0 * r2 + l2) / 12.0,
        rod_mass * r2 / 2.0,
    ));

    let mut bodies: Vec<(f64, Vector3<f64>, Matrix3<f64>)> =
        vec![(rod_mass, rod_com, rod_inertia)];
    for disk in &distal.disks {
        let position = Vector3::new(0.0, 0.0, disk.arclength) + disk.com_offset;
        bodies.push((disk.mass, position, disk.inertia));
    }

    let total_mass: f64 = bodies.iter().map(|(m, _, _)| m).sum();
    if total_mass <= 0.0 {
        return Err(HarnessError::Validation(
            "distal segment has no mass to lump".into(),
        ));
    }
    let com = bodies
        .iter()
        .fold(Vector3::zeros(), |acc, (m, p, _)| acc + p * *m)
        / total_mass;
    let inertia_about_com = bodies.iter().fold(Matrix3::zeros(), |acc, (m, p, i)| {
        acc + i + parallel_axis(*m, &(p - com))
    });

    // Compose with the existing end disk about their joint center of mass.
    let mut lumped = proximal.clone();
    let end = lumped
        .disks
        .last_mut()
        .ok_or_else(|| HarnessError::Validation("proximal segment has no disks".into()))?;
    let combined_mass = end.mass + total_mass;
    let combined_com = (end.com_offset * end.mass + com * total_mass) / combined_mass;
    let combined_inertia = end.inertia
        + parallel_axis(end.mass, &(end.com_offset - combined_com))
        + inertia_about_com
        + parallel_axis(total_mass, &(com - combined_com));
    end.mass = combined_mass;
    end.com_offset = combined_com;
    end.inertia = combined_inertia;
    Ok(lumped)
}

/// Reaction wrench of the elbow bracket and the pass-through distal
/// actuation, expressed at the proximal tip.
fn reaction_wrench(settings: &MultisegSettings) -> Vector6<f64> {
    Vector6::new(
        0.0,
        0.0,
        0.0,
        settings.elbow_torque + settings.distal_torques[0],
        settings.distal_torques[1],
        0.0,
    )
}

/// Simulates the proximal segment: reaction wrench plus contact force, both
/// ramped together at the tip, with the capstans unpowered.
fn simulate_proximal(
    model: &SegmentModel,
    settings: &MultisegSettings,
    reaction: &Vector6<f64>,
) -> Result<Trajectory<f64>> {
    let tip = model.params().length;
    let force = settings.force;
    let ramp = settings.ramp;
    let reaction = *reaction;
    let tau_fn = |_: f64, _: &SegmentStateT<f64>| Vector2::zeros();
    let contact_fn = move |t: f64| {
        let s = (t / ramp).clamp(0.0, 1.0);
        if s == 0.0 {
            return ContactInput::None;
        }
        let total = reaction * s + Vector6::new(force[0], force[1], force[2], 0.0, 0.0, 0.0) * s;
        ContactInput::Wrench {
            wrench: WrenchT {
                force: Vector3::new(total[0], total[1], total[2]),
                moment: Vector3::new(total[3], total[4], total[5]),
            },
            location: tip,
        }
    };
    simulate(
        model,
        &SegmentState::zero(),
        &tau_fn,
        &contact_fn,
        settings.duration,
        DEFAULT_SAMPLE_RATE,
        &DopriOptions::default(),
    )
    .map_err(Into::into)
}

/// Simulates the distal segment: its own capstan torques and the contact
/// force at the configured disk, ramped together.
fn simulate_distal(
    model: &SegmentModel,
    settings: &MultisegSettings,
    contact_arclength: f64,
) -> Result<Trajectory<f64>> {
    let force = settings.force;
    let ramp = settings.ramp;
    let torque = settings.distal_torques;
    let tau_fn = move |t: f64, _: &SegmentStateT<f64>| torque * (t / ramp).clamp(0.0, 1.0);
    let contact_fn = move |t: f64| {
        let s = (t / ramp).clamp(0.0, 1.0);
        if s == 0.0 {
            return ContactInput::None;
        }
        ContactInput::Wrench {
            wrench: WrenchT {
                force: Vector3::new(force[0] * s, force[1] * s, force[2] * s),
                moment: Vector3::zeros(),
            },
            location: contact_arclength,
        }
    };
    simulate(
        model,
        &SegmentState::zero(),
        &tau_fn,
        &contact_fn,
        settings.duration,
        DEFAULT_SAMPLE_RATE,
        &DopriOptions::default(),
    )
    .map_err(Into::into)
}

/// The ramped contact-force truth series (force only, no moment).
fn force_truth(settings: &MultisegSettings, dt: f64, n: usize) -> Vec<Vector6<f64>> {
    (0..n)
        .map(|k| {
            let s = (dt * k as f64 / settings.ramp).clamp(0.0, 1.0);
            Vector6::new(
                settings.force[0] * s,
                settings.force[1] * s,
                settings.force[2] * s,
                0.0,
                0.0,
                0.0,
            )
        })
        .collect()
}

/// Runs both per-segment estimations and writes `report.json`,
/// `timeseries_proximal.csv`, and `timeseries_distal.csv` under `out`.
pub fn run(scenario: &Scenario, out: &Path) -> Result<()> {
    ensure_out_dir(out)?;
    let settings = scenario.multiseg()?;

    // Both segments hang in the configured gravity field.
    let mut proximal_params = scenario.segment.clone();
    proximal_params.gravity = settings.gravity;
    let mut distal_params = settings.distal.clone();
    distal_params.gravity = settings.gravity;

    let lumped = lump_distal(&proximal_params, &distal_params)?;
    let proximal = SegmentModel::with_reference_routing(lumped)?;
    let distal = SegmentModel::with_reference_routing(distal_params.clone())?;
    let contact_arclength = distal_params.disks[settings.contact_disk - 1].arclength;

    let reaction = reaction_wrench(settings);
    let traj_p = simulate_proximal(&proximal, settings, &reaction)?;
    let traj_d = simulate_distal(&distal, settings, contact_arclength)?;

    // The reaction injection's physical footprint: how far the proximal
    // equilibrium moves when the distal reactions are absent.
    let mut no_reaction = settings.clone();
    let traj_bare = {
        let zero = Vector6::zeros();
        no_reaction.elbow_torque = 0.0;
        no_reaction.distal_torques = Vector2::zeros();
        simulate_proximal(&proximal, &no_reaction, &zero)?
    };
    let reaction_shift_norm = (traj_p.samples.last().unwrap().c
        - traj_bare.samples.last().unwrap().c)
        .norm();

    let smoothing = scenario.estimator.derivative_smoothing;
    let states_p = derived_states(&traj_p, smoothing)?;
    let states_d = derived_states(&traj_d, smoothing)?;

    // The estimators explain the ramped reaction wrench through the
    // published schedule and the measured shape.
    let known: Vec<Vector6<f64>> = (0..states_p.len())
        .map(|k| -> Result<Vector6<f64>> {
            let s = (states_p.dt * k as f64 / settings.ramp).clamp(0.0, 1.0);
            let jacobian =
                proximal.body_jacobian(&states_p.c[k], proximal.params().length)?;
            Ok(jacobian.transpose() * (reaction * s))
        })
        .collect::<Result<_>>()?;

    let taus_p = traj_p.torques();
    let series_p = run_estimators(
        &proximal,
        &states_p,
        &taus_p,
        Some(&known),
        RecoverySite::Fixed(proximal.params().length),
        &scenario.estimator,
    )?;
    let taus_d = traj_d.torques();
    let series_d = run_estimators(
        &distal,
        &states_d,
        &taus_d,
        None,
        RecoverySite::Fixed(contact_arclength),
        &scenario.estimator,
    )?;

    let truth_p = force_truth(settings, states_p.dt, states_p.len());
    let truth_d = force_truth(settings, states_d.dt, states_d.len());

    let report = MultisegReport {
        segments: vec![
            SegmentRmse {
                segment: "proximal".into(),
                gmo_rmse_x_n: rmse_component(&series_p.wrench_gmo, &truth_p, 0),
                gmo_rmse_y_n: rmse_component(&series_p.wrench_gmo, &truth_p, 1),
                jfd_rmse_x_n: rmse_component(&series_p.wrench_jfd, &truth_p, 0),
                jfd_rmse_y_n: rmse_component(&series_p.wrench_jfd, &truth_p, 1),
            },
            SegmentRmse {
                segment: "distal".into(),
                gmo_rmse_x_n: rmse_component(&series_d.wrench_gmo, &truth_d, 0),
                gmo_rmse_y_n: rmse_component(&series_d.wrench_gmo, &truth_d, 1),
                jfd_rmse_x_n: rmse_component(&series_d.wrench_jfd, &truth_d, 0),
                jfd_rmse_y_n: rmse_component(&series_d.wrench_jfd, &truth_d, 1),
            },
        ],
        reaction_shift_norm,
    };
    save_json(&report, out.join("report.json"))?;

    let thresholds_p = thresholds_for(&proximal, &scenario.estimator, states_p.dt)?;
    let beta_p = beta_series(proximal.params().length, &states_p.c)?;
    let writer = BufWriter::new(File::create(out.join("timeseries_proximal.csv"))?);
    write_timeseries_csv(&series_p, &thresholds_p, &beta_p, writer)?;

    let thresholds_d = thresholds_for(&distal, &scenario.estimator, states_d.dt)?;
    let beta_d = beta_series(distal_params.length, &states_d.c)?;
    let writer = BufWriter::new(File::create(out.join("timeseries_distal.csv"))?);
    write_timeseries_csv(&series_d, &thresholds_d, &beta_d, writer)?;

    for row in &report.segments {
        println!(
            "{:>8}: momentum rmse ({:.3}, {:.3}) N, balance rmse ({:.3}, {:.3}) N",
            row.segment, row.gmo_rmse_x_n, row.gmo_rmse_y_n, row.jfd_rmse_x_n, row.jfd_rmse_y_n
        );
    }
    println!(
        "reaction injection shifts the proximal equilibrium by {:.4e} (coefficient norm)",
        report.reaction_shift_norm
    );
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn lumping_composes_point_masses_correctly() {
        let mut proximal = SegmentParams::reference_proximal();
        let mut distal = SegmentParams::reference_distal();
        // Strip the distal to a single point mass at its tip and make the
        // rod massless so the hand calculation is exact.
        distal.backbone_density = 0.0;
        distal.disks.truncate(1);
        distal.disks[0].arclength = 0.2;
        distal.disks[0].mass = 0.3;
        distal.disks[0].inertia = Matrix3::zeros();
        distal.disks[0].com_offset = Vector3::zeros();
        // And make the proximal end disk a point mass at its attachment.
        {
            let end = proximal.disks.last_mut().unwrap();
            end.mass = 0.1;
            end.inertia = Matrix3::zeros();
            end.com_offset = Vector3::zeros();
        }

        let lumped = lump_distal(&proximal, &distal).unwrap();
        let end = lumped.disks.last().unwrap();
        assert_relative_eq!(end.mass, 0.4, epsilon = 1e-12);
        // Combined center of mass: 0.3/0.4 of the way to the distal tip.
        assert_relative_eq!(end.com_offset[2], 0.15, epsilon = 1e-12);
        // Two point masses about their joint center of mass.
        let expected = 0.1 * 0.15 * 0.15 + 0.3 * 0.05 * 0.05;
        assert_relative_eq!(end.inertia[(0, 0)], expected, epsilon = 1e-12);
        assert_relative_eq!(end.inertia[(1, 1)], expected, epsilon = 1e-12);
        assert_relative_eq!(end.inertia[(2, 2)], 0.0, epsilon = 1e-12);
        // Other disks untouched.
        assert_eq!(lumped.disks.len(), proximal.disks.len());
        assert_eq!(lumped.disks[0], proximal.disks[0]);
    }

    #[test]
    fn lumping_adds_the_full_distal_mass() {
        let proximal = SegmentParams::reference_proximal();
        let distal = SegmentParams::reference_distal();
        let lumped = lump_distal(&proximal, &distal).unwrap();
        let disk_mass: f64 = distal.disks.iter().map(|d| d.mass).sum();
        let rod_mass = distal.backbone_density * distal.length;
        let expected = proximal.disks.last().unwrap().mass + disk_mass + rod_mass;
        assert_relative_eq!(
            lumped.disks.last().unwrap().mass,
            expected,
            epsilon = 1e-12
        );
        // The lumped end disk is heavier and its inertia grew.
        assert!(lumped.disks.last().unwrap().mass > proximal.disks.last().unwrap().mass);
        assert!(
            lumped.disks.last().unwrap().inertia[(0, 0)]
                > proximal.disks.last().unwrap().inertia[(0, 0)]
        );
    }
}
