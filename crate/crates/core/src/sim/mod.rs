//! Time integration of the segment dynamics and the surrounding test-bed
//! utilities: excitation signals, noise injection, smoothed differentiation,
//! and uniformly sampled trajectory records.

pub mod dopri;
pub mod signal;
pub mod trajectory;

pub use dopri::{integrate, DenseStep, DopriOptions, Solution};
pub use signal::{
    backward_difference, causal_gaussian_smooth, perturb_series, smoothed_derivative, Chirp,
    NoiseKind, NoiseSpec,
};
pub use trajectory::{Sample, Trajectory, CSV_HEADER};

use nalgebra::{SVector, Vector2, Vector6};

use crate::dynamics::{ContactInput, SegmentModelT, SegmentStateT};
use crate::error::Result;
use crate::scalar::{real, to_f64, Real};

/// Logging rate used by every shipped scenario (Hz).
pub const DEFAULT_SAMPLE_RATE: f64 = 100.0;

fn pack<T: Real>(state: &SegmentStateT<T>) -> SVector<T, 12> {
    let mut y = SVector::zeros();
    for i in 0..6 {
        y[i] = state.c[i];
        y[6 + i] = state.c_dot[i];
    }
    y
}

fn unpack<T: Real>(y: &SVector<T, 12>) -> SegmentStateT<T> {
    let mut c = Vector6::zeros();
    let mut c_dot = Vector6::zeros();
    for i in 0..6 {
        c[i] = y[i];
        c_dot[i] = y[6 + i];
    }
    SegmentStateT { c, c_dot }
}

/// Integrates the segment dynamics and samples the result on a uniform grid.
///
/// `tau_fn` may close over the instantaneous state (for tracking
/// controllers); `contact_fn` describes the external load as a function of
/// time only. The recorded acceleration at each sample is obtained by
/// re-evaluating the dynamics at the sampled state, so the stored
/// `(c, c_dot, c_ddot, tau, wrench)` tuples satisfy the equations of motion
/// to interpolation accuracy.
pub fn simulate<T: Real>(
    model: &SegmentModelT<T>,
    initial: &SegmentStateT<T>,
    tau_fn: &dyn Fn(T, &SegmentStateT<T>) -> Vector2<T>,
    contact_fn: &dyn Fn(T) -> ContactInput<T>,
    t_end: T,
    sample_rate: T,
    options: &DopriOptions<T>,
) -> Result<Trajectory<T>> {
    let rhs = |t: T, y: &SVector<T, 12>| -> Result<SVector<T, 12>> {
        let state = unpack(y);
        let tau = tau_fn(t, &state);
        let contact = contact_fn(t);
        let acc = model.forward_dynamics(&state, &tau, &contact)?;
        let mut dy = SVector::zeros();
        for i in 0..6 {
            dy[i] = state.c_dot[i];
            dy[6 + i] = acc[i];
        }
        Ok(dy)
    };

    let solution = integrate(rhs, T::zero(), t_end, pack(initial), options)?;

    let dt = T::one() / sample_rate;
    let n_samples = (to_f64(t_end) * to_f64(sample_rate) + 1e-9).floor() as usize + 1;
    let mut samples = Vec::with_capacity(n_samples);
    for k in 0..n_samples {
        let t = dt * real::<T>(k as f64);
        let t_clamped = if to_f64(t) > to_f64(t_end) { t_end } else { t };
        let state = unpack(&solution.sample(t_clamped)?);
        let tau = tau_fn(t_clamped, &state);
        let contact = contact_fn(t_clamped);
        let c_ddot = model.forward_dynamics(&state, &tau, &contact)?;
        let (wrench, contact_arclength) = match &contact {
            ContactInput::Wrench { wrench, location } => (wrench.to_vector(), *location),
            _ => (Vector6::zeros(), -T::one()),
        };
        samples.push(Sample {
            t,
            c: state.c,
            c_dot: state.c_dot,
            c_ddot,
            tau,
            wrench,
            contact_arclength,
        });
    }
    Ok(Trajectory { dt, samples })
}

/// Total mechanical energy (kinetic + elastic + gravitational) at `state`.
pub fn total_energy<T: Real>(model: &SegmentModelT<T>, state: &SegmentStateT<T>) -> Result<T> {
    let kinetic = model.kinetic_energy(&state.c, &state.c_dot)?;
    let potential = model.potential_energy(&state.c)?;
    Ok(kinetic + potential)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::SegmentParamsT;
    use approx::assert_relative_eq;
    use nalgebra::Vector3;

    fn conservative_model() -> SegmentModelT<f64> {
        let mut params = SegmentParamsT::reference_distal();
        params.friction_coeffs = [0.0, 0.0];
        SegmentModelT::with_reference_routing(params).unwrap()
    }

    #[test]
    fn equilibrium_hold_produces_a_constant_trajectory() {
        let mut params = SegmentParamsT::reference_distal();
        params.gravity = Vector3::zeros();
        params.friction_coeffs = [0.0, 0.0];
        let model = SegmentModelT::with_reference_routing(params).unwrap();
        let tau = Vector2::new(0.6, -0.3);
        let kappa = model.capstan_map().transpose() * tau;
        let c_star = model.stiffness_matrix().cholesky().unwrap().solve(&kappa);
        let initial = SegmentStateT::new(c_star, Vector6::zeros()).unwrap();
        let traj = simulate(
            &model,
            &initial,
            &|_, _| tau,
            &|_| ContactInput::None,
            0.5,
            100.0,
            &DopriOptions::default(),
        )
        .unwrap();
        assert_eq!(traj.len(), 51);
        for s in &traj.samples {
            assert!((s.c - c_star).norm() < 1e-7, "drifted at t = {}", s.t);
            assert!(s.c_dot.norm() < 1e-6);
        }
    }

    #[test]
    fn frictionless_energy_drift_stays_below_a_tenth_of_a_percent() {
        let model = conservative_model();
        let initial = SegmentStateT::new(
            Vector6::new(1.0, -0.3, 0.1, -1.5, 0.4, -0.2),
            Vector6::zeros(),
        )
        .unwrap();
        let options = DopriOptions {
            rtol: 1e-8,
            atol: 1e-10,
            ..DopriOptions::default()
        };
        let traj = simulate(
            &model,
            &initial,
            &|_, _| Vector2::zeros(),
            &|_| ContactInput::None,
            2.0,
            100.0,
            &options,
        )
        .unwrap();
        let e0 = total_energy(&model, &SegmentStateT::new(initial.c, initial.c_dot).unwrap())
            .unwrap();
        assert!(e0.abs() > 0.05, "test needs a nonzero energy datum, e0 = {e0}");
        let mut worst = 0.0_f64;
        for s in &traj.samples {
            let state = SegmentStateT::new(s.c, s.c_dot).unwrap();
            let e = total_energy(&model, &state).unwrap();
            worst = worst.max((e - e0).abs());
        }
        assert!(
            worst / e0.abs() < 1e-3,
            "energy drift {:.3e} of {:.3e}",
            worst,
            e0
        );
    }

    #[test]
    fn tighter_tolerances_stay_within_the_looser_tolerance_band() {
        let model = conservative_model();
        let initial = SegmentStateT::new(
            Vector6::new(0.5, 0.2, -0.1, -0.7, 0.3, 0.0),
            Vector6::zeros(),
        )
        .unwrap();
        let run = |rtol: f64, atol: f64| {
            let options = DopriOptions {
                rtol,
                atol,
                ..DopriOptions::default()
            };
            simulate(
                &model,
                &initial,
                &|_, _| Vector2::new(0.2, 0.1),
                &|_| ContactInput::None,
                1.0,
                100.0,
                &options,
            )
            .unwrap()
        };
        // The controller bounds the error per step, not globally, so the
        // loose-vs-tight gap reflects the looser run's accumulated error:
        // a couple of orders above the per-step tolerance over ~1 s.
        let loose = run(1e-6, 1e-8);
        let tight = run(1e-8, 1e-10);
        let last = loose.len() - 1;
        let diff = (loose.samples[last].c - tight.samples[last].c).norm()
            + (loose.samples[last].c_dot - tight.samples[last].c_dot).norm();
        assert!(diff < 1e-3, "solutions diverged by {diff:.3e}");
        assert!(diff > 0.0, "distinct tolerances should not agree bit-exactly");
    }

    #[test]
    fn sampling_grid_is_uniform_and_complete() {
        let model = conservative_model();
        let initial = SegmentStateT::zero();
        let traj = simulate(
            &model,
            &initial,
            &|_, _| Vector2::zeros(),
            &|_| ContactInput::None,
            2.0,
            100.0,
            &DopriOptions::default(),
        )
        .unwrap();
        assert_eq!(traj.len(), 201);
        for (k, s) in traj.samples.iter().enumerate() {
            assert_relative_eq!(s.t, 0.01 * k as f64, epsilon = 1e-12);
        }
    }

    #[test]
    fn recorded_wrench_and_location_mirror_the_contact_schedule() {
        let model = conservative_model();
        let length = model.params().length;
        let contact_fn = |t: f64| {
            if t < 0.25 {
                ContactInput::None
            } else {
                ContactInput::Wrench {
                    wrench: crate::dynamics::WrenchT {
                        force: Vector3::new(2.0, -1.0, 0.0),
                        moment: Vector3::zeros(),
                    },
                    location: length,
                }
            }
        };
        let traj = simulate(
            &model,
            &SegmentStateT::zero(),
            &|_, _| Vector2::zeros(),
            &contact_fn,
            0.5,
            100.0,
            &DopriOptions::default(),
        )
        .unwrap();
        assert_eq!(traj.samples[0].contact_arclength, -1.0);
        assert_eq!(traj.samples[0].wrench, Vector6::zeros());
        let late = &traj.samples[40];
        assert_relative_eq!(late.contact_arclength, length, epsilon = 1e-12);
        assert_relative_eq!(late.wrench[0], 2.0, epsilon = 1e-12);
        assert_relative_eq!(late.wrench[1], -1.0, epsilon = 1e-12);
    }

    #[test]
    fn identical_inputs_give_bit_identical_trajectories() {
        let model = conservative_model();
        let initial = SegmentStateT::new(
            Vector6::new(0.4, -0.1, 0.05, 0.8, -0.3, 0.1),
            Vector6::zeros(),
        )
        .unwrap();
        let run = || {
            simulate(
                &model,
                &initial,
                &|t: f64, _: &SegmentStateT<f64>| Vector2::new(0.3 * t.sin(), 0.0),
                &|_| ContactInput::None,
                0.4,
                100.0,
                &DopriOptions::default(),
            )
            .unwrap()
        };
        let a = run();
        let b = run();
        for (x, y) in a.samples.iter().zip(b.samples.iter()) {
            for i in 0..6 {
                assert_eq!(x.c[i].to_bits(), y.c[i].to_bits());
                assert_eq!(x.c_dot[i].to_bits(), y.c_dot[i].to_bits());
                assert_eq!(x.c_ddot[i].to_bits(), y.c_ddot[i].to_bits());
            }
        }
    }
}
