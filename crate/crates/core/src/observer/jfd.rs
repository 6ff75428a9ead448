//! Direct dynamic-balance contact estimator.
//!
//! Rearranging the equations of motion isolates the generalized contact
//! force as the deviation between inertial+internal terms and the applied
//! actuation. Unlike the momentum observer this needs measured (or
//! differentiated) accelerations, so it is exact on clean data and noisy on
//! real data — the complementary trade-off the two estimators exist to cover.

use nalgebra::{Vector2, Vector6};

use crate::dynamics::{ContactInput, ModelEval, SegmentModelT, SegmentStateT};
use crate::error::Result;
use crate::scalar::Real;

/// Generalized contact force from a dynamics evaluation plus a measured
/// acceleration.
///
/// `eval` must be evaluated at the measured state with the applied torques
/// and no contact; its `contact` field is ignored.
pub fn deviation_with_eval<T: Real>(
    eval: &ModelEval<T>,
    c_dot: &Vector6<T>,
    c_ddot: &Vector6<T>,
) -> Vector6<T> {
    eval.mass * c_ddot + eval.coriolis * c_dot + eval.potential_gradient - eval.actuation
        + eval.friction
}

/// Generalized contact force from measured state, acceleration, and torque.
pub fn deviation<T: Real>(
    model: &SegmentModelT<T>,
    state: &SegmentStateT<T>,
    c_ddot: &Vector6<T>,
    tau: &Vector2<T>,
) -> Result<Vector6<T>> {
    let eval = model.evaluate(state, tau, &ContactInput::None)?;
    Ok(deviation_with_eval(&eval, &state.c_dot, c_ddot))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{SegmentParamsT, WrenchT};
    use crate::sim::{simulate, DopriOptions};
    use approx::assert_relative_eq;
    use nalgebra::Vector3;

    #[test]
    fn deviation_recovers_injected_generalized_force() {
        // Forward dynamics with a known generalized contact force, then the
        // deviation at the exact (c, c_dot, c_ddot) triple must return it.
        let model =
            SegmentModelT::with_reference_routing(SegmentParamsT::reference_distal()).unwrap();
        let state = SegmentStateT::new(
            Vector6::new(0.5, -0.3, 0.2, 0.4, -0.6, 0.1),
            Vector6::new(0.2, -0.1, 0.3, -0.2, 0.1, 0.0),
        )
        .unwrap();
        let tau = Vector2::new(0.7, -0.3);
        let kappa = Vector6::new(1.0, -2.0, 0.5, 0.3, -0.7, 0.2);
        let c_ddot = model
            .forward_dynamics(&state, &tau, &ContactInput::Generalized(kappa))
            .unwrap();
        let recovered = deviation(&model, &state, &c_ddot, &tau).unwrap();
        assert_relative_eq!(recovered, kappa, epsilon = 1e-9);
    }

    #[test]
    fn deviation_is_zero_along_a_contact_free_trajectory() {
        let model =
            SegmentModelT::with_reference_routing(SegmentParamsT::reference_distal()).unwrap();
        let traj = simulate(
            &model,
            &SegmentStateT::zero(),
            &|t: f64, _: &SegmentStateT<f64>| Vector2::new(0.8 * (2.0 * t).sin(), -0.4),
            &|_| ContactInput::None,
            0.5,
            100.0,
            &DopriOptions::default(),
        )
        .unwrap();
        for s in &traj.samples {
            let state = SegmentStateT::new(s.c, s.c_dot).unwrap();
            let kappa = deviation(&model, &state, &s.c_ddot, &s.tau).unwrap();
            assert!(
                kappa.norm() < 1e-8,
                "spurious deviation {:.3e} at t = {}",
                kappa.norm(),
                s.t
            );
        }
    }

    #[test]
    fn deviation_matches_distal_reaction_for_a_tip_wrench() {
        let model =
            SegmentModelT::with_reference_routing(SegmentParamsT::reference_distal()).unwrap();
        let length = model.params().length;
        let w = WrenchT {
            force: Vector3::new(6.0, -2.0, 1.0),
            moment: Vector3::new(0.0, 0.0, 0.1),
        };
        let traj = simulate(
            &model,
            &SegmentStateT::zero(),
            &|_, _| Vector2::zeros(),
            &|_| ContactInput::Wrench {
                wrench: w,
                location: length,
            },
            0.3,
            100.0,
            &DopriOptions::default(),
        )
        .unwrap();
        let s = traj.samples.last().unwrap();
        let state = SegmentStateT::new(s.c, s.c_dot).unwrap();
        let kappa = deviation(&model, &state, &s.c_ddot, &s.tau).unwrap();
        let truth = model.distal_reaction(&s.c, &w).unwrap();
        assert_relative_eq!(kappa, truth, epsilon = 1e-7, max_relative = 1e-7);
    }
}
