//! Residual sensitivity to state error.
//!
//! The momentum-observer residual responds to errors in the measured state
//! `x = [c; c_dot]` even without contact; propagating the observer recursion
//! through first-order perturbations yields `dr/dx`, the 6x12 matrix from
//! which detection thresholds are derived. Only the state-dependent terms
//! enter: the capstan-torque contribution is exactly linear in `c` through a
//! constant routing Jacobian, so its derivative cancels.

use nalgebra::{SMatrix, Vector2, Vector6};

use crate::dynamics::{ContactInput, SegmentModelT, SegmentStateT};
use crate::error::{Error, Result};
use crate::scalar::{real, to_f64, Real};

/// `dr/dx` after stepping the observer `steps` cycles while the measured
/// state is held at `state` (with torque `tau`) and the observer was latched
/// at the unperturbed state.
///
/// The per-cycle drift terms are differentiated by central finite
/// differences; the recursion itself is propagated exactly.
pub fn residual_sensitivity<T: Real>(
    model: &SegmentModelT<T>,
    state: &SegmentStateT<T>,
    tau: &Vector2<T>,
    gain: &Vector6<T>,
    dt: T,
    steps: usize,
) -> Result<SMatrix<T, 6, 12>> {
    if !(to_f64(dt) > 0.0) {
        return Err(Error::InvalidParams("sensitivity dt must be > 0".into()));
    }
    if steps == 0 {
        return Err(Error::InvalidParams(
            "sensitivity needs at least one cycle".into(),
        ));
    }

    // d(M c_dot)/dx: configuration block through the mass partials, velocity
    // block through M itself.
    let mass = model.mass_matrix(&state.c)?;
    let partials = model.mass_matrix_partials(&state.c)?;
    let mut dp = SMatrix::<T, 6, 12>::zeros();
    for j in 0..6 {
        let col = partials[j] * state.c_dot;
        for i in 0..6 {
            dp[(i, j)] = col[i];
            dp[(i, 6 + j)] = mass[(i, j)];
        }
    }

    // Central differences of the remaining drift terms
    //   g(x) = N(c, c_dot)' c_dot - dV/dc - kappa_fric
    // over all twelve state entries.
    let drift = |s: &SegmentStateT<T>| -> Result<Vector6<T>> {
        let eval = model.evaluate(s, tau, &ContactInput::None)?;
        Ok(eval.coriolis.transpose() * s.c_dot - eval.potential_gradient - eval.friction)
    };
    let mut dg = SMatrix::<T, 6, 12>::zeros();
    let x0 = state.to_vector();
    for j in 0..12 {
        let h = real::<T>(1e-6) * T::one().max(x0[j].abs());
        let mut xp = x0;
        let mut xm = x0;
        xp[j] += h;
        xm[j] -= h;
        let gp = drift(&SegmentStateT::from_vector(&xp))?;
        let gm = drift(&SegmentStateT::from_vector(&xm))?;
        let col = (gp - gm) / (h + h);
        for i in 0..6 {
            dg[(i, j)] = col[i];
        }
    }

    // Exact propagation of the discrete observer recursion with the latched
    // momentum held fixed (the latch comes from the unperturbed state).
    let mut dr = SMatrix::<T, 6, 12>::zeros();
    let mut acc = SMatrix::<T, 6, 12>::zeros();
    for _ in 0..steps {
        let dphat = dg + dr;
        acc += dphat * dt;
        let diff = dp - acc;
        for i in 0..6 {
            for j in 0..12 {
                dr[(i, j)] = gain[i] * diff[(i, j)];
            }
        }
    }
    Ok(dr)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::SegmentParamsT;
    use crate::observer::{GmoConfig, GmoState};
    use approx::assert_relative_eq;

    fn model() -> SegmentModelT<f64> {
        SegmentModelT::with_reference_routing(SegmentParamsT::reference_distal()).unwrap()
    }

    fn frictionless_model() -> SegmentModelT<f64> {
        let mut p = SegmentParamsT::reference_distal();
        p.friction_coeffs = [0.0, 0.0];
        SegmentModelT::with_reference_routing(p).unwrap()
    }

    #[test]
    fn first_cycle_velocity_block_is_gain_times_mass() {
        // At the straight rest state the drift terms have no first-order
        // velocity dependence, so after one cycle dr/d(c_dot) collapses to
        // the gain-scaled mass matrix.
        let model = model();
        let state = SegmentStateT::zero();
        let gain = Vector6::new(10.0, 25.0, 25.0, 10.0, 25.0, 0.02);
        let drdx =
            residual_sensitivity(&model, &state, &Vector2::zeros(), &gain, 0.01, 1).unwrap();
        let mass = model.mass_matrix(&state.c).unwrap();
        for i in 0..6 {
            for j in 0..6 {
                assert_relative_eq!(
                    drdx[(i, 6 + j)],
                    gain[i] * mass[(i, j)],
                    max_relative = 1e-6,
                    epsilon = 1e-12
                );
            }
        }
    }

    #[test]
    fn recursion_matches_end_to_end_finite_differences() {
        // Oracle: perturb each state entry, replay the actual observer for n
        // cycles against the unperturbed latch, and difference the final
        // residuals.
        let model = model();
        let state = SegmentStateT::new(
            Vector6::new(0.6, -0.3, 0.15, -0.5, 0.25, 0.05),
            Vector6::new(0.2, -0.1, 0.05, 0.1, -0.15, 0.02),
        )
        .unwrap();
        let tau = Vector2::new(0.5, -0.2);
        let gain_value = 25.0;
        let gain = Vector6::repeat(gain_value);
        let dt = 0.01;
        let steps = 10;
        let drdx = residual_sensitivity(&model, &state, &tau, &gain, dt, steps).unwrap();

        let p_latch = model
            .generalized_momentum(&state.c, &state.c_dot)
            .unwrap();
        let run = |x: &nalgebra::SVector<f64, 12>| -> Vector6<f64> {
            let s = SegmentStateT::from_vector(x);
            let mut gmo = GmoState::new(
                GmoConfig {
                    gain,
                    dt,
                    window: None,
                    reset_horizon: 10_000,
                },
                p_latch,
            )
            .unwrap();
            let mut r = Vector6::zeros();
            for _ in 0..steps {
                r = gmo.step(&model, &s, &tau).unwrap();
            }
            r
        };
        let x0 = state.to_vector();
        let mut fd = SMatrix::<f64, 6, 12>::zeros();
        for j in 0..12 {
            let h = 1e-5 * x0[j].abs().max(1.0);
            let mut xp = x0;
            let mut xm = x0;
            xp[j] += h;
            xm[j] -= h;
            let col = (run(&xp) - run(&xm)) / (2.0 * h);
            for i in 0..6 {
                fd[(i, j)] = col[i];
            }
        }
        let err = (drdx - fd).norm();
        assert!(
            err <= 0.05 * fd.norm(),
            "sensitivity mismatch: {:.3e} vs matrix norm {:.3e}",
            err,
            fd.norm()
        );
    }

    #[test]
    fn frictionless_sensitivity_is_torque_independent() {
        // Without capstan friction the applied torque enters the residual
        // only through the exactly-linear routing map, which differentiates
        // to zero; dr/dx must not depend on tau.
        let model = frictionless_model();
        let state = SegmentStateT::new(
            Vector6::new(0.4, -0.2, 0.1, 0.3, -0.1, 0.0),
            Vector6::new(0.1, 0.05, -0.02, 0.08, -0.03, 0.01),
        )
        .unwrap();
        let gain = Vector6::repeat(10.0);
        let a = residual_sensitivity(&model, &state, &Vector2::new(0.9, -0.7), &gain, 0.01, 5)
            .unwrap();
        let b = residual_sensitivity(&model, &state, &Vector2::new(-2.0, 1.5), &gain, 0.01, 5)
            .unwrap();
        assert!((a - b).norm() <= 1e-10 * a.norm().max(1.0));
    }

    #[test]
    fn long_horizon_sensitivity_converges_to_minus_drift_gradient() {
        // Scalar analogue: r_{k} = (1 - K dt) r_{k-1} - K dt g  has the
        // fixed point r = -g, independent of gain and momentum. The matrix
        // recursion inherits it, which pins the steady-state sensitivity to
        // the negated drift gradient.
        let model = frictionless_model();
        let state = SegmentStateT::new(
            Vector6::new(0.5, -0.25, 0.1, -0.4, 0.2, 0.0),
            Vector6::zeros(),
        )
        .unwrap();
        let gain = Vector6::repeat(25.0);
        let dt = 0.01;
        let long = residual_sensitivity(&model, &state, &Vector2::zeros(), &gain, dt, 5000)
            .unwrap();
        let longer = residual_sensitivity(&model, &state, &Vector2::zeros(), &gain, dt, 5001)
            .unwrap();
        assert!((long - longer).norm() <= 1e-9 * long.norm());
        // Steady state equals -dg/dx: recover dg/dx from the one-cycle
        // matrix, dr_1 = K (dp - dg dt), as dg = (dp - K^{-1} dr_1) / dt.
        let one = residual_sensitivity(&model, &state, &Vector2::zeros(), &gain, dt, 1).unwrap();
        let mass = model.mass_matrix(&state.c).unwrap();
        let partials = model.mass_matrix_partials(&state.c).unwrap();
        let mut dp = SMatrix::<f64, 6, 12>::zeros();
        for j in 0..6 {
            let col = partials[j] * state.c_dot;
            for i in 0..6 {
                dp[(i, j)] = col[i];
                dp[(i, 6 + j)] = mass[(i, j)];
            }
        }
        let mut dg = SMatrix::<f64, 6, 12>::zeros();
        for i in 0..6 {
            for j in 0..12 {
                dg[(i, j)] = (dp[(i, j)] - one[(i, j)] / gain[i]) / dt;
            }
        }
        assert!(
            (long + dg).norm() <= 1e-6 * dg.norm().max(1e-12),
            "steady state {:.3e} vs -dg {:.3e}",
            long.norm(),
            dg.norm()
        );
    }

    #[test]
    fn gravity_gradient_dominates_at_rest() {
        // At rest with zero gain on all but one axis the sensitivity picks
        // up exactly that row; sanity-check the row scaling property.
        let model = model();
        let state = SegmentStateT::new(
            Vector6::new(0.3, 0.1, -0.05, 0.2, -0.1, 0.0),
            Vector6::zeros(),
        )
        .unwrap();
        let mut gain = Vector6::zeros();
        gain[1] = 10.0;
        let drdx =
            residual_sensitivity(&model, &state, &Vector2::zeros(), &gain, 0.01, 3).unwrap();
        for i in [0usize, 2, 3, 4, 5] {
            for j in 0..12 {
                assert_eq!(drdx[(i, j)], 0.0, "row {i} should be silent");
            }
        }
        assert!(drdx.row(1).iter().any(|v| v.abs() > 0.0));
    }

    #[test]
    fn invalid_arguments_are_rejected() {
        let model = model();
        let state = SegmentStateT::zero();
        assert!(residual_sensitivity(
            &model,
            &state,
            &Vector2::zeros(),
            &Vector6::repeat(1.0),
            0.0,
            5
        )
        .is_err());
        assert!(residual_sensitivity(
            &model,
            &state,
            &Vector2::zeros(),
            &Vector6::repeat(1.0),
            0.01,
            0
        )
        .is_err());
    }
}
