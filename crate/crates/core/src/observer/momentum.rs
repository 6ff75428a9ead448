//! Windowed generalized-momentum observer.
//!
//! External contact shows up as unexplained drift of the generalized momentum
//! `p = M(c) c_dot`. The observer books every modeled contribution to
//! `p_dot` (Coriolis transpose, potential gradient, actuation, friction) into
//! a running sum and feeds the unexplained remainder back through a diagonal
//! gain, producing a residual `r` that tracks the generalized contact force
//! like a first-order low-pass filter with time constant `1 / K_o`.

use std::collections::VecDeque;

use nalgebra::{Vector2, Vector6};

use crate::dynamics::{ContactInput, ModelEval, SegmentModelT, SegmentStateT};
use crate::error::{Error, Result};
use crate::scalar::{to_f64, Real};

/// Fixed configuration of one observer instance.
#[derive(Debug, Clone)]
pub struct GmoConfig<T: Real> {
    /// Diagonal entries of the residual gain `K_o` (1/s).
    pub gain: Vector6<T>,
    /// Cycle time between samples (s).
    pub dt: T,
    /// Number of retained `p_hat_dot` samples in the moving sum; `None`
    /// accumulates everything since the last reset.
    pub window: Option<usize>,
    /// Cycle count after which the observer re-latches (counter, accumulator,
    /// and residual all clear); guards against unbounded accumulation.
    pub reset_horizon: usize,
}

impl<T: Real> GmoConfig<T> {
    /// Uniform gain at the standard 100 Hz cycle with a 30 s reset horizon.
    pub fn uniform(gain: T, dt: T) -> Self {
        Self {
            gain: Vector6::repeat(gain),
            dt,
            window: None,
            reset_horizon: 3000,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(to_f64(self.dt) > 0.0) {
            return Err(Error::InvalidParams("observer dt must be > 0".into()));
        }
        if self.gain.iter().any(|g| to_f64(*g) < 0.0) {
            return Err(Error::InvalidParams(
                "observer gains must be nonnegative".into(),
            ));
        }
        if let Some(n) = self.window {
            if n == 0 {
                return Err(Error::InvalidParams("observer window must be >= 1".into()));
            }
        }
        if self.reset_horizon == 0 {
            return Err(Error::InvalidParams(
                "observer reset horizon must be >= 1".into(),
            ));
        }
        Ok(())
    }
}

/// Mutable observer state; step it once per sample, in order.
#[derive(Debug, Clone)]
pub struct GmoState<T: Real> {
    config: GmoConfig<T>,
    /// Momentum latched at the last reset.
    p1: Vector6<T>,
    /// Retained `p_hat_dot` samples when a finite window is configured.
    buffer: VecDeque<Vector6<T>>,
    /// Running sum of `p_hat_dot * dt` over the window.
    integral: Vector6<T>,
    /// Residual from the previous cycle.
    r: Vector6<T>,
    /// Cycles since the last reset.
    k: usize,
}

impl<T: Real> GmoState<T> {
    /// Observer initialized with the momentum at the starting sample.
    pub fn new(config: GmoConfig<T>, p_initial: Vector6<T>) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            config,
            p1: p_initial,
            buffer: VecDeque::new(),
            integral: Vector6::zeros(),
            r: Vector6::zeros(),
            k: 0,
        })
    }

    /// Observer initialized from the model at a known starting state.
    pub fn from_state(
        config: GmoConfig<T>,
        model: &SegmentModelT<T>,
        state: &SegmentStateT<T>,
    ) -> Result<Self> {
        let p = model.generalized_momentum(&state.c, &state.c_dot)?;
        Self::new(config, p)
    }

    /// Latest residual.
    pub fn residual(&self) -> Vector6<T> {
        self.r
    }

    /// Cycles since the last reset.
    pub fn cycles(&self) -> usize {
        self.k
    }

    /// Observer configuration.
    pub fn config(&self) -> &GmoConfig<T> {
        &self.config
    }

    /// Advances one cycle from precomputed dynamics terms.
    ///
    /// `eval` must be evaluated at the measured state with the applied
    /// torques and no contact; its `contact` field is ignored.
    pub fn step_with_eval(&mut self, eval: &ModelEval<T>, c_dot: &Vector6<T>) -> Vector6<T> {
        let dt = self.config.dt;
        let p = eval.mass * c_dot;
        let p_hat_dot = eval.coriolis.transpose() * c_dot - eval.potential_gradient
            + eval.actuation
            - eval.friction
            + self.r;

        self.integral += p_hat_dot * dt;
        if let Some(n) = self.config.window {
            self.buffer.push_back(p_hat_dot);
            if self.buffer.len() > n {
                let oldest = self.buffer.pop_front().unwrap();
                self.integral -= oldest * dt;
            }
        }

        let mut r_new = Vector6::zeros();
        for i in 0..6 {
            r_new[i] = self.config.gain[i] * (p[i] - self.p1[i] - self.integral[i]);
        }
        self.r = r_new;
        self.k += 1;
        if self.k >= self.config.reset_horizon {
            // Re-latch and clear; the reset cycle publishes the cleared
            // residual so downstream consumers never see a stale value.
            self.p1 = p;
            self.buffer.clear();
            self.integral = Vector6::zeros();
            self.r = Vector6::zeros();
            self.k = 0;
        }
        self.r
    }

    /// Advances one cycle directly from a measured state and torque.
    pub fn step(
        &mut self,
        model: &SegmentModelT<T>,
        state: &SegmentStateT<T>,
        tau: &Vector2<T>,
    ) -> Result<Vector6<T>> {
        let eval = model.evaluate(state, tau, &ContactInput::None)?;
        Ok(self.step_with_eval(&eval, &state.c_dot))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::SegmentParamsT;
    use crate::sim::{simulate, DopriOptions};
    use approx::assert_relative_eq;
    use nalgebra::Vector3;

    fn frictionless_zero_g_model() -> SegmentModelT<f64> {
        let mut params = SegmentParamsT::reference_distal();
        params.gravity = Vector3::zeros();
        params.friction_coeffs = [0.0, 0.0];
        SegmentModelT::with_reference_routing(params).unwrap()
    }

    #[test]
    fn static_contact_free_robot_keeps_zero_residual() {
        let model = SegmentModelT::with_reference_routing(
            SegmentParamsT::reference_distal(),
        )
        .unwrap();
        // Hold an arbitrary static shape: c_dot = 0, constant c. Whatever
        // torque is applied, the bookkeeping must balance exactly.
        let state = SegmentStateT::new(
            Vector6::new(0.8, -0.2, 0.1, -1.1, 0.4, -0.1),
            Vector6::zeros(),
        )
        .unwrap();
        let tau = Vector2::new(0.9, -0.4);
        // A static state does not solve the EOM without contact; the observer
        // sees the imbalance as a genuine generalized force. Use the
        // *consistent* static case instead: kappa balances the potential.
        let eval = model.evaluate(&state, &tau, &ContactInput::None).unwrap();
        let balancing = ContactInput::Generalized(
            eval.potential_gradient - eval.actuation + eval.friction,
        );
        // With that balance the state is an equilibrium; replaying it through
        // the observer must keep r at zero.
        let mut gmo = GmoState::from_state(
            GmoConfig::uniform(10.0, 0.01),
            &model,
            &state,
        )
        .unwrap();
        for _ in 0..200 {
            let mut eval_k = model.evaluate(&state, &tau, &ContactInput::None).unwrap();
            // Inject the balancing force as part of the modeled actuation so
            // the scenario is contact-free by construction.
            if let ContactInput::Generalized(f) = &balancing {
                eval_k.actuation += *f;
            }
            let r = gmo.step_with_eval(&eval_k, &state.c_dot);
            assert!(r.norm() < 1e-10, "residual leaked: {:.3e}", r.norm());
        }
    }

    #[test]
    fn constant_generalized_force_yields_first_order_response() {
        // Static, contact-free equilibrium plus a suddenly applied constant
        // generalized force f: the residual must follow the discrete
        // first-order filter response r_k -> f(1 - (1 - K_o dt)^k).
        let model = frictionless_zero_g_model();
        let state = SegmentStateT::zero();
        let gain = 10.0;
        let dt = 1e-3;
        let mut gmo = GmoState::from_state(
            GmoConfig::uniform(gain, dt),
            &model,
            &state,
        )
        .unwrap();
        let f = Vector6::new(0.5, -0.2, 0.1, 0.3, -0.4, 0.2);
        // The applied force holds the state away from equilibrium; in this
        // synthetic check the state stays pinned while p drifts according to
        // the unmodeled force, which is exactly what the observer integrates.
        // Simulate that bookkeeping: p grows by f dt each cycle.
        let mut p = model.generalized_momentum(&state.c, &state.c_dot).unwrap();
        let eval0 = model
            .evaluate(&state, &Vector2::zeros(), &ContactInput::None)
            .unwrap();
        for k in 1..=400 {
            // True momentum drift under force f at the pinned state.
            p += (eval0.actuation - eval0.potential_gradient + f) * dt;
            let mut eval = eval0.clone();
            eval.mass = nalgebra::Matrix6::identity();
            // Feed momentum directly: choose c_dot so that M c_dot = p.
            let r = gmo.step_with_eval(&eval, &p);
            let r_expected = f * (1.0 - (1.0 - gain * dt).powi(k));
            assert_relative_eq!(r, r_expected, epsilon = 1e-9 + 0.02 * r_expected.norm());
        }
        // After many time constants the residual equals the applied force.
        assert_relative_eq!(gmo.residual(), f, max_relative = 2e-2);
    }

    #[test]
    fn reset_clears_residual_and_relatches_momentum() {
        let model = frictionless_zero_g_model();
        let state = SegmentStateT::zero();
        let config = GmoConfig {
            gain: Vector6::repeat(10.0),
            dt: 0.01,
            window: None,
            reset_horizon: 50,
        };
        let mut gmo = GmoState::from_state(config, &model, &state).unwrap();
        let f = Vector6::repeat(0.4);
        let eval0 = model
            .evaluate(&state, &Vector2::zeros(), &ContactInput::None)
            .unwrap();
        let mut p = Vector6::zeros();
        let mut saw_nonzero = false;
        for k in 1..=120 {
            p += (eval0.actuation - eval0.potential_gradient + f) * 0.01;
            let mut eval = eval0.clone();
            eval.mass = nalgebra::Matrix6::identity();
            let r = gmo.step_with_eval(&eval, &p);
            if k % 50 == 0 {
                // Reset cycle: residual cleared, counter back to zero.
                assert_eq!(gmo.cycles(), 0);
                assert_eq!(r.norm(), 0.0);
            } else if gmo.cycles() > 10 {
                // Far enough past the latest reset the residual has regrown.
                saw_nonzero = true;
                assert!(r.norm() > 0.1);
            }
        }
        assert!(saw_nonzero);
    }

    #[test]
    fn windowed_sum_drops_old_terms() {
        // With a finite window the integral only spans the last n samples,
        // so a transient force older than the window stops influencing r.
        let model = frictionless_zero_g_model();
        let state = SegmentStateT::zero();
        let mk = |window: Option<usize>| {
            GmoState::from_state(
                GmoConfig {
                    gain: Vector6::repeat(10.0),
                    dt: 0.01,
                    window,
                    reset_horizon: 100_000,
                },
                &model,
                &state,
            )
            .unwrap()
        };
        let mut windowed = mk(Some(20));
        let mut full = mk(None);
        let eval0 = model
            .evaluate(&state, &Vector2::zeros(), &ContactInput::None)
            .unwrap();
        let mut p = Vector6::zeros();
        for k in 1..=300 {
            let f = if k <= 5 { Vector6::repeat(1.0) } else { Vector6::zeros() };
            p += (eval0.actuation - eval0.potential_gradient + f) * 0.01;
            let mut eval = eval0.clone();
            eval.mass = nalgebra::Matrix6::identity();
            windowed.step_with_eval(&eval, &p);
            full.step_with_eval(&eval, &p);
        }
        // The full-window observer still remembers the early impulse through
        // its latched p1 bookkeeping (the residual converged back to zero in
        // both cases), but the windowed integral now differs from the full
        // one: the windowed observer attributes the old impulse to momentum
        // offset instead.
        assert!(windowed.residual().norm() > 1e-3);
        assert!(full.residual().norm() < 1e-6);
    }

    #[test]
    fn pipeline_residual_tracks_simulated_tip_wrench() {
        // End-to-end sanity on the real pipeline: simulate a tip force,
        // replay the recorded states through the observer, and require the
        // residual to approach the true generalized contact force.
        let model = frictionless_zero_g_model();
        let length = model.params().length;
        let wrench = crate::dynamics::WrenchT {
            force: Vector3::new(4.0, -3.0, 0.0),
            moment: Vector3::zeros(),
        };
        let contact = move |_t: f64| ContactInput::Wrench {
            wrench: wrench.clone(),
            location: length,
        };
        let traj = simulate(
            &model,
            &SegmentStateT::zero(),
            &|_, _| Vector2::zeros(),
            &contact,
            1.5,
            100.0,
            &DopriOptions::default(),
        )
        .unwrap();
        let mut gmo = GmoState::new(
            GmoConfig::uniform(25.0, 0.01),
            model
                .generalized_momentum(&traj.samples[0].c, &traj.samples[0].c_dot)
                .unwrap(),
        )
        .unwrap();
        let mut r = Vector6::zeros();
        for s in &traj.samples[1..] {
            let state = SegmentStateT::new(s.c, s.c_dot).unwrap();
            r = gmo.step(&model, &state, &s.tau).unwrap();
        }
        let truth = model
            .distal_reaction(
                &traj.samples.last().unwrap().c,
                &crate::dynamics::WrenchT {
                    force: Vector3::new(4.0, -3.0, 0.0),
                    moment: Vector3::zeros(),
                },
            )
            .unwrap();
        // 1.5 s at K_o = 25 is ~37 time constants; the frictionless segment
        // still rings, so the residual lags the instantaneous truth by
        // ~1/K_o. Normwise agreement is the meaningful check here.
        assert!(
            (r - truth).norm() <= 0.05 * truth.norm(),
            "residual {:.4e} off truth {:.4e}",
            (r - truth).norm(),
            truth.norm()
        );
    }

    #[test]
    fn invalid_configs_are_rejected() {
        assert!(GmoState::<f64>::new(
            GmoConfig {
                gain: Vector6::repeat(-1.0),
                dt: 0.01,
                window: None,
                reset_horizon: 10
            },
            Vector6::zeros()
        )
        .is_err());
        assert!(GmoState::<f64>::new(
            GmoConfig {
                gain: Vector6::repeat(1.0),
                dt: 0.0,
                window: None,
                reset_horizon: 10
            },
            Vector6::zeros()
        )
        .is_err());
        assert!(GmoState::<f64>::new(
            GmoConfig {
                gain: Vector6::repeat(1.0),
                dt: 0.01,
                window: Some(0),
                reset_horizon: 10
            },
            Vector6::zeros()
        )
        .is_err());
    }
}
