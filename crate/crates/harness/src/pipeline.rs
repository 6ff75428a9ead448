//! The shared measurement-and-estimation pipeline.
//!
//! Every scenario funnels through the same stages: simulate (or read) a
//! trajectory, derive the measured state series the estimators are allowed to
//! see, run the momentum observer and the force-deviation estimator side by
//! side, recover contact wrenches, and reduce to RMSE statistics.

use nalgebra::{Vector2, Vector6};
use rand::Rng;

use continuum_dynamics::dynamics::{ContactInput, SegmentStateT, WrenchT};
use continuum_dynamics::observer::{
    deviation_with_eval, estimate_wrench, GmoConfig, GmoState, WrenchProblem,
};
use continuum_dynamics::sim::{
    backward_difference, causal_gaussian_smooth, simulate, smoothed_derivative, DopriOptions,
    NoiseSpec, Trajectory,
};
use continuum_dynamics::{SegmentModel, SegmentState};

use crate::config::{ConstraintKind, ContactSchedule, EstimatorSettings};
use crate::error::{HarnessError, Result};

/// The state series an estimator consumes, after any noise, bias, smoothing,
/// or numerical differentiation.
#[derive(Debug, Clone)]
pub struct MeasuredStates {
    /// Sample spacing (s).
    pub dt: f64,
    /// Coefficient series.
    pub c: Vec<Vector6<f64>>,
    /// Rate series.
    pub c_dot: Vec<Vector6<f64>>,
    /// Acceleration series (used by the deviation estimator only).
    pub c_ddot: Vec<Vector6<f64>>,
}

impl MeasuredStates {
    /// Number of samples.
    pub fn len(&self) -> usize {
        self.c.len()
    }

    /// True when no samples are present.
    pub fn is_empty(&self) -> bool {
        self.c.is_empty()
    }
}

/// Exact model states: everything taken verbatim from the trajectory record.
pub fn exact_states(traj: &Trajectory<f64>) -> MeasuredStates {
    MeasuredStates {
        dt: traj.dt,
        c: traj.coeffs(),
        c_dot: traj.rates(),
        c_ddot: traj.accelerations(),
    }
}

/// Sensor-noise pipeline: peak-to-peak uniform noise on the coefficients,
/// then rates and accelerations by repeated smooth-and-difference, using a
/// causal Gaussian window of `smoothing` samples at each stage.
pub fn noisy_states<R: Rng>(
    traj: &Trajectory<f64>,
    amplitude: f64,
    smoothing: usize,
    rng: &mut R,
) -> Result<MeasuredStates> {
    let mut c = traj.coeffs();
    let spec = NoiseSpec::uniform(amplitude);
    continuum_dynamics::sim::perturb_series(&mut c, &spec, rng);
    let c_smooth = causal_gaussian_smooth(&c, smoothing)?;
    let c_dot = backward_difference(&c_smooth, traj.dt);
    let cd_smooth = causal_gaussian_smooth(&c_dot, smoothing)?;
    let c_ddot = backward_difference(&cd_smooth, traj.dt);
    Ok(MeasuredStates {
        dt: traj.dt,
        c,
        c_dot,
        c_ddot,
    })
}

/// Derived-rate pipeline: coefficients taken verbatim, rates and
/// accelerations formed by causal smoothing and backward differencing, the
/// way a bench setup with only shape sensing would form them.
pub fn derived_states(traj: &Trajectory<f64>, smoothing: usize) -> Result<MeasuredStates> {
    let c = traj.coeffs();
    let c_dot = smoothed_derivative(&c, traj.dt, smoothing)?;
    let c_ddot = smoothed_derivative(&c_dot, traj.dt, smoothing)?;
    Ok(MeasuredStates {
        dt: traj.dt,
        c,
        c_dot,
        c_ddot,
    })
}

/// Constant-state-error pipeline: coefficients and rates scaled by
/// `1 + epsilon`; accelerations re-derived by numerically differencing the
/// scaled rates, mirroring how an acceleration-free sensor stack would form
/// them.
pub fn biased_states(traj: &Trajectory<f64>, epsilon: f64) -> MeasuredStates {
    let scale = 1.0 + epsilon;
    let c: Vec<_> = traj.samples.iter().map(|s| s.c * scale).collect();
    let c_dot: Vec<_> = traj.samples.iter().map(|s| s.c_dot * scale).collect();
    let c_ddot = backward_difference(&c_dot, traj.dt);
    MeasuredStates {
        dt: traj.dt,
        c,
        c_dot,
        c_ddot,
    }
}

/// Per-sample output of both estimators over one trajectory.
#[derive(Debug, Clone)]
pub struct EstimationSeries {
    /// Sample times (s).
    pub t: Vec<f64>,
    /// Momentum-observer residual (post-filtered when configured).
    pub residual: Vec<Vector6<f64>>,
    /// Force-deviation residual (post-filtered when configured).
    pub deviation: Vec<Vector6<f64>>,
    /// Wrench recovered from the momentum residual.
    pub wrench_gmo: Vec<Vector6<f64>>,
    /// Wrench recovered from the deviation residual.
    pub wrench_jfd: Vec<Vector6<f64>>,
}

/// Where the contact wrench is resolved along the backbone.
#[derive(Debug, Clone, Copy)]
pub enum RecoverySite<'a> {
    /// One arclength for the whole run.
    Fixed(f64),
    /// One arclength per sample (replayed records carry the contact point).
    PerSample(&'a [f64]),
}

impl RecoverySite<'_> {
    fn at(&self, k: usize) -> f64 {
        match self {
            RecoverySite::Fixed(s) => *s,
            RecoverySite::PerSample(sites) => sites[k],
        }
    }

    fn len_matches(&self, n: usize) -> bool {
        match self {
            RecoverySite::Fixed(_) => true,
            RecoverySite::PerSample(sites) => sites.len() == n,
        }
    }
}

/// Runs both estimators over a measured series.
///
/// `taus` is the known actuation record; `known_force` is any additional
/// generalized force the estimators should treat as explained (reaction
/// moments from downstream hardware), usually zero. `site` is where the
/// contact wrench is resolved.
pub fn run_estimators(
    model: &SegmentModel,
    states: &MeasuredStates,
    taus: &[Vector2<f64>],
    known_force: Option<&[Vector6<f64>]>,
    site: RecoverySite<'_>,
    settings: &EstimatorSettings,
) -> Result<EstimationSeries> {
    let n = states.len();
    if n == 0 {
        return Err(HarnessError::Validation("empty measured series".into()));
    }
    if taus.len() != n {
        return Err(HarnessError::Validation(format!(
            "torque record length {} does not match state series length {n}",
            taus.len()
        )));
    }
    if let Some(extra) = known_force {
        if extra.len() != n {
            return Err(HarnessError::Validation(format!(
                "known-force record length {} does not match state series length {n}",
                extra.len()
            )));
        }
    }
    if !site.len_matches(n) {
        return Err(HarnessError::Validation(
            "recovery-site record length does not match state series length".into(),
        ));
    }

    let config = GmoConfig {
        gain: settings.gain,
        dt: states.dt,
        window: settings.window,
        reset_horizon: settings.reset_horizon,
    };
    let initial = SegmentState::new(states.c[0], states.c_dot[0])?;
    let mut gmo = GmoState::from_state(config, model, &initial)?;

    let problem_at = |arclength: f64| {
        let mut problem = match settings.constraint {
            ConstraintKind::PlanarForce => WrenchProblem::planar_force(arclength),
            ConstraintKind::Unconstrained => WrenchProblem::unconstrained(arclength),
        };
        problem.weight = settings.weight;
        problem
    };

    let mut t = Vec::with_capacity(n);
    let mut residual = Vec::with_capacity(n);
    let mut deviation = Vec::with_capacity(n);
    let mut wrench_gmo = Vec::with_capacity(n);
    let mut wrench_jfd = Vec::with_capacity(n);

    for k in 0..n {
        let state = SegmentState::new(states.c[k], states.c_dot[k])?;
        let mut eval = model.evaluate(&state, &taus[k], &ContactInput::None)?;
        if let Some(extra) = known_force {
            // Known non-contact forces are explained, so they enter the
            // bookkeeping on the actuation side.
            eval.actuation += extra[k];
        }
        let r = gmo.step_with_eval(&eval, &states.c_dot[k]);
        let kappa = deviation_with_eval(&eval, &states.c_dot[k], &states.c_ddot[k]);
        let problem = problem_at(site.at(k));
        let w_gmo = estimate_wrench(model, &states.c[k], &r, &problem)?;
        let w_jfd = estimate_wrench(model, &states.c[k], &kappa, &problem)?;
        t.push(states.dt * k as f64);
        residual.push(r);
        deviation.push(kappa);
        wrench_gmo.push(w_gmo.wrench.to_vector());
        wrench_jfd.push(w_jfd.wrench.to_vector());
    }

    if settings.filter_gmo > 1 {
        residual = causal_gaussian_smooth(&residual, settings.filter_gmo)?;
        wrench_gmo = causal_gaussian_smooth(&wrench_gmo, settings.filter_gmo)?;
    }
    if settings.filter_jfd > 1 {
        deviation = causal_gaussian_smooth(&deviation, settings.filter_jfd)?;
        wrench_jfd = causal_gaussian_smooth(&wrench_jfd, settings.filter_jfd)?;
    }

    Ok(EstimationSeries {
        t,
        residual,
        deviation,
        wrench_gmo,
        wrench_jfd,
    })
}

/// Root-mean-square error of one wrench component against the truth series.
pub fn rmse_component(estimate: &[Vector6<f64>], truth: &[Vector6<f64>], index: usize) -> f64 {
    debug_assert_eq!(estimate.len(), truth.len());
    if estimate.is_empty() {
        return 0.0;
    }
    let acc: f64 = estimate
        .iter()
        .zip(truth.iter())
        .map(|(e, t)| (e[index] - t[index]).powi(2))
        .sum();
    (acc / estimate.len() as f64).sqrt()
}

/// RMSE of the force-vector mismatch norm `‖f_true - f_est‖`.
pub fn rmse_force_norm(estimate: &[Vector6<f64>], truth: &[Vector6<f64>]) -> f64 {
    if estimate.is_empty() {
        return 0.0;
    }
    let acc: f64 = estimate
        .iter()
        .zip(truth.iter())
        .map(|(e, t)| {
            let dx = e[0] - t[0];
            let dy = e[1] - t[1];
            let dz = e[2] - t[2];
            dx * dx + dy * dy + dz * dz
        })
        .sum();
    (acc / estimate.len() as f64).sqrt()
}

/// RMSE of the angle between estimated and true force directions, over the
/// samples where both are large enough for a direction to be meaningful.
pub fn rmse_force_direction(
    estimate: &[Vector6<f64>],
    truth: &[Vector6<f64>],
    min_norm: f64,
) -> f64 {
    let mut acc = 0.0;
    let mut count = 0usize;
    for (e, t) in estimate.iter().zip(truth.iter()) {
        let fe = nalgebra::Vector3::new(e[0], e[1], e[2]);
        let ft = nalgebra::Vector3::new(t[0], t[1], t[2]);
        let (ne, nt) = (fe.norm(), ft.norm());
        if ne > min_norm && nt > min_norm {
            let cosine = (fe.dot(&ft) / (ne * nt)).clamp(-1.0, 1.0);
            acc += cosine.acos().powi(2);
            count += 1;
        }
    }
    if count == 0 {
        0.0
    } else {
        (acc / count as f64).sqrt()
    }
}

/// Simulates a ramped-and-held contact schedule from straight rest.
///
/// The wrench and the capstan torques both scale linearly from zero over
/// `schedule.ramp`, then hold at their targets until `schedule.duration`.
pub fn ramp_schedule_sim(
    model: &SegmentModel,
    schedule: &ContactSchedule,
    sample_rate: f64,
    options: &DopriOptions<f64>,
) -> Result<Trajectory<f64>> {
    let wrench = schedule.wrench;
    let torque = schedule.torque;
    let ramp = schedule.ramp;
    let location = schedule.location;
    let scale = move |t: f64| (t / ramp).clamp(0.0, 1.0);
    let tau_fn = move |t: f64, _: &SegmentStateT<f64>| torque * scale(t);
    let contact_fn = move |t: f64| {
        let s = scale(t);
        if s == 0.0 {
            ContactInput::None
        } else {
            ContactInput::Wrench {
                wrench: WrenchT {
                    force: nalgebra::Vector3::new(wrench[0] * s, wrench[1] * s, wrench[2] * s),
                    moment: nalgebra::Vector3::new(wrench[3] * s, wrench[4] * s, wrench[5] * s),
                },
                location,
            }
        }
    };
    let traj = simulate(
        model,
        &SegmentState::zero(),
        &tau_fn,
        &contact_fn,
        schedule.duration,
        sample_rate,
        options,
    )?;
    Ok(traj)
}

/// True wrench series of a trajectory record.
pub fn truth_wrenches(traj: &Trajectory<f64>) -> Vec<Vector6<f64>> {
    traj.samples.iter().map(|s| s.wrench).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::EstimatorSettings;
    use approx::assert_relative_eq;
    use continuum_dynamics::SegmentParams;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn model() -> SegmentModel {
        SegmentModel::with_reference_routing(SegmentParams::reference_distal()).unwrap()
    }

    fn short_schedule(model: &SegmentModel) -> ContactSchedule {
        ContactSchedule {
            location: model.params().length,
            wrench: Vector6::new(4.0, -3.0, 0.0, 0.0, 0.0, 0.0),
            torque: Vector2::zeros(),
            ramp: 0.3,
            duration: 0.6,
        }
    }

    #[test]
    fn exact_pipeline_recovers_the_held_wrench() {
        let model = model();
        let schedule = short_schedule(&model);
        let traj =
            ramp_schedule_sim(&model, &schedule, 100.0, &DopriOptions::default()).unwrap();
        let states = exact_states(&traj);
        let mut settings = EstimatorSettings::default();
        settings.gain = Vector6::repeat(25.0);
        let taus = traj.torques();
        let series = run_estimators(
            &model,
            &states,
            &taus,
            None,
            RecoverySite::Fixed(schedule.location),
            &settings,
        )
        .unwrap();
        // With exact states the deviation estimator reproduces the wrench to
        // numerical precision; the momentum observer converges to it after a
        // few time constants.
        let last = series.t.len() - 1;
        assert_relative_eq!(series.wrench_jfd[last][0], 4.0, epsilon = 1e-6);
        assert_relative_eq!(series.wrench_jfd[last][1], -3.0, epsilon = 1e-6);
        assert_relative_eq!(series.wrench_gmo[last][0], 4.0, epsilon = 0.15);
        assert_relative_eq!(series.wrench_gmo[last][1], -3.0, epsilon = 0.15);
        // Planar recovery keeps the constrained components at zero.
        assert!(series.wrench_gmo[last][2].abs() < 1e-10);
        assert!(series.wrench_jfd[last][5].abs() < 1e-10);
    }

    #[test]
    fn noisy_pipeline_is_deterministic_per_seed() {
        let model = model();
        let schedule = short_schedule(&model);
        let traj =
            ramp_schedule_sim(&model, &schedule, 100.0, &DopriOptions::default()).unwrap();
        let a = noisy_states(&traj, 0.001, 10, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        let b = noisy_states(&traj, 0.001, 10, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
        for (x, y) in a.c.iter().zip(b.c.iter()) {
            for i in 0..6 {
                assert_eq!(x[i].to_bits(), y[i].to_bits());
            }
        }
        // And the noise does change the series.
        let clean = exact_states(&traj);
        let moved = a
            .c
            .iter()
            .zip(clean.c.iter())
            .any(|(x, y)| (x - y).norm() > 1e-5);
        assert!(moved);
    }

    #[test]
    fn biased_states_scale_and_redifference() {
        let model = model();
        let schedule = short_schedule(&model);
        let traj =
            ramp_schedule_sim(&model, &schedule, 100.0, &DopriOptions::default()).unwrap();
        let eps = 0.1;
        let biased = biased_states(&traj, eps);
        let k = traj.len() / 2;
        assert_relative_eq!(biased.c[k][0], traj.samples[k].c[0] * 1.1, epsilon = 1e-12);
        assert_relative_eq!(
            biased.c_dot[k][3],
            traj.samples[k].c_dot[3] * 1.1,
            epsilon = 1e-12
        );
        // Accelerations come from differencing the biased rates, not from
        // scaling the recorded accelerations.
        let manual = (biased.c_dot[k] - biased.c_dot[k - 1]) / traj.dt;
        assert_relative_eq!((biased.c_ddot[k] - manual).norm(), 0.0, epsilon = 1e-12);
    }

    #[test]
    fn known_forces_are_explained_away() {
        // Injecting a known generalized force into both the simulation and
        // the estimator bookkeeping must collapse the residual relative to a
        // run that ignores the injection.
        let model = model();
        let injected = Vector6::new(0.4, -0.2, 0.1, 0.3, -0.1, 0.05);
        let tau_fn = |_: f64, _: &SegmentStateT<f64>| Vector2::zeros();
        let contact_fn = |_: f64| ContactInput::Generalized(injected);
        let traj = simulate(
            &model,
            &SegmentState::zero(),
            &tau_fn,
            &contact_fn,
            0.5,
            1000.0,
            &DopriOptions::default(),
        )
        .unwrap();
        let states = exact_states(&traj);
        let taus = traj.torques();
        let known: Vec<Vector6<f64>> = vec![injected; states.len()];
        let mut settings = EstimatorSettings::default();
        settings.gain = Vector6::repeat(25.0);
        let explained = run_estimators(
            &model,
            &states,
            &taus,
            Some(&known),
            RecoverySite::Fixed(model.params().length),
            &settings,
        )
        .unwrap();
        let ignored = run_estimators(
            &model,
            &states,
            &taus,
            None,
            RecoverySite::Fixed(model.params().length),
            &settings,
        )
        .unwrap();
        let last = explained.t.len() - 1;
        assert!(
            explained.deviation[last].norm() < 1e-6,
            "deviation {:.3e}",
            explained.deviation[last].norm()
        );
        // The ignored run must surface the injected force; the explained run
        // sits at the observer's discretization floor, far below it.
        assert!(ignored.residual[last].norm() > 0.25);
        assert!(
            explained.residual[last].norm() < 0.05 * ignored.residual[last].norm(),
            "explained {:.3e} vs ignored {:.3e}",
            explained.residual[last].norm(),
            ignored.residual[last].norm()
        );
    }

    #[test]
    fn rmse_reductions_match_hand_values() {
        let truth = vec![Vector6::new(3.0, 4.0, 0.0, 0.0, 0.0, 0.0); 4];
        let mut est = truth.clone();
        est[2][0] = 5.0; // one sample off by 2 in x
        assert_relative_eq!(rmse_component(&est, &truth, 0), 1.0, epsilon = 1e-12);
        assert_relative_eq!(rmse_component(&est, &truth, 1), 0.0, epsilon = 1e-12);
        assert_relative_eq!(rmse_force_norm(&est, &truth), 1.0, epsilon = 1e-12);
        // Rotating one force by 90 degrees gives a known angle sample.
        let mut rot = truth.clone();
        rot[1][0] = -4.0;
        rot[1][1] = 3.0;
        let expected = (std::f64::consts::FRAC_PI_2.powi(2) / 4.0).sqrt();
        assert_relative_eq!(
            rmse_force_direction(&rot, &truth, 0.5),
            expected,
            epsilon = 1e-12
        );
    }
}
