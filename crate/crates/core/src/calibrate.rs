//! Bounded parameter identification from recorded motion.
//!
//! Four parameters are identified per segment — the two bending stiffnesses
//! and the two capstan friction coefficients — by replaying the recorded
//! actuation through candidate models and matching the recorded coefficient
//! trajectory in the least-squares sense. The search is a Nelder-Mead
//! simplex constrained to the physical box by boundary reflection; candidate
//! simulations that blow up contribute a large finite penalty instead of
//! aborting the search.

use nalgebra::Vector2;

use crate::dynamics::{ContactInput, SegmentModelT, SegmentParamsT, SegmentStateT};
use crate::error::{Error, Result};
use crate::scalar::{real, to_f64, Real};
use crate::sim::{simulate, Chirp, DopriOptions, Trajectory};

/// Objective value charged to candidates whose simulation fails.
const BLOWUP_PENALTY: f64 = 1e6;
/// Tracking gains that give the reference segment a well-damped ~5 Hz
/// closed loop on the capstan angle (the reflected capstan inertia
/// dominates, so the damping gain is sized against it).
pub const DEFAULT_TRACKING_KP: f64 = 20.0;
/// Companion derivative gain to [`DEFAULT_TRACKING_KP`].
pub const DEFAULT_TRACKING_KD: f64 = 0.75;
/// Strictly positive floor keeping scaled parameters off the open boundary.
const SCALED_FLOOR: f64 = 1e-6;
/// Scaled edge length of the opening simplex. Deliberately large: the
/// objective is flat in a friction coefficient wherever the candidate locks
/// its capstan (every coefficient above the lock threshold replays the same
/// frozen motion), so the opening vertices must straddle the lock threshold
/// to pick up any slope at all.
const INITIAL_SIMPLEX_STEP: f64 = 0.45;

/// Box bounds for `[EI_x, EI_y, mu_1, mu_2]`; the lower bound is the open
/// boundary at zero.
#[derive(Debug, Clone)]
pub struct ParameterBounds<T: Real> {
    /// Inclusive upper bound per parameter.
    pub upper: [T; 4],
}

impl<T: Real> Default for ParameterBounds<T> {
    fn default() -> Self {
        Self {
            upper: [real(2.5), real(2.5), T::one(), T::one()],
        }
    }
}

/// One identification task: template model, recorded data, solver budget.
#[derive(Debug, Clone)]
pub struct CalibrationProblem<'a, T: Real> {
    /// Geometry and inertia of the segment; stiffness and friction entries
    /// are overwritten by each candidate.
    pub template: &'a SegmentParamsT<T>,
    /// Recorded coefficient/torque history to match.
    pub recorded: &'a Trajectory<T>,
    /// Parameter box.
    pub bounds: ParameterBounds<T>,
    /// Integrator settings for candidate replays.
    pub options: DopriOptions<T>,
    /// Evaluation budget for the search.
    pub max_evaluations: usize,
    /// Convergence tolerance on the scaled simplex (size and value spread).
    pub tolerance: T,
}

impl<'a, T: Real> CalibrationProblem<'a, T> {
    /// Standard setup: default bounds, slightly relaxed candidate-replay
    /// tolerances, 200-evaluation budget.
    pub fn new(template: &'a SegmentParamsT<T>, recorded: &'a Trajectory<T>) -> Self {
        Self {
            template,
            recorded,
            bounds: ParameterBounds::default(),
            options: DopriOptions {
                rtol: real(1e-4),
                atol: real(1e-6),
                ..DopriOptions::default()
            },
            max_evaluations: 200,
            tolerance: real(1e-6),
        }
    }

    /// Candidate model with `alpha = [EI_x, EI_y, mu_1, mu_2]` substituted.
    pub fn model_for(&self, alpha: &[T; 4]) -> Result<SegmentModelT<T>> {
        let mut params = self.template.clone();
        params.bending_stiffness = (alpha[0], alpha[1]);
        params.friction_coeffs = [alpha[2], alpha[3]];
        SegmentModelT::with_reference_routing(params)
    }

    /// Replay objective: half the summed squared coefficient error over the
    /// recorded grid, or the blow-up penalty when the candidate fails.
    pub fn objective(&self, alpha: &[T; 4]) -> T {
        match self.replay(alpha) {
            Ok(candidate) => {
                let mut acc = T::zero();
                for (rec, sim) in self.recorded.samples.iter().zip(candidate.samples.iter()) {
                    let d = rec.c - sim.c;
                    acc += d.dot(&d);
                }
                acc * real::<T>(0.5)
            }
            Err(_) => real(BLOWUP_PENALTY),
        }
    }

    /// Simulates the candidate under the recorded actuation (linearly
    /// interpolated between samples) from the recorded initial state.
    pub fn replay(&self, alpha: &[T; 4]) -> Result<Trajectory<T>> {
        let model = self.model_for(alpha)?;
        let rec = self.recorded;
        if rec.samples.len() < 2 {
            return Err(Error::InvalidParams(
                "calibration needs at least two recorded samples".into(),
            ));
        }
        let initial = SegmentStateT::new(rec.samples[0].c, rec.samples[0].c_dot)?;
        let t_end = rec.dt * real::<T>((rec.samples.len() - 1) as f64);
        let tau_fn = |t: T, _state: &SegmentStateT<T>| interpolate_tau(rec, t);
        simulate(
            &model,
            &initial,
            &tau_fn,
            &|_| ContactInput::None,
            t_end,
            T::one() / rec.dt,
            &self.options,
        )
    }
}

/// Linear interpolation of the recorded torque signal, clamped at the ends.
pub fn interpolate_tau<T: Real>(traj: &Trajectory<T>, t: T) -> Vector2<T> {
    let n = traj.samples.len();
    let x = to_f64(t / traj.dt);
    if x <= 0.0 {
        return traj.samples[0].tau;
    }
    let k = x.floor() as usize;
    if k + 1 >= n {
        return traj.samples[n - 1].tau;
    }
    let frac = real::<T>(x - k as f64);
    traj.samples[k].tau * (T::one() - frac) + traj.samples[k + 1].tau * frac
}

/// Identified parameters plus fit diagnostics.
#[derive(Debug, Clone)]
pub struct CalibrationResult<T: Real> {
    /// Best `[EI_x, EI_y, mu_1, mu_2]` found.
    pub alpha: [T; 4],
    /// Objective at `alpha`.
    pub objective: T,
    /// Tip-position RMSE of the fitted replay, per axis, millimetres.
    pub tip_rmse_mm: [T; 3],
    /// Objective evaluations spent.
    pub evaluations: usize,
    /// Best objective seen after each evaluation (non-increasing).
    pub objective_history: Vec<T>,
    /// Whether the simplex met the tolerance before the budget ran out.
    pub converged: bool,
}

/// Runs the bounded identification.
pub fn calibrate<T: Real>(problem: &CalibrationProblem<'_, T>) -> Result<CalibrationResult<T>> {
    if problem.max_evaluations < 10 {
        return Err(Error::Calibration(
            "evaluation budget too small for an oriented 4-simplex".into(),
        ));
    }
    let upper = problem.bounds.upper;
    if upper.iter().any(|u| !(to_f64(*u) > 0.0)) {
        return Err(Error::Calibration("upper bounds must be positive".into()));
    }
    // Search in coordinates scaled by the upper bound so every direction
    // moves comparably; start from the box midpoint.
    let scale = upper;
    let objective_scaled = |y: &[T; 4]| -> T {
        let alpha = [
            y[0] * scale[0],
            y[1] * scale[1],
            y[2] * scale[2],
            y[3] * scale[3],
        ];
        problem.objective(&alpha)
    };
    let y0 = [real::<T>(0.5); 4];
    let outcome = nelder_mead(
        objective_scaled,
        y0,
        real::<T>(INITIAL_SIMPLEX_STEP),
        problem.max_evaluations,
        problem.tolerance,
    );
    let alpha = [
        outcome.best[0] * scale[0],
        outcome.best[1] * scale[1],
        outcome.best[2] * scale[2],
        outcome.best[3] * scale[3],
    ];
    let tip_rmse_mm = tip_rmse(problem, &alpha)?;
    Ok(CalibrationResult {
        alpha,
        objective: outcome.f_best,
        tip_rmse_mm,
        evaluations: outcome.evaluations,
        objective_history: outcome.history,
        converged: outcome.converged,
    })
}

/// Per-axis tip RMSE (mm) of the fitted model replayed against the record.
fn tip_rmse<T: Real>(problem: &CalibrationProblem<'_, T>, alpha: &[T; 4]) -> Result<[T; 3]> {
    let model = problem.model_for(alpha)?;
    let tip = model.params().length;
    let candidate = problem.replay(alpha)?;
    let mut acc = [T::zero(); 3];
    let n = problem.recorded.samples.len().min(candidate.samples.len());
    for k in 0..n {
        let p_rec = model.pose(&problem.recorded.samples[k].c, tip)?.pos;
        let p_sim = model.pose(&candidate.samples[k].c, tip)?.pos;
        for a in 0..3 {
            let d = p_rec[a] - p_sim[a];
            acc[a] += d * d;
        }
    }
    let inv = T::one() / real::<T>(n as f64);
    Ok([
        (acc[0] * inv).sqrt() * real::<T>(1e3),
        (acc[1] * inv).sqrt() * real::<T>(1e3),
        (acc[2] * inv).sqrt() * real::<T>(1e3),
    ])
}

/// Closed-loop data synthesis: both capstans track the same chirp through a
/// PD law, exciting stiffness and friction across the frequency sweep.
pub fn synthesize_chirp_response<T: Real>(
    model: &SegmentModelT<T>,
    chirp: &Chirp<T>,
    kp: T,
    kd: T,
    sample_rate: T,
    options: &DopriOptions<T>,
) -> Result<Trajectory<T>> {
    let jqc = *model.capstan_map();
    let tau_fn = move |t: T, state: &SegmentStateT<T>| -> Vector2<T> {
        let q = jqc * state.c;
        let q_dot = jqc * state.c_dot;
        let q_ref = chirp.angle(t);
        let qd_ref = chirp.rate(t);
        Vector2::new(
            kp * (q_ref - q[0]) + kd * (qd_ref - q_dot[0]),
            kp * (q_ref - q[1]) + kd * (qd_ref - q_dot[1]),
        )
    };
    // Start at the closed-loop elastic equilibrium of the initial reference
    // angle instead of straight: the reference may start mid-stroke, and a
    // step transient would ring for seconds and dominate the record.
    //   (K_c + kp J' J) c0 = kp J' [q_ref(0); q_ref(0)]
    let q0 = chirp.angle(T::zero());
    let lhs = model.stiffness_matrix() + jqc.transpose() * jqc * kp;
    let rhs = jqc.transpose() * Vector2::new(q0, q0) * kp;
    let c0 = lhs
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Calibration("initial equilibrium solve failed".into()))?;
    simulate(
        model,
        &SegmentStateT::new(c0, nalgebra::Vector6::zeros())?,
        &tau_fn,
        &|_| ContactInput::None,
        chirp.duration,
        sample_rate,
        options,
    )
}

struct NmOutcome<T: Real> {
    best: [T; 4],
    f_best: T,
    evaluations: usize,
    history: Vec<T>,
    converged: bool,
}

/// Folds a scaled coordinate back into `[SCALED_FLOOR, 1]` by reflection.
fn reflect_coordinate<T: Real>(mut y: T) -> T {
    let floor = real::<T>(SCALED_FLOOR);
    for _ in 0..8 {
        if y < floor {
            y = floor + (floor - y);
        } else if y > T::one() {
            y = T::one() + T::one() - y;
        } else {
            return y;
        }
    }
    y.max(floor).min(T::one())
}

fn reflect_point<T: Real>(y: &[T; 4]) -> [T; 4] {
    [
        reflect_coordinate(y[0]),
        reflect_coordinate(y[1]),
        reflect_coordinate(y[2]),
        reflect_coordinate(y[3]),
    ]
}

/// Nelder-Mead on the scaled box with standard coefficients
/// (reflection 1, expansion 2, contraction 1/2, shrink 1/2).
///
/// The opening simplex is oriented: each coordinate probes both `+step` and
/// `-step` from the start and keeps the better vertex. On objectives with a
/// one-sided plateau only the downhill orientation carries slope
/// information, and a blind one-sided simplex can open entirely onto the
/// flat side and collapse there.
fn nelder_mead<T: Real>(
    mut f: impl FnMut(&[T; 4]) -> T,
    y0: [T; 4],
    step: T,
    max_evals: usize,
    tol: T,
) -> NmOutcome<T> {
    let mut history: Vec<T> = Vec::new();
    let mut evals = 0usize;
    let mut best_seen = real::<T>(f64::INFINITY);
    let mut eval = |y: &[T; 4], history: &mut Vec<T>, evals: &mut usize, best: &mut T| -> T {
        let v = f(y);
        *evals += 1;
        if v < *best {
            *best = v;
        }
        history.push(*best);
        v
    };

    let mut simplex: Vec<([T; 4], T)> = Vec::with_capacity(5);
    let v0 = eval(&y0, &mut history, &mut evals, &mut best_seen);
    simplex.push((y0, v0));
    for i in 0..4 {
        let mut plus = y0;
        plus[i] += step;
        let plus = reflect_point(&plus);
        let f_plus = eval(&plus, &mut history, &mut evals, &mut best_seen);
        let mut minus = y0;
        minus[i] -= step;
        let minus = reflect_point(&minus);
        if evals < max_evals {
            let f_minus = eval(&minus, &mut history, &mut evals, &mut best_seen);
            if f_minus < f_plus {
                simplex.push((minus, f_minus));
                continue;
            }
        }
        simplex.push((plus, f_plus));
    }

    let mut converged = false;
    while evals < max_evals {
        simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
        let f_best = simplex[0].1;
        let f_worst = simplex[4].1;
        let mut diameter = T::zero();
        for v in &simplex[1..] {
            let mut d = T::zero();
            for i in 0..4 {
                let e = v.0[i] - simplex[0].0[i];
                d += e * e;
            }
            diameter = diameter.max(d.sqrt());
        }
        if diameter <= tol && (f_worst - f_best).abs() <= tol * (T::one() + f_best.abs()) {
            converged = true;
            break;
        }

        // Centroid of all but the worst vertex.
        let mut centroid = [T::zero(); 4];
        for v in &simplex[..4] {
            for i in 0..4 {
                centroid[i] += v.0[i];
            }
        }
        for c in centroid.iter_mut() {
            *c /= real::<T>(4.0);
        }
        let worst = simplex[4];

        let propose = |coef: T| -> [T; 4] {
            let mut y = [T::zero(); 4];
            for i in 0..4 {
                y[i] = centroid[i] + coef * (centroid[i] - worst.0[i]);
            }
            reflect_point(&y)
        };

        let yr = propose(T::one());
        let fr = eval(&yr, &mut history, &mut evals, &mut best_seen);
        if fr < simplex[0].1 {
            // Try to expand.
            if evals < max_evals {
                let ye = propose(real(2.0));
                let fe = eval(&ye, &mut history, &mut evals, &mut best_seen);
                simplex[4] = if fe < fr { (ye, fe) } else { (yr, fr) };
            } else {
                simplex[4] = (yr, fr);
            }
        } else if fr < simplex[3].1 {
            simplex[4] = (yr, fr);
        } else {
            // Contract (outside when the reflection improved on the worst).
            let coef = if fr < worst.1 { real(0.5) } else { real(-0.5) };
            if evals >= max_evals {
                break;
            }
            let yc = propose(coef);
            let fc = eval(&yc, &mut history, &mut evals, &mut best_seen);
            let reference = if fr < worst.1 { fr } else { worst.1 };
            if fc <= reference {
                simplex[4] = (yc, fc);
            } else {
                // Shrink toward the best vertex.
                let anchor = simplex[0].0;
                for v in simplex.iter_mut().skip(1) {
                    for i in 0..4 {
                        v.0[i] = anchor[i] + (v.0[i] - anchor[i]) * real::<T>(0.5);
                    }
                    v.0 = reflect_point(&v.0);
                    if evals >= max_evals {
                        break;
                    }
                    v.1 = eval(&v.0, &mut history, &mut evals, &mut best_seen);
                }
            }
        }
    }

    simplex.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap_or(std::cmp::Ordering::Equal));
    NmOutcome {
        best: simplex[0].0,
        f_best: simplex[0].1,
        evaluations: evals,
        history,
        converged,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn reflection_keeps_coordinates_inside_the_box() {
        assert_relative_eq!(reflect_coordinate(0.4_f64), 0.4);
        assert_relative_eq!(reflect_coordinate(1.2_f64), 0.8);
        let low = reflect_coordinate(-0.3_f64);
        assert!(low >= SCALED_FLOOR && low <= 1.0);
        assert_relative_eq!(low, 2.0 * SCALED_FLOOR + 0.3);
        // Pathological excursions still land inside.
        for y in [-57.0, 33.3, 1.0 + 1e-15, -1e-18] {
            let r = reflect_coordinate(y);
            assert!(r >= SCALED_FLOOR && r <= 1.0, "{y} -> {r}");
        }
    }

    #[test]
    fn simplex_finds_an_interior_quadratic_minimum() {
        let target = [0.3, 0.7, 0.55, 0.2];
        let f = |y: &[f64; 4]| -> f64 {
            y.iter()
                .zip(target.iter())
                .map(|(a, b)| (a - b) * (a - b))
                .sum()
        };
        let out = nelder_mead(f, [0.5; 4], 0.15, 400, 1e-10);
        assert!(out.converged);
        for i in 0..4 {
            assert_relative_eq!(out.best[i], target[i], epsilon = 1e-4);
        }
    }

    #[test]
    fn simplex_respects_bounds_when_the_minimum_is_outside() {
        // Minimum at y = (1.4, ...): the constrained optimum sits on the
        // upper face; every evaluated point must stay inside the box.
        let mut all_inside = true;
        let f = |y: &[f64; 4]| -> f64 {
            for v in y {
                if !(*v >= SCALED_FLOOR && *v <= 1.0) {
                    // Flag rather than panic inside the closure.
                    return f64::MAX;
                }
            }
            (y[0] - 1.4).powi(2) + y[1].powi(2) + (y[2] - 0.5).powi(2) + (y[3] - 0.5).powi(2)
        };
        let out = nelder_mead(f, [0.5; 4], 0.15, 2000, 1e-12);
        for v in &out.best {
            all_inside &= *v >= SCALED_FLOOR && *v <= 1.0;
        }
        assert!(all_inside);
        assert!(out.f_best < f64::MAX);
        assert!(out.best[0] > 0.9, "should push toward the upper bound");
        assert!(out.best[1] < 0.1, "should push toward the lower bound");
    }

    #[test]
    fn best_history_is_monotone_nonincreasing() {
        let f = |y: &[f64; 4]| -> f64 { y.iter().map(|v| (v - 0.31).powi(2)).sum() };
        let out = nelder_mead(f, [0.5; 4], 0.15, 120, 1e-12);
        for w in out.history.windows(2) {
            assert!(w[1] <= w[0]);
        }
        assert_eq!(out.history.len(), out.evaluations);
    }

    #[test]
    fn chirp_tracking_follows_the_reference() {
        // Short, fast check: a compressed chirp tracked well within a few
        // percent of its amplitude validates the gain choice and the sign
        // conventions of the PD law.
        let model =
            SegmentModelT::with_reference_routing(SegmentParamsT::reference_distal()).unwrap();
        let chirp = Chirp {
            amplitude: real::<f64>(std::f64::consts::TAU),
            f_start: 0.25,
            f_end: 0.1,
            duration: 1.5,
            phase: std::f64::consts::FRAC_PI_2,
        };
        let traj = synthesize_chirp_response(
            &model,
            &chirp,
            DEFAULT_TRACKING_KP,
            DEFAULT_TRACKING_KD,
            100.0,
            &DopriOptions::default(),
        )
        .unwrap();
        let jqc = *model.capstan_map();
        let mut worst = 0.0_f64;
        for s in traj.samples.iter().skip(40) {
            let q = jqc * s.c;
            let q_ref = chirp.angle(s.t);
            worst = worst.max((q[0] - q_ref).abs()).max((q[1] - q_ref).abs());
        }
        assert!(
            worst < 0.05 * chirp.amplitude,
            "tracking error {worst:.3} rad too large"
        );
        // The synthesized torques must be non-trivial.
        assert!(traj.samples.iter().any(|s| s.tau.norm() > 1e-3));
    }

    #[test]
    fn objective_is_small_at_truth_and_grows_away_from_it() {
        let truth = [1.1440, 1.0373, 0.0312, 0.1637];
        let params = SegmentParamsT::<f64>::reference_distal();
        let model = SegmentModelT::with_reference_routing(params.clone()).unwrap();
        let chirp = Chirp {
            amplitude: std::f64::consts::TAU,
            f_start: 0.25,
            f_end: 0.1,
            duration: 1.2,
            phase: std::f64::consts::FRAC_PI_2,
        };
        let recorded =
            synthesize_chirp_response(&model, &chirp, DEFAULT_TRACKING_KP, DEFAULT_TRACKING_KD, 100.0, &DopriOptions::default())
                .unwrap();
        let problem = CalibrationProblem::new(&params, &recorded);
        let f0 = problem.objective(&truth);
        // Identifiability: each component perturbed alone must raise the
        // objective appreciably.
        for i in 0..4 {
            for factor in [0.7, 1.3] {
                let mut alpha = truth;
                alpha[i] *= factor;
                let fi = problem.objective(&alpha);
                assert!(
                    fi > 3.0 * f0.max(1e-12),
                    "component {i} x{factor}: {fi:.3e} vs truth {f0:.3e}"
                );
            }
        }
    }

    #[test]
    fn failed_replays_cost_the_penalty_not_a_crash() {
        let params = SegmentParamsT::<f64>::reference_distal();
        let model = SegmentModelT::with_reference_routing(params.clone()).unwrap();
        let chirp = Chirp {
            amplitude: std::f64::consts::TAU,
            f_start: 0.25,
            f_end: 0.1,
            duration: 0.3,
            phase: std::f64::consts::FRAC_PI_2,
        };
        let mut recorded =
            synthesize_chirp_response(&model, &chirp, DEFAULT_TRACKING_KP, DEFAULT_TRACKING_KD, 100.0, &DopriOptions::default())
                .unwrap();
        // Corrupt the recorded torques so any replay fails immediately.
        for s in recorded.samples.iter_mut() {
            s.tau = Vector2::new(f64::NAN, f64::NAN);
        }
        let problem = CalibrationProblem::new(&params, &recorded);
        let v = problem.objective(&[1.0, 1.0, 0.05, 0.05]);
        assert_eq!(v, BLOWUP_PENALTY);
    }

    #[test]
    fn tiny_budgets_are_rejected() {
        let params = SegmentParamsT::<f64>::reference_distal();
        let model = SegmentModelT::with_reference_routing(params.clone()).unwrap();
        let chirp = Chirp {
            amplitude: 1.0,
            f_start: 0.25,
            f_end: 0.1,
            duration: 0.2,
            phase: 0.0,
        };
        let recorded =
            synthesize_chirp_response(&model, &chirp, DEFAULT_TRACKING_KP, DEFAULT_TRACKING_KD, 100.0, &DopriOptions::default())
                .unwrap();
        let mut problem = CalibrationProblem::new(&params, &recorded);
        problem.max_evaluations = 3;
        assert!(calibrate(&problem).is_err());
    }
}
