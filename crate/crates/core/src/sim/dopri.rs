//! Adaptive Dormand–Prince (RK45) integration with dense output.
//!
//! The classic embedded 5(4) pair: six stages advance the solution to fifth
//! order, a seventh first-same-as-last stage provides the fourth-order
//! comparison for error control, and a quartic interpolant built from the
//! same stages makes the solution continuously evaluable between accepted
//! steps. Step-size control follows the usual elementary controller with a
//! safety factor and growth clamps.

use nalgebra::SVector;

use crate::error::{Error, Result};
use crate::scalar::{real, to_f64, Real};

/// Tolerances and limits for one integration.
#[derive(Debug, Clone)]
pub struct DopriOptions<T: Real> {
    /// Relative tolerance on each component.
    pub rtol: T,
    /// Absolute tolerance on each component.
    pub atol: T,
    /// Initial step; chosen automatically when absent.
    pub h_init: Option<T>,
    /// Hard cap on the step size; defaults to the span length.
    pub h_max: Option<T>,
    /// Cap on total attempted steps before giving up.
    pub max_steps: usize,
}

impl<T: Real> Default for DopriOptions<T> {
    fn default() -> Self {
        Self {
            rtol: real(1e-6),
            atol: real(1e-8),
            h_init: None,
            h_max: None,
            max_steps: 1_000_000,
        }
    }
}

/// One accepted step together with its interpolation polynomial.
#[derive(Debug, Clone)]
pub struct DenseStep<T: Real, const N: usize> {
    /// Start time of the step.
    pub t0: T,
    /// Step length.
    pub h: T,
    rcont: [SVector<T, N>; 5],
}

impl<T: Real, const N: usize> DenseStep<T, N> {
    /// Evaluates the interpolant at `t` inside `[t0, t0 + h]`.
    pub fn eval(&self, t: T) -> SVector<T, N> {
        let theta = (t - self.t0) / self.h;
        let theta1 = T::one() - theta;
        let [r1, r2, r3, r4, r5] = &self.rcont;
        r1 + (r2 + (r3 + (r4 + r5 * theta1) * theta) * theta1) * theta
    }
}

/// Result of an adaptive integration over a time span.
#[derive(Debug, Clone)]
pub struct Solution<T: Real, const N: usize> {
    /// Accepted steps in time order, covering the whole span.
    pub steps: Vec<DenseStep<T, N>>,
    /// Final time reached (the end of the requested span).
    pub t_end: T,
    /// State at `t_end`.
    pub y_end: SVector<T, N>,
    /// Number of right-hand-side evaluations.
    pub n_eval: usize,
    /// Number of accepted steps.
    pub n_accept: usize,
    /// Number of rejected attempts.
    pub n_reject: usize,
}

impl<T: Real, const N: usize> Solution<T, N> {
    /// Dense-output sample at any `t` inside the integrated span.
    pub fn sample(&self, t: T) -> Result<SVector<T, N>> {
        if self.steps.is_empty() {
            return Err(Error::InvalidParams("empty solution".into()));
        }
        let t0 = self.steps[0].t0;
        let span_lo = to_f64(t0);
        let span_hi = to_f64(self.t_end);
        let tf = to_f64(t);
        let slack = 1e-9 * (1.0 + span_hi.abs());
        if tf < span_lo - slack || tf > span_hi + slack {
            return Err(Error::InvalidParams(format!(
                "sample time {tf} outside integrated span [{span_lo}, {span_hi}]"
            )));
        }
        // Binary search for the step containing t.
        let mut lo = 0usize;
        let mut hi = self.steps.len() - 1;
        while lo < hi {
            let mid = (lo + hi + 1) / 2;
            if to_f64(self.steps[mid].t0) <= tf {
                lo = mid;
            } else {
                hi = mid - 1;
            }
        }
        Ok(self.steps[lo].eval(t))
    }
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [
        19372.0 / 6561.0,
        -25360.0 / 2187.0,
        64448.0 / 6561.0,
        -212.0 / 729.0,
        0.0,
        0.0,
    ],
    [
        9017.0 / 3168.0,
        -355.0 / 33.0,
        46732.0 / 5247.0,
        49.0 / 176.0,
        -5103.0 / 18656.0,
        0.0,
    ],
    [
        35.0 / 384.0,
        0.0,
        500.0 / 1113.0,
        125.0 / 192.0,
        -2187.0 / 6784.0,
        11.0 / 84.0,
    ],
];
/// Difference between the 5th- and 4th-order weights, for error control.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];
/// Weights of the quartic dense-output polynomial.
const D: [f64; 7] = [
    -12715105075.0 / 11282082432.0,
    0.0,
    87487479700.0 / 32700410799.0,
    -10690763975.0 / 1880347072.0,
    701980252875.0 / 199316789632.0,
    -1453857185.0 / 822651844.0,
    69997945.0 / 29380423.0,
];

fn error_norm<T: Real, const N: usize>(
    err: &SVector<T, N>,
    y0: &SVector<T, N>,
    y1: &SVector<T, N>,
    atol: T,
    rtol: T,
) -> T {
    let mut acc = T::zero();
    for i in 0..N {
        let scale = atol + rtol * y0[i].abs().max(y1[i].abs());
        let q = err[i] / scale;
        acc += q * q;
    }
    (acc / real::<T>(N as f64)).sqrt()
}

/// Standard automatic initial-step heuristic for a 5th-order method.
fn initial_step<T: Real, const N: usize, F>(
    f: &mut F,
    t0: T,
    y0: &SVector<T, N>,
    f0: &SVector<T, N>,
    h_max: T,
    atol: T,
    rtol: T,
) -> Result<T>
where
    F: FnMut(T, &SVector<T, N>) -> Result<SVector<T, N>>,
{
    let scale = |y: &SVector<T, N>| -> T {
        let mut acc = T::zero();
        for i in 0..N {
            let sc = atol + rtol * y0[i].abs();
            let q = y[i] / sc;
            acc += q * q;
        }
        (acc / real::<T>(N as f64)).sqrt()
    };
    let d0 = scale(y0);
    let d1 = scale(f0);
    let tiny = real::<T>(1e-10);
    let h0 = if d0 < tiny || d1 < tiny {
        real::<T>(1e-6)
    } else {
        (d0 / d1) * real::<T>(0.01)
    };
    let h0 = h0.min(h_max);
    let y1 = y0 + f0 * h0;
    let f1 = f(t0 + h0, &y1)?;
    let d2 = scale(&(f1 - f0)) / h0;
    let d_max = d1.max(d2);
    let h1 = if d_max <= tiny {
        (h0 * real::<T>(1e-3)).max(real::<T>(1e-6))
    } else {
        (real::<T>(0.01) / d_max).powf(real::<T>(0.2))
    };
    Ok((h0 * real::<T>(100.0)).min(h1).min(h_max))
}

/// Integrates `dy/dt = f(t, y)` from `t0` to `t1` (`t1 > t0`).
pub fn integrate<T: Real, const N: usize, F>(
    mut f: F,
    t0: T,
    t1: T,
    y0: SVector<T, N>,
    options: &DopriOptions<T>,
) -> Result<Solution<T, N>>
where
    F: FnMut(T, &SVector<T, N>) -> Result<SVector<T, N>>,
{
    if !(to_f64(t1) > to_f64(t0)) {
        return Err(Error::InvalidParams("integration span must be forward".into()));
    }
    if !(to_f64(options.rtol) > 0.0) || !(to_f64(options.atol) > 0.0) {
        return Err(Error::InvalidParams("tolerances must be positive".into()));
    }
    let span = t1 - t0;
    let h_max = options.h_max.unwrap_or(span).min(span);
    let atol = options.atol;
    let rtol = options.rtol;

    let a: [[T; 6]; 7] = A.map(|row| row.map(real::<T>));
    let c: [T; 7] = C.map(real::<T>);
    let e: [T; 7] = E.map(real::<T>);
    let d: [T; 7] = D.map(real::<T>);

    let mut t = t0;
    let mut y = y0;
    let mut k: [SVector<T, N>; 7] = [SVector::zeros(); 7];
    k[0] = f(t, &y)?;
    let mut n_eval = 1usize;

    let mut h = match options.h_init {
        Some(h) if to_f64(h) > 0.0 => h.min(h_max),
        _ => {
            n_eval += 1;
            initial_step(&mut f, t, &y, &k[0], h_max, atol, rtol)?
        }
    };

    let safety = real::<T>(0.9);
    let fac_min = real::<T>(0.2);
    let fac_max_normal = real::<T>(10.0);
    let order_exp = real::<T>(0.2);
    let mut fac_max = fac_max_normal;

    let mut steps: Vec<DenseStep<T, N>> = Vec::new();
    let mut n_accept = 0usize;
    let mut n_reject = 0usize;

    for _attempt in 0..options.max_steps {
        if to_f64(t) >= to_f64(t1) {
            return Ok(Solution {
                steps,
                t_end: t1,
                y_end: y,
                n_eval,
                n_accept,
                n_reject,
            });
        }
        let h_floor = real::<T>(1e-14) * (T::one() + t.abs());
        if h < h_floor {
            return Err(Error::StepSizeUnderflow {
                t: to_f64(t),
                last_state: y.iter().map(|v| to_f64(*v)).collect(),
            });
        }
        // Land exactly on the end point.
        let mut last = false;
        if to_f64(t + h) >= to_f64(t1) {
            h = t1 - t;
            last = true;
        }

        // Stages 2..7 (stage 1 is the stored FSAL slope).
        for s in 1..7 {
            let mut ys = y;
            for (j, kj) in k.iter().enumerate().take(s) {
                ys += kj * (a[s][j] * h);
            }
            k[s] = f(t + c[s] * h, &ys)?;
        }
        n_eval += 6;

        // 5th-order solution (stage-7 state) and embedded error estimate.
        let mut y_new = y;
        for (j, kj) in k.iter().enumerate().take(6) {
            y_new += kj * (a[6][j] * h);
        }
        let mut err_vec: SVector<T, N> = SVector::zeros();
        for (j, kj) in k.iter().enumerate() {
            err_vec += kj * (e[j] * h);
        }
        let err = error_norm(&err_vec, &y, &y_new, atol, rtol);

        if err <= T::one() {
            // Accept: record the dense interpolant for this interval.
            let ydiff = y_new - y;
            let bspl = k[0] * h - ydiff;
            let mut cont5: SVector<T, N> = SVector::zeros();
            for (j, kj) in k.iter().enumerate() {
                cont5 += kj * d[j];
            }
            steps.push(DenseStep {
                t0: t,
                h,
                rcont: [
                    y,
                    ydiff,
                    bspl,
                    ydiff - k[6] * h - bspl,
                    cont5 * h,
                ],
            });
            t += h;
            y = y_new;
            k[0] = k[6]; // first-same-as-last
            n_accept += 1;

            let grow = if to_f64(err) <= 0.0 {
                fac_max
            } else {
                (safety * err.powf(-order_exp)).clamp(fac_min, fac_max)
            };
            fac_max = fac_max_normal;
            if !last {
                h = (h * grow).min(h_max);
            } else {
                h = h_max;
            }
        } else {
            // Reject: shrink and forbid growth on the retry.
            let shrink = (safety * err.powf(-order_exp)).clamp(fac_min, T::one());
            h *= shrink;
            fac_max = T::one();
            n_reject += 1;
        }
    }
    Err(Error::TooManySteps {
        t: to_f64(t),
        max_steps: options.max_steps,
    })
}
