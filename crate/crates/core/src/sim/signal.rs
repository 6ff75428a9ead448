//! Excitation signals, measurement-noise injection, and causal smoothed
//! differentiation.

use nalgebra::SVector;
use rand::Rng;

use crate::error::{Error, Result};
use crate::scalar::{real, to_f64, Real};

/// Linear-sweep (chirp) excitation for the capstan angle.
///
/// The instantaneous frequency moves linearly from `f_start` at `t = 0` to
/// `f_end` at `t = duration`; sweeping from a fast start to a slow end is the
/// intended identification profile, so `f_start > f_end` is the common case.
#[derive(Debug, Clone, Copy)]
pub struct Chirp<T: Real> {
    /// Peak angle (rad).
    pub amplitude: T,
    /// Instantaneous frequency at `t = 0` (Hz).
    pub f_start: T,
    /// Instantaneous frequency at `t = duration` (Hz).
    pub f_end: T,
    /// Sweep duration (s).
    pub duration: T,
    /// Phase offset (rad).
    pub phase: T,
}

impl<T: Real> Chirp<T> {
    /// Reference identification profile: quarter-hertz start slowing to a
    /// hundredth of a hertz over six seconds, full-turn amplitude, started at
    /// the crest.
    pub fn reference() -> Self {
        Self {
            amplitude: T::two_pi(),
            f_start: real(0.25),
            f_end: real(0.01),
            duration: real(6.0),
            phase: T::frac_pi_2(),
        }
    }

    fn phase_at(&self, t: T) -> T {
        let sweep = (self.f_end - self.f_start) / (self.duration * real::<T>(2.0));
        T::two_pi() * (sweep * t * t + self.f_start * t) + self.phase
    }

    /// Angle at time `t`.
    pub fn angle(&self, t: T) -> T {
        self.amplitude * self.phase_at(t).sin()
    }

    /// Angular rate at time `t`.
    pub fn rate(&self, t: T) -> T {
        self.amplitude * self.phase_at(t).cos() * T::two_pi() * self.instantaneous_frequency(t)
    }

    /// Instantaneous frequency (Hz) at time `t`.
    pub fn instantaneous_frequency(&self, t: T) -> T {
        (self.f_end - self.f_start) / self.duration * t + self.f_start
    }
}

/// Bounded measurement noise applied per coefficient sample.
#[derive(Debug, Clone, Copy)]
pub enum NoiseKind {
    /// Uniform on `[-amplitude/2, amplitude/2]` (peak-to-peak `amplitude`).
    Uniform,
    /// Zero-mean Gaussian with `amplitude` as the peak-to-peak span of the
    /// central ±2σ interval (σ = amplitude / 4).
    Gaussian,
}

/// Peak-to-peak noise amplitude plus the generator kind.
#[derive(Debug, Clone, Copy)]
pub struct NoiseSpec<T: Real> {
    /// Peak-to-peak amplitude; zero disables the noise.
    pub amplitude: T,
    /// Distribution family.
    pub kind: NoiseKind,
}

impl<T: Real> NoiseSpec<T> {
    /// Uniform noise of the given peak-to-peak amplitude.
    pub fn uniform(amplitude: T) -> Self {
        Self {
            amplitude,
            kind: NoiseKind::Uniform,
        }
    }

    /// Draws one noise value.
    pub fn draw<R: Rng>(&self, rng: &mut R) -> T {
        if to_f64(self.amplitude) == 0.0 {
            return T::zero();
        }
        match self.kind {
            NoiseKind::Uniform => {
                let u: f64 = rng.gen_range(-0.5..0.5);
                self.amplitude * real::<T>(u)
            }
            NoiseKind::Gaussian => {
                // Box-Muller from two uniforms keeps the dependency light.
                let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
                let u2: f64 = rng.gen_range(0.0..1.0);
                let z = (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos();
                self.amplitude * real::<T>(0.25 * z)
            }
        }
    }
}

/// Adds per-component noise to every vector in `series`, in place.
pub fn perturb_series<T: Real, R: Rng, const N: usize>(
    series: &mut [SVector<T, N>],
    spec: &NoiseSpec<T>,
    rng: &mut R,
) {
    if to_f64(spec.amplitude) == 0.0 {
        return;
    }
    for sample in series.iter_mut() {
        for i in 0..N {
            sample[i] += spec.draw(rng);
        }
    }
}

/// Causal Gaussian weights for a trailing window of `window` samples.
///
/// The newest sample gets the center of the half-Gaussian; σ is a quarter of
/// the window, and the weights are normalized to sum to one so constants pass
/// through unchanged. `window = 1` degenerates to the identity.
fn causal_weights<T: Real>(window: usize) -> Vec<T> {
    debug_assert!(window >= 1);
    let sigma = window as f64 / 4.0;
    let mut w: Vec<T> = (0..window)
        .map(|lag| {
            let q = lag as f64 / sigma;
            real((-0.5 * q * q).exp())
        })
        .collect();
    let sum: T = w.iter().fold(T::zero(), |acc, v| acc + *v);
    for v in w.iter_mut() {
        *v /= sum;
    }
    w
}

/// Causal Gaussian smoothing of a uniformly sampled series.
///
/// Output sample `k` is a weighted average of samples `k`, `k-1`, …,
/// `k-window+1`; at the start of the series the window is truncated and the
/// weights renormalized, so the result is defined (and causal) everywhere.
pub fn causal_gaussian_smooth<T: Real, const N: usize>(
    series: &[SVector<T, N>],
    window: usize,
) -> Result<Vec<SVector<T, N>>> {
    if window == 0 {
        return Err(Error::InvalidParams("smoothing window must be >= 1".into()));
    }
    if series.len() < window {
        return Err(Error::SeriesTooShort {
            len: series.len(),
            window,
        });
    }
    let weights = causal_weights::<T>(window);
    let mut out = Vec::with_capacity(series.len());
    for k in 0..series.len() {
        let reach = window.min(k + 1);
        let mut acc: SVector<T, N> = SVector::zeros();
        let mut wsum = T::zero();
        for (lag, w) in weights.iter().enumerate().take(reach) {
            acc += series[k - lag] * *w;
            wsum += *w;
        }
        out.push(acc / wsum);
    }
    Ok(out)
}

/// Two-point backward difference on a uniform grid; the first sample is zero.
pub fn backward_difference<T: Real, const N: usize>(
    series: &[SVector<T, N>],
    dt: T,
) -> Vec<SVector<T, N>> {
    let mut out = Vec::with_capacity(series.len());
    for k in 0..series.len() {
        if k == 0 {
            out.push(SVector::zeros());
        } else {
            out.push((series[k] - series[k - 1]) / dt);
        }
    }
    out
}

/// Gaussian-smoothed causal derivative: smooth, then backward-difference.
pub fn smoothed_derivative<T: Real, const N: usize>(
    series: &[SVector<T, N>],
    dt: T,
    window: usize,
) -> Result<Vec<SVector<T, N>>> {
    let smoothed = causal_gaussian_smooth(series, window)?;
    Ok(backward_difference(&smoothed, dt))
}
