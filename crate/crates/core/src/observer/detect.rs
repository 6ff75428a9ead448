//! Contact detection from residuals and uncertainty-derived thresholds.
//!
//! A residual component flags contact only when it exceeds what bounded
//! state error alone could explain. The threshold per component is the
//! worst-case first-order residual response, the absolute row sum of
//! `dr/dx` scaled by the per-entry state-error bound.

use nalgebra::{SMatrix, SVector, Vector6};

use crate::scalar::Real;

/// Default symmetric bound applied to every state entry when deriving
/// thresholds (coefficient units / coefficient rate units).
pub const DEFAULT_STATE_ERROR_BOUND: f64 = 1.84;

/// Worst-case residual magnitude per component for state errors bounded by
/// `bound` entrywise: `threshold_i = sum_j |drdx_ij| bound_j`.
pub fn detection_thresholds<T: Real>(
    drdx: &SMatrix<T, 6, 12>,
    bound: &SVector<T, 12>,
) -> Vector6<T> {
    Vector6::from_fn(|i, _| {
        let mut acc = T::zero();
        for j in 0..12 {
            acc += drdx[(i, j)].abs() * bound[j].abs();
        }
        acc
    })
}

/// Per-component contact flags: strict exceedance of the threshold.
pub fn detect<T: Real>(residual: &Vector6<T>, thresholds: &Vector6<T>) -> [bool; 6] {
    let mut flags = [false; 6];
    for i in 0..6 {
        flags[i] = residual[i].abs() > thresholds[i];
    }
    flags
}

/// One detection verdict: residual, thresholds, and flags together.
#[derive(Debug, Clone)]
pub struct ContactDecision<T: Real> {
    /// Residual the decision was made on.
    pub residual: Vector6<T>,
    /// Thresholds in force per component.
    pub thresholds: Vector6<T>,
    /// Per-component exceedance flags.
    pub flags: [bool; 6],
}

impl<T: Real> ContactDecision<T> {
    /// Evaluates the decision rule.
    pub fn evaluate(residual: Vector6<T>, thresholds: Vector6<T>) -> Self {
        let flags = detect(&residual, &thresholds);
        Self {
            residual,
            thresholds,
            flags,
        }
    }

    /// True when any component flags contact.
    pub fn any(&self) -> bool {
        self.flags.iter().any(|f| *f)
    }
}

/// Contiguous true-spans of a flag series sampled at `dt`, as `(start, end)`
/// times; the end is the time of the first sample after the span.
pub fn detected_spans<T: Real>(flags: &[bool], dt: T) -> Vec<(T, T)> {
    let mut spans = Vec::new();
    let mut start: Option<usize> = None;
    for (k, f) in flags.iter().enumerate() {
        match (start, *f) {
            (None, true) => start = Some(k),
            (Some(s), false) => {
                spans.push((dt * crate::scalar::real(s as f64), dt * crate::scalar::real(k as f64)));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        spans.push((
            dt * crate::scalar::real(s as f64),
            dt * crate::scalar::real(flags.len() as f64),
        ));
    }
    spans
}
