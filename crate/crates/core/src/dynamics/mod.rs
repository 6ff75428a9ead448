//! Modal Euler-Lagrange dynamics of one segment.
//!
//! With the modal coefficients `c` as generalized coordinates, the equations
//! of motion are
//!
//! ```text
//!   M(c) c_ddot + N(c, c_dot) c_dot + dV/dc = kappa ,
//!   kappa = J_qc^T tau + J_xic^T(s_c) w_c - kappa_fric ,
//! ```
//!
//! where `M` collects backbone, disk, and actuation inertia ([`inertia`]),
//! `N` comes from Christoffel symbols of finite-differenced `M`
//! ([`coriolis`]), `V` is elastic plus gravitational potential
//! ([`potential`]), and `kappa_fric` is the capstan/bushing Coulomb cascade
//! ([`friction`]). The assembled accelerations live in [`eom`].

pub mod coriolis;
pub mod eom;
pub mod friction;
pub mod inertia;
pub mod model;
pub mod params;
pub mod potential;

pub use eom::{ContactInput, ModelEval};
pub use friction::{CapstanFriction, LadderStation, TensionLadder};
pub use model::SegmentModelT;
pub use params::{DiskParams, SegmentParamsT};

use nalgebra::{Vector3, Vector6};

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Spatial contact wrench `[f; m]` (force on top), body frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WrenchT<T: Real> {
    /// Force component, newtons.
    pub force: Vector3<T>,
    /// Moment component, newton-meters.
    pub moment: Vector3<T>,
}

impl<T: Real> WrenchT<T> {
    /// Zero wrench.
    pub fn zero() -> Self {
        Self {
            force: Vector3::zeros(),
            moment: Vector3::zeros(),
        }
    }

    /// Builds from a stacked 6-vector `[f; m]`.
    pub fn from_vector(v: &Vector6<T>) -> Self {
        Self {
            force: Vector3::new(v[0], v[1], v[2]),
            moment: Vector3::new(v[3], v[4], v[5]),
        }
    }

    /// Stacked 6-vector `[f; m]`, the dual of a body twist `[v; w]`.
    pub fn to_vector(&self) -> Vector6<T> {
        Vector6::new(
            self.force[0],
            self.force[1],
            self.force[2],
            self.moment[0],
            self.moment[1],
            self.moment[2],
        )
    }
}

/// Dynamic state `(c, c_dot)` of a segment.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SegmentStateT<T: Real> {
    /// Modal coefficients.
    pub c: Vector6<T>,
    /// Modal rates.
    pub c_dot: Vector6<T>,
}

impl<T: Real> SegmentStateT<T> {
    /// Validating constructor: all entries must be finite.
    pub fn new(c: Vector6<T>, c_dot: Vector6<T>) -> Result<Self> {
        if !c.iter().all(|x| x.is_finite()) || !c_dot.iter().all(|x| x.is_finite()) {
            return Err(Error::NonFinite {
                context: "segment state",
            });
        }
        Ok(Self { c, c_dot })
    }

    /// State at rest with straight shape.
    pub fn zero() -> Self {
        Self {
            c: Vector6::zeros(),
            c_dot: Vector6::zeros(),
        }
    }

    /// Stacks into the 12-vector `[c; c_dot]` used by the integrator.
    pub fn to_vector(&self) -> nalgebra::SVector<T, 12> {
        let mut v = nalgebra::SVector::<T, 12>::zeros();
        for i in 0..6 {
            v[i] = self.c[i];
            v[6 + i] = self.c_dot[i];
        }
        v
    }

    /// Splits a stacked 12-vector back into a state.
    pub fn from_vector(v: &nalgebra::SVector<T, 12>) -> Self {
        Self {
            c: Vector6::from_fn(|i, _| v[i]),
            c_dot: Vector6::from_fn(|i, _| v[6 + i]),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wrench_vector_roundtrip() {
        let w = WrenchT {
            force: Vector3::new(1.0, -2.0, 3.0),
            moment: Vector3::new(0.5, 0.0, -0.5),
        };
        assert_eq!(WrenchT::from_vector(&w.to_vector()), w);
    }

    #[test]
    fn state_rejects_nan() {
        let mut c = Vector6::zeros();
        c[3] = f64::NAN;
        assert!(SegmentStateT::new(c, Vector6::zeros()).is_err());
    }

    #[test]
    fn state_vector_roundtrip() {
        let st = SegmentStateT {
            c: Vector6::new(0.1, 0.2, 0.3, 0.4, 0.5, 0.6),
            c_dot: Vector6::new(-1.0, -2.0, -3.0, -4.0, -5.0, -6.0),
        };
        assert_eq!(SegmentStateT::from_vector(&st.to_vector()), st);
    }
}
