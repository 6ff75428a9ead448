//! Dynamics, simulation, and contact estimation for tendon-driven
//! variable-curvature continuum robot segments.
//!
//! A segment is a flexible backbone of length `L` dressed with rigid spacer
//! disks and driven by capstan-wound tendon loops. Its shape is described by a
//! planar curvature field resolved on a Chebyshev polynomial basis,
//!
//! ```text
//!   u(s) = Phi(s) c ,   c = [c_x; c_y] in R^6 ,
//! ```
//!
//! so the six modal coefficients `c` are the generalized coordinates of the
//! whole segment. Everything else is built on top of that choice:
//!
//! * [`kinematics`] — curvature basis, moving-frame pose reconstruction on
//!   SE(3) via a 4th-order Magnus expansion, body Jacobians, tendon-length
//!   and capstan maps, string-encoder shape sensing.
//! * [`dynamics`] — modal mass matrix, Coriolis matrix from Christoffel
//!   symbols, conservative forces, a capstan/bushing Coulomb friction
//!   cascade, and the forward dynamics used everywhere else.
//! * [`sim`] — an adaptive Dormand–Prince integrator with dense output,
//!   chirp excitation, measurement-noise injection, and causal smoothed
//!   differentiation; trajectories round-trip through CSV.
//! * [`observer`] — a generalized-momentum disturbance observer and a
//!   joint-force-deviation estimator, constrained minimum-norm contact
//!   wrench recovery, residual sensitivity, and threshold-based detection.
//! * [`calibrate`] — bounded derivative-free fitting of stiffness and
//!   friction parameters to recorded trajectories.
//!
//! All numerical code is generic over the scalar type through the [`Real`]
//! trait (implemented for `f32` and `f64`); the concrete aliases at the crate
//! root fix `f64`, which is what the shipped tools use.

pub mod calibrate;
pub mod dynamics;
pub mod error;
pub mod kinematics;
pub mod observer;
pub(crate) mod quadrature;
pub mod report;
pub mod scalar;
pub mod sim;

pub use error::{Error, Result};
pub use scalar::Real;

/// Modal coefficient vector `c = [c_x; c_y]` (double precision).
pub type Coeffs = nalgebra::Vector6<f64>;
/// Body twist `[v; omega]` (double precision).
pub type Twist = nalgebra::Vector6<f64>;
/// Rigid transform on SE(3) (double precision).
pub type Pose = kinematics::PoseT<f64>;
/// Spatial contact wrench `[f; m]` (double precision).
pub type Wrench = dynamics::WrenchT<f64>;
/// Segment physical parameters (double precision).
pub type SegmentParams = dynamics::SegmentParamsT<f64>;
/// Tendon routing geometry (double precision).
pub type RoutingGeometry = kinematics::RoutingGeometryT<f64>;
/// Precomputed segment model: parameters + routing + derived maps.
pub type SegmentModel = dynamics::SegmentModelT<f64>;
/// Dynamic state `(c, c_dot)` of a segment (double precision).
pub type SegmentState = dynamics::SegmentStateT<f64>;
