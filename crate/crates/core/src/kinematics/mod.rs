//! Curvature-space kinematics of a variable-curvature segment.
//!
//! The segment backbone is parameterized by arclength `s in [0, L]`. Its
//! bending is the planar curvature field `u(s) = Phi(s) c` resolved on a
//! Chebyshev basis ([`basis`]), and the cross-section frame field `T(s)`
//! follows the moving-frame equation
//!
//! ```text
//!   dT/ds = T(s) * hat([e3; u(s)]) ,   T(0) = I ,
//! ```
//!
//! integrated with a 4th-order Magnus expansion ([`magnus`]). Tendon-length
//! and capstan maps live in [`routing`].

pub mod basis;
pub mod lie;
pub mod magnus;
pub mod routing;

pub use basis::{basis_eval, basis_integral, basis_row, circularness, curvature};
pub use lie::{ad6, hat3, hat4, se3_exp, vee3, vee4, PoseT, TwistT};
pub use magnus::{body_jacobian, pose, pose_with_jacobian, ShapeSweep, SweepStation};
pub use routing::{
    capstan_jacobian, shape_from_lengths, tendon_map, Channel, RoutingGeometryT, TendonMap,
};
