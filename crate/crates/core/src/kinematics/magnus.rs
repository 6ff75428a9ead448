//! Moving-frame pose reconstruction with a 4th-order Magnus expansion.
//!
//! The cross-section frame field obeys the body-frame ODE
//!
//! ```text
//!   dT/ds = T(s) hat([e3; u(s)]) ,   T(0) = I ,
//! ```
//!
//! i.e. the backbone advances along its local z axis while bending with the
//! local curvature `u(s) = Phi(s) c`. Each arclength increment `[s0, s0+h]`
//! is collocated at the two Gauss-Legendre points
//! `s0 + h (1/2 -+ sqrt(3)/6)` and advanced by the group exponential of
//!
//! ```text
//!   Omega = h/2 (eta1 + eta2) + sqrt(3)/12 h^2 [eta1, eta2] ,
//! ```
//!
//! which is the classical 4th-order Magnus increment written for a
//! right-invariant system. Because the increment is an exact group element,
//! the reconstructed rotation stays orthonormal to machine precision for any
//! step size.
//!
//! The configuration Jacobian `J_xic(s)` (body twist per unit modal rate) is
//! propagated alongside the pose: appending a step `g = exp(Omega)` updates
//! each column by
//!
//! ```text
//!   J <- Ad_{g^-1} J + dexp_{-Omega} dOmega/dc ,
//! ```
//!
//! using the analytic derivative of the matrix exponential, so no finite
//! differencing is involved.

use nalgebra::{Matrix6, Vector6};

use crate::error::{Error, Result};
use crate::kinematics::basis::basis_eval;
use crate::kinematics::lie::{ad6, dexp_neg, se3_exp, PoseT, TwistT};
use crate::scalar::{real, to_f64, Real};

/// Default number of Magnus subdivisions over one segment length.
///
/// Sixteen steps keep the pose of strongly bent shapes (around a full turn
/// over the segment) within about `5e-8` m of a fine reference integration,
/// comfortably inside the micrometer regime the estimators rely on.
pub const DEFAULT_SUBDIVISIONS: usize = 16;

/// Body-frame generator `eta(s) = [e3; u(s)]` of the moving-frame ODE.
fn generator<T: Real>(c: &Vector6<T>, s: T, length: T) -> Result<TwistT<T>> {
    let u = basis_eval(s, length)? * c;
    Ok(Vector6::new(T::zero(), T::zero(), T::one(), u[0], u[1], u[2]))
}

/// One Magnus increment over `[s0, s0 + h]` together with its derivative
/// with respect to the modal coefficients.
struct MagnusStep<T: Real> {
    /// Increment twist `Omega`.
    omega: TwistT<T>,
    /// `dOmega/dc` column-stacked as a 6x6 matrix.
    domega: Matrix6<T>,
}

fn magnus_step<T: Real>(c: &Vector6<T>, s0: T, h: T, length: T) -> Result<MagnusStep<T>> {
    let half = real::<T>(0.5);
    let gauss_off = real::<T>(0.288_675_134_594_812_88); // sqrt(3)/6
    let s1 = s0 + h * (half - gauss_off);
    let s2 = s0 + h * (half + gauss_off);

    let eta1 = generator(c, s1, length)?;
    let eta2 = generator(c, s2, length)?;
    let ad1 = ad6(&eta1);
    let ad2 = ad6(&eta2);

    let w_lin = h * half;
    let w_comm = real::<T>(0.144_337_567_297_406_44) * h * h; // sqrt(3)/12

    let omega = (eta1 + eta2) * w_lin + ad1 * eta2 * w_comm;

    // deta_j/dc only has angular rows and equals the curvature basis there.
    let phi1 = basis_eval(s1, length)?;
    let phi2 = basis_eval(s2, length)?;
    let mut b1 = Matrix6::zeros();
    let mut b2 = Matrix6::zeros();
    b1.fixed_view_mut::<3, 6>(3, 0).copy_from(&phi1);
    b2.fixed_view_mut::<3, 6>(3, 0).copy_from(&phi2);

    let domega = (b1 + b2) * w_lin + (ad1 * b2 - ad2 * b1) * w_comm;
    Ok(MagnusStep { omega, domega })
}

/// Cursor that advances a pose (and optionally the configuration Jacobian)
/// along the backbone in Magnus increments.
struct Advancer<T: Real> {
    pose: PoseT<T>,
    jacobian: Matrix6<T>,
    with_jacobian: bool,
}

impl<T: Real> Advancer<T> {
    fn new(with_jacobian: bool) -> Self {
        Self {
            pose: PoseT::identity(),
            jacobian: Matrix6::zeros(),
            with_jacobian,
        }
    }

    fn advance(&mut self, c: &Vector6<T>, s0: T, s1: T, steps: usize, length: T) -> Result<()> {
        let h = (s1 - s0) / real::<T>(steps as f64);
        for k in 0..steps {
            let sk = s0 + h * real::<T>(k as f64);
            let step = magnus_step(c, sk, h, length)?;
            let g = se3_exp(&step.omega);
            if self.with_jacobian {
                self.jacobian =
                    g.inverse().adjoint() * self.jacobian + dexp_neg(&step.omega) * step.domega;
            }
            self.pose = self.pose.compose(&g);
        }
        Ok(())
    }
}

fn subdivisions_for<T: Real>(gap: T, h_max: T) -> usize {
    let ratio = to_f64(gap / h_max);
    (ratio.ceil() as usize).max(1)
}

/// Cross-section pose `T(s)` for modal coefficients `c`.
///
/// `n_sub` Magnus increments are used over `[0, s]`.
pub fn pose<T: Real>(c: &Vector6<T>, s: T, length: T, n_sub: usize) -> Result<PoseT<T>> {
    if n_sub == 0 {
        return Err(Error::InvalidParams("n_sub must be at least 1".into()));
    }
    basis_eval(s, length)?; // domain check
    if s == T::zero() {
        return Ok(PoseT::identity());
    }
    let mut cursor = Advancer::new(false);
    cursor.advance(c, T::zero(), s, n_sub, length)?;
    Ok(cursor.pose)
}

/// Pose and configuration Jacobian `J_xic(s)` in one pass.
///
/// Column `i` of the Jacobian is the body twist `vee(T^-1 dT/dc_i)`; the
/// Jacobian at the base is identically zero and its rank never exceeds 5
/// (no modal rate can produce an instantaneous body z-translation).
pub fn pose_with_jacobian<T: Real>(
    c: &Vector6<T>,
    s: T,
    length: T,
    n_sub: usize,
) -> Result<(PoseT<T>, Matrix6<T>)> {
    if n_sub == 0 {
        return Err(Error::InvalidParams("n_sub must be at least 1".into()));
    }
    basis_eval(s, length)?;
    if s == T::zero() {
        return Ok((PoseT::identity(), Matrix6::zeros()));
    }
    let mut cursor = Advancer::new(true);
    cursor.advance(c, T::zero(), s, n_sub, length)?;
    Ok((cursor.pose, cursor.jacobian))
}

/// Configuration Jacobian alone; see [`pose_with_jacobian`].
pub fn body_jacobian<T: Real>(
    c: &Vector6<T>,
    s: T,
    length: T,
    n_sub: usize,
) -> Result<Matrix6<T>> {
    Ok(pose_with_jacobian(c, s, length, n_sub)?.1)
}

/// Pose + Jacobian evaluated at one backbone station during a sweep.
#[derive(Debug, Clone)]
pub struct SweepStation<T: Real> {
    /// Arclength of the station.
    pub s: T,
    /// Cross-section pose at the station.
    pub pose: PoseT<T>,
    /// Configuration Jacobian at the station.
    pub jacobian: Matrix6<T>,
}

/// Single forward pass evaluating pose and Jacobian at many stations.
///
/// Dynamics assembly needs `T(s)` and `J_xic(s)` at all quadrature nodes and
/// disk locations; marching once along the backbone reuses every Magnus
/// increment instead of re-integrating from the base per station. Gaps wider
/// than `length / n_sub` are subdivided so accuracy never falls below the
/// single-target resolution.
pub struct ShapeSweep;

impl ShapeSweep {
    /// Evaluates sorted, in-range stations `targets` for coefficients `c`.
    pub fn run<T: Real>(
        c: &Vector6<T>,
        targets: &[T],
        length: T,
        n_sub: usize,
    ) -> Result<Vec<SweepStation<T>>> {
        if n_sub == 0 {
            return Err(Error::InvalidParams("n_sub must be at least 1".into()));
        }
        let h_max = length / real::<T>(n_sub as f64);
        let mut cursor = Advancer::new(true);
        let mut out = Vec::with_capacity(targets.len());
        let mut s_prev = T::zero();
        for (idx, &s) in targets.iter().enumerate() {
            basis_eval(s, length)?;
            if s < s_prev {
                return Err(Error::InvalidParams(format!(
                    "sweep stations must be sorted ascending (index {idx})"
                )));
            }
            if s > s_prev {
                let steps = subdivisions_for(s - s_prev, h_max);
                cursor.advance(c, s_prev, s, steps, length)?;
                s_prev = s;
            }
            out.push(SweepStation {
                s,
                pose: cursor.pose,
                jacobian: cursor.jacobian,
            });
        }
        Ok(out)
    }
}

/// Curvature-to-twist map stacked for tests: `xi(s) = J_xic(s) c_dot`.
pub fn body_twist<T: Real>(
    c: &Vector6<T>,
    c_dot: &Vector6<T>,
    s: T,
    length: T,
    n_sub: usize,
) -> Result<TwistT<T>> {
    Ok(body_jacobian(c, s, length, n_sub)? * c_dot)
}

#[allow(dead_code)]
fn _assert_send_sync<T: Real>() {
    fn check<U: Send + Sync>() {}
    check::<SweepStation<T>>();
}
