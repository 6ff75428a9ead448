//! Minimal SE(3) toolbox: hat/vee maps, exponential, adjoints, and the
//! right-trivialized exponential derivative.
//!
//! Twists are ordered `[v; omega]` (linear on top), so the 4x4 matrix form is
//!
//! ```text
//!   hat([v; w]) = | hat3(w)  v |
//!                 |   0      0 |
//! ```

use nalgebra::{Matrix3, Matrix4, Matrix6, Vector3, Vector6};

use crate::scalar::{real, Real};

/// Body twist `[v; omega]`.
pub type TwistT<T> = Vector6<T>;

/// Rigid transform on SE(3), stored as rotation + translation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PoseT<T: Real> {
    /// Rotation matrix (body frame expressed in the parent frame).
    pub rot: Matrix3<T>,
    /// Translation of the body-frame origin in the parent frame.
    pub pos: Vector3<T>,
}

impl<T: Real> Default for PoseT<T> {
    fn default() -> Self {
        Self::identity()
    }
}

impl<T: Real> PoseT<T> {
    /// Identity transform.
    pub fn identity() -> Self {
        Self {
            rot: Matrix3::identity(),
            pos: Vector3::zeros(),
        }
    }

    /// Composition `self * other` (apply `other` in `self`'s body frame).
    pub fn compose(&self, other: &Self) -> Self {
        Self {
            rot: self.rot * other.rot,
            pos: self.pos + self.rot * other.pos,
        }
    }

    /// Group inverse.
    pub fn inverse(&self) -> Self {
        let rt = self.rot.transpose();
        Self {
            rot: rt,
            pos: -(rt * self.pos),
        }
    }

    /// Homogeneous 4x4 matrix form.
    pub fn to_matrix(&self) -> Matrix4<T> {
        let mut m = Matrix4::identity();
        m.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rot);
        m.fixed_view_mut::<3, 1>(0, 3).copy_from(&self.pos);
        m
    }

    /// Builds a pose from a homogeneous matrix (no orthonormalization).
    pub fn from_matrix(m: &Matrix4<T>) -> Self {
        Self {
            rot: m.fixed_view::<3, 3>(0, 0).into_owned(),
            pos: m.fixed_view::<3, 1>(0, 3).into_owned(),
        }
    }

    /// Maps a point expressed in the body frame into the parent frame.
    pub fn transform_point(&self, p: &Vector3<T>) -> Vector3<T> {
        self.rot * p + self.pos
    }

    /// Adjoint matrix `Ad_g` such that `hat(Ad_g xi) = g hat(xi) g^-1`.
    pub fn adjoint(&self) -> Matrix6<T> {
        let mut ad = Matrix6::zeros();
        ad.fixed_view_mut::<3, 3>(0, 0).copy_from(&self.rot);
        ad.fixed_view_mut::<3, 3>(3, 3).copy_from(&self.rot);
        let ph_r = hat3(&self.pos) * self.rot;
        ad.fixed_view_mut::<3, 3>(0, 3).copy_from(&ph_r);
        ad
    }

    /// Frobenius defect `|| R^T R - I ||` of the rotation block.
    pub fn orthonormality_defect(&self) -> T {
        (self.rot.transpose() * self.rot - Matrix3::identity()).norm()
    }
}

/// Skew-symmetric matrix of a 3-vector: `hat3(w) x = w cross x`.
pub fn hat3<T: Real>(w: &Vector3<T>) -> Matrix3<T> {
    let z = T::zero();
    Matrix3::new(z, -w[2], w[1], w[2], z, -w[0], -w[1], w[0], z)
}

/// Inverse of [`hat3`] (takes the skew part of the input).
pub fn vee3<T: Real>(m: &Matrix3<T>) -> Vector3<T> {
    let half = real::<T>(0.5);
    Vector3::new(
        (m[(2, 1)] - m[(1, 2)]) * half,
        (m[(0, 2)] - m[(2, 0)]) * half,
        (m[(1, 0)] - m[(0, 1)]) * half,
    )
}

/// se(3) hat map of a twist `[v; w]` into its 4x4 matrix form.
pub fn hat4<T: Real>(xi: &TwistT<T>) -> Matrix4<T> {
    let mut m = Matrix4::zeros();
    let w = Vector3::new(xi[3], xi[4], xi[5]);
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(&hat3(&w));
    m[(0, 3)] = xi[0];
    m[(1, 3)] = xi[1];
    m[(2, 3)] = xi[2];
    m
}

/// Inverse of [`hat4`].
pub fn vee4<T: Real>(m: &Matrix4<T>) -> TwistT<T> {
    let rot = m.fixed_view::<3, 3>(0, 0).into_owned();
    let w = vee3(&rot);
    Vector6::new(m[(0, 3)], m[(1, 3)], m[(2, 3)], w[0], w[1], w[2])
}

/// Adjoint representation of a twist: `ad6(x1) x2 = vee([hat(x1), hat(x2)])`.
pub fn ad6<T: Real>(xi: &TwistT<T>) -> Matrix6<T> {
    let v = Vector3::new(xi[0], xi[1], xi[2]);
    let w = Vector3::new(xi[3], xi[4], xi[5]);
    let wh = hat3(&w);
    let vh = hat3(&v);
    let mut m = Matrix6::zeros();
    m.fixed_view_mut::<3, 3>(0, 0).copy_from(&wh);
    m.fixed_view_mut::<3, 3>(0, 3).copy_from(&vh);
    m.fixed_view_mut::<3, 3>(3, 3).copy_from(&wh);
    m
}

/// Rotation-coefficient triple used by the closed-form exponential.
///
/// Returns `(sin t / t, (1 - cos t) / t^2, (t - sin t) / t^3)` with series
/// fallbacks near zero.
fn exp_coeffs<T: Real>(theta: T) -> (T, T, T) {
    let t2 = theta * theta;
    if theta < real::<T>(1e-4) {
        let one = T::one();
        let a = one - t2 / real::<T>(6.0) + t2 * t2 / real::<T>(120.0);
        let b = real::<T>(0.5) - t2 / real::<T>(24.0) + t2 * t2 / real::<T>(720.0);
        let c = real::<T>(1.0 / 6.0) - t2 / real::<T>(120.0) + t2 * t2 / real::<T>(5040.0);
        (a, b, c)
    } else {
        let s = theta.sin();
        let cth = theta.cos();
        (
            s / theta,
            (T::one() - cth) / t2,
            (theta - s) / (t2 * theta),
        )
    }
}

/// Closed-form exponential map se(3) -> SE(3) for a twist `[v; w]`.
pub fn se3_exp<T: Real>(xi: &TwistT<T>) -> PoseT<T> {
    let v = Vector3::new(xi[0], xi[1], xi[2]);
    let w = Vector3::new(xi[3], xi[4], xi[5]);
    let theta = w.norm();
    let (a, b, c) = exp_coeffs(theta);
    let wh = hat3(&w);
    let wh2 = wh * wh;
    let rot = Matrix3::identity() + wh * a + wh2 * b;
    let vmat = Matrix3::identity() + wh * b + wh2 * c;
    PoseT {
        rot,
        pos: vmat * v,
    }
}

/// Right-trivialized exponential derivative as a 6x6 matrix:
/// `exp(hat(x))^-1 d/de exp(hat(x + e d)) = hat(dexp_neg(x) d)`.
///
/// Evaluated as the series `sum_k (-ad6(x))^k / (k+1)!`, which converges
/// rapidly for the small per-step increments used by the Magnus integrator.
pub fn dexp_neg<T: Real>(xi: &TwistT<T>) -> Matrix6<T> {
    let neg_ad = -ad6(xi);
    let mut sum = Matrix6::identity();
    let mut term = Matrix6::identity();
    let tol = T::default_epsilon();
    for k in 1..=24 {
        term = term * neg_ad / real::<T>((k + 1) as f64);
        sum += term;
        if term.norm() < tol {
            break;
        }
    }
    sum
}
