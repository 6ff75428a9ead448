//! Chebyshev curvature basis.
//!
//! Bending about the local x and y axes is resolved on the first three
//! Chebyshev polynomials of the first kind, mapped onto `s in [0, L]`:
//!
//! ```text
//!   phi(s) = [ 1,  (2s - L)/L,  8s^2/L^2 - 8s/L + 1 ]
//! ```
//!
//! The full basis matrix stacks the two bending axes; the torsion row is
//! identically zero (torsion-free backbone):
//!
//! ```text
//!   u(s) = Phi(s) c = [ phi^T      0   ] [c_x]
//!                     [   0      phi^T ] [c_y]
//!                     [   0        0   ]
//! ```

use nalgebra::{SMatrix, Vector3, Vector6};

use crate::error::{Error, Result};
use crate::scalar::{real, to_f64, Real};

fn check_domain<T: Real>(s: T, length: T) -> Result<()> {
    if length <= T::zero() {
        return Err(Error::InvalidParams(format!(
            "segment length must be positive, got {}",
            to_f64(length)
        )));
    }
    if s < T::zero() || s > length {
        return Err(Error::ArclengthOutOfRange {
            s: to_f64(s),
            length: to_f64(length),
        });
    }
    Ok(())
}

/// Scalar basis row `phi(s)` shared by both bending axes.
pub fn basis_row<T: Real>(s: T, length: T) -> Result<Vector3<T>> {
    check_domain(s, length)?;
    let x = s / length;
    let two = real::<T>(2.0);
    let eight = real::<T>(8.0);
    Ok(Vector3::new(
        T::one(),
        two * x - T::one(),
        eight * x * x - eight * x + T::one(),
    ))
}

/// Basis matrix `Phi(s)` mapping modal coefficients to local curvature.
pub fn basis_eval<T: Real>(s: T, length: T) -> Result<SMatrix<T, 3, 6>> {
    let phi = basis_row(s, length)?;
    let mut m = SMatrix::<T, 3, 6>::zeros();
    for i in 0..3 {
        m[(0, i)] = phi[i];
        m[(1, 3 + i)] = phi[i];
    }
    Ok(m)
}

/// Local curvature `u(s) = Phi(s) c` (third component is always zero).
pub fn curvature<T: Real>(c: &Vector6<T>, s: T, length: T) -> Result<Vector3<T>> {
    Ok(basis_eval(s, length)? * c)
}

/// Closed-form integral of the basis row over `[a, b] \subseteq [0, L]`.
///
/// Used by the tendon-length map, where tendon excursions integrate the
/// curvature over the anchored span.
pub fn basis_integral<T: Real>(a: T, b: T, length: T) -> Result<Vector3<T>> {
    check_domain(a, length)?;
    check_domain(b, length)?;
    if b < a {
        return Err(Error::InvalidParams(format!(
            "integration span is reversed: [{}, {}]",
            to_f64(a),
            to_f64(b)
        )));
    }
    let l = length;
    let prim1 = |s: T| s;
    let prim2 = |s: T| (s * s - l * s) / l;
    let prim3 = |s: T| {
        let eight = real::<T>(8.0);
        let four = real::<T>(4.0);
        let three = real::<T>(3.0);
        eight * s * s * s / (three * l * l) - four * s * s / l + s
    };
    Ok(Vector3::new(
        prim1(b) - prim1(a),
        prim2(b) - prim2(a),
        prim3(b) - prim3(a),
    ))
}

/// Peak-to-peak spread of each curvature component along the backbone,
/// evaluated on a dense arclength grid.
///
/// `max_s u_x - min_s u_x` (and the same for `u_y`) quantifies how far the
/// shape deviates from a constant-curvature arc: an arc scores zero.
pub fn circularness<T: Real>(c: &Vector6<T>, length: T, grid: usize) -> Result<(T, T)> {
    if grid < 2 {
        return Err(Error::InvalidParams(
            "circularness grid needs at least 2 points".into(),
        ));
    }
    let mut min_u = [T::max_value().unwrap(), T::max_value().unwrap()];
    let mut max_u = [-T::max_value().unwrap(), -T::max_value().unwrap()];
    let denom = real::<T>((grid - 1) as f64);
    for k in 0..grid {
        let s = length * real::<T>(k as f64) / denom;
        let u = curvature(c, s, length)?;
        for axis in 0..2 {
            if u[axis] < min_u[axis] {
                min_u[axis] = u[axis];
            }
            if u[axis] > max_u[axis] {
                max_u[axis] = u[axis];
            }
        }
    }
    Ok((max_u[0] - min_u[0], max_u[1] - min_u[1]))
}
