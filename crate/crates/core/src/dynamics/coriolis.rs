//! Coriolis/centrifugal matrix from Christoffel symbols.
//!
//! ```text
//!   N_ij = 1/2 sum_k ( dM_ij/dc_k + dM_ik/dc_j - dM_kj/dc_i ) c_dot_k
//! ```
//!
//! with `dM/dc_k` by forward finite differences (step `1e-6 max(1, |c_k|)`)
//! about the unperturbed mass matrix, which callers on the integration hot
//! path have already computed. The constant actuation inertia drops out of
//! the differences exactly. This factorization guarantees `M_dot = N + N^T`,
//! i.e. `M_dot - 2N` is skew-symmetric, which the momentum observer relies
//! on: the identity is algebraic in the shared derivative tensor, so it holds
//! to machine precision independent of the differencing error.

use nalgebra::{Matrix6, Vector6};

use crate::error::Result;
use crate::scalar::{real, Real};

use super::model::SegmentModelT;

impl<T: Real> SegmentModelT<T> {
    /// Derivative tensor `dM/dc_k`, k = 0..6.
    pub(crate) fn mass_matrix_partials(&self, c: &Vector6<T>) -> Result<[Matrix6<T>; 6]> {
        let base = self.mass_matrix(c)?;
        self.mass_matrix_partials_about(c, &base)
    }

    /// Derivative tensor by forward differences about a precomputed `base`
    /// mass matrix, saving six backbone sweeps per call.
    pub(crate) fn mass_matrix_partials_about(
        &self,
        c: &Vector6<T>,
        base: &Matrix6<T>,
    ) -> Result<[Matrix6<T>; 6]> {
        let mut partials = [Matrix6::zeros(); 6];
        for k in 0..6 {
            let h = self.fd_step(c[k]);
            let mut cp = *c;
            cp[k] += h;
            let mp = self.mass_matrix(&cp)?;
            partials[k] = (mp - base) / h;
        }
        Ok(partials)
    }

    /// Coriolis matrix `N(c, c_dot)`.
    pub fn coriolis_matrix(&self, c: &Vector6<T>, c_dot: &Vector6<T>) -> Result<Matrix6<T>> {
        let dm = self.mass_matrix_partials(c)?;
        Ok(assemble_christoffel(&dm, c_dot))
    }
}

/// Assembles `N` from a precomputed derivative tensor.
pub(crate) fn assemble_christoffel<T: Real>(
    dm: &[Matrix6<T>; 6],
    c_dot: &Vector6<T>,
) -> Matrix6<T> {
    let half = real::<T>(0.5);
    let mut n = Matrix6::zeros();
    for i in 0..6 {
        for j in 0..6 {
            let mut acc = T::zero();
            for k in 0..6 {
                acc += (dm[k][(i, j)] + dm[j][(i, k)] - dm[i][(k, j)]) * c_dot[k];
            }
            n[(i, j)] = acc * half;
        }
    }
    n
}
