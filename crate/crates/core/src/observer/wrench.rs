//! Contact-wrench recovery from a generalized-force residual.
//!
//! The residual `r` produced by either estimator lives in coefficient space;
//! mapping it back to a physical wrench at a known contact arclength is
//! underdetermined in general (and rank-deficient at straight shapes), so we
//! solve the weighted minimum-norm problem
//!
//! ```text
//!   min  w' W w   subject to   J(s_c)' w = r,   A w = 0
//! ```
//!
//! by restricting to the null space of `A`, whitening with `W^{-1/2}`, and
//! applying a truncated pseudo-inverse. Inconsistent right-hand sides (noise
//! components outside the physically reachable range) are projected out and
//! reported through the residual field rather than treated as errors.

use nalgebra::{DMatrix, DVector, Matrix6, SymmetricEigen, Vector6};

use crate::dynamics::{SegmentModelT, WrenchT};
use crate::error::{Error, Result};
use crate::scalar::{real, to_f64, Real};

/// Relative cutoff on singular values of the reduced map.
const PINV_RELATIVE_TOL: f64 = 1e-10;
/// Relative cutoff (on eigenvalues of `A'A`) deciding the null space of the
/// constraint matrix: a 1e-6 relative singular-value cutoff. Forming `A'A`
/// floors spurious eigenvalues near `eps * lambda_max`, so the cutoff must
/// sit well above that while staying far below any deliberate constraint.
const NULLSPACE_RELATIVE_TOL: f64 = 1e-12;

/// Specification of one wrench-recovery problem.
#[derive(Debug, Clone)]
pub struct WrenchProblem<T: Real> {
    /// Diagonal entries of the weighting matrix `W`; all must be positive.
    pub weight: Vector6<T>,
    /// Hard constraints `A w = 0`, one row per constraint, six columns in
    /// the wrench ordering `[f_x, f_y, f_z, m_x, m_y, m_z]`. May be empty.
    pub constraints: DMatrix<T>,
    /// Arclength of the assumed contact point (m).
    pub contact_arclength: T,
}

impl<T: Real> WrenchProblem<T> {
    /// Planar tip-force problem: only `f_x` and `f_y` may be nonzero.
    pub fn planar_force(contact_arclength: T) -> Self {
        let mut a = DMatrix::zeros(4, 6);
        for i in 0..4 {
            a[(i, i + 2)] = T::one();
        }
        Self {
            weight: Vector6::repeat(T::one()),
            constraints: a,
            contact_arclength,
        }
    }

    /// Fully unconstrained recovery (weighted minimum norm over all six
    /// wrench components).
    pub fn unconstrained(contact_arclength: T) -> Self {
        Self {
            weight: Vector6::repeat(T::one()),
            constraints: DMatrix::zeros(0, 6),
            contact_arclength,
        }
    }

    fn validate(&self, length: T) -> Result<()> {
        if self.constraints.ncols() != 6 {
            return Err(Error::InvalidParams(format!(
                "constraint matrix must have 6 columns, got {}",
                self.constraints.ncols()
            )));
        }
        if self.weight.iter().any(|w| !(to_f64(*w) > 0.0)) {
            return Err(Error::InvalidParams(
                "wrench weights must all be positive".into(),
            ));
        }
        let s = to_f64(self.contact_arclength);
        if !(s >= 0.0 && s <= to_f64(length)) {
            return Err(Error::InvalidParams(format!(
                "contact arclength {s} outside the segment [0, {}]",
                to_f64(length)
            )));
        }
        Ok(())
    }
}

/// Recovered wrench plus solve diagnostics.
#[derive(Debug, Clone)]
pub struct WrenchEstimate<T: Real> {
    /// Estimated contact wrench at the configured arclength.
    pub wrench: WrenchT<T>,
    /// `|J' w - r|`: distance between the residual explained by the wrench
    /// and the input residual. Nonzero when `r` has components outside the
    /// reachable range (noise, wrong contact location, active constraints).
    pub residual: T,
    /// `|A w|`: violation of the hard constraints (numerically zero by
    /// construction; reported for auditing).
    pub constraint_violation: T,
}

/// Orthonormal basis of the null space of `a` (6 columns), as matrix columns.
fn nullspace_basis<T: Real>(a: &DMatrix<T>) -> Vec<Vector6<T>> {
    if a.nrows() == 0 {
        return (0..6).map(|i| Vector6::ith(i, T::one())).collect();
    }
    let ata_dyn = a.transpose() * a;
    let ata = Matrix6::from_fn(|i, j| ata_dyn[(i, j)]);
    let eig = SymmetricEigen::new(ata);
    let lambda_max = eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(T::zero(), |m, l| m.max(l));
    let tol = lambda_max * real::<T>(NULLSPACE_RELATIVE_TOL);
    let mut basis = Vec::new();
    for i in 0..6 {
        if eig.eigenvalues[i] <= tol {
            basis.push(eig.eigenvectors.column(i).into_owned());
        }
    }
    basis
}

/// Solves the weighted, constrained minimum-norm wrench recovery.
pub fn estimate_wrench<T: Real>(
    model: &SegmentModelT<T>,
    c: &Vector6<T>,
    r: &Vector6<T>,
    problem: &WrenchProblem<T>,
) -> Result<WrenchEstimate<T>> {
    problem.validate(model.params().length)?;
    let jacobian = model.body_jacobian(c, problem.contact_arclength)?;

    let basis = nullspace_basis(&problem.constraints);
    let finish = |wrench: Vector6<T>| -> WrenchEstimate<T> {
        let residual = (jacobian.transpose() * wrench - r).norm();
        let w_dyn = DVector::from_column_slice(wrench.as_slice());
        let constraint_violation = if problem.constraints.nrows() == 0 {
            T::zero()
        } else {
            (&problem.constraints * w_dyn).norm()
        };
        WrenchEstimate {
            wrench: WrenchT::from_vector(&wrench),
            residual,
            constraint_violation,
        }
    };
    if basis.is_empty() {
        // Constraints pin the wrench to zero; nothing to solve.
        return Ok(finish(Vector6::zeros()));
    }
    let m = basis.len();
    let mut z = DMatrix::zeros(6, m);
    for (j, col) in basis.iter().enumerate() {
        for i in 0..6 {
            z[(i, j)] = col[i];
        }
    }

    // Whitening: S = (Z' W Z)^{-1/2}, symmetric.
    let mut wz = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let mut acc = T::zero();
            for k in 0..6 {
                acc += z[(k, i)] * problem.weight[k] * z[(k, j)];
            }
            wz[(i, j)] = acc;
        }
    }
    let eig = SymmetricEigen::new(wz);
    let lmax = eig
        .eigenvalues
        .iter()
        .cloned()
        .fold(T::zero(), |a, l| a.max(l));
    if eig
        .eigenvalues
        .iter()
        .any(|l| *l <= lmax * real::<T>(1e-14))
    {
        return Err(Error::InvalidParams(
            "weight projection onto the constraint null space lost rank".into(),
        ));
    }
    let mut s = DMatrix::zeros(m, m);
    for i in 0..m {
        for j in 0..m {
            let mut acc = T::zero();
            for k in 0..m {
                acc += eig.eigenvectors[(i, k)] * eig.eigenvectors[(j, k)]
                    / eig.eigenvalues[k].sqrt();
            }
            s[(i, j)] = acc;
        }
    }

    // Reduced map from whitened coordinates to the residual.
    let jt = DMatrix::from_fn(6, 6, |i, j| jacobian[(j, i)]);
    let g = &jt * &z * &s;
    let svd = g.clone().svd(true, true);
    let sigma_max = svd
        .singular_values
        .iter()
        .cloned()
        .fold(T::zero(), |a, v| a.max(v));
    let wrench = if to_f64(sigma_max) == 0.0 {
        Vector6::zeros()
    } else {
        let pinv = svd
            .pseudo_inverse(sigma_max * real::<T>(PINV_RELATIVE_TOL))
            .map_err(|e| Error::InvalidParams(format!("wrench recovery SVD failed: {e}")))?;
        let u = pinv * DVector::from_column_slice(r.as_slice());
        let w_dyn = &z * &s * u;
        Vector6::from_fn(|i, _| w_dyn[i])
    };
    Ok(finish(wrench))
}
