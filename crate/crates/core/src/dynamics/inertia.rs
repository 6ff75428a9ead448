//! Modal mass matrix and kinetic energy.
//!
//! Three inertia sources project into modal space through the configuration
//! Jacobian `J = J_xic(s)`:
//!
//! * distributed backbone inertia (translational + cross-section rotary),
//!   integrated with 16-point Gauss-Legendre quadrature,
//! * rigid spacer disks, shifted to their centers of mass by
//!   `S_cm = [[I, -hat(p_cm)], [0, I]]`,
//! * the reflected actuation chain through the constant capstan map.

use nalgebra::{Matrix3, Matrix6, SMatrix, Vector6};

use crate::error::Result;
use crate::kinematics::lie::hat3;
use crate::kinematics::magnus::SweepStation;
use crate::scalar::{real, Real};

use super::model::{SegmentModelT, StationRole};

impl<T: Real> SegmentModelT<T> {
    /// Mass matrix `M(c)` (symmetric positive definite).
    pub fn mass_matrix(&self, c: &Vector6<T>) -> Result<Matrix6<T>> {
        let sweep = self.sweep(c)?;
        Ok(self.mass_matrix_from_sweep(&sweep))
    }

    /// Mass matrix assembled from an existing kinematic sweep.
    pub(crate) fn mass_matrix_from_sweep(&self, sweep: &[SweepStation<T>]) -> Matrix6<T> {
        let p = self.params();
        let rho = p.backbone_density;
        let r2 = p.backbone_radius * p.backbone_radius;
        let quarter = real::<T>(0.25);
        let half = real::<T>(0.5);
        // Backbone rotary inertia density about x, y, z.
        let it = [rho * r2 * quarter, rho * r2 * quarter, rho * r2 * half];

        let mut m = Matrix6::zeros();
        for (station, geom) in self.stations().iter().zip(sweep.iter()) {
            let j = &geom.jacobian;
            let jv: SMatrix<T, 3, 6> = j.fixed_view::<3, 6>(0, 0).into_owned();
            let jw: SMatrix<T, 3, 6> = j.fixed_view::<3, 6>(3, 0).into_owned();
            match station.role {
                StationRole::Quadrature(w) => {
                    let mut jw_scaled = jw;
                    for axis in 0..3 {
                        for col in 0..6 {
                            jw_scaled[(axis, col)] *= it[axis] * w;
                        }
                    }
                    m += jv.transpose() * jv * (rho * w) + jw.transpose() * jw_scaled;
                }
                StationRole::Disk(idx) => {
                    let d = &p.disks[idx];
                    // Velocity of the center of mass: v_cm = v - hat(p_cm) w.
                    let gv = jv - hat3(&d.com_offset) * jw;
                    m += gv.transpose() * gv * d.mass + jw.transpose() * (d.inertia * jw);
                }
            }
        }
        // Reflected actuation inertia through the constant capstan map.
        let jqc = self.capstan_map();
        m += jqc.transpose() * jqc * p.actuation_inertia;
        m
    }

    /// Kinetic energy `T = 1/2 c_dot^T M(c) c_dot`.
    pub fn kinetic_energy(&self, c: &Vector6<T>, c_dot: &Vector6<T>) -> Result<T> {
        let m = self.mass_matrix(c)?;
        Ok((c_dot.transpose() * m * c_dot)[(0, 0)] * real::<T>(0.5))
    }

    /// Generalized momentum `p = M(c) c_dot`.
    pub fn generalized_momentum(&self, c: &Vector6<T>, c_dot: &Vector6<T>) -> Result<Vector6<T>> {
        Ok(self.mass_matrix(c)? * c_dot)
    }

    /// Backbone rotary inertia density matrix (exposed for tests).
    pub fn backbone_rotary_inertia(&self) -> Matrix3<T> {
        let p = self.params();
        let r2 = p.backbone_radius * p.backbone_radius;
        let rho = p.backbone_density;
        Matrix3::from_diagonal(&nalgebra::Vector3::new(
            rho * r2 * real::<T>(0.25),
            rho * r2 * real::<T>(0.25),
            rho * r2 * real::<T>(0.5),
        ))
    }
}
