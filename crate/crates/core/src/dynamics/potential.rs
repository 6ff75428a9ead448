//! Conservative forces: elastic strain energy and gravity.
//!
//! ```text
//!   V(c) = 1/2 c^T K_c c
//!        - rho int g . p(s) ds
//!        - sum_d m_d g . ( p(s_d) + R(s_d) p_cm,d ) .
//! ```
//!
//! The gradient is analytic: `dp/dc_i = R v_i` and `dR/dc_i = R hat(w_i)`
//! with `[v_i; w_i]` the columns of the configuration Jacobian, so gravity
//! gradients reuse the same kinematic sweep as the mass matrix.

use nalgebra::{SMatrix, Vector6};

use crate::error::Result;
use crate::kinematics::lie::hat3;
use crate::kinematics::magnus::SweepStation;
use crate::scalar::{real, Real};

use super::model::{SegmentModelT, StationRole};

impl<T: Real> SegmentModelT<T> {
    /// Total potential energy `V(c)`.
    pub fn potential_energy(&self, c: &Vector6<T>) -> Result<T> {
        let sweep = self.sweep(c)?;
        Ok(self.potential_energy_from_sweep(c, &sweep))
    }

    pub(crate) fn potential_energy_from_sweep(
        &self,
        c: &Vector6<T>,
        sweep: &[SweepStation<T>],
    ) -> T {
        let p = self.params();
        let g = p.gravity;
        let mut v = (c.transpose() * self.stiffness_matrix() * c)[(0, 0)] * real::<T>(0.5);
        for (station, geom) in self.stations().iter().zip(sweep.iter()) {
            match station.role {
                StationRole::Quadrature(w) => {
                    v -= g.dot(&geom.pose.pos) * p.backbone_density * w;
                }
                StationRole::Disk(idx) => {
                    let d = &p.disks[idx];
                    let p_cm = geom.pose.transform_point(&d.com_offset);
                    v -= g.dot(&p_cm) * d.mass;
                }
            }
        }
        v
    }

    /// Gradient `dV/dc` (elastic + gravity), analytic.
    pub fn potential_gradient(&self, c: &Vector6<T>) -> Result<Vector6<T>> {
        let sweep = self.sweep(c)?;
        Ok(self.potential_gradient_from_sweep(c, &sweep))
    }

    pub(crate) fn potential_gradient_from_sweep(
        &self,
        c: &Vector6<T>,
        sweep: &[SweepStation<T>],
    ) -> Vector6<T> {
        let p = self.params();
        let g = p.gravity;
        // Elastic part: K_c is symmetric, so d(1/2 c^T K c)/dc = K c.
        let kc = self.stiffness_matrix();
        let mut grad: Vector6<T> = (kc + kc.transpose()) * c * real::<T>(0.5);
        for (station, geom) in self.stations().iter().zip(sweep.iter()) {
            let j = &geom.jacobian;
            let jv: SMatrix<T, 3, 6> = j.fixed_view::<3, 6>(0, 0).into_owned();
            let jw: SMatrix<T, 3, 6> = j.fixed_view::<3, 6>(3, 0).into_owned();
            let rt_g = geom.pose.rot.transpose() * g;
            match station.role {
                StationRole::Quadrature(w) => {
                    // d/dc_i ( -rho g . p ) = -rho g^T R v_i
                    grad -= jv.transpose() * rt_g * (p.backbone_density * w);
                }
                StationRole::Disk(idx) => {
                    let d = &p.disks[idx];
                    // d/dc_i ( p + R p_cm ) = R ( v_i + w_i x p_cm )
                    //                       = R ( v_i - hat(p_cm) w_i )
                    let b = jv - hat3(&d.com_offset) * jw;
                    grad -= b.transpose() * rt_g * d.mass;
                }
            }
        }
        grad
    }
}
