//! Precomputed segment model: parameters + routing + derived constant maps.

use nalgebra::{Matrix6, SMatrix, Vector6};

use crate::error::Result;
use crate::kinematics::basis::basis_eval;
use crate::kinematics::magnus::{self, ShapeSweep, SweepStation, DEFAULT_SUBDIVISIONS};
use crate::kinematics::routing::{capstan_jacobian, tendon_map, RoutingGeometryT, TendonMap};
use crate::kinematics::PoseT;
use crate::quadrature::gauss_legendre_16;
use crate::scalar::{real, to_f64, Real};

use super::params::SegmentParamsT;

/// Role of one backbone station inside the model's station table.
#[derive(Debug, Clone, Copy)]
pub(crate) enum StationRole<T: Real> {
    /// Backbone quadrature node with its scaled weight.
    Quadrature(T),
    /// Spacer disk (index into `params.disks`).
    Disk(usize),
}

#[derive(Debug, Clone, Copy)]
pub(crate) struct Station<T: Real> {
    pub s: T,
    pub role: StationRole<T>,
}

/// A segment model ready for dynamics evaluation.
///
/// Construction validates the parameters, builds the constant tendon-length
/// map `J_lc`, capstan map `J_qc`, and modal stiffness `K_c`, and lays out
/// the backbone stations (quadrature nodes + disks) evaluated per
/// configuration by one kinematic sweep.
#[derive(Debug, Clone)]
pub struct SegmentModelT<T: Real> {
    params: SegmentParamsT<T>,
    routing: RoutingGeometryT<T>,
    tendon: TendonMap<T>,
    jqc: SMatrix<T, 2, 6>,
    stiffness: Matrix6<T>,
    stations: Vec<Station<T>>,
    disk_station_indices: Vec<usize>,
    n_sub: usize,
}

impl<T: Real> SegmentModelT<T> {
    /// Builds a model from validated parameters and routing.
    pub fn new(params: SegmentParamsT<T>, routing: RoutingGeometryT<T>) -> Result<Self> {
        params.validate()?;
        let tendon = tendon_map(&routing, params.length)?;
        let jqc = capstan_jacobian(&tendon, params.capstan_radius, params.capstan_lead)?;

        // Modal stiffness K_c = int Phi^T diag(EI_x, EI_y, JG) Phi ds. The
        // torsion row of Phi is zero, so JG is annihilated by construction.
        let (eix, eiy) = params.bending_stiffness;
        let jg = params.torsional_rigidity;
        let mut kc = Matrix6::zeros();
        for (s, w) in gauss_legendre_16(T::zero(), params.length) {
            let phi = basis_eval(s, params.length)?;
            let mut scaled = phi;
            for col in 0..6 {
                scaled[(0, col)] *= eix * w;
                scaled[(1, col)] *= eiy * w;
                scaled[(2, col)] *= jg * w;
            }
            kc += phi.transpose() * scaled;
        }

        let mut stations: Vec<Station<T>> = gauss_legendre_16(T::zero(), params.length)
            .into_iter()
            .map(|(s, w)| Station {
                s,
                role: StationRole::Quadrature(w),
            })
            .collect();
        for (i, d) in params.disks.iter().enumerate() {
            stations.push(Station {
                s: d.arclength,
                role: StationRole::Disk(i),
            });
        }
        stations.sort_by(|a, b| to_f64(a.s).partial_cmp(&to_f64(b.s)).unwrap());
        let mut disk_station_indices = vec![0usize; params.disks.len()];
        for (i, station) in stations.iter().enumerate() {
            if let StationRole::Disk(idx) = station.role {
                disk_station_indices[idx] = i;
            }
        }

        Ok(Self {
            params,
            routing,
            tendon,
            jqc,
            stiffness: kc,
            stations,
            disk_station_indices,
            n_sub: DEFAULT_SUBDIVISIONS,
        })
    }

    /// Model with the reference routing derived from the parameters.
    pub fn with_reference_routing(params: SegmentParamsT<T>) -> Result<Self> {
        let routing = params.reference_routing()?;
        Self::new(params, routing)
    }

    /// Physical parameters.
    pub fn params(&self) -> &SegmentParamsT<T> {
        &self.params
    }

    /// Routing geometry.
    pub fn routing(&self) -> &RoutingGeometryT<T> {
        &self.routing
    }

    /// Constant tendon-length map `dl = J_lc c`.
    pub fn tendon_map(&self) -> &TendonMap<T> {
        &self.tendon
    }

    /// Constant capstan map `q_dot = J_qc c_dot`.
    pub fn capstan_map(&self) -> &SMatrix<T, 2, 6> {
        &self.jqc
    }

    /// Modal stiffness matrix `K_c`.
    pub fn stiffness_matrix(&self) -> &Matrix6<T> {
        &self.stiffness
    }

    /// Magnus subdivisions per segment length used by kinematic queries.
    pub fn subdivisions(&self) -> usize {
        self.n_sub
    }

    /// Overrides the kinematic resolution (mostly for tests).
    pub fn set_subdivisions(&mut self, n_sub: usize) {
        assert!(n_sub > 0, "n_sub must be at least 1");
        self.n_sub = n_sub;
    }

    pub(crate) fn stations(&self) -> &[Station<T>] {
        &self.stations
    }

    /// Index into the station sweep for each disk, ordered proximal to distal.
    pub(crate) fn disk_station_indices(&self) -> &[usize] {
        &self.disk_station_indices
    }

    /// Number of Magnus steps for a span `[0, s]` at model resolution.
    fn steps_for(&self, s: T) -> usize {
        let frac = to_f64(s / self.params.length);
        ((self.n_sub as f64 * frac).ceil() as usize).max(1)
    }

    /// Cross-section pose at arclength `s`.
    pub fn pose(&self, c: &Vector6<T>, s: T) -> Result<PoseT<T>> {
        magnus::pose(c, s, self.params.length, self.steps_for(s))
    }

    /// Configuration Jacobian at arclength `s`.
    pub fn body_jacobian(&self, c: &Vector6<T>, s: T) -> Result<Matrix6<T>> {
        magnus::body_jacobian(c, s, self.params.length, self.steps_for(s))
    }

    /// Pose and configuration Jacobian at arclength `s`.
    pub fn pose_with_jacobian(&self, c: &Vector6<T>, s: T) -> Result<(PoseT<T>, Matrix6<T>)> {
        magnus::pose_with_jacobian(c, s, self.params.length, self.steps_for(s))
    }

    /// Evaluates pose + Jacobian at every model station in one pass.
    pub(crate) fn sweep(&self, c: &Vector6<T>) -> Result<Vec<SweepStation<T>>> {
        let targets: Vec<T> = self.stations.iter().map(|st| st.s).collect();
        ShapeSweep::run(c, &targets, self.params.length, self.n_sub)
    }

    /// Recovers modal coefficients from string-encoder length changes.
    pub fn shape_from_lengths(&self, dl: &Vector6<T>) -> Vector6<T> {
        crate::kinematics::routing::shape_from_lengths(&self.tendon, dl)
    }

    /// Generalized force of a body wrench applied at the segment tip.
    pub fn distal_reaction(&self, c: &Vector6<T>, w: &super::WrenchT<T>) -> Result<Vector6<T>> {
        let j = self.body_jacobian(c, self.params.length)?;
        Ok(j.transpose() * w.to_vector())
    }

    /// Small helper shared by the finite-difference layers: step size scaled
    /// to the coefficient magnitude.
    pub(crate) fn fd_step(&self, ck: T) -> T {
        real::<T>(1e-6) * T::one().max(ck.abs())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn model_builds_for_reference_segment() {
        let model =
            SegmentModelT::<f64>::with_reference_routing(SegmentParamsT::reference_distal())
                .unwrap();
        // 16 quadrature nodes + 6 disks.
        assert_eq!(model.stations().len(), 22);
        // Stations sorted ascending, ending at the tip disk.
        let ss: Vec<f64> = model.stations().iter().map(|st| st.s).collect();
        assert!(ss.windows(2).all(|w| w[0] <= w[1]));
        assert_eq!(*ss.last().unwrap(), model.params().length);
    }

    #[test]
    fn stiffness_matrix_matches_closed_form() {
        // K_c = [EI_x G, 0; 0, EI_y G] with
        // G = L [[1, 0, -1/3], [0, 1/3, 0], [-1/3, 0, 7/15]].
        let params = SegmentParamsT::<f64>::reference_distal();
        let l = params.length;
        let (eix, eiy) = params.bending_stiffness;
        let model = SegmentModelT::with_reference_routing(params).unwrap();
        let g = [
            [l, 0.0, -l / 3.0],
            [0.0, l / 3.0, 0.0],
            [-l / 3.0, 0.0, 7.0 * l / 15.0],
        ];
        let kc = model.stiffness_matrix();
        for i in 0..3 {
            for j in 0..3 {
                approx::assert_relative_eq!(kc[(i, j)], eix * g[i][j], epsilon = 1e-12);
                approx::assert_relative_eq!(kc[(3 + i, 3 + j)], eiy * g[i][j], epsilon = 1e-12);
                approx::assert_relative_eq!(kc[(i, 3 + j)], 0.0, epsilon = 1e-15);
            }
        }
    }

    #[test]
    fn shape_sensing_roundtrip_through_model() {
        let model =
            SegmentModelT::<f64>::with_reference_routing(SegmentParamsT::reference_distal())
                .unwrap();
        let c = Vector6::new(0.8, -0.5, 0.2, 1.1, 0.0, -0.4);
        let dl = model.tendon_map().matrix * c;
        approx::assert_relative_eq!(model.shape_from_lengths(&dl), c, epsilon = 1e-10);
    }

    #[test]
    fn torsional_rigidity_is_structurally_inert() {
        let mut params = SegmentParamsT::<f64>::reference_distal();
        let model_a = SegmentModelT::with_reference_routing(params.clone()).unwrap();
        params.torsional_rigidity = 17.0;
        let model_b = SegmentModelT::with_reference_routing(params).unwrap();
        assert_eq!(model_a.stiffness_matrix(), model_b.stiffness_matrix());
    }
}
