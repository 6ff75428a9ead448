//! Physical parameters of one tendon-driven segment.
//!
//! All quantities are SI (meters, kilograms, seconds, newtons); the CLI
//! layer converts friendlier units (mm, g) when loading configuration files.

use nalgebra::{Matrix3, Vector3};

use crate::error::{Error, Result};
use crate::kinematics::routing::RoutingGeometryT;
use crate::scalar::{real, to_f64, Real};

/// One rigid spacer disk rigidly attached to the backbone.
#[derive(Debug, Clone, PartialEq)]
pub struct DiskParams<T: Real> {
    /// Arclength of the disk's cross-section, meters.
    pub arclength: T,
    /// Disk mass, kilograms.
    pub mass: T,
    /// Rotational inertia about the disk center of mass, disk frame, kg m^2.
    pub inertia: Matrix3<T>,
    /// Center-of-mass offset from the backbone in the disk frame, meters.
    pub com_offset: Vector3<T>,
}

/// Physical description of a segment.
#[derive(Debug, Clone, PartialEq)]
pub struct SegmentParamsT<T: Real> {
    /// Backbone length `L`, meters.
    pub length: T,
    /// Capstan radius `r_c`, meters.
    pub capstan_radius: T,
    /// Capstan helical lead `gamma`, meters per turn.
    pub capstan_lead: T,
    /// Backbone linear density `rho`, kg/m.
    pub backbone_density: T,
    /// Backbone cross-section radius, meters.
    pub backbone_radius: T,
    /// Torsional rigidity `JG`, N m^2. Structurally inert: the curvature
    /// basis carries no torsion, so this never reaches the dynamics.
    pub torsional_rigidity: T,
    /// Reflected actuation-chain inertia per capstan, kg m^2.
    pub actuation_inertia: T,
    /// Gravity vector in the base frame, m/s^2.
    pub gravity: Vector3<T>,
    /// Spacer disks in increasing arclength order; the last one is the
    /// end-disk at `s = L`.
    pub disks: Vec<DiskParams<T>>,
    /// Tendon pretension `f_pl`, newtons.
    pub pretension: T,
    /// Flexural rigidities `(EI_x, EI_y)`, N m^2.
    pub bending_stiffness: (T, T),
    /// Coulomb friction coefficients of the two capstan circuits.
    pub friction_coeffs: [T; 2],
}

impl<T: Real> SegmentParamsT<T> {
    /// Number of spacer disks `n_d`.
    pub fn disk_count(&self) -> usize {
        self.disks.len()
    }

    /// Checks ranges and structural constraints, returning an actionable
    /// message on the first violation.
    pub fn validate(&self) -> Result<()> {
        let fail = |msg: String| Err(Error::InvalidParams(msg));
        if !(self.length > T::zero()) {
            return fail(format!("length must be > 0, got {}", to_f64(self.length)));
        }
        if !(self.capstan_radius > T::zero()) {
            return fail("capstan radius must be > 0".into());
        }
        if self.capstan_lead < T::zero() {
            return fail("capstan lead must be >= 0".into());
        }
        if !(self.backbone_density > T::zero()) || !(self.backbone_radius > T::zero()) {
            return fail("backbone density and radius must be > 0".into());
        }
        if self.actuation_inertia < T::zero() {
            return fail("actuation inertia must be >= 0".into());
        }
        if self.pretension < T::zero() {
            return fail("pretension must be >= 0".into());
        }
        let (eix, eiy) = self.bending_stiffness;
        if !(eix > T::zero()) || !(eiy > T::zero()) {
            return fail("bending stiffnesses must be > 0".into());
        }
        for (j, mu) in self.friction_coeffs.iter().enumerate() {
            if *mu < T::zero() || *mu >= T::one() {
                return fail(format!(
                    "friction coefficient {} must lie in [0, 1), got {}",
                    j + 1,
                    to_f64(*mu)
                ));
            }
        }
        if self.disks.is_empty() {
            return fail("at least one disk (the end-disk) is required".into());
        }
        let mut prev = T::zero();
        for (i, d) in self.disks.iter().enumerate() {
            if !(d.arclength > prev) {
                return fail(format!(
                    "disk arclengths must be strictly increasing (disk {})",
                    i + 1
                ));
            }
            if d.arclength > self.length {
                return fail(format!("disk {} lies beyond the segment end", i + 1));
            }
            prev = d.arclength;
            if !(d.mass > T::zero()) {
                return fail(format!("disk {} mass must be > 0", i + 1));
            }
            let sym_defect = (d.inertia - d.inertia.transpose()).norm();
            if sym_defect > real::<T>(1e-9) * (T::one() + d.inertia.norm()) {
                return fail(format!("disk {} inertia must be symmetric", i + 1));
            }
            let eig = d.inertia.symmetric_eigenvalues();
            for k in 0..3 {
                if !(eig[k] > T::zero()) {
                    return fail(format!("disk {} inertia must be positive definite", i + 1));
                }
            }
        }
        let tip_gap = (self.disks.last().unwrap().arclength - self.length).abs();
        if tip_gap > real::<T>(1e-9) {
            return fail("the last disk must sit at the segment end s = L".into());
        }
        if !self.gravity.iter().all(|g| g.is_finite()) {
            return fail("gravity vector must be finite".into());
        }
        Ok(())
    }

    /// Routing geometry of the reference hardware for these parameters:
    /// sensing strings anchored at the first four spacer disks, actuation
    /// tendons spanning the whole segment with one capstan turn bending the
    /// segment by 42 degrees.
    pub fn reference_routing(&self) -> Result<RoutingGeometryT<T>> {
        if self.disks.len() < 5 {
            return Err(Error::InvalidParams(
                "reference routing expects at least five disks for string anchors".into(),
            ));
        }
        Ok(RoutingGeometryT::reference(
            self.length,
            self.capstan_radius,
            self.capstan_lead,
            [
                self.disks[0].arclength,
                self.disks[1].arclength,
                self.disks[2].arclength,
                self.disks[3].arclength,
            ],
            real::<T>(42.0_f64.to_radians()),
            real::<T>(0.1),
        ))
    }
}

/// Shared geometry of the reference segment (lengths, masses, inertias).
fn reference_geometry<T: Real>() -> SegmentParamsT<T> {
    let mm = |v: f64| real::<T>(v * 1e-3);
    let g = |v: f64| real::<T>(v * 1e-3);
    let gm2 = |v: f64| real::<T>(v * 1e-3);
    let spacer_inertia = Matrix3::new(
        gm2(0.5211),
        gm2(0.0024),
        gm2(-0.0002),
        gm2(0.0024),
        gm2(0.5273),
        gm2(0.0007),
        gm2(-0.0002),
        gm2(0.0007),
        gm2(0.9934),
    );
    let spacer_com = Vector3::new(mm(-0.0739), mm(0.1954), mm(5.7456));
    let spacer_s = [53.08, 102.62, 153.16, 203.70, 254.24];
    let mut disks: Vec<DiskParams<T>> = spacer_s
        .iter()
        .map(|&s| DiskParams {
            arclength: mm(s),
            mass: g(308.81),
            inertia: spacer_inertia,
            com_offset: spacer_com,
        })
        .collect();
    disks.push(DiskParams {
        arclength: mm(300.65),
        mass: g(743.12),
        inertia: Matrix3::new(
            gm2(1.1580),
            gm2(-0.0357),
            gm2(0.0001),
            gm2(-0.0357),
            gm2(1.4871),
            gm2(0.0),
            gm2(0.0001),
            gm2(0.0),
            gm2(2.0564),
        ),
        com_offset: Vector3::new(mm(-0.0133), mm(0.0), mm(20.8966)),
    });
    SegmentParamsT {
        length: mm(300.65),
        capstan_radius: mm(15.255),
        capstan_lead: mm(2.83),
        backbone_density: g(83.1532), // g/m -> kg/m
        backbone_radius: mm(2.0),
        torsional_rigidity: real::<T>(1.0),
        actuation_inertia: gm2(14.323),
        gravity: Vector3::new(T::zero(), T::zero(), real::<T>(-9.81)),
        disks,
        pretension: real::<T>(208.0),
        bending_stiffness: (T::one(), T::one()), // overwritten by callers
        friction_coeffs: [T::zero(), T::zero()],
    }
}

impl<T: Real> SegmentParamsT<T> {
    /// Reference distal segment: shared geometry plus its calibrated
    /// stiffness and friction values.
    pub fn reference_distal() -> Self {
        let mut p = reference_geometry::<T>();
        p.bending_stiffness = (real::<T>(1.1440), real::<T>(1.0373));
        p.friction_coeffs = [real::<T>(0.0312), real::<T>(0.1637)];
        p
    }

    /// Reference proximal segment: same geometry, its own calibration.
    pub fn reference_proximal() -> Self {
        let mut p = reference_geometry::<T>();
        p.bending_stiffness = (real::<T>(1.6003), real::<T>(2.1502));
        p.friction_coeffs = [real::<T>(0.0900), real::<T>(0.2000)];
        p
    }
}
