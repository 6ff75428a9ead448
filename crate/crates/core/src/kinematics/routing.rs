//! Tendon routing: length maps, capstan coupling, and shape sensing.
//!
//! Each routing channel (actuation tendon or sensing string) runs parallel to
//! the backbone at a cross-section offset `(p_x, p_y) = r (cos a, sin a)`
//! over an anchored arclength span. To first order its length change under
//! bending is
//!
//! ```text
//!   dl_i = int_span ( p_y,i u_x(s) - p_x,i u_y(s) ) ds ,
//! ```
//!
//! which is linear in the modal coefficients: `dl = J_lc c`. The rows are
//! closed-form Chebyshev integrals, so the map is exact for the modal
//! parameterization, constant, and invertible whenever the channels differ
//! in angle or span.

use nalgebra::{SMatrix, SVector, Vector6};

use crate::error::{Error, Result};
use crate::kinematics::basis::basis_integral;
use crate::scalar::{real, to_f64, Real};

/// Largest acceptable condition number for the tendon-length map.
pub const MAX_TENDON_MAP_CONDITION: f64 = 1e8;

/// One routed channel: a tendon or sensing string.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Channel<T: Real> {
    /// Angular station on the cross-section, radians from the +x axis.
    pub angle: T,
    /// Pitch radius of the channel's bushing circle, meters.
    pub pitch_radius: T,
    /// Anchored arclength span `[start, end]`, meters.
    pub span: (T, T),
}

impl<T: Real> Channel<T> {
    /// Cross-section offset `(p_x, p_y)` of the channel.
    pub fn offset(&self) -> (T, T) {
        (
            self.pitch_radius * self.angle.cos(),
            self.pitch_radius * self.angle.sin(),
        )
    }
}

/// Routing geometry of one segment: four sensing strings followed by the two
/// actuation tendons (the row order of the tendon-length map).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RoutingGeometryT<T: Real> {
    /// String-encoder channels (rows 0..4 of the length map).
    pub sensing: [Channel<T>; 4],
    /// Capstan-driven tendon channels (rows 4..6 of the length map).
    pub actuation: [Channel<T>; 2],
}

impl<T: Real> RoutingGeometryT<T> {
    /// Reference routing used by the shipped segment description.
    ///
    /// Sensing strings sit at 45deg/135deg/225deg/315deg and each anchors at
    /// a different spacer disk (string encoders measure the arc between the
    /// end-disk and one spacer disk), which is what makes the 6x6 length map
    /// invertible: channels sharing one span only ever observe two
    /// directions of the modal space.
    ///
    /// The actuation pitch radius is derived from the drive kinematics: one
    /// full capstan turn winds `sqrt((2 pi r_c)^2 + lead^2)` of tendon and
    /// bends the reference segment by `bend_per_turn`, so
    /// `r_act = wound_length / bend_per_turn`.
    pub fn reference(
        length: T,
        capstan_radius: T,
        capstan_lead: T,
        anchor_arclengths: [T; 4],
        bend_per_turn: T,
        sensing_pitch_radius: T,
    ) -> Self {
        let two_pi = real::<T>(std::f64::consts::TAU);
        let wound = ((two_pi * capstan_radius) * (two_pi * capstan_radius)
            + capstan_lead * capstan_lead)
            .sqrt();
        let r_act = wound / bend_per_turn;
        let deg = |d: f64| real::<T>(d.to_radians());
        let sensing = [
            Channel {
                angle: deg(45.0),
                pitch_radius: sensing_pitch_radius,
                span: (anchor_arclengths[0], length),
            },
            Channel {
                angle: deg(135.0),
                pitch_radius: sensing_pitch_radius,
                span: (anchor_arclengths[1], length),
            },
            Channel {
                angle: deg(225.0),
                pitch_radius: sensing_pitch_radius,
                span: (anchor_arclengths[2], length),
            },
            Channel {
                angle: deg(315.0),
                pitch_radius: sensing_pitch_radius,
                span: (anchor_arclengths[3], length),
            },
        ];
        let actuation = [
            Channel {
                angle: T::zero(),
                pitch_radius: r_act,
                span: (T::zero(), length),
            },
            Channel {
                angle: deg(90.0),
                pitch_radius: r_act,
                span: (T::zero(), length),
            },
        ];
        Self { sensing, actuation }
    }

    /// All channels in row order of the length map.
    pub fn channels(&self) -> [Channel<T>; 6] {
        [
            self.sensing[0],
            self.sensing[1],
            self.sensing[2],
            self.sensing[3],
            self.actuation[0],
            self.actuation[1],
        ]
    }
}

/// Constant tendon-length map `dl = J_lc c` with its inverse factorization.
#[derive(Debug, Clone)]
pub struct TendonMap<T: Real> {
    /// The 6x6 length map.
    pub matrix: SMatrix<T, 6, 6>,
    /// Cached inverse (exists by construction).
    pub inverse: SMatrix<T, 6, 6>,
    /// Spectral condition number of the map.
    pub condition: T,
}

/// Builds the tendon-length map for a routing geometry.
///
/// Fails with [`Error::SingularRouting`] when the channel layout is
/// degenerate (e.g. all channels share one span, which collapses the row
/// space to two directions).
pub fn tendon_map<T: Real>(geometry: &RoutingGeometryT<T>, length: T) -> Result<TendonMap<T>> {
    let mut m = SMatrix::<T, 6, 6>::zeros();
    for (row, ch) in geometry.channels().iter().enumerate() {
        let (px, py) = ch.offset();
        let iphi = basis_integral(ch.span.0, ch.span.1, length)?;
        for k in 0..3 {
            m[(row, k)] = py * iphi[k];
            m[(row, 3 + k)] = -px * iphi[k];
        }
    }
    let svd = m.svd(false, false);
    let smax = svd.singular_values[0];
    let smin = svd.singular_values[5];
    let condition = if smin > T::zero() {
        smax / smin
    } else {
        T::max_value().unwrap()
    };
    if !(condition < real::<T>(MAX_TENDON_MAP_CONDITION)) {
        return Err(Error::SingularRouting {
            cond: to_f64(condition),
            max_cond: MAX_TENDON_MAP_CONDITION,
        });
    }
    let inverse = m
        .try_inverse()
        .ok_or(Error::SingularRouting {
            cond: to_f64(condition),
            max_cond: MAX_TENDON_MAP_CONDITION,
        })?;
    Ok(TendonMap {
        matrix: m,
        inverse,
        condition,
    })
}

/// Recovers modal coefficients from measured channel length changes.
pub fn shape_from_lengths<T: Real>(map: &TendonMap<T>, dl: &Vector6<T>) -> Vector6<T> {
    map.inverse * dl
}

/// Capstan-to-coefficient velocity map `q_dot = J_qc c_dot`.
///
/// A capstan of radius `r_c` with helical lead `gamma` winds
/// `sqrt((2 pi r_c)^2 + gamma^2) / (2 pi)` of tendon per radian, so the
/// capstan angles couple to the two actuation rows of the length map by the
/// reciprocal of that factor. With zero lead this reduces to `1/r_c`.
pub fn capstan_jacobian<T: Real>(
    map: &TendonMap<T>,
    capstan_radius: T,
    capstan_lead: T,
) -> Result<SMatrix<T, 2, 6>> {
    if capstan_radius <= T::zero() {
        return Err(Error::InvalidParams(
            "capstan radius must be positive".into(),
        ));
    }
    let two_pi = real::<T>(std::f64::consts::TAU);
    let wound_per_turn = ((two_pi * capstan_radius) * (two_pi * capstan_radius)
        + capstan_lead * capstan_lead)
        .sqrt();
    let scale = two_pi / wound_per_turn;
    let mut j = SMatrix::<T, 2, 6>::zeros();
    for row in 0..2 {
        for col in 0..6 {
            j[(row, col)] = map.matrix[(4 + row, col)] * scale;
        }
    }
    Ok(j)
}

/// Length changes for the sensing strings only (rows 0..4).
pub fn sensing_lengths<T: Real>(map: &TendonMap<T>, c: &Vector6<T>) -> SVector<T, 4> {
    let dl = map.matrix * c;
    SVector::<T, 4>::from_fn(|i, _| dl[i])
}
