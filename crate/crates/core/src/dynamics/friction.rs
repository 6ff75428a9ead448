//! Coulomb friction along the actuation tendons.
//!
//! Each capstan drives a loop of tendon that runs from the winch up one side
//! of the backbone, turns around a pulley on the end disk, and returns down
//! the opposite channel to a fixed termination. Every guide hole the tendon
//! passes through bends it by a small angle, so the hole pushes on the tendon
//! with a normal force and Coulomb friction reduces the tension transmitted to
//! the next hole. Marching that tension drop from the winch to the
//! termination yields a "ladder" of station tensions whose total drop is the
//! friction force reflected back to the capstan.

use nalgebra::{SMatrix, Unit, Vector2, Vector3, Vector6};

use super::model::SegmentModelT;
use crate::error::{Error, Result};
use crate::kinematics::SweepStation;
use crate::scalar::{real, to_f64, Real};

/// Convergence tolerance on station tensions, in newtons.
const TENSION_TOL: f64 = 1e-9;
/// Iteration cap shared by the fixed-point sweep and the bisection fallback.
const MAX_TENSION_ITERS: usize = 100;
/// Sharpness of the smooth sign used to orient friction against winch speed.
const SIGN_SHARPNESS: f64 = 10.0;

/// One guide hole (or pulley) visited by a tendon run.
#[derive(Debug, Clone)]
pub struct LadderStation<T: Real> {
    /// Tension entering the station, toward the winch side.
    pub tension_in: T,
    /// Tension leaving the station after the Coulomb drop.
    pub tension_out: T,
    /// Magnitude of the in-plane normal force exerted by the guide.
    pub normal_force: T,
}

/// Tension profile of one tendon run between the winch and the termination.
#[derive(Debug, Clone)]
pub struct TensionLadder<T: Real> {
    /// Tension applied at the proximal end of the run.
    pub initial_tension: T,
    /// Per-station tensions in routing order.
    pub stations: Vec<LadderStation<T>>,
}

impl<T: Real> TensionLadder<T> {
    /// Total tension lost to friction along the run.
    pub fn total_drop(&self) -> T {
        match self.stations.last() {
            Some(last) => self.initial_tension - last.tension_out,
            None => T::zero(),
        }
    }

    /// Tension remaining at the far end of the run.
    pub fn final_tension(&self) -> T {
        self.stations
            .last()
            .map_or(self.initial_tension, |s| s.tension_out)
    }
}

/// Friction state of the full loop driven by one capstan.
#[derive(Debug, Clone)]
pub struct CapstanFriction<T: Real> {
    /// Run on the channel side the winch is currently pulling taut.
    pub pull: TensionLadder<T>,
    /// Run on the opposite channel, held only by pretension.
    pub release: TensionLadder<T>,
}

impl<T: Real> CapstanFriction<T> {
    /// Combined tension drop over both runs, reflected to the winch.
    pub fn total_drop(&self) -> T {
        self.pull.total_drop() + self.release.total_drop()
    }
}

/// Unit directions and guide plane for one station of a run.
struct StationGeometry<T: Real> {
    /// Unit vector along which the incoming tension pulls on the guide.
    a_hat: Vector3<T>,
    /// Unit vector along which the outgoing tension pulls on the guide.
    b_hat: Vector3<T>,
    /// Guide plate normal; the guide reacts only within its plane.
    plane_normal: Unit<Vector3<T>>,
}

impl<T: Real> StationGeometry<T> {
    /// In-plane normal force for incoming tension `f_in` and outgoing `f_out`.
    fn normal_force(&self, f_in: T, f_out: T) -> T {
        let pull = self.a_hat * f_in + self.b_hat * f_out;
        let n = self.plane_normal.as_ref();
        (pull - n * n.dot(&pull)).norm()
    }
}

fn unit_chord<T: Real>(from: &Vector3<T>, to: &Vector3<T>) -> Result<Vector3<T>> {
    let chord = to - from;
    let len = chord.norm();
    if to_f64(len) < 1e-12 {
        return Err(Error::InvalidParams(
            "coincident guide points in tendon routing".into(),
        ));
    }
    Ok(chord / len)
}

/// Builds the station sequence for one run of one channel.
///
/// `points` are the guide positions from the winch-side base plate to the end
/// disk; `normals` are the matching guide plate normals. The same sequence
/// serves the outbound and return halves of the loop, so the full run visits
/// `2 * points.len()` stations: out through every guide, around the end-disk
/// pulley, and back through every guide to the termination.
fn run_geometry<T: Real>(
    points: &[Vector3<T>],
    normals: &[Unit<Vector3<T>>],
) -> Result<Vec<StationGeometry<T>>> {
    let n = points.len();
    debug_assert!(n >= 2);
    debug_assert_eq!(normals.len(), n);
    // Chord unit vectors; chords[i] points from guide i to guide i + 1, and
    // the approach from the winch to the base guide is along the plate normal.
    let mut chords = Vec::with_capacity(n);
    chords.push(normals[0].into_inner());
    for i in 1..n {
        chords.push(unit_chord(&points[i - 1], &points[i])?);
    }

    let mut stations = Vec::with_capacity(2 * n);
    // Outbound: every guide redirects the incoming chord onto the next one.
    // The end-disk guide feeds the pulley straight through its own plane.
    for i in 0..n {
        let incoming = chords[i];
        let outgoing = if i + 1 < n { chords[i + 1] } else { chords[i] };
        stations.push(StationGeometry {
            a_hat: -incoming,
            b_hat: outgoing,
            plane_normal: normals[i],
        });
    }
    // Pulley on the end disk reverses the run.
    let last = chords[n - 1];
    stations.push(StationGeometry {
        a_hat: -last,
        b_hat: -last,
        plane_normal: normals[n - 1],
    });
    // Return: the same guides in reverse, ending at the base termination.
    for i in (0..n - 1).rev() {
        let incoming = -chords[i + 1];
        let outgoing = -chords[i];
        stations.push(StationGeometry {
            a_hat: -incoming,
            b_hat: outgoing,
            plane_normal: normals[i],
        });
    }
    Ok(stations)
}

/// Solves `f_out = f_in - mu * normal(f_in, f_out)` for one station.
///
/// The normal force is 1-Lipschitz in each tension, so for `mu < 1` the
/// fixed-point map is a contraction and the root in `[0, f_in]` is unique; a
/// bisection fallback covers slow contractions near `mu -> 1`.
fn solve_station<T: Real>(
    geometry: &StationGeometry<T>,
    f_in: T,
    mu: T,
    station: usize,
) -> Result<LadderStation<T>> {
    let tol = real::<T>(TENSION_TOL);
    // Acceptance slack grows with the tension scale so reduced-precision
    // scalars are not held to an absolute tolerance below their resolution.
    let accept_tol =
        tol + T::default_epsilon() * (T::one() + f_in.abs()) * real::<T>(100.0);
    let residual = |f_out: T| f_in - mu * geometry.normal_force(f_in, f_out) - f_out;

    let mut f = f_in;
    for _ in 0..MAX_TENSION_ITERS {
        let next = (f_in - mu * geometry.normal_force(f_in, f)).max(T::zero());
        let delta = (next - f).abs();
        f = next;
        if delta < tol {
            break;
        }
    }
    if residual(f).abs() > accept_tol && f > T::zero() {
        // Bisection fallback on [0, f_in]: residual(f_in) <= 0 and
        // residual(0) >= f_in * (1 - mu) >= 0.
        let mut lo = T::zero();
        let mut hi = f_in;
        for _ in 0..MAX_TENSION_ITERS {
            let mid = (lo + hi) * real::<T>(0.5);
            if residual(mid) >= T::zero() {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        f = (lo + hi) * real::<T>(0.5);
    }
    let defect = residual(f).abs();
    if defect > accept_tol || !to_f64(f).is_finite() {
        return Err(Error::TensionSolve {
            station,
            residual: to_f64(defect),
        });
    }
    Ok(LadderStation {
        tension_in: f_in,
        tension_out: f.max(T::zero()),
        normal_force: geometry.normal_force(f_in, f),
    })
}

fn march_ladder<T: Real>(
    stations: &[StationGeometry<T>],
    initial_tension: T,
    mu: T,
) -> Result<TensionLadder<T>> {
    let mut ladder = TensionLadder {
        initial_tension,
        stations: Vec::with_capacity(stations.len()),
    };
    let mut f = initial_tension;
    for (i, geometry) in stations.iter().enumerate() {
        let solved = solve_station(geometry, f, mu, i)?;
        f = solved.tension_out;
        ladder.stations.push(solved);
    }
    Ok(ladder)
}

impl<T: Real> SegmentModelT<T> {
    /// Guide positions and plate normals for one actuation channel side.
    ///
    /// `offset` is the channel exit point in the cross-section plane; the
    /// returned sequence starts at the base plate and ends at the end disk.
    fn guide_chain(
        &self,
        sweep: &[SweepStation<T>],
        offset: Vector2<T>,
    ) -> (Vec<Vector3<T>>, Vec<Unit<Vector3<T>>>) {
        let local = Vector3::new(offset.x, offset.y, T::zero());
        let n_d = self.params().disk_count();
        let mut points = Vec::with_capacity(n_d + 1);
        let mut normals = Vec::with_capacity(n_d + 1);
        points.push(local);
        normals.push(Unit::new_unchecked(Vector3::z()));
        for &idx in self.disk_station_indices() {
            let pose = &sweep[idx].pose;
            points.push(pose.transform_point(&local));
            normals.push(Unit::new_unchecked(pose.rot * Vector3::z()));
        }
        (points, normals)
    }

    /// Tension ladders for both runs of both capstan loops.
    ///
    /// `tau` holds the capstan torques; torque of either sign tightens one
    /// channel of the loop (the pull run) while the opposite channel sags to
    /// the pretension (the release run).
    pub fn tension_ladders(
        &self,
        sweep: &[SweepStation<T>],
        tau: &Vector2<T>,
    ) -> Result<[CapstanFriction<T>; 2]> {
        let r_c = self.params().capstan_radius;
        let f_pl = self.params().pretension;
        let mut loops = Vec::with_capacity(2);
        for (j, channel) in self.routing().actuation.iter().enumerate() {
            let mu = self.params().friction_coeffs[j];
            let (ox, oy) = channel.offset();
            let offset = Vector2::new(ox, oy);
            let torque_tension = tau[j].abs() / r_c;
            let pull_tension = torque_tension + f_pl;
            let release_tension = (f_pl - torque_tension).max(T::zero());
            // Positive torque winds the +offset channel onto the capstan.
            let (pull_offset, release_offset) = if to_f64(tau[j]) >= 0.0 {
                (offset, -offset)
            } else {
                (-offset, offset)
            };

            let (points, normals) = self.guide_chain(sweep, pull_offset);
            let geometry = run_geometry(&points, &normals)?;
            let pull = march_ladder(&geometry, pull_tension, mu)?;

            let (points, normals) = self.guide_chain(sweep, release_offset);
            let geometry = run_geometry(&points, &normals)?;
            let release = march_ladder(&geometry, release_tension, mu)?;

            loops.push(CapstanFriction { pull, release });
        }
        let [a, b]: [CapstanFriction<T>; 2] = loops.try_into().map_err(|_| {
            Error::InvalidParams("expected exactly two actuation channels".into())
        })?;
        Ok([a, b])
    }

    /// Friction torque felt at each capstan for winch rates `q_dot`.
    ///
    /// The Coulomb drop resists whichever way the winch is turning; a steep
    /// `tanh` stands in for the sign function so the torque stays smooth
    /// through zero rate.
    pub fn capstan_friction_torque(
        &self,
        sweep: &[SweepStation<T>],
        q_dot: &Vector2<T>,
        tau: &Vector2<T>,
    ) -> Result<Vector2<T>> {
        let ladders = self.tension_ladders(sweep, tau)?;
        let r_c = self.params().capstan_radius;
        let sharp = real::<T>(SIGN_SHARPNESS);
        let mut torque = Vector2::zeros();
        for j in 0..2 {
            let drop = ladders[j].total_drop();
            torque[j] = (sharp * q_dot[j]).tanh() * r_c * drop;
        }
        Ok(torque)
    }

    /// Generalized force on the curvature coefficients due to tendon friction.
    ///
    /// Enters the dynamics with a minus sign, so the resulting power
    /// `c_dot . force` is always dissipated, never injected.
    pub fn friction_generalized_force(
        &self,
        sweep: &[SweepStation<T>],
        c_dot: &Vector6<T>,
        tau: &Vector2<T>,
    ) -> Result<Vector6<T>> {
        let jqc: &SMatrix<T, 2, 6> = self.capstan_map();
        let q_dot = jqc * c_dot;
        let torque = self.capstan_friction_torque(sweep, &q_dot, tau)?;
        Ok(jqc.transpose() * torque)
    }
}
