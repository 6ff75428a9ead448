//! Configuration files: unit-suffixed quantities, segment parameter files,
//! and scenario files.
//!
//! Every dimensional value in a configuration file is written as a quoted
//! string with an explicit unit suffix (`"300.65 mm"`, `"208 N"`); the loader
//! converts to SI and rejects missing or mismatched units with a message
//! naming the field and the accepted suffixes. Dimensionless values are plain
//! numbers.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use nalgebra::{Matrix3, Vector2, Vector3, Vector6};
use serde::Deserialize;

use continuum_dynamics::dynamics::DiskParams;
use continuum_dynamics::SegmentParams;

use crate::error::{HarnessError, Result};

/// Physical dimension a configuration field expects.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Dim {
    Length,
    Mass,
    Time,
    Force,
    Torque,
    Angle,
    Frequency,
    LinearDensity,
    RotaryInertia,
    FlexuralRigidity,
    Acceleration,
}

impl Dim {
    /// Accepted unit suffixes and their SI conversion factors.
    fn units(self) -> &'static [(&'static str, f64)] {
        const DEG: f64 = std::f64::consts::PI / 180.0;
        match self {
            Dim::Length => &[("m", 1.0), ("mm", 1e-3), ("cm", 1e-2)],
            Dim::Mass => &[("kg", 1.0), ("g", 1e-3)],
            Dim::Time => &[("s", 1.0), ("ms", 1e-3)],
            Dim::Force => &[("N", 1.0)],
            Dim::Torque => &[("N m", 1.0), ("N mm", 1e-3)],
            Dim::Angle => &[("rad", 1.0), ("deg", DEG)],
            Dim::Frequency => &[("Hz", 1.0)],
            Dim::LinearDensity => &[("kg/m", 1.0), ("g/m", 1e-3)],
            Dim::RotaryInertia => &[("kg m^2", 1.0), ("g m^2", 1e-3), ("g mm^2", 1e-9)],
            Dim::FlexuralRigidity => &[("N m^2", 1.0)],
            Dim::Acceleration => &[("m/s^2", 1.0)],
        }
    }

    fn accepted(self) -> String {
        self.units()
            .iter()
            .map(|(u, _)| *u)
            .collect::<Vec<_>>()
            .join(", ")
    }
}

/// Parses `"<number> <unit>"` into SI, validating the unit against `dim`.
pub fn parse_quantity(text: &str, dim: Dim, field: &str) -> Result<f64> {
    let text = text.trim();
    let split = text
        .find(|ch: char| !(ch.is_ascii_digit() || "+-.eE".contains(ch)))
        .unwrap_or(text.len());
    // Splitting on the first non-numeric char mis-cuts exponents ("1e-3 m"
    // splits inside "e-3" only if the char class missed it; the class above
    // includes e/E and sign, so "1e-3" survives intact).
    let (num_str, unit_raw) = text.split_at(split);
    let value: f64 = num_str.trim().parse().map_err(|_| {
        HarnessError::Validation(format!(
            "field '{field}': cannot parse a number out of \"{text}\""
        ))
    })?;
    let unit = normalize_unit(unit_raw);
    if unit.is_empty() {
        return Err(HarnessError::Validation(format!(
            "field '{field}': missing unit on \"{text}\" (accepted: {})",
            dim.accepted()
        )));
    }
    for (suffix, factor) in dim.units() {
        if unit == *suffix {
            return Ok(value * factor);
        }
    }
    Err(HarnessError::Validation(format!(
        "field '{field}': unit '{unit}' is not valid here (accepted: {})",
        dim.accepted()
    )))
}

/// Collapses whitespace and the center-dot so `"N·m"` and `"N  m"` both
/// normalize to `"N m"`.
fn normalize_unit(raw: &str) -> String {
    raw.replace('·', " ")
        .split_whitespace()
        .collect::<Vec<_>>()
        .join(" ")
}

fn parse_vec3(items: &[String], dim: Dim, field: &str) -> Result<Vector3<f64>> {
    if items.len() != 3 {
        return Err(HarnessError::Validation(format!(
            "field '{field}' needs exactly 3 entries, got {}",
            items.len()
        )));
    }
    let mut v = Vector3::zeros();
    for (i, item) in items.iter().enumerate() {
        v[i] = parse_quantity(item, dim, &format!("{field}[{i}]"))?;
    }
    Ok(v)
}

// ---------------------------------------------------------------------------
// Segment parameter files
// ---------------------------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSegmentFile {
    segment: RawSegment,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSegment {
    length: String,
    capstan_radius: String,
    capstan_lead: String,
    backbone_density: String,
    backbone_radius: String,
    torsional_rigidity: String,
    actuation_inertia: String,
    gravity: Vec<String>,
    pretension: String,
    bending_stiffness: Vec<String>,
    friction: Vec<f64>,
    disks: Vec<RawDisk>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDisk {
    arclength: String,
    mass: String,
    /// Row-major 3x3 inertia about the disk center of mass.
    inertia: Vec<String>,
    com: Vec<String>,
}

/// Loads and validates a segment parameter file.
pub fn load_segment<P: AsRef<Path>>(path: P) -> Result<SegmentParams> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| {
        HarnessError::Validation(format!("cannot read segment file {}: {e}", path.display()))
    })?;
    let raw: RawSegmentFile = toml::from_str(&text).map_err(|e| {
        HarnessError::Validation(format!("segment file {}: {e}", path.display()))
    })?;
    segment_from_raw(raw.segment)
}

fn segment_from_raw(raw: RawSegment) -> Result<SegmentParams> {
    if raw.bending_stiffness.len() != 2 {
        return Err(HarnessError::Validation(
            "field 'segment.bending_stiffness' needs exactly 2 entries".into(),
        ));
    }
    if raw.friction.len() != 2 {
        return Err(HarnessError::Validation(
            "field 'segment.friction' needs exactly 2 entries".into(),
        ));
    }
    let mut disks = Vec::with_capacity(raw.disks.len());
    for (i, d) in raw.disks.iter().enumerate() {
        let label = format!("segment.disks[{i}]");
        if d.inertia.len() != 9 {
            return Err(HarnessError::Validation(format!(
                "field '{label}.inertia' needs 9 row-major entries, got {}",
                d.inertia.len()
            )));
        }
        let mut inertia = Matrix3::zeros();
        for (k, item) in d.inertia.iter().enumerate() {
            inertia[(k / 3, k % 3)] = parse_quantity(
                item,
                Dim::RotaryInertia,
                &format!("{label}.inertia[{k}]"),
            )?;
        }
        disks.push(DiskParams {
            arclength: parse_quantity(&d.arclength, Dim::Length, &format!("{label}.arclength"))?,
            mass: parse_quantity(&d.mass, Dim::Mass, &format!("{label}.mass"))?,
            inertia,
            com_offset: parse_vec3(&d.com, Dim::Length, &format!("{label}.com"))?,
        });
    }
    let params = SegmentParams {
        length: parse_quantity(&raw.length, Dim::Length, "segment.length")?,
        capstan_radius: parse_quantity(
            &raw.capstan_radius,
            Dim::Length,
            "segment.capstan_radius",
        )?,
        capstan_lead: parse_quantity(&raw.capstan_lead, Dim::Length, "segment.capstan_lead")?,
        backbone_density: parse_quantity(
            &raw.backbone_density,
            Dim::LinearDensity,
            "segment.backbone_density",
        )?,
        backbone_radius: parse_quantity(
            &raw.backbone_radius,
            Dim::Length,
            "segment.backbone_radius",
        )?,
        torsional_rigidity: parse_quantity(
            &raw.torsional_rigidity,
            Dim::FlexuralRigidity,
            "segment.torsional_rigidity",
        )?,
        actuation_inertia: parse_quantity(
            &raw.actuation_inertia,
            Dim::RotaryInertia,
            "segment.actuation_inertia",
        )?,
        gravity: parse_vec3(&raw.gravity, Dim::Acceleration, "segment.gravity")?,
        pretension: parse_quantity(&raw.pretension, Dim::Force, "segment.pretension")?,
        bending_stiffness: (
            parse_quantity(
                &raw.bending_stiffness[0],
                Dim::FlexuralRigidity,
                "segment.bending_stiffness[0]",
            )?,
            parse_quantity(
                &raw.bending_stiffness[1],
                Dim::FlexuralRigidity,
                "segment.bending_stiffness[1]",
            )?,
        ),
        friction_coeffs: [raw.friction[0], raw.friction[1]],
        disks,
    };
    params.validate()?;
    Ok(params)
}

// ---------------------------------------------------------------------------
// Scenario files
// ---------------------------------------------------------------------------

/// The scenario families the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    NoiselessOracle,
    NoiseStudy,
    StateErrorSweep,
    CalibrationSynthetic,
    MultisegLumped,
}

impl ScenarioKind {
    fn parse(text: &str) -> Result<Self> {
        match text {
            "noiseless-oracle" => Ok(Self::NoiselessOracle),
            "noise-study" => Ok(Self::NoiseStudy),
            "state-error-sweep" => Ok(Self::StateErrorSweep),
            "calibration-synthetic" => Ok(Self::CalibrationSynthetic),
            "multiseg-lumped" => Ok(Self::MultisegLumped),
            other => Err(HarnessError::Validation(format!(
                "field 'scenario.kind': unknown kind '{other}' (accepted: noiseless-oracle, \
                 noise-study, state-error-sweep, calibration-synthetic, multiseg-lumped)"
            ))),
        }
    }

    /// Scenarios that draw random numbers must carry a seed.
    pub fn is_stochastic(self) -> bool {
        matches!(self, Self::NoiseStudy | Self::StateErrorSweep)
    }
}

impl std::fmt::Display for ScenarioKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let name = match self {
            Self::NoiselessOracle => "noiseless-oracle",
            Self::NoiseStudy => "noise-study",
            Self::StateErrorSweep => "state-error-sweep",
            Self::CalibrationSynthetic => "calibration-synthetic",
            Self::MultisegLumped => "multiseg-lumped",
        };
        f.write_str(name)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenarioFile {
    scenario: RawScenario,
    contact: Option<RawContact>,
    estimator: Option<RawEstimator>,
    noise: Option<RawNoise>,
    sweep: Option<RawSweep>,
    calibration: Option<RawCalibration>,
    multiseg: Option<RawMultiseg>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawScenario {
    kind: String,
    segment: String,
    seed: Option<u64>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawContact {
    location: Option<String>,
    force: Vec<String>,
    moment: Option<Vec<String>>,
    torque: Option<Vec<String>>,
    ramp: String,
    duration: String,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEstimator {
    gain: Vec<f64>,
    window: Option<usize>,
    reset_horizon: Option<usize>,
    weight: Option<Vec<f64>>,
    constraint: Option<String>,
    state_error_bound: Option<f64>,
    derivative_smoothing: Option<usize>,
    filter_gmo: Option<usize>,
    filter_jfd: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawNoise {
    amplitudes: Vec<f64>,
    smoothing: usize,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSweep {
    trials: usize,
    force_bound: String,
    torque_bound: String,
    levels: usize,
    max_state_error: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCalibration {
    amplitude: String,
    f_start: String,
    f_end: String,
    duration: String,
    sample_rate: String,
    max_evaluations: Option<usize>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawMultiseg {
    distal_segment: String,
    gravity: Vec<String>,
    elbow_torque: String,
    distal_torques: Vec<String>,
    contact_disk: usize,
    force: Vec<String>,
    ramp: String,
    duration: String,
}

/// Which linear equality constraint the wrench recovery applies.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstraintKind {
    /// Point contact: planar force, no out-of-plane force or any moment.
    PlanarForce,
    /// No constraint rows.
    Unconstrained,
}

/// Estimator configuration shared by every scenario.
#[derive(Debug, Clone)]
pub struct EstimatorSettings {
    /// Diagonal observer gain.
    pub gain: Vector6<f64>,
    /// Momentum-integral window in samples; `None` = entire span since reset.
    pub window: Option<usize>,
    /// Cycles before the observer re-latches its momentum datum.
    pub reset_horizon: usize,
    /// Diagonal recovery weight `W`.
    pub weight: Vector6<f64>,
    /// Recovery constraint family.
    pub constraint: ConstraintKind,
    /// Per-component state uncertainty used for detection thresholds.
    pub state_error_bound: f64,
    /// Window for smoothing measured series before differencing (1 = none).
    pub derivative_smoothing: usize,
    /// Post-filter window on the residual and recovered wrench (0 = off).
    pub filter_gmo: usize,
    /// Post-filter window on the deviation and recovered wrench (0 = off).
    pub filter_jfd: usize,
}

impl Default for EstimatorSettings {
    fn default() -> Self {
        Self {
            gain: Vector6::repeat(10.0),
            window: None,
            reset_horizon: 3000,
            weight: Vector6::repeat(1.0),
            constraint: ConstraintKind::PlanarForce,
            state_error_bound: 1.84,
            derivative_smoothing: 1,
            filter_gmo: 0,
            filter_jfd: 0,
        }
    }
}

/// A wrench/torque schedule ramped from zero and then held.
#[derive(Debug, Clone)]
pub struct ContactSchedule {
    /// Contact arclength (m).
    pub location: f64,
    /// Target wrench `[f; m]` reached at the end of the ramp.
    pub wrench: Vector6<f64>,
    /// Target capstan torques reached at the end of the ramp.
    pub torque: Vector2<f64>,
    /// Ramp span (s).
    pub ramp: f64,
    /// Total simulated span (s).
    pub duration: f64,
}

/// Noise-study settings.
#[derive(Debug, Clone)]
pub struct NoiseSettings {
    /// Peak-to-peak amplitudes; zero means exact states.
    pub amplitudes: Vec<f64>,
    /// Pre-differencing smoothing window (samples).
    pub smoothing: usize,
}

/// State-error-sweep settings.
#[derive(Debug, Clone)]
pub struct SweepSettings {
    /// Number of random wrench/torque draws.
    pub trials: usize,
    /// Planar force components drawn uniformly in `±force_bound` (N).
    pub force_bound: f64,
    /// Capstan torques drawn uniformly in `±torque_bound` (N m).
    pub torque_bound: f64,
    /// Number of state-error levels spanning `[0, max_state_error]`.
    pub levels: usize,
    /// Largest fractional state error.
    pub max_state_error: f64,
}

/// Synthetic-calibration settings.
#[derive(Debug, Clone)]
pub struct CalibrationSettings {
    /// Chirp amplitude (rad).
    pub amplitude: f64,
    /// Chirp start frequency (Hz).
    pub f_start: f64,
    /// Chirp end frequency (Hz).
    pub f_end: f64,
    /// Chirp span (s).
    pub duration: f64,
    /// Recording rate (Hz).
    pub sample_rate: f64,
    /// Search evaluation budget.
    pub max_evaluations: usize,
}

/// Multisegment-scenario settings.
#[derive(Debug, Clone)]
pub struct MultisegSettings {
    /// Distal segment parameters (to be lumped and simulated).
    pub distal: SegmentParams,
    /// Gravity override applied to both segments (m/s^2).
    pub gravity: Vector3<f64>,
    /// Elbow reaction torque about the end-disk x axis (N m).
    pub elbow_torque: f64,
    /// Distal actuation reaction torques about end-disk x and y (N m).
    pub distal_torques: Vector2<f64>,
    /// Distal disk index (1-based) carrying the contact.
    pub contact_disk: usize,
    /// Contact force target on the distal segment (N).
    pub force: Vector3<f64>,
    /// Ramp span (s).
    pub ramp: f64,
    /// Total simulated span (s).
    pub duration: f64,
}

/// A fully validated scenario, ready to run.
#[derive(Debug, Clone)]
pub struct Scenario {
    /// Scenario family.
    pub kind: ScenarioKind,
    /// RNG seed (mandatory for stochastic scenarios).
    pub seed: u64,
    /// Primary segment parameters.
    pub segment: SegmentParams,
    /// Estimator configuration.
    pub estimator: EstimatorSettings,
    /// Ramped contact schedule, where the scenario needs one.
    pub contact: Option<ContactSchedule>,
    /// Noise-study settings.
    pub noise: Option<NoiseSettings>,
    /// Sweep settings.
    pub sweep: Option<SweepSettings>,
    /// Calibration settings.
    pub calibration: Option<CalibrationSettings>,
    /// Multisegment settings.
    pub multiseg: Option<MultisegSettings>,
}

impl Scenario {
    /// The contact schedule, or a validation error naming the section.
    pub fn contact(&self) -> Result<&ContactSchedule> {
        self.contact.as_ref().ok_or_else(|| {
            HarnessError::Validation("this scenario needs a [contact] section".into())
        })
    }

    /// The noise settings, or a validation error naming the section.
    pub fn noise(&self) -> Result<&NoiseSettings> {
        self.noise
            .as_ref()
            .ok_or_else(|| HarnessError::Validation("this scenario needs a [noise] section".into()))
    }

    /// The sweep settings, or a validation error naming the section.
    pub fn sweep(&self) -> Result<&SweepSettings> {
        self.sweep
            .as_ref()
            .ok_or_else(|| HarnessError::Validation("this scenario needs a [sweep] section".into()))
    }

    /// The calibration settings, or a validation error naming the section.
    pub fn calibration(&self) -> Result<&CalibrationSettings> {
        self.calibration.as_ref().ok_or_else(|| {
            HarnessError::Validation("this scenario needs a [calibration] section".into())
        })
    }

    /// The multisegment settings, or a validation error naming the section.
    pub fn multiseg(&self) -> Result<&MultisegSettings> {
        self.multiseg.as_ref().ok_or_else(|| {
            HarnessError::Validation("this scenario needs a [multiseg] section".into())
        })
    }
}

fn parse_vector6_pair(
    force: &[String],
    moment: Option<&Vec<String>>,
    field: &str,
) -> Result<Vector6<f64>> {
    let f = parse_vec3(force, Dim::Force, &format!("{field}.force"))?;
    let m = match moment {
        Some(items) => parse_vec3(items, Dim::Torque, &format!("{field}.moment"))?,
        None => Vector3::zeros(),
    };
    let mut w = Vector6::zeros();
    for i in 0..3 {
        w[i] = f[i];
        w[3 + i] = m[i];
    }
    Ok(w)
}

fn estimator_from_raw(raw: Option<RawEstimator>) -> Result<EstimatorSettings> {
    let mut settings = EstimatorSettings::default();
    let Some(raw) = raw else {
        return Ok(settings);
    };
    settings.gain = match raw.gain.len() {
        1 => Vector6::repeat(raw.gain[0]),
        6 => Vector6::from_iterator(raw.gain.iter().copied()),
        n => {
            return Err(HarnessError::Validation(format!(
                "field 'estimator.gain' needs 1 or 6 entries, got {n}"
            )))
        }
    };
    if settings.gain.iter().any(|g| *g < 0.0) {
        return Err(HarnessError::Validation(
            "field 'estimator.gain': entries must be >= 0".into(),
        ));
    }
    settings.window = match raw.window {
        None | Some(0) => None,
        Some(n) => Some(n),
    };
    if let Some(h) = raw.reset_horizon {
        if h == 0 {
            return Err(HarnessError::Validation(
                "field 'estimator.reset_horizon' must be >= 1".into(),
            ));
        }
        settings.reset_horizon = h;
    }
    if let Some(w) = raw.weight {
        if w.len() != 6 {
            return Err(HarnessError::Validation(format!(
                "field 'estimator.weight' needs 6 entries, got {}",
                w.len()
            )));
        }
        settings.weight = Vector6::from_iterator(w.iter().copied());
        if settings.weight.iter().any(|x| *x <= 0.0) {
            return Err(HarnessError::Validation(
                "field 'estimator.weight': entries must be > 0".into(),
            ));
        }
    }
    if let Some(kind) = raw.constraint {
        settings.constraint = match kind.as_str() {
            "planar-force" => ConstraintKind::PlanarForce,
            "none" => ConstraintKind::Unconstrained,
            other => {
                return Err(HarnessError::Validation(format!(
                    "field 'estimator.constraint': unknown constraint '{other}' \
                     (accepted: planar-force, none)"
                )))
            }
        };
    }
    if let Some(b) = raw.state_error_bound {
        if b < 0.0 {
            return Err(HarnessError::Validation(
                "field 'estimator.state_error_bound' must be >= 0".into(),
            ));
        }
        settings.state_error_bound = b;
    }
    if let Some(w) = raw.derivative_smoothing {
        if w == 0 {
            return Err(HarnessError::Validation(
                "field 'estimator.derivative_smoothing' must be >= 1".into(),
            ));
        }
        settings.derivative_smoothing = w;
    }
    settings.filter_gmo = raw.filter_gmo.unwrap_or(0);
    settings.filter_jfd = raw.filter_jfd.unwrap_or(0);
    Ok(settings)
}

/// Loads a scenario file, resolving segment paths relative to its directory.
pub fn load_scenario<P: AsRef<Path>>(path: P, seed_override: Option<u64>) -> Result<Scenario> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| {
        HarnessError::Validation(format!("cannot read scenario file {}: {e}", path.display()))
    })?;
    let raw: RawScenarioFile = toml::from_str(&text).map_err(|e| {
        HarnessError::Validation(format!("scenario file {}: {e}", path.display()))
    })?;
    let base = path.parent().unwrap_or_else(|| Path::new("."));

    let kind = ScenarioKind::parse(&raw.scenario.kind)?;
    let seed = match seed_override.or(raw.scenario.seed) {
        Some(s) => s,
        None if kind.is_stochastic() => {
            return Err(HarnessError::Validation(format!(
                "scenario kind '{}' is stochastic; set 'scenario.seed' or pass --seed",
                raw.scenario.kind
            )))
        }
        None => 0,
    };
    let segment = load_segment(resolve(base, &raw.scenario.segment))?;

    let estimator = estimator_from_raw(raw.estimator)?;

    let contact = match raw.contact {
        Some(c) => {
            let location = match c.location.as_deref() {
                None | Some("tip") => segment.length,
                Some(text) => parse_quantity(text, Dim::Length, "contact.location")?,
            };
            if location < 0.0 || location > segment.length {
                return Err(HarnessError::Validation(format!(
                    "field 'contact.location': {location} m is outside [0, {}] m",
                    segment.length
                )));
            }
            let wrench = parse_vector6_pair(&c.force, c.moment.as_ref(), "contact")?;
            let torque = match &c.torque {
                Some(items) => {
                    if items.len() != 2 {
                        return Err(HarnessError::Validation(
                            "field 'contact.torque' needs exactly 2 entries".into(),
                        ));
                    }
                    Vector2::new(
                        parse_quantity(&items[0], Dim::Torque, "contact.torque[0]")?,
                        parse_quantity(&items[1], Dim::Torque, "contact.torque[1]")?,
                    )
                }
                None => Vector2::zeros(),
            };
            let ramp = parse_quantity(&c.ramp, Dim::Time, "contact.ramp")?;
            let duration = parse_quantity(&c.duration, Dim::Time, "contact.duration")?;
            if !(ramp > 0.0) || !(duration >= ramp) {
                return Err(HarnessError::Validation(
                    "contact schedule needs 0 < ramp <= duration".into(),
                ));
            }
            Some(ContactSchedule {
                location,
                wrench,
                torque,
                ramp,
                duration,
            })
        }
        None => None,
    };

    let noise = match raw.noise {
        Some(n) => {
            if n.amplitudes.is_empty() {
                return Err(HarnessError::Validation(
                    "field 'noise.amplitudes' must not be empty".into(),
                ));
            }
            if n.amplitudes.iter().any(|a| *a < 0.0) {
                return Err(HarnessError::Validation(
                    "field 'noise.amplitudes': entries must be >= 0".into(),
                ));
            }
            if n.smoothing == 0 {
                return Err(HarnessError::Validation(
                    "field 'noise.smoothing' must be >= 1".into(),
                ));
            }
            Some(NoiseSettings {
                amplitudes: n.amplitudes,
                smoothing: n.smoothing,
            })
        }
        None => None,
    };

    let sweep = match raw.sweep {
        Some(s) => {
            if s.trials == 0 || s.levels == 0 {
                return Err(HarnessError::Validation(
                    "fields 'sweep.trials' and 'sweep.levels' must be >= 1".into(),
                ));
            }
            if !(s.max_state_error >= 0.0) {
                return Err(HarnessError::Validation(
                    "field 'sweep.max_state_error' must be >= 0".into(),
                ));
            }
            Some(SweepSettings {
                trials: s.trials,
                force_bound: parse_quantity(&s.force_bound, Dim::Force, "sweep.force_bound")?,
                torque_bound: parse_quantity(&s.torque_bound, Dim::Torque, "sweep.torque_bound")?,
                levels: s.levels,
                max_state_error: s.max_state_error,
            })
        }
        None => None,
    };

    let calibration = match raw.calibration {
        Some(c) => {
            let sample_rate =
                parse_quantity(&c.sample_rate, Dim::Frequency, "calibration.sample_rate")?;
            if !(sample_rate > 0.0) {
                return Err(HarnessError::Validation(
                    "field 'calibration.sample_rate' must be > 0".into(),
                ));
            }
            Some(CalibrationSettings {
                amplitude: parse_quantity(&c.amplitude, Dim::Angle, "calibration.amplitude")?,
                f_start: parse_quantity(&c.f_start, Dim::Frequency, "calibration.f_start")?,
                f_end: parse_quantity(&c.f_end, Dim::Frequency, "calibration.f_end")?,
                duration: parse_quantity(&c.duration, Dim::Time, "calibration.duration")?,
                sample_rate,
                max_evaluations: c.max_evaluations.unwrap_or(200),
            })
        }
        None => None,
    };

    let multiseg = match raw.multiseg {
        Some(m) => {
            let distal = load_segment(resolve(base, &m.distal_segment))?;
            if m.contact_disk == 0 || m.contact_disk > distal.disks.len() {
                return Err(HarnessError::Validation(format!(
                    "field 'multiseg.contact_disk': disk {} does not exist (1..{})",
                    m.contact_disk,
                    distal.disks.len()
                )));
            }
            if m.distal_torques.len() != 2 {
                return Err(HarnessError::Validation(
                    "field 'multiseg.distal_torques' needs exactly 2 entries".into(),
                ));
            }
            let ramp = parse_quantity(&m.ramp, Dim::Time, "multiseg.ramp")?;
            let duration = parse_quantity(&m.duration, Dim::Time, "multiseg.duration")?;
            if !(ramp > 0.0) || !(duration >= ramp) {
                return Err(HarnessError::Validation(
                    "multiseg schedule needs 0 < ramp <= duration".into(),
                ));
            }
            Some(MultisegSettings {
                distal,
                gravity: parse_vec3(&m.gravity, Dim::Acceleration, "multiseg.gravity")?,
                elbow_torque: parse_quantity(&m.elbow_torque, Dim::Torque, "multiseg.elbow_torque")?,
                distal_torques: Vector2::new(
                    parse_quantity(&m.distal_torques[0], Dim::Torque, "multiseg.distal_torques[0]")?,
                    parse_quantity(&m.distal_torques[1], Dim::Torque, "multiseg.distal_torques[1]")?,
                ),
                contact_disk: m.contact_disk,
                force: parse_vec3(&m.force, Dim::Force, "multiseg.force")?,
                ramp,
                duration,
            })
        }
        None => None,
    };

    Ok(Scenario {
        kind,
        seed,
        segment,
        estimator,
        contact,
        noise,
        sweep,
        calibration,
        multiseg,
    })
}

fn resolve(base: &Path, relative: &str) -> PathBuf {
    let p = Path::new(relative);
    if p.is_absolute() {
        p.to_path_buf()
    } else {
        base.join(p)
    }
}

/// Renders a segment parameter set back into the shipped TOML shape (used by
/// tests to round-trip the reference tables).
pub fn segment_to_toml(params: &SegmentParams) -> String {
    let mut out = String::new();
    let mm = |v: f64| format!("\"{} mm\"", fmt(v * 1e3));
    out.push_str("[segment]\n");
    out.push_str(&format!("length = {}\n", mm(params.length)));
    out.push_str(&format!("capstan_radius = {}\n", mm(params.capstan_radius)));
    out.push_str(&format!("capstan_lead = {}\n", mm(params.capstan_lead)));
    out.push_str(&format!(
        "backbone_density = \"{} g/m\"\n",
        fmt(params.backbone_density * 1e3)
    ));
    out.push_str(&format!("backbone_radius = {}\n", mm(params.backbone_radius)));
    out.push_str(&format!(
        "torsional_rigidity = \"{} N m^2\"\n",
        fmt(params.torsional_rigidity)
    ));
    out.push_str(&format!(
        "actuation_inertia = \"{} g m^2\"\n",
        fmt(params.actuation_inertia * 1e3)
    ));
    out.push_str(&format!(
        "gravity = [\"{} m/s^2\", \"{} m/s^2\", \"{} m/s^2\"]\n",
        fmt(params.gravity[0]),
        fmt(params.gravity[1]),
        fmt(params.gravity[2])
    ));
    out.push_str(&format!("pretension = \"{} N\"\n", fmt(params.pretension)));
    out.push_str(&format!(
        "bending_stiffness = [\"{} N m^2\", \"{} N m^2\"]\n",
        fmt(params.bending_stiffness.0),
        fmt(params.bending_stiffness.1)
    ));
    out.push_str(&format!(
        "friction = [{}, {}]\n",
        fmt(params.friction_coeffs[0]),
        fmt(params.friction_coeffs[1])
    ));
    for d in &params.disks {
        out.push_str("\n[[segment.disks]]\n");
        out.push_str(&format!("arclength = {}\n", mm(d.arclength)));
        out.push_str(&format!("mass = \"{} g\"\n", fmt(d.mass * 1e3)));
        let entries: Vec<String> = (0..9)
            .map(|k| format!("\"{} g m^2\"", fmt(d.inertia[(k / 3, k % 3)] * 1e3)))
            .collect();
        out.push_str(&format!("inertia = [{}]\n", entries.join(", ")));
        out.push_str(&format!(
            "com = [{}, {}, {}]\n",
            mm(d.com_offset[0]),
            mm(d.com_offset[1]),
            mm(d.com_offset[2])
        ));
    }
    out
}

fn fmt(v: f64) -> String {
    // Round-trippable decimal without scientific notation for TOML clarity.
    let s = format!("{v:.10}");
    let trimmed = s.trim_end_matches('0').trim_end_matches('.');
    if trimmed.is_empty() || trimmed == "-" {
        "0".into()
    } else {
        trimmed.into()
    }
}

/// Summarizes the quantities of a scenario for log output.
pub fn describe(scenario: &Scenario) -> String {
    let mut fields: BTreeMap<&str, String> = BTreeMap::new();
    fields.insert("seed", scenario.seed.to_string());
    fields.insert("segment length", format!("{:.5} m", scenario.segment.length));
    if let Some(c) = &scenario.contact {
        fields.insert(
            "contact",
            format!(
                "[{:.1}, {:.1}, {:.1}] N at s = {:.4} m",
                c.wrench[0], c.wrench[1], c.wrench[2], c.location
            ),
        );
    }
    fields
        .iter()
        .map(|(k, v)| format!("{k}: {v}"))
        .collect::<Vec<_>>()
        .join(", ")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quantities_convert_and_reject() {
        assert_eq!(parse_quantity("300.65 mm", Dim::Length, "f").unwrap(), 0.30065);
        assert_eq!(parse_quantity("1.5 m", Dim::Length, "f").unwrap(), 1.5);
        assert_eq!(parse_quantity("208 N", Dim::Force, "f").unwrap(), 208.0);
        assert_eq!(parse_quantity("2 N·m", Dim::Torque, "f").unwrap(), 2.0);
        assert!((parse_quantity("360 deg", Dim::Angle, "f").unwrap()
            - std::f64::consts::TAU)
            .abs()
            < 1e-12);
        assert_eq!(
            parse_quantity("14.323 g m^2", Dim::RotaryInertia, "f").unwrap(),
            14.323e-3
        );
        assert_eq!(parse_quantity("1e-3 m", Dim::Length, "f").unwrap(), 1e-3);

        let missing = parse_quantity("300.65", Dim::Length, "segment.length").unwrap_err();
        assert!(missing.to_string().contains("missing unit"));
        assert!(missing.to_string().contains("segment.length"));
        let wrong = parse_quantity("3 g", Dim::Length, "segment.length").unwrap_err();
        assert!(wrong.to_string().contains("not valid here"));
        assert!(wrong.to_string().contains("mm"));
        assert!(parse_quantity("abc mm", Dim::Length, "f").is_err());
    }

    #[test]
    fn reference_segment_round_trips_through_toml() {
        let reference = SegmentParams::reference_distal();
        let text = segment_to_toml(&reference);
        let raw: RawSegmentFile = toml::from_str(&text).unwrap();
        let loaded = segment_from_raw(raw.segment).unwrap();
        assert!((loaded.length - reference.length).abs() < 1e-12);
        assert!((loaded.pretension - reference.pretension).abs() < 1e-9);
        assert_eq!(loaded.disks.len(), reference.disks.len());
        for (a, b) in loaded.disks.iter().zip(reference.disks.iter()) {
            assert!((a.arclength - b.arclength).abs() < 1e-12);
            assert!((a.mass - b.mass).abs() < 1e-12);
            assert!((a.inertia - b.inertia).norm() < 1e-12);
            assert!((a.com_offset - b.com_offset).norm() < 1e-12);
        }
        assert!((loaded.bending_stiffness.0 - reference.bending_stiffness.0).abs() < 1e-12);
        assert_eq!(loaded.friction_coeffs, reference.friction_coeffs);
    }

    #[test]
    fn stochastic_scenarios_demand_a_seed() {
        let dir = std::env::temp_dir().join(format!("harness-seed-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        std::fs::write(
            dir.join("segment.toml"),
            segment_to_toml(&SegmentParams::reference_distal()),
        )
        .unwrap();
        let scenario_text = "\
[scenario]
kind = \"noise-study\"
segment = \"segment.toml\"

[contact]
force = [\"10 N\", \"-10 N\", \"0 N\"]
ramp = \"1 s\"
duration = \"2 s\"

[noise]
amplitudes = [0.0]
smoothing = 10
";
        let path = dir.join("scenario.toml");
        std::fs::write(&path, scenario_text).unwrap();
        let err = load_scenario(&path, None).unwrap_err();
        assert!(err.to_string().contains("--seed"), "got: {err}");
        // The override substitutes for the missing key.
        let ok = load_scenario(&path, Some(7)).unwrap();
        assert_eq!(ok.seed, 7);
        assert_eq!(ok.kind, ScenarioKind::NoiseStudy);
        let c = ok.contact().unwrap();
        assert_eq!(c.location, ok.segment.length);
        assert_eq!(c.wrench[1], -10.0);
        std::fs::remove_dir_all(&dir).ok();
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = "\
[scenario]
kind = \"noiseless-oracle\"
segment = \"x.toml\"
typo_key = 1
";
        let err = toml::from_str::<RawScenarioFile>(text).unwrap_err();
        assert!(err.to_string().contains("typo_key"));
    }

    #[test]
    fn estimator_defaults_and_overrides() {
        let settings = estimator_from_raw(None).unwrap();
        assert_eq!(settings.gain, Vector6::repeat(10.0));
        assert_eq!(settings.window, None);
        assert_eq!(settings.state_error_bound, 1.84);

        let raw = RawEstimator {
            gain: vec![10.0, 25.0, 25.0, 10.0, 25.0, 0.02],
            window: Some(100),
            reset_horizon: Some(500),
            weight: None,
            constraint: Some("none".into()),
            state_error_bound: Some(2.0),
            derivative_smoothing: Some(30),
            filter_gmo: Some(100),
            filter_jfd: Some(200),
        };
        let settings = estimator_from_raw(Some(raw)).unwrap();
        assert_eq!(settings.gain[5], 0.02);
        assert_eq!(settings.window, Some(100));
        assert_eq!(settings.constraint, ConstraintKind::Unconstrained);
        assert_eq!(settings.filter_jfd, 200);

        let bad = RawEstimator {
            gain: vec![1.0, 2.0],
            window: None,
            reset_horizon: None,
            weight: None,
            constraint: None,
            state_error_bound: None,
            derivative_smoothing: None,
            filter_gmo: None,
            filter_jfd: None,
        };
        assert!(estimator_from_raw(Some(bad)).is_err());
    }
}
