//! Uniformly sampled simulation records and their CSV round-trip.

use std::io::{Read, Write};
use std::path::Path;

use nalgebra::{Vector2, Vector6};

use crate::error::{Error, Result};
use crate::scalar::{real, to_f64, Real};

/// Everything recorded at one sample instant.
#[derive(Debug, Clone, PartialEq)]
pub struct Sample<T: Real> {
    /// Sample time (s).
    pub t: T,
    /// Modal coefficients.
    pub c: Vector6<T>,
    /// Coefficient rates.
    pub c_dot: Vector6<T>,
    /// Coefficient accelerations.
    pub c_ddot: Vector6<T>,
    /// Capstan torques (N·m).
    pub tau: Vector2<T>,
    /// True applied contact wrench `[f; m]`, zero when no contact.
    pub wrench: Vector6<T>,
    /// Contact arclength (m); negative when no wrench is applied.
    pub contact_arclength: T,
}

/// A uniformly sampled trajectory.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T: Real> {
    /// Sample spacing (s).
    pub dt: T,
    /// Samples in time order, starting at `t = 0`.
    pub samples: Vec<Sample<T>>,
}

/// Column order of the on-disk format.
pub const CSV_HEADER: &str = "t,c1,c2,c3,c4,c5,c6,cd1,cd2,cd3,cd4,cd5,cd6,\
cdd1,cdd2,cdd3,cdd4,cdd5,cdd6,tau1,tau2,fx,fy,fz,mx,my,mz,s_c";

impl<T: Real> Trajectory<T> {
    /// Number of samples.
    pub fn len(&self) -> usize {
        self.samples.len()
    }

    /// True when no samples are stored.
    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Coefficient series.
    pub fn coeffs(&self) -> Vec<Vector6<T>> {
        self.samples.iter().map(|s| s.c).collect()
    }

    /// Coefficient-rate series.
    pub fn rates(&self) -> Vec<Vector6<T>> {
        self.samples.iter().map(|s| s.c_dot).collect()
    }

    /// Coefficient-acceleration series.
    pub fn accelerations(&self) -> Vec<Vector6<T>> {
        self.samples.iter().map(|s| s.c_ddot).collect()
    }

    /// Torque series.
    pub fn torques(&self) -> Vec<Vector2<T>> {
        self.samples.iter().map(|s| s.tau).collect()
    }

    /// Writes the samples in the documented CSV schema.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(CSV_HEADER.split(','))?;
        for s in &self.samples {
            let mut record: Vec<String> = Vec::with_capacity(28);
            let mut push = |v: T| record.push(format!("{}", to_f64(v)));
            push(s.t);
            for i in 0..6 {
                push(s.c[i]);
            }
            for i in 0..6 {
                push(s.c_dot[i]);
            }
            for i in 0..6 {
                push(s.c_ddot[i]);
            }
            push(s.tau[0]);
            push(s.tau[1]);
            for i in 0..6 {
                push(s.wrench[i]);
            }
            push(s.contact_arclength);
            out.write_record(&record)?;
        }
        out.flush().map_err(Error::from)?;
        Ok(())
    }

    /// Writes the CSV schema to a file path.
    pub fn save_csv<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let file = std::fs::File::create(path)?;
        self.write_csv(std::io::BufWriter::new(file))
    }

    /// Reads a trajectory back from the documented CSV schema.
    pub fn read_csv<R: Read>(reader: R) -> Result<Self> {
        let mut input = csv::Reader::from_reader(reader);
        {
            let headers = input.headers()?;
            let expected: Vec<&str> = CSV_HEADER.split(',').collect();
            let got: Vec<&str> = headers.iter().collect();
            if got != expected {
                return Err(Error::TrajectoryFormat(format!(
                    "unexpected header {got:?}"
                )));
            }
        }
        let mut samples: Vec<Sample<T>> = Vec::new();
        for (line, record) in input.records().enumerate() {
            let record = record?;
            if record.len() != 28 {
                return Err(Error::TrajectoryFormat(format!(
                    "row {}: expected 28 fields, found {}",
                    line + 2,
                    record.len()
                )));
            }
            let mut fields = record.iter().enumerate().map(|(i, raw)| {
                raw.parse::<f64>().map_err(|_| {
                    Error::TrajectoryFormat(format!(
                        "row {}, column {}: '{raw}' is not a number",
                        line + 2,
                        i + 1
                    ))
                })
            });
            let mut next = || -> Result<T> { Ok(real(fields.next().unwrap()?)) };
            let t = next()?;
            let mut c = Vector6::zeros();
            for i in 0..6 {
                c[i] = next()?;
            }
            let mut c_dot = Vector6::zeros();
            for i in 0..6 {
                c_dot[i] = next()?;
            }
            let mut c_ddot = Vector6::zeros();
            for i in 0..6 {
                c_ddot[i] = next()?;
            }
            let tau = Vector2::new(next()?, next()?);
            let mut wrench = Vector6::zeros();
            for i in 0..6 {
                wrench[i] = next()?;
            }
            let contact_arclength = next()?;
            samples.push(Sample {
                t,
                c,
                c_dot,
                c_ddot,
                tau,
                wrench,
                contact_arclength,
            });
        }
        if samples.len() < 2 {
            return Err(Error::TrajectoryFormat(
                "trajectory needs at least two samples".into(),
            ));
        }
        let dt = samples[1].t - samples[0].t;
        for (k, pair) in samples.windows(2).enumerate() {
            let step = to_f64(pair[1].t - pair[0].t);
            if step <= 0.0 || (step - to_f64(dt)).abs() > 1e-9 * (1.0 + to_f64(dt)) {
                return Err(Error::TrajectoryFormat(format!(
                    "non-uniform time grid between rows {} and {}",
                    k + 2,
                    k + 3
                )));
            }
        }
        Ok(Self { dt, samples })
    }

    /// Reads a trajectory from a file path.
    pub fn load_csv<P: AsRef<Path>>(path: P) -> Result<Self> {
        let file = std::fs::File::open(path)?;
        Self::read_csv(std::io::BufReader::new(file))
    }
}
