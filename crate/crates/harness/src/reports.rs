//! Scenario-level report schemas and plot-ready data emission.
//!
//! JSON reports serialize with a fixed field order (struct order) and a
//! trailing newline so identical runs produce byte-identical files. The CSV
//! emitters format floats with the shortest round-trippable representation,
//! and every emitted table reads back bit-exact.

use std::io::Write;
use std::path::Path;

use nalgebra::Vector6;
use serde::{Deserialize, Serialize};

use crate::error::{HarnessError, Result};
use crate::pipeline::EstimationSeries;

/// Per-axis force RMSE pair.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxisRmse {
    /// RMSE of the x-direction force (N).
    #[serde(rename = "rmse_x_N")]
    pub rmse_x_n: f64,
    /// RMSE of the y-direction force (N).
    #[serde(rename = "rmse_y_N")]
    pub rmse_y_n: f64,
}

/// Noise-study summary: one RMSE pair per estimator per amplitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NoiseStudyReport {
    /// Peak-to-peak noise amplitudes, in run order.
    pub amplitudes: Vec<f64>,
    /// Momentum-observer results aligned with `amplitudes`.
    pub gmo: Vec<AxisRmse>,
    /// Force-deviation results aligned with `amplitudes`.
    pub jfd: Vec<AxisRmse>,
}

/// Per-level summary row of the state-error sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepLevel {
    /// Fractional state error of this level.
    pub state_error: f64,
    /// Mean absolute x/y error over all samples and trials, momentum
    /// observer (N).
    #[serde(rename = "gmo_mean_x_N")]
    pub gmo_mean_x_n: f64,
    #[serde(rename = "gmo_mean_y_N")]
    pub gmo_mean_y_n: f64,
    /// Largest absolute x/y error over all samples and trials, momentum
    /// observer (N).
    #[serde(rename = "gmo_max_x_N")]
    pub gmo_max_x_n: f64,
    #[serde(rename = "gmo_max_y_N")]
    pub gmo_max_y_n: f64,
    /// Mean absolute x/y error over all samples and trials, force deviation
    /// (N).
    #[serde(rename = "jfd_mean_x_N")]
    pub jfd_mean_x_n: f64,
    #[serde(rename = "jfd_mean_y_N")]
    pub jfd_mean_y_n: f64,
    /// Largest absolute x/y error over all samples and trials, force
    /// deviation (N).
    #[serde(rename = "jfd_max_x_N")]
    pub jfd_max_x_n: f64,
    #[serde(rename = "jfd_max_y_N")]
    pub jfd_max_y_n: f64,
}

/// State-error sweep summary.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    /// Trials per level.
    pub trials: usize,
    /// Trials that failed to integrate and were excluded.
    pub flagged_trials: Vec<usize>,
    /// Per-level statistics in increasing state-error order.
    pub levels: Vec<SweepLevel>,
}

/// One polar-scatter row of the sweep: a (trial, level) condition reduced to
/// a radial force-mismatch RMSE and an angular direction RMSE.
#[derive(Debug, Clone, PartialEq)]
pub struct PolarRow {
    pub trial: usize,
    pub state_error: f64,
    pub force_x_n: f64,
    pub force_y_n: f64,
    pub radial_rmse_n: f64,
    pub direction_rmse_rad: f64,
}

/// Per-segment summary of the multisegment scenario.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SegmentRmse {
    /// Which segment the row describes.
    pub segment: String,
    #[serde(rename = "gmo_rmse_x_N")]
    pub gmo_rmse_x_n: f64,
    #[serde(rename = "gmo_rmse_y_N")]
    pub gmo_rmse_y_n: f64,
    #[serde(rename = "jfd_rmse_x_N")]
    pub jfd_rmse_x_n: f64,
    #[serde(rename = "jfd_rmse_y_N")]
    pub jfd_rmse_y_n: f64,
}

/// Multisegment report: one row per segment plus the equilibrium shift the
/// injected reaction forces produce against a no-injection run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultisegReport {
    pub segments: Vec<SegmentRmse>,
    /// Norm of the steady-state coefficient shift caused by the injected
    /// distal reaction forces on the proximal segment.
    pub reaction_shift_norm: f64,
}

/// Serializes a report as pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(report: &T) -> Result<String> {
    let mut text = serde_json::to_string_pretty(report)
        .map_err(|e| HarnessError::Validation(format!("report serialization: {e}")))?;
    text.push('\n');
    Ok(text)
}

/// Writes a report file.
pub fn save_json<T: Serialize, P: AsRef<Path>>(report: &T, path: P) -> Result<()> {
    let text = to_json(report)?;
    std::fs::write(path.as_ref(), text).map_err(|e| {
        HarnessError::Validation(format!("cannot write {}: {e}", path.as_ref().display()))
    })?;
    Ok(())
}

fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// Writes the polar-scatter CSV: one row per sweep condition.
pub fn write_polar_csv<W: Write>(rows: &[PolarRow], writer: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(writer);
    out.write_record([
        "trial",
        "state_error",
        "force_x_N",
        "force_y_N",
        "radial_rmse_N",
        "direction_rmse_rad",
    ])
    .map_err(csv_err)?;
    for row in rows {
        out.write_record([
            row.trial.to_string(),
            fmt_f64(row.state_error),
            fmt_f64(row.force_x_n),
            fmt_f64(row.force_y_n),
            fmt_f64(row.radial_rmse_n),
            fmt_f64(row.direction_rmse_rad),
        ])
        .map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads the polar-scatter CSV back.
pub fn read_polar_csv<R: std::io::Read>(reader: R) -> Result<Vec<PolarRow>> {
    let mut input = csv::Reader::from_reader(reader);
    let mut rows = Vec::new();
    for record in input.records() {
        let record = record.map_err(csv_err)?;
        if record.len() != 6 {
            return Err(HarnessError::Validation(format!(
                "polar row has {} fields, expected 6",
                record.len()
            )));
        }
        let parse = |i: usize| -> Result<f64> {
            record[i]
                .parse()
                .map_err(|_| HarnessError::Validation(format!("bad float '{}'", &record[i])))
        };
        rows.push(PolarRow {
            trial: record[0]
                .parse()
                .map_err(|_| HarnessError::Validation(format!("bad trial '{}'", &record[0])))?,
            state_error: parse(1)?,
            force_x_n: parse(2)?,
            force_y_n: parse(3)?,
            radial_rmse_n: parse(4)?,
            direction_rmse_rad: parse(5)?,
        });
    }
    Ok(rows)
}

/// Column header of the estimator time-series CSV.
pub const TIMESERIES_HEADER: &str = "t,r1,r2,r3,r4,r5,r6,\
k1,k2,k3,k4,k5,k6,\
wg_fx,wg_fy,wg_fz,wg_mx,wg_my,wg_mz,\
wj_fx,wj_fy,wj_fz,wj_mx,wj_my,wj_mz,\
thr1,thr2,thr3,thr4,thr5,thr6,beta_x,beta_y";

/// Writes the estimator time series with thresholds and the circular-ness
/// measure: residuals, deviations, recovered wrenches, per-sample.
pub fn write_timeseries_csv<W: Write>(
    series: &EstimationSeries,
    thresholds: &Vector6<f64>,
    beta: &[(f64, f64)],
    writer: W,
) -> Result<()> {
    if beta.len() != series.t.len() {
        return Err(HarnessError::Validation(format!(
            "beta series length {} does not match time series length {}",
            beta.len(),
            series.t.len()
        )));
    }
    let mut out = csv::Writer::from_writer(writer);
    out.write_record(TIMESERIES_HEADER.split(',')).map_err(csv_err)?;
    for k in 0..series.t.len() {
        let mut record: Vec<String> = Vec::with_capacity(33);
        record.push(fmt_f64(series.t[k]));
        for i in 0..6 {
            record.push(fmt_f64(series.residual[k][i]));
        }
        for i in 0..6 {
            record.push(fmt_f64(series.deviation[k][i]));
        }
        for i in 0..6 {
            record.push(fmt_f64(series.wrench_gmo[k][i]));
        }
        for i in 0..6 {
            record.push(fmt_f64(series.wrench_jfd[k][i]));
        }
        for i in 0..6 {
            record.push(fmt_f64(thresholds[i]));
        }
        record.push(fmt_f64(beta[k].0));
        record.push(fmt_f64(beta[k].1));
        out.write_record(&record).map_err(csv_err)?;
    }
    out.flush()?;
    Ok(())
}

/// Reads the time-series CSV back into raw rows for round-trip checks.
pub fn read_timeseries_csv<R: std::io::Read>(reader: R) -> Result<Vec<Vec<f64>>> {
    let mut input = csv::Reader::from_reader(reader);
    {
        let headers = input.headers().map_err(csv_err)?;
        let expected: Vec<&str> = TIMESERIES_HEADER.split(',').collect();
        let got: Vec<&str> = headers.iter().collect();
        if got != expected {
            return Err(HarnessError::Validation(format!(
                "unexpected time-series header {got:?}"
            )));
        }
    }
    let mut rows = Vec::new();
    for record in input.records() {
        let record = record.map_err(csv_err)?;
        let mut row = Vec::with_capacity(record.len());
        for field in record.iter() {
            row.push(field.parse().map_err(|_| {
                HarnessError::Validation(format!("bad float '{field}' in time series"))
            })?);
        }
        rows.push(row);
    }
    Ok(rows)
}

fn csv_err(e: csv::Error) -> HarnessError {
    HarnessError::Validation(format!("csv error: {e}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_series() -> EstimationSeries {
        let n = 5;
        EstimationSeries {
            t: (0..n).map(|k| 0.01 * k as f64).collect(),
            residual: (0..n)
                .map(|k| Vector6::repeat(0.1 * k as f64 + 1.0 / 3.0))
                .collect(),
            deviation: (0..n).map(|k| Vector6::repeat(-0.2 * k as f64)).collect(),
            wrench_gmo: (0..n).map(|k| Vector6::repeat(k as f64 / 7.0)).collect(),
            wrench_jfd: (0..n).map(|k| Vector6::repeat(k as f64 / 11.0)).collect(),
        }
    }

    #[test]
    fn timeseries_round_trips_bit_exact() {
        let series = sample_series();
        let thresholds = Vector6::new(0.1, 0.2, 0.3, 0.4, 0.5, 1.0 / 6.0);
        let beta: Vec<(f64, f64)> = (0..5).map(|k| (k as f64 / 13.0, k as f64 / 17.0)).collect();
        let mut buf = Vec::new();
        write_timeseries_csv(&series, &thresholds, &beta, &mut buf).unwrap();
        let rows = read_timeseries_csv(buf.as_slice()).unwrap();
        assert_eq!(rows.len(), 5);
        for (k, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), 33);
            assert_eq!(row[0].to_bits(), series.t[k].to_bits());
            assert_eq!(row[1].to_bits(), series.residual[k][0].to_bits());
            assert_eq!(row[7].to_bits(), series.deviation[k][0].to_bits());
            assert_eq!(row[13].to_bits(), series.wrench_gmo[k][0].to_bits());
            assert_eq!(row[19].to_bits(), series.wrench_jfd[k][0].to_bits());
            assert_eq!(row[25].to_bits(), thresholds[0].to_bits());
            assert_eq!(row[31].to_bits(), beta[k].0.to_bits());
            assert_eq!(row[32].to_bits(), beta[k].1.to_bits());
        }
    }

    #[test]
    fn polar_csv_round_trips_bit_exact() {
        let rows = vec![
            PolarRow {
                trial: 0,
                state_error: 0.0222,
                force_x_n: 17.25,
                force_y_n: -42.0,
                radial_rmse_n: 1.0 / 3.0,
                direction_rmse_rad: 0.125,
            },
            PolarRow {
                trial: 20,
                state_error: 0.2,
                force_x_n: -49.99,
                force_y_n: 3.0e-5,
                radial_rmse_n: 7.77,
                direction_rmse_rad: std::f64::consts::PI / 7.0,
            },
        ];
        let mut buf = Vec::new();
        write_polar_csv(&rows, &mut buf).unwrap();
        let back = read_polar_csv(buf.as_slice()).unwrap();
        assert_eq!(back.len(), rows.len());
        for (a, b) in back.iter().zip(rows.iter()) {
            assert_eq!(a.trial, b.trial);
            assert_eq!(a.state_error.to_bits(), b.state_error.to_bits());
            assert_eq!(a.force_x_n.to_bits(), b.force_x_n.to_bits());
            assert_eq!(a.radial_rmse_n.to_bits(), b.radial_rmse_n.to_bits());
            assert_eq!(
                a.direction_rmse_rad.to_bits(),
                b.direction_rmse_rad.to_bits()
            );
        }
    }

    #[test]
    fn json_reports_are_deterministic_with_stable_keys() {
        let report = NoiseStudyReport {
            amplitudes: vec![0.0, 0.001],
            gmo: vec![
                AxisRmse {
                    rmse_x_n: 0.67,
                    rmse_y_n: 0.78,
                },
                AxisRmse {
                    rmse_x_n: 1.35,
                    rmse_y_n: 1.44,
                },
            ],
            jfd: vec![
                AxisRmse {
                    rmse_x_n: 1e-6,
                    rmse_y_n: 1.3e-6,
                },
                AxisRmse {
                    rmse_x_n: 3.89,
                    rmse_y_n: 5.37,
                },
            ],
        };
        let a = to_json(&report).unwrap();
        let b = to_json(&report).unwrap();
        assert_eq!(a, b);
        assert!(a.ends_with('\n'));
        let gmo_pos = a.find("\"gmo\"").unwrap();
        let jfd_pos = a.find("\"jfd\"").unwrap();
        let amp_pos = a.find("\"amplitudes\"").unwrap();
        assert!(amp_pos < gmo_pos && gmo_pos < jfd_pos, "field order is fixed");
        let back: NoiseStudyReport = serde_json::from_str(&a).unwrap();
        assert_eq!(back, report);
    }
}
