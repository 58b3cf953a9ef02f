//! Error metrics between two traces and the per-cycle validation report.
//!
//! Traces are first aligned on a common uniform grid over their overlap.
//! Continuous channels are interpolated linearly, gears by nearest sample.
//! Engine speed is reported in rpm.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::stats::cumulative_trapezoid;
use crate::trace::Trace;
use crate::units::radps_to_rpm;

#[derive(Debug, thiserror::Error)]
pub enum ValidationError {
    #[error("traces {a} and {b} do not overlap in time")]
    NoOverlap { a: String, b: String },
    #[error("series lengths differ: {0} vs {1}")]
    LengthMismatch(usize, usize),
    #[error("empty series")]
    Empty,
    #[error("reference {0} consumes no fuel")]
    ZeroReference(String),
    #[error("no trace pairs to report on")]
    NoPairs,
    #[error("cycle {0} appears twice")]
    DuplicateCycle(String),
    #[error("invalid grid step {0}")]
    InvalidStep(f64),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Engine-side channels of two traces on the same grid.
#[derive(Debug, Clone, PartialEq)]
pub struct AlignedDynamics {
    pub gear: (Vec<u8>, Vec<u8>),
    /// rpm
    pub engine_speed: (Vec<f64>, Vec<f64>),
    /// N·m
    pub engine_torque: (Vec<f64>, Vec<f64>),
    /// %
    pub pedal: (Vec<f64>, Vec<f64>),
}

/// Two traces resampled on their common grid; `.0` is the first trace.
#[derive(Debug, Clone, PartialEq)]
pub struct Aligned {
    pub t: Vec<f64>,
    pub fuel: (Vec<f64>, Vec<f64>),
    /// Only when both traces carry engine channels.
    pub dynamics: Option<AlignedDynamics>,
}

fn bracket(ts: &[f64], t: f64) -> (usize, f64) {
    let n = ts.len();
    if n == 1 || t <= ts[0] {
        return (0, 0.0);
    }
    if t >= ts[n - 1] {
        return (n - 2, 1.0);
    }
    let hi = ts.partition_point(|&x| x <= t);
    let lo = hi - 1;
    let span = ts[hi] - ts[lo];
    if span <= 0.0 {
        (lo, 0.0)
    } else {
        (lo, (t - ts[lo]) / span)
    }
}

fn lerp(ts: &[f64], ys: &[f64], grid: &[f64]) -> Vec<f64> {
    grid.iter()
        .map(|&t| {
            if ys.len() == 1 {
                return ys[0];
            }
            let (i, w) = bracket(ts, t);
            ys[i] + w * (ys[i + 1] - ys[i])
        })
        .collect()
}

fn nearest(ts: &[f64], ys: &[u8], grid: &[f64]) -> Vec<u8> {
    grid.iter()
        .map(|&t| {
            if ys.len() == 1 {
                return ys[0];
            }
            let (i, w) = bracket(ts, t);
            if w > 0.5 {
                ys[i + 1]
            } else {
                ys[i]
            }
        })
        .collect()
}

/// Resample both traces onto `t0, t0 + dt, …` over their overlap.
pub fn align(a: &Trace, b: &Trace, dt: f64) -> Result<Aligned, ValidationError> {
    if !(dt > 0.0) || !dt.is_finite() {
        return Err(ValidationError::InvalidStep(dt));
    }
    let no_overlap = || ValidationError::NoOverlap {
        a: a.name.clone(),
        b: b.name.clone(),
    };
    let (Some(&a0), Some(&a1), Some(&b0), Some(&b1)) = (a.t.first(), a.t.last(), b.t.first(), b.t.last()) else {
        return Err(no_overlap());
    };
    let start = a0.max(b0);
    let end = a1.min(b1);
    if end < start {
        return Err(no_overlap());
    }
    let n = ((end - start) / dt + 1e-9).floor() as usize;
    let t: Vec<f64> = (0..=n).map(|i| start + i as f64 * dt).collect();
    let fuel = (lerp(&a.t, &a.fuel, &t), lerp(&b.t, &b.fuel, &t));
    let dynamics = match (&a.dynamics, &b.dynamics) {
        (Some(da), Some(db)) => {
            let rpm = |x: &[f64]| x.iter().map(|&w| radps_to_rpm(w)).collect::<Vec<_>>();
            Some(AlignedDynamics {
                gear: (nearest(&a.t, &da.gear, &t), nearest(&b.t, &db.gear, &t)),
                engine_speed: (
                    lerp(&a.t, &rpm(&da.engine_speed), &t),
                    lerp(&b.t, &rpm(&db.engine_speed), &t),
                ),
                engine_torque: (lerp(&a.t, &da.engine_torque, &t), lerp(&b.t, &db.engine_torque, &t)),
                pedal: (lerp(&a.t, &da.pedal, &t), lerp(&b.t, &db.pedal, &t)),
            })
        }
        _ => None,
    };
    Ok(Aligned { t, fuel, dynamics })
}

pub fn mae(a: &[f64], b: &[f64]) -> Result<f64, ValidationError> {
    if a.len() != b.len() {
        return Err(ValidationError::LengthMismatch(a.len(), b.len()));
    }
    if a.is_empty() {
        return Err(ValidationError::Empty);
    }
    Ok(a.iter().zip(b).map(|(x, y)| (x - y).abs()).sum::<f64>() / a.len() as f64)
}

/// Total fuel (g) and its running integral.
pub fn cumulative_fuel(trace: &Trace) -> (f64, Vec<f64>) {
    let series = cumulative_trapezoid(&trace.t, &trace.fuel);
    (series.last().copied().unwrap_or(0.0), series)
}

/// `100 · |F_model − F_ref| / F_ref` on the traces' own grids.
pub fn cumulative_error_pct(reference: &Trace, model: &Trace) -> Result<f64, ValidationError> {
    error_pct(&reference.name, cumulative_fuel(reference).0, cumulative_fuel(model).0)
}

fn error_pct(name: &str, reference: f64, model: f64) -> Result<f64, ValidationError> {
    if reference <= 0.0 {
        return Err(ValidationError::ZeroReference(name.to_string()));
    }
    Ok(100.0 * (model - reference).abs() / reference)
}

/// Mean absolute gear difference and the percentage of steps that differ.
pub fn gear_metrics(reference: &[u8], model: &[u8]) -> Result<(f64, f64), ValidationError> {
    if reference.len() != model.len() {
        return Err(ValidationError::LengthMismatch(reference.len(), model.len()));
    }
    if reference.is_empty() {
        return Err(ValidationError::Empty);
    }
    let n = reference.len() as f64;
    let (mut total, mut differ) = (0u64, 0u64);
    for (&r, &m) in reference.iter().zip(model) {
        let d = (r as i64 - m as i64).unsigned_abs();
        total += d;
        differ += u64::from(d != 0);
    }
    Ok((total as f64 / n, 100.0 * differ as f64 / n))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CycleRecord {
    pub cycle: String,
    pub reference: String,
    pub model: String,
    /// s
    pub dt: f64,
    pub steps: usize,
    /// g/s
    pub mae_fuel: f64,
    /// Reference total, g.
    pub cumulative_fuel_a: f64,
    /// Model total, g.
    pub cumulative_fuel_b: f64,
    pub cumulative_error_pct: f64,
    /// rpm
    pub mae_engine_speed: Option<f64>,
    /// N·m
    pub mae_engine_torque: Option<f64>,
    /// percentage points
    pub mae_pedal: Option<f64>,
    pub mae_gear: Option<f64>,
    pub gear_mismatch_pct: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct ValidationReport {
    pub records: BTreeMap<String, CycleRecord>,
}

/// One comparison: `model` judged against `reference` on `cycle`.
#[derive(Debug, Clone, Copy)]
pub struct Pair<'a> {
    pub cycle: &'a str,
    pub reference: &'a Trace,
    pub model: &'a Trace,
}

pub fn compare(pair: &Pair<'_>, reference_id: &str, model_id: &str, dt: f64) -> Result<CycleRecord, ValidationError> {
    let al = align(pair.reference, pair.model, dt)?;
    record_from(pair.cycle, reference_id, model_id, dt, &al)
}

fn record_from(cycle: &str, reference_id: &str, model_id: &str, dt: f64, al: &Aligned) -> Result<CycleRecord, ValidationError> {
    let cum_a = cumulative_trapezoid(&al.t, &al.fuel.0).last().copied().unwrap_or(0.0);
    let cum_b = cumulative_trapezoid(&al.t, &al.fuel.1).last().copied().unwrap_or(0.0);
    let mut rec = CycleRecord {
        cycle: cycle.to_string(),
        reference: reference_id.to_string(),
        model: model_id.to_string(),
        dt,
        steps: al.t.len(),
        mae_fuel: mae(&al.fuel.0, &al.fuel.1)?,
        cumulative_fuel_a: cum_a,
        cumulative_fuel_b: cum_b,
        cumulative_error_pct: error_pct(cycle, cum_a, cum_b)?,
        mae_engine_speed: None,
        mae_engine_torque: None,
        mae_pedal: None,
        mae_gear: None,
        gear_mismatch_pct: None,
    };
    if let Some(d) = &al.dynamics {
        rec.mae_engine_speed = Some(mae(&d.engine_speed.0, &d.engine_speed.1)?);
        rec.mae_engine_torque = Some(mae(&d.engine_torque.0, &d.engine_torque.1)?);
        rec.mae_pedal = Some(mae(&d.pedal.0, &d.pedal.1)?);
        let (g, pct) = gear_metrics(&d.gear.0, &d.gear.1)?;
        rec.mae_gear = Some(g);
        rec.gear_mismatch_pct = Some(pct);
    }
    Ok(rec)
}

/// Metrics for every pair, keyed by cycle name.
pub fn build_report(
    pairs: &[Pair<'_>],
    reference_id: &str,
    model_id: &str,
    dt: f64,
) -> Result<ValidationReport, ValidationError> {
    if pairs.is_empty() {
        return Err(ValidationError::NoPairs);
    }
    let mut report = ValidationReport::default();
    for p in pairs {
        if report.records.contains_key(p.cycle) {
            return Err(ValidationError::DuplicateCycle(p.cycle.to_string()));
        }
        let rec = compare(p, reference_id, model_id, dt)?;
        report.records.insert(p.cycle.to_string(), rec);
    }
    Ok(report)
}

impl ValidationReport {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }

    /// Plain-text table, one row per cycle.
    pub fn to_table(&self) -> String {
        let opt = |x: Option<f64>, prec: usize| x.map_or("-".to_string(), |v| format!("{v:.prec$}"));
        let mut out = String::new();
        let _ = writeln!(
            out,
            "{:<14} {:>10} {:>10} {:>10} {:>8} {:>9} {:>8} {:>8} {:>7} {:>9}",
            "cycle", "mae_fuel", "cum_ref", "cum_model", "cum_err%", "mae_rpm", "mae_Nm", "mae_ped", "mae_g", "gear_mis%"
        );
        for r in self.records.values() {
            let _ = writeln!(
                out,
                "{:<14} {:>10.4} {:>10.2} {:>10.2} {:>8.2} {:>9} {:>8} {:>8} {:>7} {:>9}",
                r.cycle,
                r.mae_fuel,
                r.cumulative_fuel_a,
                r.cumulative_fuel_b,
                r.cumulative_error_pct,
                opt(r.mae_engine_speed, 1),
                opt(r.mae_engine_torque, 2),
                opt(r.mae_pedal, 2),
                opt(r.mae_gear, 3),
                opt(r.gear_mismatch_pct, 2),
            );
        }
        out
    }
}

/// `<cycle>_<model>_vs_<ref>.csv`
pub fn comparison_file_name(cycle: &str, model_id: &str, reference_id: &str) -> String {
    format!("{cycle}_{model_id}_vs_{reference_id}.csv")
}

pub const COMPARISON_HEADER: [&str; 11] = [
    "t",
    "fuel_ref_gps",
    "fuel_model_gps",
    "cum_fuel_ref_g",
    "cum_fuel_model_g",
    "gear_ref",
    "gear_model",
    "engine_speed_ref_rpm",
    "engine_speed_model_rpm",
    "engine_torque_ref_nm",
    "engine_torque_model_nm",
];

/// Per-step comparison for plotting. Engine columns are blank when either
/// side has no engine channels.
pub fn write_comparison_csv<W: Write>(w: W, al: &Aligned) -> Result<(), ValidationError> {
    let mut wtr = csv::Writer::from_writer(w);
    wtr.write_record(COMPARISON_HEADER)?;
    let cum_a = cumulative_trapezoid(&al.t, &al.fuel.0);
    let cum_b = cumulative_trapezoid(&al.t, &al.fuel.1);
    for i in 0..al.t.len() {
        let mut rec = vec![
            al.t[i].to_string(),
            al.fuel.0[i].to_string(),
            al.fuel.1[i].to_string(),
            cum_a[i].to_string(),
            cum_b[i].to_string(),
        ];
        match &al.dynamics {
            Some(d) => rec.extend([
                d.gear.0[i].to_string(),
                d.gear.1[i].to_string(),
                d.engine_speed.0[i].to_string(),
                d.engine_speed.1[i].to_string(),
                d.engine_torque.0[i].to_string(),
                d.engine_torque.1[i].to_string(),
            ]),
            None => rec.extend(std::iter::repeat_n(String::new(), 6)),
        }
        wtr.write_record(&rec)?;
    }
    wtr.flush()?;
    Ok(())
}
