//! Post-processing of chassis-dynamometer logs into model-ready speed and
//! acceleration profiles.
//!
//! The measured vehicle speed has a 1 km/h resolution, so speed is re-derived
//! from the transmission output shaft through a through-origin regression,
//! smoothed with an iterated three-point average, differentiated, and the
//! resulting acceleration winsorized. Only the part of the log recorded with a
//! hot engine is kept.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::cycle::central_difference;
use crate::stats::percentile_sorted;
use crate::trace::{Step, Trace};
use crate::units::{kph_to_mps, rpm_to_radps};

pub const DYNO_HEADER: [&str; 9] = [
    "t",
    "v_kph",
    "engine_rpm",
    "engine_torque_nm",
    "pedal_pct",
    "fuel_gps",
    "water_temp_c",
    "gear",
    "trans_out_rpm",
];

pub const PROFILE_HEADER: [&str; 3] = ["t", "v_mps", "a_mps2"];

#[derive(Debug, thiserror::Error)]
pub enum DynoError {
    #[error("not enough moving rows for the speed regression ({0}, need 100)")]
    InsufficientData(usize),
    #[error("regression slope {0} is not positive")]
    NonPositiveSlope(f64),
    #[error("series of length {0} is too short to smooth (need 3)")]
    SeriesTooShort(usize),
    #[error("acceleration bound {bound} m/s² not reached: best max |a| = {} after {} steps", .best.max_abs_accel, .best.steps)]
    BoundNotReached { bound: f64, best: Box<Smoothing> },
    #[error("smoothing increased max |a| from {before} to {after} at step {step}")]
    SmoothingNotMonotone { step: usize, before: f64, after: f64 },
    #[error("engine never stays above {0} °C")]
    NeverHot(f64),
    #[error("invalid setting: {0}")]
    Invalid(String),
    #[error("dyno log row {row}: {msg}")]
    Row { row: usize, msg: String },
    #[error("dyno csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DynoRow {
    /// s
    pub t: f64,
    /// km/h, 1 km/h resolution
    pub v_kph: f64,
    pub engine_rpm: f64,
    pub engine_torque: f64,
    /// %
    pub pedal: f64,
    /// g/s
    pub fuel: f64,
    /// °C
    pub water_temp: f64,
    pub gear: u8,
    pub trans_out_rpm: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DynoLog {
    pub name: String,
    pub rows: Vec<DynoRow>,
}

impl DynoLog {
    pub fn validate(&self) -> Result<(), DynoError> {
        for (i, w) in self.rows.windows(2).enumerate() {
            if w[1].t < w[0].t {
                return Err(DynoError::Row {
                    row: i + 1,
                    msg: "time decreases".into(),
                });
            }
        }
        if let Some(i) = self.rows.iter().position(|r| !(r.fuel >= 0.0)) {
            return Err(DynoError::Row {
                row: i,
                msg: "negative fuel rate".into(),
            });
        }
        if let Some(i) = self.rows.iter().position(|r| !r.water_temp.is_finite()) {
            return Err(DynoError::Row {
                row: i,
                msg: "water temperature is not finite".into(),
            });
        }
        Ok(())
    }

    pub fn read_csv<R: Read>(name: &str, r: R) -> Result<Self, DynoError> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_reader(r);
        let headers = rdr.headers()?.clone();
        if headers.iter().ne(DYNO_HEADER.iter().copied()) {
            return Err(DynoError::Row {
                row: 0,
                msg: format!("expected header `{}`", DYNO_HEADER.join(",")),
            });
        }
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let num = |k: usize| -> Result<f64, DynoError> {
                rec[k].parse::<f64>().map_err(|e| DynoError::Row {
                    row: i + 1,
                    msg: format!("{}: {e}", DYNO_HEADER[k]),
                })
            };
            rows.push(DynoRow {
                t: num(0)?,
                v_kph: num(1)?,
                engine_rpm: num(2)?,
                engine_torque: num(3)?,
                pedal: num(4)?,
                fuel: num(5)?,
                water_temp: num(6)?,
                gear: num(7)? as u8,
                trans_out_rpm: num(8)?,
            });
        }
        let log = DynoLog {
            name: name.to_string(),
            rows,
        };
        log.validate()?;
        Ok(log)
    }

    pub fn write_csv<W: Write>(&self, w: W) -> Result<(), DynoError> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(DYNO_HEADER)?;
        for r in &self.rows {
            wtr.write_record([
                r.t.to_string(),
                r.v_kph.to_string(),
                r.engine_rpm.to_string(),
                r.engine_torque.to_string(),
                r.pedal.to_string(),
                r.fuel.to_string(),
                r.water_temp.to_string(),
                r.gear.to_string(),
                r.trans_out_rpm.to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }

    /// Rows with `t` inside `[start, end]`.
    pub fn window(&self, start: f64, end: f64) -> DynoLog {
        DynoLog {
            name: self.name.clone(),
            rows: self
                .rows
                .iter()
                .filter(|r| r.t >= start && r.t <= end)
                .copied()
                .collect(),
        }
    }
}

/// Through-origin least squares of measured speed on transmission output
/// speed, (km/h)/rpm.
pub fn fit_speed_regression(log: &DynoLog) -> Result<f64, DynoError> {
    let moving: Vec<&DynoRow> = log.rows.iter().filter(|r| r.v_kph > 0.0).collect();
    if moving.len() < 100 {
        return Err(DynoError::InsufficientData(moving.len()));
    }
    let sxx: f64 = moving.iter().map(|r| r.trans_out_rpm * r.trans_out_rpm).sum();
    let sxy: f64 = moving.iter().map(|r| r.trans_out_rpm * r.v_kph).sum();
    if sxx == 0.0 {
        return Err(DynoError::InsufficientData(0));
    }
    let slope = sxy / sxx;
    if !(slope > 0.0) {
        return Err(DynoError::NonPositiveSlope(slope));
    }
    Ok(slope)
}

/// Speed from the output shaft, bounded below by zero, m/s.
pub fn derive_speed(log: &DynoLog, slope: f64) -> Vec<f64> {
    log.rows
        .iter()
        .map(|r| kph_to_mps((slope * r.trans_out_rpm).max(0.0)))
        .collect()
}

fn smooth_pass(src: &[f64], dst: &mut [f64], mu: f64) {
    let n = src.len();
    dst[0] = src[0];
    dst[n - 1] = src[n - 1];
    for i in 1..n - 1 {
        dst[i] = 0.5 * mu * src[i - 1] + (1.0 - mu) * src[i] + 0.5 * mu * src[i + 1];
    }
}

/// Iterated three-point weighted average on interior points; end points are
/// left unchanged. Each pass reads only the previous pass's values.
pub fn smooth_speed(series: &[f64], mu: f64, steps: usize) -> Result<Vec<f64>, DynoError> {
    if series.len() < 3 {
        return Err(DynoError::SeriesTooShort(series.len()));
    }
    if !(0.0..=1.0).contains(&mu) {
        return Err(DynoError::Invalid(format!("mu = {mu} outside [0, 1]")));
    }
    let mut cur = series.to_vec();
    let mut next = vec![0.0; series.len()];
    for _ in 0..steps {
        smooth_pass(&cur, &mut next, mu);
        std::mem::swap(&mut cur, &mut next);
    }
    Ok(cur)
}

/// `dv/dt` on a uniform grid: central differences inside, one-sided at the ends.
pub fn derive_acceleration(series: &[f64], dt: f64) -> Vec<f64> {
    let t: Vec<f64> = (0..series.len()).map(|i| i as f64 * dt).collect();
    central_difference(&t, series)
}

/// Winsorize: values outside `[P(fraction), P(1 - fraction)]` are replaced by
/// the nearer bound.
pub fn clip_outliers(series: &[f64], fraction: f64) -> Vec<f64> {
    if series.is_empty() || fraction <= 0.0 {
        return series.to_vec();
    }
    let mut sorted = series.to_vec();
    sorted.sort_by(f64::total_cmp);
    let lo = percentile_sorted(&sorted, fraction);
    let hi = percentile_sorted(&sorted, 1.0 - fraction);
    series.iter().map(|&x| x.clamp(lo, hi)).collect()
}

pub fn max_abs(series: &[f64]) -> f64 {
    series.iter().fold(0.0, |m, &x| m.max(x.abs()))
}

/// Result of the smoothing-step search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Smoothing {
    pub steps: usize,
    pub speed: Vec<f64>,
    pub accel: Vec<f64>,
    pub max_abs_accel: f64,
    /// max |a| for every step count tried, starting at 0.
    pub history: Vec<f64>,
}

/// Improvement in max |a| below which smoothing is considered converged, m/s².
pub const CONVERGENCE_TOL: f64 = 1e-3;

/// Increase the number of smoothing passes until max |a| is within `bound`
/// or stops improving.
pub fn auto_select_smoothing(
    series: &[f64],
    dt: f64,
    mu: f64,
    bound: f64,
    max_steps: usize,
) -> Result<Smoothing, DynoError> {
    if max_steps < 1 {
        return Err(DynoError::Invalid("max_steps must be at least 1".into()));
    }
    if series.len() < 3 {
        return Err(DynoError::SeriesTooShort(series.len()));
    }
    let mut speed = series.to_vec();
    let mut scratch = vec![0.0; series.len()];
    let mut accel = derive_acceleration(&speed, dt);
    let mut history = vec![max_abs(&accel)];
    let mut steps = 0;
    loop {
        let current = history[steps];
        let converged = steps > 0 && history[steps - 1] - current < CONVERGENCE_TOL;
        if current <= bound || converged || steps == max_steps {
            let result = Smoothing {
                steps,
                speed,
                accel,
                max_abs_accel: current,
                history,
            };
            return if current <= bound {
                Ok(result)
            } else {
                Err(DynoError::BoundNotReached {
                    bound,
                    best: Box::new(result),
                })
            };
        }
        smooth_pass(&speed, &mut scratch, mu);
        std::mem::swap(&mut speed, &mut scratch);
        steps += 1;
        accel = derive_acceleration(&speed, dt);
        let next = max_abs(&accel);
        // small slack for round-off on already-flat series
        if next > current * (1.0 + 1e-9) + 1e-12 {
            return Err(DynoError::SmoothingNotMonotone {
                step: steps,
                before: current,
                after: next,
            });
        }
        history.push(next);
    }
}

/// `[t*, t_end]` where `t*` is the first time the coolant reaches `threshold`
/// and stays there for the rest of the log.
pub fn hot_engine_window(log: &DynoLog, threshold: f64) -> Result<(f64, f64), DynoError> {
    let rows = &log.rows;
    let last = rows.last().ok_or(DynoError::NeverHot(threshold))?;
    if last.water_temp < threshold {
        return Err(DynoError::NeverHot(threshold));
    }
    let start = match rows.iter().rposition(|r| r.water_temp < threshold) {
        Some(i) => rows[i + 1].t,
        None => rows[0].t,
    };
    Ok((start, last.t))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct IngestSettings {
    pub mu: f64,
    /// Acceptable |a|, m/s².
    pub accel_bound: f64,
    pub max_steps: usize,
    pub clip_fraction: f64,
    /// Coolant temperature regarded as a hot engine, °C.
    pub hot_threshold: f64,
    /// Uniform grid step, s.
    pub dt: f64,
}

impl Default for IngestSettings {
    fn default() -> Self {
        Self {
            mu: 0.5,
            accel_bound: 4.0,
            max_steps: 2000,
            clip_fraction: 0.05,
            hot_threshold: 85.0,
            dt: crate::cycle::DEFAULT_DT,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileProvenance {
    /// (km/h)/rpm
    pub slope: f64,
    pub smoothing_steps: usize,
    pub clip_fraction: f64,
    pub window: (f64, f64),
    pub dt: f64,
    pub raw_max_abs_accel: f64,
    pub smoothed_max_abs_accel: f64,
    /// Clipped accelerations are winsorized, not removed.
    pub clip_mode: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProcessedProfile {
    pub name: String,
    pub t: Vec<f64>,
    /// m/s
    pub v: Vec<f64>,
    /// m/s²
    pub a: Vec<f64>,
    pub provenance: ProfileProvenance,
}

impl ProcessedProfile {
    pub fn write_csv<W: Write>(&self, w: W, comment: Option<&str>) -> Result<(), DynoError> {
        let mut w = w;
        if let Some(c) = comment {
            writeln!(w, "# {c}")?;
        }
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(PROFILE_HEADER)?;
        for i in 0..self.t.len() {
            wtr.write_record([self.t[i].to_string(), self.v[i].to_string(), self.a[i].to_string()])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(name: &str, r: R) -> Result<(Vec<f64>, Vec<f64>, Vec<f64>), DynoError> {
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
        let (mut t, mut v, mut a) = (Vec::new(), Vec::new(), Vec::new());
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let num = |k: usize| -> Result<f64, DynoError> {
                rec[k].parse::<f64>().map_err(|e| DynoError::Row {
                    row: i + 1,
                    msg: format!("{name}: {e}"),
                })
            };
            t.push(num(0)?);
            v.push(num(1)?);
            a.push(num(2)?);
        }
        Ok((t, v, a))
    }
}

fn interp_at(ts: &[f64], ys: &[f64], t: f64) -> f64 {
    let n = ts.len();
    if t <= ts[0] {
        return ys[0];
    }
    if t >= ts[n - 1] {
        return ys[n - 1];
    }
    let hi = ts.partition_point(|&x| x <= t);
    let lo = hi - 1;
    if ts[hi] == ts[lo] {
        return ys[lo];
    }
    ys[lo] + (t - ts[lo]) / (ts[hi] - ts[lo]) * (ys[hi] - ys[lo])
}

fn uniform_grid(start: f64, end: f64, dt: f64) -> Vec<f64> {
    let n = ((end - start) / dt + 1e-9).floor() as usize;
    (0..=n).map(|i| start + i as f64 * dt).collect()
}

/// Full post-processing of one log.
pub fn process_log(log: &DynoLog, s: &IngestSettings) -> Result<ProcessedProfile, DynoError> {
    log.validate()?;
    if !(0.0..0.5).contains(&s.clip_fraction) {
        return Err(DynoError::Invalid(format!(
            "clip fraction {} outside [0, 0.5)",
            s.clip_fraction
        )));
    }
    if !(s.dt > 0.0) {
        return Err(DynoError::Invalid(format!("dt = {}", s.dt)));
    }
    let window = hot_engine_window(log, s.hot_threshold)?;
    let hot = log.window(window.0, window.1);
    let slope = fit_speed_regression(&hot)?;
    let derived = derive_speed(&hot, slope);
    let raw_t: Vec<f64> = hot.rows.iter().map(|r| r.t).collect();
    let t = uniform_grid(window.0, window.1, s.dt);
    let v_uniform: Vec<f64> = t.iter().map(|&x| interp_at(&raw_t, &derived, x)).collect();
    let raw_max = max_abs(&derive_acceleration(&v_uniform, s.dt));
    let smoothing = auto_select_smoothing(&v_uniform, s.dt, s.mu, s.accel_bound, s.max_steps)?;
    let a = clip_outliers(&smoothing.accel, s.clip_fraction);
    Ok(ProcessedProfile {
        name: log.name.clone(),
        t,
        v: smoothing.speed.iter().map(|&v| v.max(0.0)).collect(),
        a,
        provenance: ProfileProvenance {
            slope,
            smoothing_steps: smoothing.steps,
            clip_fraction: s.clip_fraction,
            window,
            dt: s.dt,
            raw_max_abs_accel: raw_max,
            smoothed_max_abs_accel: smoothing.max_abs_accel,
            clip_mode: "winsorize".into(),
        },
    })
}

/// The measured engine channels of `log` on the profile's time grid, with
/// the processed speed and acceleration. Gear uses the nearest sample.
pub fn measured_trace(log: &DynoLog, profile: &ProcessedProfile) -> Trace {
    let raw_t: Vec<f64> = log.rows.iter().map(|r| r.t).collect();
    let col = |f: fn(&DynoRow) -> f64| -> Vec<f64> { log.rows.iter().map(f).collect() };
    let rpm = col(|r| r.engine_rpm);
    let torque = col(|r| r.engine_torque);
    let pedal = col(|r| r.pedal);
    let fuel = col(|r| r.fuel);
    let mut trace = Trace::with_dynamics(format!("{}_dyno", profile.name), profile.t.len());
    for (i, &t) in profile.t.iter().enumerate() {
        let hi = raw_t.partition_point(|&x| x <= t).min(raw_t.len() - 1);
        let nearest = if hi > 0 && (t - raw_t[hi - 1]).abs() <= (raw_t[hi] - t).abs() {
            hi - 1
        } else {
            hi
        };
        trace.push(Step {
            t,
            v: profile.v[i],
            a: profile.a[i],
            grade: 0.0,
            gear: log.rows[nearest].gear.max(1),
            engine_speed: rpm_to_radps(interp_at(&raw_t, &rpm, t)).max(0.0),
            engine_torque: interp_at(&raw_t, &torque, t),
            pedal: interp_at(&raw_t, &pedal, t),
            fuel: interp_at(&raw_t, &fuel, t).max(0.0),
            flagged: false,
        });
    }
    trace
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn row(t: f64, v_kph: f64, trans_out_rpm: f64, water_temp: f64) -> DynoRow {
        DynoRow {
            t,
            v_kph,
            engine_rpm: 1500.0,
            engine_torque: 50.0,
            pedal: 10.0,
            fuel: 0.5,
            water_temp,
            gear: 3,
            trans_out_rpm,
        }
    }

    fn exact_log(n: usize) -> DynoLog {
        DynoLog {
            name: "exact".into(),
            rows: (0..n)
                .map(|i| {
                    let rpm = 100.0 + 10.0 * i as f64;
                    row(i as f64, 0.0398 * rpm, rpm, 90.0)
                })
                .collect(),
        }
    }

    #[test]
    fn regression_recovers_exact_slope() {
        let slope = fit_speed_regression(&exact_log(200)).unwrap();
        assert!((slope - 0.0398).abs() < 1e-9);
    }

    #[test]
    fn regression_degenerate_inputs() {
        let mut log = exact_log(200);
        for r in &mut log.rows {
            r.trans_out_rpm = 0.0;
        }
        assert!(matches!(
            fit_speed_regression(&log),
            Err(DynoError::InsufficientData(_)) | Err(DynoError::NonPositiveSlope(_))
        ));
        assert!(matches!(
            fit_speed_regression(&exact_log(50)),
            Err(DynoError::InsufficientData(50))
        ));
        let mut log = exact_log(200);
        for r in &mut log.rows {
            r.trans_out_rpm = -r.trans_out_rpm;
        }
        assert!(matches!(fit_speed_regression(&log), Err(DynoError::NonPositiveSlope(_))));
    }

    #[test]
    fn regression_invariant_under_duplication() {
        let mut log = exact_log(150);
        for (i, r) in log.rows.iter_mut().enumerate() {
            r.v_kph += if i % 2 == 0 { 0.7 } else { -0.4 };
        }
        let s1 = fit_speed_regression(&log).unwrap();
        let mut doubled = log.clone();
        doubled.rows.extend(log.rows.iter().copied());
        let s2 = fit_speed_regression(&doubled).unwrap();
        assert!((s1 - s2).abs() < 1e-15);
    }

    #[test]
    fn derive_speed_values() {
        let log = DynoLog {
            name: "d".into(),
            rows: vec![row(0.0, 0.0, 1000.0, 90.0), row(1.0, 0.0, -20.0, 90.0), row(2.0, 0.0, 2000.0, 90.0)],
        };
        let v = derive_speed(&log, 0.0398);
        assert!((v[0] - 11.055_555_555).abs() < 1e-6);
        assert_eq!(v[1], 0.0);
        assert!((v[2] - 2.0 * v[0]).abs() < 1e-12);
    }

    #[test]
    fn smoothing_examples() {
        assert_eq!(smooth_speed(&[0.0, 4.0, 0.0], 0.5, 1).unwrap(), vec![0.0, 2.0, 0.0]);
        let c = vec![3.0; 10];
        assert_eq!(smooth_speed(&c, 0.5, 25).unwrap(), c);
        let x = vec![1.0, 5.0, -2.0, 7.0];
        assert_eq!(smooth_speed(&x, 0.5, 0).unwrap(), x);
        assert!(matches!(smooth_speed(&[1.0, 2.0], 0.5, 1), Err(DynoError::SeriesTooShort(2))));
    }

    #[test]
    fn smoothing_is_jacobi_style() {
        // in-place updating would give 0.5*0 + ... with the new left value
        let out = smooth_speed(&[0.0, 4.0, 4.0, 0.0], 0.5, 1).unwrap();
        assert_eq!(out, vec![0.0, 3.0, 3.0, 0.0]);
    }

    #[test]
    fn acceleration_examples() {
        let ramp: Vec<f64> = (0..20).map(|i| 2.0 * i as f64 * 0.1).collect();
        assert!(derive_acceleration(&ramp, 0.1).iter().all(|a| (a - 2.0).abs() < 1e-12));
        assert!(derive_acceleration(&[4.0; 5], 0.1).iter().all(|&a| a == 0.0));
        // analytic derivative oracle for v = t²
        let dt = 0.1;
        let quad: Vec<f64> = (0..30).map(|i| (i as f64 * dt).powi(2)).collect();
        let a = derive_acceleration(&quad, dt);
        for (i, ai) in a.iter().enumerate().take(29).skip(1) {
            assert!((ai - 2.0 * i as f64 * dt).abs() < 1e-9);
        }
    }

    #[test]
    fn clip_examples() {
        assert_eq!(clip_outliers(&[2.0; 10], 0.05), vec![2.0; 10]);
        let x: Vec<f64> = (0..100).map(|i| (i as f64 * 0.37).sin()).collect();
        assert_eq!(clip_outliers(&x, 0.0), x);
        // one spike among 100 samples: replaced by the 95th percentile
        let mut spiky: Vec<f64> = (0..100).map(|i| i as f64 / 100.0).collect();
        spiky[42] = 1000.0;
        let mut sorted = spiky.clone();
        sorted.sort_by(f64::total_cmp);
        // order-statistic oracle: h = 99 * 0.95 = 94.05
        let p95 = sorted[94] + 0.05 * (sorted[95] - sorted[94]);
        let clipped = clip_outliers(&spiky, 0.05);
        assert!((clipped[42] - p95).abs() < 1e-12);
    }

    #[test]
    fn auto_smoothing_on_smooth_series_needs_no_steps() {
        let v: Vec<f64> = (0..100).map(|i| 10.0 + 0.5 * i as f64 * 0.1).collect();
        let s = auto_select_smoothing(&v, 0.1, 0.5, 4.0, 50).unwrap();
        assert_eq!(s.steps, 0);
    }

    #[test]
    fn auto_smoothing_choice_is_minimal() {
        let v: Vec<f64> = (0..400)
            .map(|i| 10.0 + if i % 2 == 0 { 0.3 } else { -0.3 } + 0.01 * i as f64)
            .collect();
        let s = auto_select_smoothing(&v, 0.1, 0.5, 4.0, 500).unwrap();
        assert!(s.steps > 0);
        assert!(s.max_abs_accel <= 4.0);
        // exhaustive check: one fewer pass violates both stopping rules
        let prev = smooth_speed(&v, 0.5, s.steps - 1).unwrap();
        let prev_max = max_abs(&derive_acceleration(&prev, 0.1));
        assert!(prev_max > 4.0);
        if s.steps >= 2 {
            let before = max_abs(&derive_acceleration(&smooth_speed(&v, 0.5, s.steps - 2).unwrap(), 0.1));
            assert!(before - prev_max >= CONVERGENCE_TOL);
        }
        assert_eq!(s.speed, smooth_speed(&v, 0.5, s.steps).unwrap());
    }

    #[test]
    fn auto_smoothing_reports_best_when_bound_unreachable() {
        // the fixed end points carry a jump that no amount of smoothing removes
        let mut v = vec![10.0; 50];
        v[0] = 0.0;
        match auto_select_smoothing(&v, 0.1, 0.5, 4.0, 10) {
            Err(DynoError::BoundNotReached { best, .. }) => assert!(best.max_abs_accel > 4.0),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn hot_window_examples() {
        let log = |temps: &[f64]| DynoLog {
            name: "w".into(),
            rows: temps.iter().enumerate().map(|(i, &w)| row(i as f64, 0.0, 0.0, w)).collect(),
        };
        assert_eq!(hot_engine_window(&log(&[90.0, 91.0, 92.0]), 85.0).unwrap(), (0.0, 2.0));
        let warm: Vec<f64> = (0..400).map(|t| 25.0 + 60.0 * (t as f64 / 200.0).min(1.0) + if t >= 200 { 1.0 } else { 0.0 }).collect();
        assert_eq!(hot_engine_window(&log(&warm), 85.0).unwrap().0, 200.0);
        assert!(matches!(hot_engine_window(&log(&[20.0, 30.0]), 85.0), Err(DynoError::NeverHot(_))));
        // dipping below later moves the start past the dip
        assert_eq!(hot_engine_window(&log(&[90.0, 80.0, 90.0]), 85.0).unwrap().0, 2.0);
    }

    #[test]
    fn dyno_csv_roundtrip() {
        let log = exact_log(5);
        let mut buf = Vec::new();
        log.write_csv(&mut buf).unwrap();
        assert_eq!(DynoLog::read_csv("exact", buf.as_slice()).unwrap(), log);
    }

    proptest! {
        #[test]
        fn winsorized_values_within_bounds(xs in prop::collection::vec(-50.0f64..50.0, 1..200), f in 0.0f64..0.49) {
            let clipped = clip_outliers(&xs, f);
            let mut sorted = xs.clone();
            sorted.sort_by(f64::total_cmp);
            let lo = percentile_sorted(&sorted, f);
            let hi = percentile_sorted(&sorted, 1.0 - f);
            prop_assert!(clipped.iter().all(|&x| x >= lo && x <= hi));
        }

        #[test]
        fn smoothing_preserves_end_points(xs in prop::collection::vec(-10.0f64..10.0, 3..60), steps in 0usize..20) {
            let s = smooth_speed(&xs, 0.5, steps).unwrap();
            prop_assert_eq!(s[0], xs[0]);
            prop_assert_eq!(s[xs.len() - 1], xs[xs.len() - 1]);
        }
    }
}
