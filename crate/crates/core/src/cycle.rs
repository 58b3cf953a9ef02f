//! Drive-cycle speed schedules: loading, validation and uniform resampling.

use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::units::SpeedUnit;

/// Default simulation / metric time step, s.
pub const DEFAULT_DT: f64 = 0.1;

#[derive(Debug, thiserror::Error)]
pub enum CycleError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error(transparent)]
    Unit(#[from] crate::units::UnknownUnit),
    #[error("time must be strictly increasing from 0 (row {row}: t = {t})")]
    Monotonicity { row: usize, t: f64 },
    #[error("speed must be non-negative (row {row}: v = {v})")]
    NegativeSpeed { row: usize, v: f64 },
    #[error("a drive cycle needs at least 2 samples, got {0}")]
    TooShort(usize),
    #[error("resampling step must be positive, got {0}")]
    InvalidDt(f64),
    #[error("i/o error reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
}

/// A timestamped target-speed schedule, SI units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DriveCycle {
    pub name: String,
    /// Seconds, strictly increasing from 0.
    pub t: Vec<f64>,
    /// m/s, non-negative.
    pub v: Vec<f64>,
}

impl DriveCycle {
    pub fn new(name: impl Into<String>, t: Vec<f64>, v: Vec<f64>) -> Result<Self, CycleError> {
        let cycle = Self {
            name: name.into(),
            t,
            v,
        };
        cycle.validate()?;
        Ok(cycle)
    }

    pub fn validate(&self) -> Result<(), CycleError> {
        if self.t.len() != self.v.len() {
            return Err(CycleError::Parse(format!(
                "{} timestamps but {} speeds",
                self.t.len(),
                self.v.len()
            )));
        }
        if self.t.len() < 2 {
            return Err(CycleError::TooShort(self.t.len()));
        }
        if self.t[0] != 0.0 {
            return Err(CycleError::Monotonicity { row: 0, t: self.t[0] });
        }
        for (i, w) in self.t.windows(2).enumerate() {
            if !(w[1] > w[0]) {
                return Err(CycleError::Monotonicity { row: i + 1, t: w[1] });
            }
        }
        if let Some((row, &v)) = self.v.iter().enumerate().find(|(_, v)| !(**v >= 0.0)) {
            return Err(CycleError::NegativeSpeed { row, v });
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn duration(&self) -> f64 {
        self.t[self.t.len() - 1]
    }

    /// Speed at an arbitrary time by linear interpolation, clamped to the ends.
    pub fn speed_at(&self, t: f64) -> f64 {
        let n = self.t.len();
        if t <= self.t[0] {
            return self.v[0];
        }
        if t >= self.t[n - 1] {
            return self.v[n - 1];
        }
        let hi = self.t.partition_point(|&x| x <= t);
        let lo = hi - 1;
        let w = (t - self.t[lo]) / (self.t[hi] - self.t[lo]);
        self.v[lo] + w * (self.v[hi] - self.v[lo])
    }

    /// Linear interpolation onto `0, dt, 2dt, …` up to the end time. The final
    /// sample is always the original end point, so the grid may end with a
    /// shorter step when the duration is not a multiple of `dt`.
    pub fn resample(&self, dt: f64) -> Result<DriveCycle, CycleError> {
        if !(dt > 0.0) || !dt.is_finite() {
            return Err(CycleError::InvalidDt(dt));
        }
        let end = self.duration();
        let steps = (end / dt + 1e-9).floor() as usize;
        let mut t: Vec<f64> = (0..=steps).map(|i| i as f64 * dt).collect();
        if end - t[steps] > 1e-9 * dt.max(1.0) {
            t.push(end);
        } else {
            t[steps] = end;
        }
        let v = t.iter().map(|&ti| self.speed_at(ti)).collect();
        Ok(DriveCycle {
            name: self.name.clone(),
            t,
            v,
        })
    }

    /// Central-difference acceleration, one-sided at the ends.
    pub fn acceleration(&self) -> Vec<f64> {
        central_difference(&self.t, &self.v)
    }

    pub fn write_csv<W: std::io::Write>(&self, w: W, unit: SpeedUnit) -> Result<(), csv::Error> {
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(["t", "v"])?;
        for (t, v) in self.t.iter().zip(&self.v) {
            wtr.write_record([format_num(*t), format_num(unit.from_mps(*v))])?;
        }
        wtr.flush()?;
        Ok(())
    }
}

fn format_num(x: f64) -> String {
    let s = format!("{x:.6}");
    let s = s.trim_end_matches('0').trim_end_matches('.');
    if s.is_empty() || s == "-0" {
        "0".to_string()
    } else {
        s.to_string()
    }
}

/// Central differences in the interior, one-sided differences at the ends.
/// Handles non-uniform spacing.
pub fn central_difference(t: &[f64], y: &[f64]) -> Vec<f64> {
    let n = t.len();
    if n < 2 {
        return vec![0.0; n];
    }
    (0..n)
        .map(|i| {
            let (lo, hi) = match i {
                0 => (0, 1),
                _ if i == n - 1 => (n - 2, n - 1),
                _ => (i - 1, i + 1),
            };
            (y[hi] - y[lo]) / (t[hi] - t[lo])
        })
        .collect()
}

/// Parse a `t,v` cycle CSV. Lines starting with `#` are treated as comments.
pub fn read_cycle<R: Read>(name: &str, reader: R, unit: SpeedUnit) -> Result<DriveCycle, CycleError> {
    let mut rdr = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(reader);
    let headers = rdr
        .headers()
        .map_err(|e| CycleError::Parse(e.to_string()))?
        .clone();
    if headers.len() < 2 || &headers[0] != "t" || &headers[1] != "v" {
        return Err(CycleError::Parse(format!(
            "expected header `t,v`, found `{}`",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let mut t = Vec::new();
    let mut v = Vec::new();
    for (row, record) in rdr.records().enumerate() {
        let record = record.map_err(|e| CycleError::Parse(e.to_string()))?;
        let field = |k: usize| -> Result<f64, CycleError> {
            record
                .get(k)
                .ok_or_else(|| CycleError::Parse(format!("row {}: missing column {k}", row + 1)))?
                .parse::<f64>()
                .map_err(|e| CycleError::Parse(format!("row {}: {e}", row + 1)))
        };
        t.push(field(0)?);
        v.push(unit.to_mps(field(1)?));
    }
    if t.is_empty() {
        return Err(CycleError::Parse("no data rows".into()));
    }
    DriveCycle::new(name, t, v)
}

/// Load a cycle file; the cycle is named after the file stem.
pub fn load_cycle(path: &Path, unit: SpeedUnit) -> Result<DriveCycle, CycleError> {
    let file = std::fs::File::open(path).map_err(|source| CycleError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let name = path
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "cycle".into());
    read_cycle(&name, file, unit)
}

/// Like [`load_cycle`] but with the unit given as a CLI-style tag.
pub fn load_cycle_tagged(path: &Path, unit: &str) -> Result<DriveCycle, CycleError> {
    let unit: SpeedUnit = unit.parse()?;
    load_cycle(path, unit)
}
