//! Per-timestep records produced by the simulator, the reduced models and
//! processed dynamometer logs.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::stats::cumulative_trapezoid;

pub const TRACE_HEADER: [&str; 10] = [
    "t",
    "v_mps",
    "a_mps2",
    "grade_rad",
    "gear",
    "engine_speed_radps",
    "engine_torque_nm",
    "pedal_pct",
    "fuel_gps",
    "flag",
];

#[derive(Debug, thiserror::Error)]
pub enum TraceError {
    #[error("trace csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("trace csv row {row}: {msg}")]
    Row { row: usize, msg: String },
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

/// Engine-side signals; absent for models that only predict fuel.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Dynamics {
    pub gear: Vec<u8>,
    /// rad/s
    pub engine_speed: Vec<f64>,
    /// N·m
    pub engine_torque: Vec<f64>,
    /// %
    pub pedal: Vec<f64>,
}

/// Column-oriented trace. All columns share the length of `t`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Trace {
    pub name: String,
    pub t: Vec<f64>,
    pub v: Vec<f64>,
    pub a: Vec<f64>,
    pub grade: Vec<f64>,
    /// g/s
    pub fuel: Vec<f64>,
    pub dynamics: Option<Dynamics>,
    /// Step was clamped (torque envelope, input domain) by the producer.
    pub flagged: Vec<bool>,
}

/// One row of a trace, for producers that build traces step by step.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Step {
    pub t: f64,
    pub v: f64,
    pub a: f64,
    pub grade: f64,
    pub gear: u8,
    pub engine_speed: f64,
    pub engine_torque: f64,
    pub pedal: f64,
    pub fuel: f64,
    pub flagged: bool,
}

impl Trace {
    pub fn with_dynamics(name: impl Into<String>, capacity: usize) -> Self {
        Self {
            name: name.into(),
            t: Vec::with_capacity(capacity),
            v: Vec::with_capacity(capacity),
            a: Vec::with_capacity(capacity),
            grade: Vec::with_capacity(capacity),
            fuel: Vec::with_capacity(capacity),
            dynamics: Some(Dynamics::default()),
            flagged: Vec::with_capacity(capacity),
        }
    }

    pub fn fuel_only(name: impl Into<String>, capacity: usize) -> Self {
        Self {
            dynamics: None,
            ..Self::with_dynamics(name, capacity)
        }
    }

    pub fn len(&self) -> usize {
        self.t.len()
    }

    pub fn is_empty(&self) -> bool {
        self.t.is_empty()
    }

    pub fn push(&mut self, s: Step) {
        self.t.push(s.t);
        self.v.push(s.v);
        self.a.push(s.a);
        self.grade.push(s.grade);
        self.fuel.push(s.fuel);
        self.flagged.push(s.flagged);
        if let Some(d) = self.dynamics.as_mut() {
            d.gear.push(s.gear);
            d.engine_speed.push(s.engine_speed);
            d.engine_torque.push(s.engine_torque);
            d.pedal.push(s.pedal);
        }
    }

    pub fn step(&self, i: usize) -> Step {
        let (gear, engine_speed, engine_torque, pedal) = match &self.dynamics {
            Some(d) => (d.gear[i], d.engine_speed[i], d.engine_torque[i], d.pedal[i]),
            None => (0, f64::NAN, f64::NAN, f64::NAN),
        };
        Step {
            t: self.t[i],
            v: self.v[i],
            a: self.a[i],
            grade: self.grade[i],
            gear,
            engine_speed,
            engine_torque,
            pedal,
            fuel: self.fuel[i],
            flagged: self.flagged[i],
        }
    }

    pub fn gears(&self) -> Option<&[u8]> {
        self.dynamics.as_ref().map(|d| d.gear.as_slice())
    }

    /// Running trapezoidal integral of the fuel rate, g.
    pub fn cumulative_fuel(&self) -> Vec<f64> {
        cumulative_trapezoid(&self.t, &self.fuel)
    }

    pub fn total_fuel(&self) -> f64 {
        self.cumulative_fuel().last().copied().unwrap_or(0.0)
    }

    /// Check the structural invariants; returns a description of the first
    /// violation.
    pub fn check(&self, n_gears: usize, n_max: f64) -> Result<(), String> {
        let n = self.t.len();
        let same = [self.v.len(), self.a.len(), self.grade.len(), self.fuel.len(), self.flagged.len()];
        if same.iter().any(|&l| l != n) {
            return Err("column lengths differ".into());
        }
        if let Some(i) = self.t.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(format!("time not increasing at row {}", i + 1));
        }
        if let Some(i) = self.fuel.iter().position(|&f| !(f >= 0.0)) {
            return Err(format!("negative fuel at row {i}"));
        }
        if let Some(d) = &self.dynamics {
            if d.gear.len() != n || d.engine_speed.len() != n || d.engine_torque.len() != n || d.pedal.len() != n {
                return Err("dynamics column lengths differ".into());
            }
            if let Some(i) = d.gear.iter().position(|&g| g == 0 || g as usize > n_gears) {
                return Err(format!("gear out of range at row {i}"));
            }
            if let Some(i) = d
                .engine_speed
                .iter()
                .position(|&s| !(0.0..=n_max * (1.0 + 1e-12)).contains(&s))
            {
                return Err(format!("engine speed out of range at row {i}"));
            }
        }
        Ok(())
    }

    /// Write as CSV. `comment`, when given, becomes a leading `# ` line.
    pub fn write_csv<W: Write>(&self, mut w: W, comment: Option<&str>) -> Result<(), TraceError> {
        if let Some(c) = comment {
            writeln!(w, "# {c}")?;
        }
        let mut wtr = csv::Writer::from_writer(w);
        wtr.write_record(TRACE_HEADER)?;
        for i in 0..self.len() {
            let s = self.step(i);
            let dyn_fields = match self.dynamics {
                Some(_) => [
                    s.gear.to_string(),
                    s.engine_speed.to_string(),
                    s.engine_torque.to_string(),
                    s.pedal.to_string(),
                ],
                None => Default::default(),
            };
            wtr.write_record([
                s.t.to_string(),
                s.v.to_string(),
                s.a.to_string(),
                s.grade.to_string(),
                dyn_fields[0].clone(),
                dyn_fields[1].clone(),
                dyn_fields[2].clone(),
                dyn_fields[3].clone(),
                s.fuel.to_string(),
                u8::from(s.flagged).to_string(),
            ])?;
        }
        wtr.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(name: &str, r: R) -> Result<Self, TraceError> {
        let mut rdr = csv::ReaderBuilder::new().comment(Some(b'#')).from_reader(r);
        let headers = rdr.headers()?.clone();
        if headers.iter().ne(TRACE_HEADER.iter().copied()) {
            return Err(TraceError::Row {
                row: 0,
                msg: format!("unexpected header `{}`", headers.iter().collect::<Vec<_>>().join(",")),
            });
        }
        let mut trace = Trace::with_dynamics(name, 0);
        let mut has_dynamics = None;
        for (row, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let num = |k: usize| -> Result<f64, TraceError> {
                rec[k].parse::<f64>().map_err(|e| TraceError::Row {
                    row: row + 1,
                    msg: format!("column {}: {e}", TRACE_HEADER[k]),
                })
            };
            let row_dyn = !rec[4].is_empty();
            match has_dynamics {
                None => has_dynamics = Some(row_dyn),
                Some(h) if h != row_dyn => {
                    return Err(TraceError::Row {
                        row: row + 1,
                        msg: "engine columns present on some rows only".into(),
                    })
                }
                _ => {}
            }
            let (gear, speed, torque, pedal) = if row_dyn {
                let gear = rec[4].parse::<u8>().map_err(|e| TraceError::Row {
                    row: row + 1,
                    msg: format!("gear: {e}"),
                })?;
                (gear, num(5)?, num(6)?, num(7)?)
            } else {
                (0, 0.0, 0.0, 0.0)
            };
            trace.push(Step {
                t: num(0)?,
                v: num(1)?,
                a: num(2)?,
                grade: num(3)?,
                gear,
                engine_speed: speed,
                engine_torque: torque,
                pedal,
                fuel: num(8)?,
                flagged: &rec[9] == "1",
            });
        }
        if has_dynamics == Some(false) {
            trace.dynamics = None;
        }
        Ok(trace)
    }
}
