//! Stateless map-based fuel model: (v, a, θ) → gear, engine speed and
//! torque, pedal and fuel rate.

use serde::{Deserialize, Serialize};

use crate::extraction::{ExtractedConstants, Extraction, MapSet};
use crate::interp::Curve;
use crate::reference::STANDSTILL_SPEED;
use crate::trace::{Step, Trace};
use crate::units::GRAVITY;
use crate::vehicle::{GearShiftMaps, VehicleConfig, VehicleParams, WheelTorqueCurves};

/// Evaluation domain; inputs outside it are clamped and flagged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InputDomain {
    pub v: (f64, f64),
    pub a: (f64, f64),
    pub theta: (f64, f64),
}

impl InputDomain {
    pub fn for_vehicle(params: &VehicleParams) -> Self {
        Self {
            v: (0.0, params.top_speed()),
            a: (-5.0, 5.0),
            theta: (-0.15, 0.15),
        }
    }

    pub fn clamp(&self, v: f64, a: f64, theta: f64) -> (f64, f64, f64, bool) {
        let cv = v.clamp(self.v.0, self.v.1);
        let ca = a.clamp(self.a.0, self.a.1);
        let ct = theta.clamp(self.theta.0, self.theta.1);
        (cv, ca, ct, cv != v || ca != a || ct != theta)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemiMetadata {
    pub source_cycles: Vec<String>,
    pub fuel_map_rms: f64,
    pub speed_map_rms: Vec<f64>,
    pub torque_map_rms: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SemiPrincipledModel {
    pub params: VehicleParams,
    pub constants: ExtractedConstants,
    pub maps: MapSet,
    /// Upshift map `K_upshift(pedal, v)`; only the upshift rows are used.
    pub shift: GearShiftMaps,
    /// `T_max(N)`, N·m over rad/s.
    pub max_torque: Curve,
    pub wheel: WheelTorqueCurves,
    pub domain: InputDomain,
    /// Acceleration (m/s²) below which the downshift cutoffs hold the gear.
    #[serde(default = "default_hold_accel")]
    pub gear_hold_accel: f64,
    pub metadata: SemiMetadata,
}

pub const DEFAULT_GEAR_HOLD_ACCEL: f64 = 0.1;

fn default_hold_accel() -> f64 {
    DEFAULT_GEAR_HOLD_ACCEL
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SemiOutput {
    pub gear: u8,
    /// rad/s
    pub engine_speed: f64,
    /// N·m
    pub engine_torque: f64,
    /// %
    pub pedal: f64,
    /// g/s
    pub fuel: f64,
    /// N, before the envelope clamp.
    pub wheel_force: f64,
    /// Some input or intermediate value was clamped.
    pub flagged: bool,
    /// Demand beyond the powertrain envelope: wheel force above the gear's
    /// maximum, torque above `T_max(N)` or speed above `N_max`.
    pub saturated: bool,
    /// Engine at its idle operating point: standstill, or a wheel force so
    /// low that the throttle is closed and torque sits at `T_min`.
    pub idle: bool,
}

impl SemiPrincipledModel {
    pub fn new(cfg: &VehicleConfig, extraction: Extraction) -> Self {
        let maps = extraction.maps;
        Self {
            params: cfg.params.clone(),
            metadata: SemiMetadata {
                source_cycles: extraction.source_cycles,
                fuel_map_rms: maps.fuel.rms,
                speed_map_rms: maps.speed.iter().map(|m| m.rms).collect(),
                torque_map_rms: maps.torque.iter().map(|m| m.rms).collect(),
            },
            constants: extraction.constants,
            maps,
            shift: cfg.shift.clone(),
            max_torque: cfg.shift.max_torque.clone(),
            wheel: cfg.wheel_torque_curves(),
            domain: InputDomain::for_vehicle(&cfg.params),
            gear_hold_accel: DEFAULT_GEAR_HOLD_ACCEL,
        }
    }

    pub fn n_gears(&self) -> usize {
        self.params.n_gears()
    }

    /// Gear as a pure function of the inputs: the upshift map at the pedal
    /// implied by the vehicle-mass force. Below `gear_hold_accel` the gear
    /// is held up to the highest one the downshift cutoffs allow.
    pub fn select_gear(&self, v: f64, a: f64, theta: f64) -> u8 {
        let p = &self.params;
        let force = p.m_vehicle * a + p.road_load(v) + p.m_vehicle * GRAVITY * theta.sin();
        let pedal = self.wheel.pedal(v, force * p.r_tire);
        let up = self.shift.upshift_gear(pedal, v);
        let gear = if a < self.gear_hold_accel {
            up.max(self.constants.downshift.gear_for(v))
        } else {
            up
        };
        self.wheel
            .kickdown(p, v, a, theta, gear)
            .expect("gear from the shift map")
    }

    pub fn eval(&self, v: f64, a: f64, theta: f64) -> SemiOutput {
        let (v, a, theta, mut flagged) = self.domain.clamp(v, a, theta);
        let p = &self.params;
        let c = &self.constants;
        let gear = self.select_gear(v, a, theta);
        let force = p.wheel_force(v, a, theta, gear).expect("gear from the shift map");
        let pedal = self.wheel.pedal(v, force * p.r_tire);
        if v < STANDSTILL_SPEED {
            return SemiOutput {
                gear,
                engine_speed: p.n_min,
                engine_torque: c.t_min,
                pedal,
                fuel: c.f_idle,
                wheel_force: force,
                flagged,
                saturated: false,
                idle: true,
            };
        }
        let f_max = self.wheel.max_in_gear(v, gear) / p.r_tire;
        let f_used = if force > f_max {
            flagged = true;
            f_max
        } else {
            force
        };
        let n_out = p.output_speed(v);
        let (n_raw, n_clamped) = self.maps.speed_map(gear).eval_clamped(n_out, f_used);
        let (t_raw, t_clamped) = self.maps.torque_map(gear).eval_clamped(n_out, f_used);
        flagged |= n_clamped || t_clamped;
        let mut saturated = force > f_max || n_raw > p.n_max;
        let speed = n_raw.clamp(p.n_min, p.n_max);
        let mut torque = t_raw;
        if gear == 1 {
            torque += c.t_correction.eval(a);
        }
        let idle = f_used < self.maps.torque_map(gear).domain.y.0 || torque <= c.t_min;
        let t_max = self.max_torque.eval(speed);
        saturated |= torque > t_max || ((n_clamped || t_clamped) && !idle);
        flagged |= saturated;
        let torque = torque.clamp(c.t_min, t_max.max(c.t_min));
        let fuel = if v > c.v_c && force < c.f_wc {
            0.0
        } else {
            let (f, clamped) = self.maps.fuel.eval_clamped(speed, torque);
            flagged |= clamped;
            saturated |= clamped && !idle;
            f.max(0.0)
        };
        SemiOutput {
            gear,
            engine_speed: speed,
            engine_torque: torque,
            pedal,
            fuel,
            wheel_force: force,
            flagged,
            saturated,
            idle,
        }
    }

    /// Fuel rate only.
    pub fn fuel(&self, v: f64, a: f64, theta: f64) -> f64 {
        self.eval(v, a, theta).fuel
    }

    /// Row-wise evaluation; no state is carried between rows.
    pub fn eval_trace(&self, name: &str, t: &[f64], v: &[f64], a: &[f64], grade: &[f64]) -> Trace {
        let mut trace = Trace::with_dynamics(name, t.len());
        for i in 0..t.len() {
            let out = self.eval(v[i], a[i], grade[i]);
            trace.push(Step {
                t: t[i],
                v: v[i],
                a: a[i],
                grade: grade[i],
                gear: out.gear,
                engine_speed: out.engine_speed,
                engine_torque: out.engine_torque,
                pedal: out.pedal,
                fuel: out.fuel,
                flagged: out.flagged,
            });
        }
        trace
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("model serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, serde_json::Error> {
        serde_json::from_str(text)
    }
}
