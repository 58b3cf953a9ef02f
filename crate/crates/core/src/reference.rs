//! Forward simulator of a conventional powertrain following a drive cycle
//! exactly, the high-fidelity source for map extraction and validation.

use serde::{Deserialize, Serialize};

use crate::cycle::DriveCycle;
use crate::trace::{Step, Trace};
use crate::vehicle::{VehicleConfig, VehicleError, WheelTorqueCurves};

/// Below this speed the vehicle is considered at standstill, m/s.
pub const STANDSTILL_SPEED: f64 = 0.1;

#[derive(Debug, thiserror::Error)]
pub enum SimError {
    #[error(transparent)]
    Vehicle(#[from] VehicleError),
    #[error(transparent)]
    Cycle(#[from] crate::cycle::CycleError),
}

/// How the torque converter is treated during a run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SimMode {
    /// Normal operation, including the first-gear open-converter torque.
    #[default]
    Base,
    /// Dynamometer campaign: converter restricted to quasi-static
    /// operation, so no open-converter correction.
    Vcd,
}

/// Road grade (rad) as a function of time.
pub type GradeProfile<'a> = &'a dyn Fn(f64) -> f64;

pub fn flat(_t: f64) -> f64 {
    0.0
}

pub struct ReferencePowertrain<'a> {
    cfg: &'a VehicleConfig,
    wheel: WheelTorqueCurves,
    mode: SimMode,
}

impl<'a> ReferencePowertrain<'a> {
    pub fn new(cfg: &'a VehicleConfig, mode: SimMode) -> Self {
        Self {
            cfg,
            wheel: cfg.wheel_torque_curves(),
            mode,
        }
    }

    pub fn wheel_torque_curves(&self) -> &WheelTorqueCurves {
        &self.wheel
    }

    pub fn simulate(&self, cycle: &DriveCycle, grade: GradeProfile<'_>) -> Result<Trace, SimError> {
        cycle.validate()?;
        let p = &self.cfg.params;
        let engine = &self.cfg.engine;
        let refs = &self.cfg.reference;
        let accel = cycle.acceleration();
        let mut trace = Trace::with_dynamics(cycle.name.clone(), cycle.len());
        let mut gear: u8 = 1;

        for (i, (&t, &v)) in cycle.t.iter().zip(&cycle.v).enumerate() {
            let a = accel[i];
            let theta = grade(t);

            // shift decision on the pedal demanded in the current gear
            let demand = p.wheel_force(v, a, theta, gear)?;
            let pedal_now = self.wheel.pedal(v, demand * p.r_tire);
            gear = self.cfg.shift.select_gear(gear, v, pedal_now);
            gear = self.wheel.kickdown(p, v, a, theta, gear)?;

            let force = p.wheel_force(v, a, theta, gear)?;
            let pedal = self.wheel.pedal(v, force * p.r_tire);

            let step = if v < STANDSTILL_SPEED {
                Step {
                    t,
                    v,
                    a,
                    grade: theta,
                    gear,
                    engine_speed: p.n_min,
                    engine_torque: engine.min_torque,
                    pedal,
                    fuel: engine.idle_fuel,
                    flagged: false,
                }
            } else {
                let ratio = p.gear_ratio(gear)?;
                let n_demand = p.output_speed(v) * ratio;
                let speed = n_demand.clamp(p.n_min, p.n_max);
                let mut torque = force * p.r_tire / (p.final_drive * ratio * p.efficiency);
                if gear == 1 && self.mode == SimMode::Base {
                    torque += refs.torque_correction.eval(a);
                }
                let t_max = self.cfg.shift.max_torque.eval(speed);
                let flagged = torque > t_max || n_demand > p.n_max;
                let torque = torque.clamp(engine.min_torque, t_max);
                let fuel_cut = v > refs.fuel_cut_speed && force < refs.fuel_cut_force;
                let fuel = if fuel_cut {
                    0.0
                } else {
                    engine.fuel_rate(speed, torque)
                };
                Step {
                    t,
                    v,
                    a,
                    grade: theta,
                    gear,
                    engine_speed: speed,
                    engine_torque: torque,
                    pedal,
                    fuel,
                    flagged,
                }
            };
            trace.push(step);
        }
        Ok(trace)
    }
}

/// Simulate `cycle` with the reference powertrain.
pub fn simulate(
    cycle: &DriveCycle,
    grade: GradeProfile<'_>,
    cfg: &VehicleConfig,
    mode: SimMode,
) -> Result<Trace, SimError> {
    ReferencePowertrain::new(cfg, mode).simulate(cycle, grade)
}
