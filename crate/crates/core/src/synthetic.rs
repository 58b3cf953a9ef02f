//! Deterministic drive cycles and seeded dynamometer logs for tests, demos
//! and the shipped data set.
//!
//! The three cycles are built from speed waypoints joined by half-cosine
//! ramps, sampled at 1 Hz. They imitate the character of a highway cycle, an
//! aggressive cycle and a mixed urban/extra-urban cycle but are not copies of
//! any regulatory cycle.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use crate::cycle::{DriveCycle, DEFAULT_DT};
use crate::dyno::{DynoLog, DynoRow};
use crate::reference::{self, SimError, SimMode};
use crate::units::{mps_to_kph, radps_to_rpm};
use crate::vehicle::VehicleConfig;

#[derive(Debug, Clone, Copy)]
enum Seg {
    /// Hold the current speed for `duration` s, with a slow sinusoidal
    /// wobble of the given amplitude (m/s).
    Hold(f64, f64),
    /// Half-cosine ramp to `speed` (m/s) over `duration` s.
    Ramp(f64, f64),
}

use Seg::{Hold, Ramp};

fn build(name: &str, segs: &[Seg]) -> DriveCycle {
    let mut t = vec![0.0];
    let mut v = vec![0.0];
    let mut now = 0.0_f64;
    let mut speed = 0.0_f64;
    for seg in segs {
        match *seg {
            Hold(duration, wobble) => {
                let n = duration.round() as usize;
                for k in 1..=n {
                    let phase = std::f64::consts::TAU * k as f64 / 30.0;
                    // sin(π k / n) envelope keeps the ends at the held speed
                    let env = (std::f64::consts::PI * k as f64 / n as f64).sin();
                    t.push(now + k as f64);
                    v.push((speed + wobble * env * phase.sin()).max(0.0));
                }
                now += n as f64;
            }
            Ramp(target, duration) => {
                let n = duration.round() as usize;
                for k in 1..=n {
                    let s = 0.5 - 0.5 * (std::f64::consts::PI * k as f64 / n as f64).cos();
                    t.push(now + k as f64);
                    v.push(speed + (target - speed) * s);
                }
                now += n as f64;
                speed = target;
            }
        }
    }
    DriveCycle::new(name, t, v).expect("synthetic cycle is valid")
}

/// Steady highway driving, about 13 minutes.
pub fn cruise_cycle() -> DriveCycle {
    build(
        "cruise",
        &[
            Hold(10.0, 0.0),
            Ramp(20.0, 30.0),
            Hold(60.0, 0.3),
            Ramp(24.0, 20.0),
            Hold(80.0, 0.3),
            Ramp(17.0, 25.0),
            Hold(60.0, 0.3),
            Ramp(26.0, 30.0),
            Hold(100.0, 0.4),
            Ramp(21.0, 20.0),
            Hold(60.0, 0.3),
            Ramp(25.0, 15.0),
            Hold(80.0, 0.3),
            Ramp(19.0, 25.0),
            Hold(50.0, 0.3),
            Ramp(23.0, 20.0),
            Hold(60.0, 0.3),
            Ramp(0.0, 40.0),
            Hold(10.0, 0.0),
        ],
    )
}

/// Hard accelerations and braking at high speed, about 10 minutes.
pub fn aggressive_cycle() -> DriveCycle {
    build(
        "aggressive",
        &[
            Hold(5.0, 0.0),
            Ramp(20.0, 12.0),
            Hold(15.0, 0.8),
            Ramp(33.0, 15.0),
            Hold(40.0, 0.8),
            Ramp(25.0, 6.0),
            Hold(20.0, 0.8),
            Ramp(35.0, 12.0),
            Hold(30.0, 0.8),
            Ramp(0.0, 17.0),
            Hold(8.0, 0.0),
            Ramp(15.0, 8.0),
            Hold(10.0, 0.5),
            Ramp(0.0, 7.0),
            Hold(5.0, 0.0),
            Ramp(28.0, 16.0),
            Hold(60.0, 0.8),
            Ramp(12.0, 8.0),
            Hold(10.0, 0.5),
            Ramp(30.0, 12.0),
            Hold(40.0, 0.8),
            Ramp(18.0, 8.0),
            Hold(25.0, 0.6),
            Ramp(31.0, 12.0),
            Hold(50.0, 0.8),
            Ramp(0.0, 16.0),
            Hold(10.0, 0.0),
        ],
    )
}

/// Urban stop-and-go phases followed by suburban and motorway phases,
/// about 15 minutes.
pub fn mixed_cycle() -> DriveCycle {
    let mut segs = vec![Hold(12.0, 0.0)];
    // urban: short trips with stops
    for &(peak, up, hold, down, stop) in &[
        (6.0, 8.0, 6.0, 6.0, 10.0),
        (9.0, 10.0, 15.0, 8.0, 12.0),
        (12.5, 12.0, 20.0, 10.0, 15.0),
        (7.0, 7.0, 8.0, 6.0, 8.0),
        (13.5, 14.0, 25.0, 11.0, 20.0),
    ] {
        segs.extend([Ramp(peak, up), Hold(hold, 0.4), Ramp(0.0, down), Hold(stop, 0.0)]);
    }
    segs.extend([
        // suburban
        Ramp(14.0, 14.0),
        Hold(30.0, 0.5),
        Ramp(19.0, 12.0),
        Hold(40.0, 0.5),
        Ramp(11.0, 10.0),
        Hold(20.0, 0.4),
        Ramp(20.0, 14.0),
        Hold(50.0, 0.5),
        Ramp(0.0, 18.0),
        Hold(15.0, 0.0),
        // motorway
        Ramp(22.0, 22.0),
        Hold(50.0, 0.5),
        Ramp(30.0, 20.0),
        Hold(80.0, 0.6),
        Ramp(36.0, 20.0),
        Hold(40.0, 0.5),
        Ramp(27.0, 14.0),
        Hold(40.0, 0.5),
        Ramp(0.0, 30.0),
        Hold(12.0, 0.0),
    ]);
    build("mixed", &segs)
}

/// Gentle launch to the top of the speed range and back, covering every gear
/// at light load. Used for map-extraction campaigns.
pub fn sweep_cycle() -> DriveCycle {
    build(
        "sweep",
        &[
            Hold(10.0, 0.0),
            Ramp(10.0, 25.0),
            Hold(20.0, 0.3),
            Ramp(20.0, 25.0),
            Hold(20.0, 0.3),
            Ramp(30.0, 30.0),
            Hold(20.0, 0.3),
            Ramp(40.0, 35.0),
            Hold(30.0, 0.3),
            Ramp(25.0, 20.0),
            Hold(20.0, 0.3),
            Ramp(8.0, 18.0),
            Hold(15.0, 0.3),
            Ramp(0.0, 10.0),
            Hold(10.0, 0.0),
        ],
    )
}

/// The three evaluation cycles.
pub fn standard_cycles() -> Vec<DriveCycle> {
    vec![cruise_cycle(), aggressive_cycle(), mixed_cycle()]
}

/// Knobs for [`generate_dyno_log`].
#[derive(Debug, Clone, PartialEq)]
pub struct DynoNoise {
    /// Gaussian noise on the transmission output speed, rpm.
    pub output_speed_sigma: f64,
    /// Probability that a sample carries a sensor spike.
    pub spike_probability: f64,
    /// Magnitude of a spike, rpm.
    pub spike_rpm: f64,
    pub engine_speed_sigma: f64,
    pub torque_sigma: f64,
    /// Relative noise on the fuel flow.
    pub fuel_rel_sigma: f64,
    /// Coolant temperature at the start of the log, °C.
    pub start_temp: f64,
    /// Thermostat-controlled coolant temperature, °C.
    pub hot_temp: f64,
    /// Warm-up time constant, s.
    pub warmup_tau: f64,
}

impl Default for DynoNoise {
    fn default() -> Self {
        Self {
            output_speed_sigma: 40.0,
            spike_probability: 1e-3,
            spike_rpm: 1800.0,
            engine_speed_sigma: 10.0,
            torque_sigma: 1.0,
            fuel_rel_sigma: 0.02,
            start_temp: 70.0,
            hot_temp: 90.0,
            warmup_tau: 40.0,
        }
    }
}

/// A 10 Hz chassis-dynamometer log of `cycle` driven by the reference
/// powertrain, with sensor noise from a seeded generator.
pub fn generate_dyno_log(
    cycle: &DriveCycle,
    cfg: &VehicleConfig,
    noise: &DynoNoise,
    seed: u64,
) -> Result<DynoLog, SimError> {
    let c = cycle.resample(DEFAULT_DT)?;
    let truth = reference::simulate(&c, &reference::flat, cfg, SimMode::Base)?;
    let d = truth.dynamics.as_ref().expect("reference traces carry dynamics");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let unit = Normal::new(0.0, 1.0).expect("unit normal");
    let mut rows = Vec::with_capacity(truth.len());
    for i in 0..truth.len() {
        let t = truth.t[i];
        let v = truth.v[i];
        let out_rpm = radps_to_rpm(cfg.params.output_speed(v));
        let mut trans_out = out_rpm;
        if v > 0.0 {
            trans_out += noise.output_speed_sigma * unit.sample(&mut rng);
            if rng.random::<f64>() < noise.spike_probability {
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                trans_out += sign * noise.spike_rpm;
            }
        }
        let temp = noise.hot_temp - (noise.hot_temp - noise.start_temp) * (-t / noise.warmup_tau).exp();
        let fuel = (truth.fuel[i] * (1.0 + noise.fuel_rel_sigma * unit.sample(&mut rng))).max(0.0);
        rows.push(DynoRow {
            t,
            v_kph: mps_to_kph(v).round(),
            engine_rpm: radps_to_rpm(d.engine_speed[i]) + noise.engine_speed_sigma * unit.sample(&mut rng),
            engine_torque: d.engine_torque[i] + noise.torque_sigma * unit.sample(&mut rng),
            pedal: d.pedal[i],
            fuel,
            water_temp: temp,
            gear: d.gear[i],
            trans_out_rpm: trans_out,
        });
    }
    Ok(DynoLog {
        name: cycle.name.clone(),
        rows,
    })
}
