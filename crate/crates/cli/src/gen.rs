//! Regenerates the shipped example data set.

use std::path::Path;

use fuelmodel::interp::Curve;
use fuelmodel::synthetic::{self, DynoNoise};
use fuelmodel::units::SpeedUnit;
use fuelmodel::vehicle::VehicleConfig;

use crate::artifacts;

/// First-gear converter torque built into the shipped vehicle, N·m.
pub const SHIPPED_TORQUE_CORRECTION: f64 = 5.0;

pub fn shipped_vehicle() -> VehicleConfig {
    let mut cfg = VehicleConfig::midsize_suv();
    cfg.reference.torque_correction = Curve::constant(SHIPPED_TORQUE_CORRECTION);
    cfg
}

/// Write `vehicle.json`, the cycles (km/h) and one noisy dynamometer log.
pub fn generate(dir: &Path, seed: u64) -> anyhow::Result<()> {
    let cfg = shipped_vehicle();
    artifacts::write_text(&dir.join("vehicle.json"), &(cfg.to_json() + "\n"))?;
    let mut cycles = synthetic::standard_cycles();
    cycles.push(synthetic::sweep_cycle());
    for c in &cycles {
        let path = dir.join("cycles").join(format!("{}.csv", c.name));
        c.write_csv(artifacts::create(&path)?, SpeedUnit::Kph)?;
    }
    let log = synthetic::generate_dyno_log(&synthetic::aggressive_cycle(), &cfg, &DynoNoise::default(), seed)?;
    let path = dir.join("dyno").join(format!("{}_dyno.csv", log.name));
    log.write_csv(artifacts::create(&path)?)?;
    Ok(())
}
