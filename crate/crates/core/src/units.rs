//! Unit conversions used at I/O boundaries. Everything inside the crate is SI:
//! m/s, m/s², rad/s, N·m, g/s.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

/// Standard gravity, m/s².
pub const GRAVITY: f64 = 9.81;

pub const KPH_PER_MPS: f64 = 3.6;
pub const MPH_PER_MPS: f64 = 3600.0 / 1609.344;

pub fn kph_to_mps(kph: f64) -> f64 {
    kph / KPH_PER_MPS
}

pub fn mps_to_kph(mps: f64) -> f64 {
    mps * KPH_PER_MPS
}

pub fn rpm_to_radps(rpm: f64) -> f64 {
    rpm * 2.0 * PI / 60.0
}

pub fn radps_to_rpm(radps: f64) -> f64 {
    radps * 60.0 / (2.0 * PI)
}

/// Speed unit tag accepted by the cycle loader.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SpeedUnit {
    Mps,
    Kph,
    Mph,
}

impl SpeedUnit {
    pub fn to_mps(self, value: f64) -> f64 {
        match self {
            SpeedUnit::Mps => value,
            SpeedUnit::Kph => value / KPH_PER_MPS,
            SpeedUnit::Mph => value / MPH_PER_MPS,
        }
    }

    pub fn from_mps(self, value: f64) -> f64 {
        match self {
            SpeedUnit::Mps => value,
            SpeedUnit::Kph => value * KPH_PER_MPS,
            SpeedUnit::Mph => value * MPH_PER_MPS,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("unknown speed unit `{0}` (expected mps, kph or mph)")]
pub struct UnknownUnit(pub String);

impl FromStr for SpeedUnit {
    type Err = UnknownUnit;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "mps" | "m/s" => Ok(SpeedUnit::Mps),
            "kph" | "km/h" | "kmh" => Ok(SpeedUnit::Kph),
            "mph" => Ok(SpeedUnit::Mph),
            _ => Err(UnknownUnit(s.to_string())),
        }
    }
}

impl fmt::Display for SpeedUnit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SpeedUnit::Mps => "mps",
            SpeedUnit::Kph => "kph",
            SpeedUnit::Mph => "mph",
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn speed_unit_roundtrip() {
        for unit in [SpeedUnit::Mps, SpeedUnit::Kph, SpeedUnit::Mph] {
            let v = 17.25;
            assert!((unit.to_mps(unit.from_mps(v)) - v).abs() < 1e-12);
            assert_eq!(unit.to_string().parse::<SpeedUnit>().unwrap(), unit);
        }
        assert!((SpeedUnit::Kph.to_mps(10.0) - 2.777_777_777_8).abs() < 1e-9);
        assert!((SpeedUnit::Mph.to_mps(60.0) - 26.8224).abs() < 1e-9);
    }

    #[test]
    fn unknown_unit_rejected() {
        assert!("furlong/fortnight".parse::<SpeedUnit>().is_err());
    }

    #[test]
    fn rpm_conversion() {
        assert!((rpm_to_radps(60.0) - 2.0 * PI).abs() < 1e-12);
        assert!((radps_to_rpm(rpm_to_radps(3210.0)) - 3210.0).abs() < 1e-9);
    }
}
