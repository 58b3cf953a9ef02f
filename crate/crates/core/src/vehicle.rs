//! Vehicle description shared by the reference simulator and the reduced
//! models: principled constants, the engine fuel map and the shift schedule.
//!
//! The whole description serializes to a single `vehicle.json` document:
//!
//! ```json
//! {
//!   "params":   { "m_vehicle": 1700.0, "m_general": [..], "r_tire": 0.35, ... },
//!   "engine":   { "speed_grid": [..], "torque_grid": [..], "fuel": [[..]], "idle_fuel": 0.2, "min_torque": 12.0 },
//!   "shift":    { "pedal_grid": [..], "upshift": [[..]], "downshift": [[..]], "max_torque": { "x": [..], "y": [..] } },
//!   "reference": { "fuel_cut_speed": 5.0, "fuel_cut_force": 0.0, "torque_correction": { "x": [..], "y": [..] } }
//! }
//! ```

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::interp::{bracket, linspace, Curve, InterpError, Table2D};
use crate::units::{rpm_to_radps, GRAVITY};

#[derive(Debug, thiserror::Error)]
pub enum VehicleError {
    #[error("gear {gear} out of range 1..={n_gears}")]
    GearOutOfRange { gear: u8, n_gears: usize },
    #[error("invalid vehicle parameters: {0}")]
    Invalid(String),
    #[error(transparent)]
    Interp(#[from] InterpError),
    #[error("i/o error on {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("malformed vehicle document: {0}")]
    Json(#[from] serde_json::Error),
}

/// Principled constants of the vehicle, SI units.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleParams {
    /// Vehicle mass, kg.
    pub m_vehicle: f64,
    /// Generalized mass per gear including driveline inertia, kg.
    pub m_general: Vec<f64>,
    /// Tire radius, m.
    pub r_tire: f64,
    /// Final-drive ratio.
    pub final_drive: f64,
    /// Gear ratios, first gear first.
    pub gear_ratios: Vec<f64>,
    /// Aerodynamic road-load coefficient, N·s²/m².
    pub road_load_a: f64,
    /// Rolling road-load coefficient, N·s/m.
    pub road_load_r: f64,
    /// Constant road-load term, N.
    pub road_load_g: f64,
    /// Maximum engine speed, rad/s.
    pub n_max: f64,
    /// Idle / minimum engine speed, rad/s.
    pub n_min: f64,
    /// Driveline efficiency between engine and wheels.
    #[serde(default = "default_efficiency")]
    pub efficiency: f64,
}

fn default_efficiency() -> f64 {
    0.92
}

impl VehicleParams {
    pub fn n_gears(&self) -> usize {
        self.gear_ratios.len()
    }

    pub fn validate(&self) -> Result<(), VehicleError> {
        let bad = |msg: &str| Err(VehicleError::Invalid(msg.to_string()));
        if !(self.m_vehicle > 0.0 && self.r_tire > 0.0 && self.final_drive > 0.0) {
            return bad("m_vehicle, r_tire and final_drive must be positive");
        }
        if self.gear_ratios.is_empty() || self.gear_ratios.len() > u8::MAX as usize {
            return bad("gear_ratios must list between 1 and 255 gears");
        }
        if self.m_general.len() != self.gear_ratios.len() {
            return bad("m_general and gear_ratios must have one entry per gear");
        }
        if self.m_general.iter().any(|&m| !(m > 0.0)) {
            return bad("generalized masses must be positive");
        }
        if self.gear_ratios.iter().any(|&g| !(g > 0.0))
            || self.gear_ratios.windows(2).any(|w| !(w[1] < w[0]))
        {
            return bad("gear ratios must be positive and strictly decreasing");
        }
        if !(self.n_max > self.n_min && self.n_min > 0.0) {
            return bad("engine speed limits must satisfy n_max > n_min > 0");
        }
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return bad("driveline efficiency must be in (0, 1]");
        }
        Ok(())
    }

    fn gear_index(&self, gear: u8) -> Result<usize, VehicleError> {
        if gear == 0 || gear as usize > self.n_gears() {
            Err(VehicleError::GearOutOfRange {
                gear,
                n_gears: self.n_gears(),
            })
        } else {
            Ok(gear as usize - 1)
        }
    }

    pub fn gear_ratio(&self, gear: u8) -> Result<f64, VehicleError> {
        Ok(self.gear_ratios[self.gear_index(gear)?])
    }

    pub fn generalized_mass(&self, gear: u8) -> Result<f64, VehicleError> {
        Ok(self.m_general[self.gear_index(gear)?])
    }

    /// Resistive force `R_g + R_r v + R_a v²`. Negative speeds are treated as 0.
    pub fn road_load(&self, v: f64) -> f64 {
        let v = v.max(0.0);
        self.road_load_g + self.road_load_r * v + self.road_load_a * v * v
    }

    /// Tractive force required at the wheels in `gear`.
    pub fn wheel_force(&self, v: f64, a: f64, grade: f64, gear: u8) -> Result<f64, VehicleError> {
        let m = self.generalized_mass(gear)?;
        Ok(m * a + self.road_load(v) + self.m_vehicle * GRAVITY * grade.sin())
    }

    /// Transmission output shaft speed, rad/s.
    pub fn output_speed(&self, v: f64) -> f64 {
        v.max(0.0) * self.final_drive / self.r_tire
    }

    /// Overall ratio engine → wheel in `gear`.
    pub fn overall_ratio(&self, gear: u8) -> Result<f64, VehicleError> {
        Ok(self.gear_ratio(gear)? * self.final_drive)
    }

    /// Highest speed reachable in top gear at `n_max`.
    pub fn top_speed(&self) -> f64 {
        let top = *self.gear_ratios.last().expect("validated");
        self.n_max * self.r_tire / (self.final_drive * top)
    }
}

/// Tabulated engine fuel rate over engine speed and torque.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EngineFuelMap {
    /// rad/s, ascending.
    pub speed_grid: Vec<f64>,
    /// N·m, ascending.
    pub torque_grid: Vec<f64>,
    /// g/s, `fuel[i][j]` at `speed_grid[i]`, `torque_grid[j]`.
    pub fuel: Vec<Vec<f64>>,
    /// Fuel rate while idling at standstill, g/s.
    pub idle_fuel: f64,
    /// Minimum (idle) engine torque, N·m.
    pub min_torque: f64,
}

/// Coefficients of a Willans-line engine: chemical power
/// `k_power·N·T + k_friction·N + k_const` (W), divided by the fuel heating value.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WillansLine {
    pub k_power: f64,
    pub k_friction: f64,
    pub k_const: f64,
    /// Lower heating value, J/g.
    pub lhv: f64,
}

impl WillansLine {
    pub fn fuel_rate(&self, speed: f64, torque: f64) -> f64 {
        ((self.k_power * speed * torque + self.k_friction * speed + self.k_const) / self.lhv).max(0.0)
    }
}

impl EngineFuelMap {
    pub fn from_willans(
        line: &WillansLine,
        speed_grid: Vec<f64>,
        torque_grid: Vec<f64>,
        idle_fuel: f64,
        min_torque: f64,
    ) -> Self {
        let fuel = speed_grid
            .iter()
            .map(|&n| torque_grid.iter().map(|&t| line.fuel_rate(n, t)).collect())
            .collect();
        Self {
            speed_grid,
            torque_grid,
            fuel,
            idle_fuel,
            min_torque,
        }
    }

    fn table(&self) -> Table2D {
        Table2D {
            x: self.speed_grid.clone(),
            y: self.torque_grid.clone(),
            values: self.fuel.clone(),
        }
    }

    pub fn validate(&self) -> Result<(), VehicleError> {
        self.table().validate()?;
        if self.fuel.iter().flatten().any(|&f| !(f >= 0.0)) {
            return Err(VehicleError::Invalid("fuel map must be non-negative".into()));
        }
        if self
            .fuel
            .iter()
            .any(|row| row.windows(2).any(|w| w[1] < w[0]))
        {
            return Err(VehicleError::Invalid(
                "fuel map must be non-decreasing in torque".into(),
            ));
        }
        if !(self.idle_fuel > 0.0) {
            return Err(VehicleError::Invalid("idle fuel must be positive".into()));
        }
        Ok(())
    }

    /// Bilinear interpolation, clamped to the grid.
    pub fn fuel_rate(&self, speed: f64, torque: f64) -> f64 {
        let (nx, ny) = (self.speed_grid.len(), self.torque_grid.len());
        let (i, wx) = bracket(&self.speed_grid, speed);
        let (j, wy) = bracket(&self.torque_grid, torque);
        let i1 = (i + 1).min(nx - 1);
        let j1 = (j + 1).min(ny - 1);
        let f = &self.fuel;
        let lo = f[i][j] + wy * (f[i][j1] - f[i][j]);
        let hi = f[i1][j] + wy * (f[i1][j1] - f[i1][j]);
        (lo + wx * (hi - lo)).max(0.0)
    }
}

/// Pedal-dependent shift schedule and the engine torque limit.
///
/// Boundary `b` (1-based) separates gear `b` from gear `b + 1`:
/// `upshift[b-1][p]` is the speed above which gear `b` shifts up at pedal
/// `pedal_grid[p]`, `downshift[b-1][p]` the speed below which gear `b + 1`
/// shifts down.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GearShiftMaps {
    /// Pedal positions, %, ascending.
    pub pedal_grid: Vec<f64>,
    /// m/s.
    pub upshift: Vec<Vec<f64>>,
    /// m/s.
    pub downshift: Vec<Vec<f64>>,
    /// Maximum engine torque (N·m) over engine speed (rad/s).
    pub max_torque: Curve,
}

impl GearShiftMaps {
    pub fn boundaries(&self) -> usize {
        self.upshift.len()
    }

    pub fn validate(&self, n_gears: usize) -> Result<(), VehicleError> {
        Curve::new(self.pedal_grid.clone(), vec![0.0; self.pedal_grid.len()])?;
        self.max_torque.validate()?;
        let b = n_gears.saturating_sub(1);
        if self.upshift.len() != b || self.downshift.len() != b {
            return Err(VehicleError::Invalid(format!(
                "shift maps need {b} boundaries for {n_gears} gears"
            )));
        }
        for (k, (up, down)) in self.upshift.iter().zip(&self.downshift).enumerate() {
            if up.len() != self.pedal_grid.len() || down.len() != self.pedal_grid.len() {
                return Err(VehicleError::Invalid(format!(
                    "boundary {} does not match the pedal grid",
                    k + 1
                )));
            }
            // both curves are piecewise linear in pedal, so checking the
            // breakpoints covers the whole range
            if up.iter().zip(down).any(|(u, d)| !(d < u)) {
                return Err(VehicleError::Invalid(format!(
                    "empty hysteresis band at boundary {}",
                    k + 1
                )));
            }
        }
        Ok(())
    }

    fn along_pedal(&self, row: &[f64], pedal: f64) -> f64 {
        let (i, w) = bracket(&self.pedal_grid, pedal);
        if row.len() == 1 {
            return row[0];
        }
        row[i] + w * (row[i + 1] - row[i])
    }

    /// `V_upshift(pedal, b)`.
    pub fn upshift_speed(&self, pedal: f64, boundary: usize) -> f64 {
        self.along_pedal(&self.upshift[boundary - 1], pedal)
    }

    /// `V_downshift(pedal, b)`.
    pub fn downshift_speed(&self, pedal: f64, boundary: usize) -> f64 {
        self.along_pedal(&self.downshift[boundary - 1], pedal)
    }

    /// Hysteretic gear choice: at most one shift per call, strict thresholds.
    pub fn select_gear(&self, prev_gear: u8, v: f64, pedal: f64) -> u8 {
        let top = self.boundaries() as u8 + 1;
        let prev = prev_gear.clamp(1, top);
        if prev < top && v > self.upshift_speed(pedal, prev as usize) {
            prev + 1
        } else if prev > 1 && v < self.downshift_speed(pedal, prev as usize - 1) {
            prev - 1
        } else {
            prev
        }
    }

    /// Stateless upshift-map gear `K_upshift(pedal, v)`: the lowest gear
    /// whose upshift threshold has not been passed.
    pub fn upshift_gear(&self, pedal: f64, v: f64) -> u8 {
        let passed = (1..=self.boundaries())
            .filter(|&b| v > self.upshift_speed(pedal, b))
            .count();
        1 + passed as u8
    }
}

/// Maximum wheel torque, overall and per gear, tabulated over vehicle speed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WheelTorqueCurves {
    /// `T_wmax(v)`, N·m.
    pub overall: Curve,
    /// `T_wmax(v, k)`, N·m; zero where the gear would overspeed the engine.
    pub per_gear: Vec<Curve>,
}

impl WheelTorqueCurves {
    pub fn derive(params: &VehicleParams, max_torque: &Curve) -> Self {
        let top = params.top_speed();
        let speeds = linspace(0.0, top * 1.05, 241);
        let per_gear: Vec<Curve> = (1..=params.n_gears() as u8)
            .map(|gear| {
                let ratio = params.overall_ratio(gear).expect("gear in range");
                let y = speeds
                    .iter()
                    .map(|&v| {
                        let n = params.output_speed(v) * params.gear_ratio(gear).unwrap();
                        if n > params.n_max {
                            0.0
                        } else {
                            max_torque.eval(n.max(params.n_min)) * ratio * params.efficiency
                        }
                    })
                    .collect();
                Curve {
                    x: speeds.clone(),
                    y,
                }
            })
            .collect();
        let overall_y = (0..speeds.len())
            .map(|i| per_gear.iter().map(|c| c.y[i]).fold(0.0, f64::max))
            .collect();
        Self {
            overall: Curve {
                x: speeds,
                y: overall_y,
            },
            per_gear,
        }
    }

    pub fn max(&self, v: f64) -> f64 {
        self.overall.eval(v)
    }

    pub fn max_in_gear(&self, v: f64, gear: u8) -> f64 {
        self.per_gear
            .get(gear as usize - 1)
            .map_or(0.0, |c| c.eval(v))
    }

    /// Kickdown: step down from `gear` while the demanded wheel force exceeds
    /// what the gear can deliver and the next lower gear can deliver more.
    pub fn kickdown(
        &self,
        params: &VehicleParams,
        v: f64,
        a: f64,
        grade: f64,
        mut gear: u8,
    ) -> Result<u8, VehicleError> {
        while gear > 1 {
            let demand = params.wheel_force(v, a, grade, gear)? * params.r_tire;
            let here = self.max_in_gear(v, gear);
            if demand <= here || self.max_in_gear(v, gear - 1) <= here {
                break;
            }
            gear -= 1;
        }
        Ok(gear)
    }

    /// Pedal position (%) needed to deliver `wheel_torque` at speed `v`.
    pub fn pedal(&self, v: f64, wheel_torque: f64) -> f64 {
        let max = self.max(v);
        if max <= 0.0 {
            return 100.0;
        }
        (100.0 * wheel_torque / max).clamp(0.0, 100.0)
    }
}

/// Behaviour specific to the reference simulator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReferenceSettings {
    /// Fuel is cut above this speed (m/s) ...
    pub fuel_cut_speed: f64,
    /// ... when the wheel force (N) is below this value.
    pub fuel_cut_force: f64,
    /// Open-torque-converter torque added in first gear, N·m over m/s².
    pub torque_correction: Curve,
}

/// Complete `vehicle.json` document.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VehicleConfig {
    pub params: VehicleParams,
    pub engine: EngineFuelMap,
    pub shift: GearShiftMaps,
    pub reference: ReferenceSettings,
}

impl VehicleConfig {
    pub fn validate(&self) -> Result<(), VehicleError> {
        self.params.validate()?;
        self.engine.validate()?;
        self.shift.validate(self.params.n_gears())?;
        self.reference.torque_correction.validate()?;
        Ok(())
    }

    pub fn wheel_torque_curves(&self) -> WheelTorqueCurves {
        WheelTorqueCurves::derive(&self.params, &self.shift.max_torque)
    }

    pub fn load(path: &Path) -> Result<Self, VehicleError> {
        let text = std::fs::read_to_string(path).map_err(|source| VehicleError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let cfg: VehicleConfig = serde_json::from_str(&text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("vehicle config serializes")
    }

    /// Willans coefficients behind [`VehicleConfig::midsize_suv`]'s engine map.
    pub fn midsize_suv_engine() -> WillansLine {
        WillansLine {
            k_power: 1.0 / 0.37,
            k_friction: 14.0,
            k_const: 400.0,
            lhv: 43_000.0,
        }
    }

    /// A conventional six-speed midsize SUV used as the shipped reference.
    pub fn midsize_suv() -> Self {
        let params = VehicleParams {
            m_vehicle: 1700.0,
            m_general: vec![1860.0, 1785.0, 1755.0, 1742.0, 1735.0, 1730.0],
            r_tire: 0.35,
            final_drive: 3.315,
            gear_ratios: vec![4.6, 2.7, 1.8, 1.35, 1.0, 0.78],
            road_load_a: 0.45,
            road_load_r: 3.5,
            road_load_g: 140.0,
            n_max: rpm_to_radps(6500.0),
            n_min: rpm_to_radps(700.0),
            efficiency: 0.92,
        };
        let speed_grid = linspace(params.n_min, params.n_max, 24);
        let torque_grid = linspace(0.0, 260.0, 27);
        let engine = EngineFuelMap::from_willans(
            &Self::midsize_suv_engine(),
            speed_grid,
            torque_grid,
            0.20,
            12.0,
        );
        let max_torque = Curve::new(
            [700.0, 1500.0, 2500.0, 4000.0, 5500.0, 6500.0]
                .iter()
                .map(|&r| rpm_to_radps(r))
                .collect(),
            vec![150.0, 215.0, 240.0, 248.0, 236.0, 205.0],
        )
        .expect("increasing");
        let shift = GearShiftMaps {
            pedal_grid: vec![0.0, 25.0, 50.0, 75.0, 100.0],
            upshift: vec![
                vec![3.5, 5.0, 7.0, 9.0, 11.0],
                vec![7.0, 9.5, 12.5, 16.0, 19.0],
                vec![11.0, 14.0, 18.0, 23.0, 27.0],
                vec![14.5, 18.0, 23.0, 29.0, 34.0],
                vec![18.0, 22.0, 28.0, 35.0, 40.0],
            ],
            downshift: vec![
                vec![2.0, 2.5, 3.5, 5.0, 6.0],
                vec![5.0, 6.0, 7.5, 10.0, 12.0],
                vec![8.5, 10.0, 12.5, 16.0, 19.0],
                vec![11.5, 13.5, 16.5, 21.0, 25.0],
                vec![15.0, 17.0, 21.0, 26.0, 30.0],
            ],
            max_torque,
        };
        let reference = ReferenceSettings {
            fuel_cut_speed: 5.0,
            fuel_cut_force: 0.0,
            torque_correction: Curve::constant(0.0),
        };
        let cfg = Self {
            params,
            engine,
            shift,
            reference,
        };
        debug_assert!(cfg.validate().is_ok());
        cfg
    }
}
