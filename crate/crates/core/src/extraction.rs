//! Virtual-dynamometer campaign and the extraction of constants and maps
//! from its traces.

use serde::{Deserialize, Serialize};

use crate::cycle::{DriveCycle, DEFAULT_DT};
use crate::interp::Curve;
use crate::poly::{fit_poly2d, FitError, PolyMap2D, DEFAULT_MAX_TOTAL_DEGREE};
use crate::reference::{self, SimError, SimMode, STANDSTILL_SPEED};
use crate::stats::{mean, median, percentile};
use crate::trace::Trace;
use crate::vehicle::{VehicleConfig, VehicleParams};

#[derive(Debug, thiserror::Error)]
pub enum ExtractError {
    #[error("no standstill steps with steady torque")]
    NoIdleData,
    #[error("no fuel-cut steps")]
    NoFuelCutData,
    #[error("no downshift events")]
    NoDownshiftData,
    #[error("no usable first-gear steps")]
    NoFirstGearData,
    #[error("gear {gear} has {samples} usable samples, need {required}")]
    InsufficientGearData {
        gear: u8,
        samples: usize,
        required: usize,
    },
    #[error("at least one cycle is required")]
    NoCycles,
    #[error("traces lack engine signals")]
    MissingDynamics,
    #[error("fit: {0}")]
    Fit(#[from] FitError),
    #[error(transparent)]
    Sim(#[from] SimError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftEvent {
    pub cycle: String,
    pub t: f64,
    pub from_gear: u8,
    pub to_gear: u8,
    pub v: f64,
    pub pedal: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VcdDataset {
    pub mode: SimMode,
    /// Sorted by cycle name so that results do not depend on input order.
    pub traces: Vec<Trace>,
    pub events: Vec<ShiftEvent>,
}

/// Gear changes in `trace`, one event per step whose gear differs from the
/// previous step's.
pub fn detect_events(trace: &Trace) -> Vec<ShiftEvent> {
    let Some(d) = &trace.dynamics else {
        return Vec::new();
    };
    d.gear
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[0] != w[1])
        .map(|(i, w)| ShiftEvent {
            cycle: trace.name.clone(),
            t: trace.t[i + 1],
            from_gear: w[0],
            to_gear: w[1],
            v: trace.v[i + 1],
            pedal: d.pedal[i + 1],
        })
        .collect()
}

impl VcdDataset {
    pub fn from_traces(mode: SimMode, mut traces: Vec<Trace>) -> Self {
        traces.sort_by(|a, b| a.name.cmp(&b.name));
        let events = traces.iter().flat_map(detect_events).collect();
        Self { mode, traces, events }
    }

    fn steps(&self) -> impl Iterator<Item = (&Trace, usize)> {
        self.traces.iter().flat_map(|tr| (0..tr.len()).map(move |i| (tr, i)))
    }
}

/// Simulate every cycle on flat ground at the default step.
pub fn run_vcd(cfg: &VehicleConfig, cycles: &[DriveCycle], mode: SimMode) -> Result<VcdDataset, ExtractError> {
    if cycles.is_empty() {
        return Err(ExtractError::NoCycles);
    }
    let mut traces = Vec::with_capacity(cycles.len());
    for c in cycles {
        let c = c.resample(DEFAULT_DT).map_err(SimError::from)?;
        traces.push(reference::simulate(&c, &reference::flat, cfg, mode)?);
    }
    Ok(VcdDataset::from_traces(mode, traces))
}

/// Torque-rate threshold for steady idling, N·m/s.
const IDLE_TORQUE_RATE: f64 = 0.01;

/// `(T_min, f_idle)`: mean torque and fuel over standstill steps whose
/// torque is steady for one second either side.
pub fn extract_idle_constants(ds: &VcdDataset) -> Result<(f64, f64), ExtractError> {
    let mut torque = Vec::new();
    let mut fuel = Vec::new();
    for tr in &ds.traces {
        let d = tr.dynamics.as_ref().ok_or(ExtractError::MissingDynamics)?;
        let rate = crate::cycle::central_difference(&tr.t, &d.engine_torque);
        for i in 0..tr.len() {
            if tr.v[i] >= STANDSTILL_SPEED {
                continue;
            }
            let (t0, t1) = (tr.t[i] - 1.0, tr.t[i] + 1.0);
            if t0 < tr.t[0] || t1 > tr.t[tr.len() - 1] {
                continue;
            }
            let lo = tr.t.partition_point(|&t| t < t0 - 1e-9);
            let hi = tr.t.partition_point(|&t| t <= t1 + 1e-9);
            if (lo..hi).all(|j| rate[j].abs() < IDLE_TORQUE_RATE) {
                torque.push(d.engine_torque[i]);
                fuel.push(tr.fuel[i]);
            }
        }
    }
    match (mean(&torque), mean(&fuel)) {
        (Some(t), Some(f)) => Ok((t, f)),
        _ => Err(ExtractError::NoIdleData),
    }
}

/// `(v_c, F_wc)`: 1st percentile of speed and 95th percentile of wheel force
/// over fuel-cut steps.
pub fn extract_fuel_cut_thresholds(ds: &VcdDataset, params: &VehicleParams) -> Result<(f64, f64), ExtractError> {
    let mut speeds = Vec::new();
    let mut forces = Vec::new();
    for (tr, i) in ds.steps() {
        if tr.fuel[i] == 0.0 && tr.v[i] > STANDSTILL_SPEED {
            let gear = tr.gears().ok_or(ExtractError::MissingDynamics)?[i];
            speeds.push(tr.v[i]);
            forces.push(
                params
                    .wheel_force(tr.v[i], tr.a[i], tr.grade[i], gear)
                    .map_err(SimError::from)?,
            );
        }
    }
    match (percentile(&speeds, 0.01), percentile(&forces, 0.95)) {
        (Some(v), Some(f)) => Ok((v, f)),
        _ => Err(ExtractError::NoFuelCutData),
    }
}

/// Downshift cutoff speeds per boundary: `cutoffs[b - 1]` is the speed below
/// which gear `b + 1` drops to `b`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DownshiftMap {
    pub cutoffs: Vec<f64>,
    /// True where no event was observed and the cutoff was filled in.
    pub filled: Vec<bool>,
}

impl DownshiftMap {
    /// Highest gear whose cutoff `v` has reached.
    pub fn gear_for(&self, v: f64) -> u8 {
        1 + self.cutoffs.iter().filter(|&&c| v >= c).count() as u8
    }
}

pub fn extract_downshift_map(ds: &VcdDataset, n_gears: usize) -> Result<DownshiftMap, ExtractError> {
    let b = n_gears.saturating_sub(1);
    let mut per: Vec<Vec<f64>> = vec![Vec::new(); b];
    for e in &ds.events {
        let to = e.to_gear as usize;
        if e.from_gear as usize == to + 1 && to >= 1 && to <= b {
            per[to - 1].push(e.v);
        }
    }
    if per.iter().all(Vec::is_empty) {
        return Err(ExtractError::NoDownshiftData);
    }
    let known: Vec<(usize, f64)> = per
        .iter()
        .enumerate()
        .filter_map(|(k, v)| median(v).map(|m| (k, m)))
        .collect();
    let mut cutoffs = vec![0.0; b];
    let mut filled = vec![false; b];
    for k in 0..b {
        if let Some(&(_, m)) = known.iter().find(|(j, _)| *j == k) {
            cutoffs[k] = m;
            continue;
        }
        filled[k] = true;
        let left = known.iter().rev().find(|(j, _)| *j < k);
        let right = known.iter().find(|(j, _)| *j > k);
        cutoffs[k] = match (left, right) {
            (Some(&(j0, m0)), Some(&(j1, m1))) => m0 + (m1 - m0) * (k - j0) as f64 / (j1 - j0) as f64,
            (Some(&(j0, m0)), None) => {
                let step = known
                    .iter()
                    .rev()
                    .nth(1)
                    .map_or(m0 * 0.5, |&(jp, mp)| (m0 - mp) / (j0 - jp) as f64);
                m0 + step * (k - j0) as f64
            }
            (None, Some(&(j1, m1))) => m1 * (k + 1) as f64 / (j1 + 1) as f64,
            (None, None) => unreachable!("at least one boundary has events"),
        };
    }
    // cutoffs must increase with gear
    for k in 1..b {
        if cutoffs[k] <= cutoffs[k - 1] {
            cutoffs[k] = cutoffs[k - 1] + 0.1;
            filled[k] = true;
        }
    }
    Ok(DownshiftMap { cutoffs, filled })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct MapDegrees {
    pub fuel: (usize, usize),
    pub speed: (usize, usize),
    pub torque: (usize, usize),
    pub max_total: usize,
    /// Minimum usable samples per gear.
    pub min_samples: usize,
}

impl Default for MapDegrees {
    fn default() -> Self {
        Self {
            fuel: (2, 2),
            speed: (1, 1),
            torque: (1, 1),
            max_total: DEFAULT_MAX_TOTAL_DEGREE,
            min_samples: 50,
        }
    }
}

/// Fuel map over engine (speed, torque) and per-gear engine speed and torque
/// maps over (output speed, wheel force).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapSet {
    pub fuel: PolyMap2D,
    pub speed: Vec<PolyMap2D>,
    pub torque: Vec<PolyMap2D>,
}

impl MapSet {
    pub fn speed_map(&self, gear: u8) -> &PolyMap2D {
        &self.speed[gear as usize - 1]
    }

    pub fn torque_map(&self, gear: u8) -> &PolyMap2D {
        &self.torque[gear as usize - 1]
    }
}

pub fn fit_all_maps(ds: &VcdDataset, cfg: &VehicleConfig, degrees: &MapDegrees) -> Result<MapSet, ExtractError> {
    let p = &cfg.params;
    let n_gears = p.n_gears();
    let (mut fn_, mut ft, mut ff) = (Vec::new(), Vec::new(), Vec::new());
    let mut per_gear: Vec<[Vec<f64>; 5]> = (0..n_gears).map(|_| Default::default()).collect();
    for (tr, i) in ds.steps() {
        let d = tr.dynamics.as_ref().ok_or(ExtractError::MissingDynamics)?;
        if tr.v[i] < STANDSTILL_SPEED {
            continue;
        }
        let (n, t, fuel) = (d.engine_speed[i], d.engine_torque[i], tr.fuel[i]);
        if fuel > 0.0 {
            fn_.push(n);
            ft.push(t);
            ff.push(fuel);
        }
        // steps held at a limit carry no information about the maps
        let at_limit = n <= p.n_min || n >= p.n_max || t <= cfg.engine.min_torque || tr.flagged[i];
        if at_limit {
            continue;
        }
        let gear = d.gear[i];
        let force = p.wheel_force(tr.v[i], tr.a[i], tr.grade[i], gear).map_err(SimError::from)?;
        let slot = &mut per_gear[gear as usize - 1];
        slot[0].push(p.output_speed(tr.v[i]));
        slot[1].push(force);
        slot[2].push(n);
        slot[3].push(t);
    }
    let fuel = fit_poly2d(&fn_, &ft, &ff, degrees.fuel, degrees.max_total)?;
    let mut speed = Vec::with_capacity(n_gears);
    let mut torque = Vec::with_capacity(n_gears);
    for (k, slot) in per_gear.iter().enumerate() {
        if slot[0].len() < degrees.min_samples {
            return Err(ExtractError::InsufficientGearData {
                gear: k as u8 + 1,
                samples: slot[0].len(),
                required: degrees.min_samples,
            });
        }
        speed.push(fit_poly2d(&slot[0], &slot[1], &slot[2], degrees.speed, degrees.max_total)?);
        torque.push(fit_poly2d(&slot[0], &slot[1], &slot[3], degrees.torque, degrees.max_total)?);
    }
    Ok(MapSet { fuel, speed, torque })
}

/// Acceleration bins for the first-gear torque correction.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CorrectionBins {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
}

impl Default for CorrectionBins {
    fn default() -> Self {
        Self {
            lo: -3.0,
            hi: 3.0,
            count: 8,
        }
    }
}

/// Mean first-gear torque residual of `ds` against `maps`, per acceleration
/// bin, as a curve over the centers of populated bins.
pub fn extract_torque_correction(
    ds: &VcdDataset,
    cfg: &VehicleConfig,
    maps: &MapSet,
    bins: &CorrectionBins,
) -> Result<Curve, ExtractError> {
    let p = &cfg.params;
    let width = (bins.hi - bins.lo) / bins.count as f64;
    let mut sums = vec![(0.0, 0usize); bins.count];
    for (tr, i) in ds.steps() {
        let d = tr.dynamics.as_ref().ok_or(ExtractError::MissingDynamics)?;
        let (n, t) = (d.engine_speed[i], d.engine_torque[i]);
        if d.gear[i] != 1 || tr.v[i] < STANDSTILL_SPEED || tr.flagged[i] {
            continue;
        }
        if n <= p.n_min || n >= p.n_max || t <= cfg.engine.min_torque {
            continue;
        }
        let a = tr.a[i];
        if a < bins.lo || a > bins.hi {
            continue;
        }
        let k = (((a - bins.lo) / width) as usize).min(bins.count - 1);
        let force = p.wheel_force(tr.v[i], a, tr.grade[i], 1).map_err(SimError::from)?;
        let predicted = maps.torque_map(1).eval(p.output_speed(tr.v[i]), force);
        sums[k].0 += t - predicted;
        sums[k].1 += 1;
    }
    let (x, y): (Vec<f64>, Vec<f64>) = sums
        .iter()
        .enumerate()
        .filter(|(_, s)| s.1 > 0)
        .map(|(k, s)| (bins.lo + (k as f64 + 0.5) * width, s.0 / s.1 as f64))
        .unzip();
    if x.is_empty() {
        return Err(ExtractError::NoFirstGearData);
    }
    Ok(Curve { x, y })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExtractedConstants {
    /// N·m
    pub t_min: f64,
    /// g/s
    pub f_idle: f64,
    /// m/s
    pub v_c: f64,
    /// N
    pub f_wc: f64,
    pub downshift: DownshiftMap,
    /// N·m over m/s²
    pub t_correction: Curve,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Extraction {
    pub constants: ExtractedConstants,
    pub maps: MapSet,
    pub source_cycles: Vec<String>,
}

/// Full campaign: maps and constants from quasi-static (VCD) runs, the
/// first-gear correction from normal runs against those maps.
pub fn extract(
    cfg: &VehicleConfig,
    cycles: &[DriveCycle],
    degrees: &MapDegrees,
    bins: &CorrectionBins,
) -> Result<Extraction, ExtractError> {
    let vcd = run_vcd(cfg, cycles, SimMode::Vcd)?;
    let base = run_vcd(cfg, cycles, SimMode::Base)?;
    extract_from_runs(cfg, &vcd, &base, degrees, bins)
}

/// [`extract`] on runs that were already simulated, e.g. read back from
/// trace files.
pub fn extract_from_runs(
    cfg: &VehicleConfig,
    vcd: &VcdDataset,
    base: &VcdDataset,
    degrees: &MapDegrees,
    bins: &CorrectionBins,
) -> Result<Extraction, ExtractError> {
    let (t_min, f_idle) = extract_idle_constants(vcd)?;
    let (v_c, f_wc) = extract_fuel_cut_thresholds(vcd, &cfg.params)?;
    let downshift = extract_downshift_map(vcd, cfg.params.n_gears())?;
    let maps = fit_all_maps(vcd, cfg, degrees)?;
    let t_correction = extract_torque_correction(base, cfg, &maps, bins)?;
    Ok(Extraction {
        constants: ExtractedConstants {
            t_min,
            f_idle,
            v_c,
            f_wc,
            downshift,
            t_correction,
        },
        maps,
        source_cycles: vcd.traces.iter().map(|t| t.name.clone()).collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::synthetic;

    fn cfg() -> VehicleConfig {
        VehicleConfig::midsize_suv()
    }

    fn campaign() -> Vec<DriveCycle> {
        let mut c = synthetic::standard_cycles();
        c.push(synthetic::sweep_cycle());
        c
    }

    #[test]
    fn standstill_cycle_has_no_events() {
        let c = DriveCycle::new("idle", vec![0.0, 20.0], vec![0.0, 0.0]).unwrap();
        let ds = run_vcd(&cfg(), &[c], SimMode::Vcd).unwrap();
        assert!(ds.events.is_empty());
    }

    #[test]
    fn ramp_upshifts_in_order() {
        let c = DriveCycle::new("ramp", vec![0.0, 60.0], vec![0.0, 30.0]).unwrap();
        let ds = run_vcd(&cfg(), &[c], SimMode::Vcd).unwrap();
        assert!(!ds.events.is_empty());
        for (k, e) in ds.events.iter().enumerate() {
            assert_eq!(e.from_gear as usize, k + 1);
            assert_eq!(e.to_gear as usize, k + 2);
        }
    }

    #[test]
    fn event_count_matches_gear_discontinuities() {
        let ds = run_vcd(&cfg(), &[synthetic::mixed_cycle()], SimMode::Vcd).unwrap();
        let g = ds.traces[0].gears().unwrap();
        let mut changes = 0;
        for i in 1..g.len() {
            if g[i] != g[i - 1] {
                changes += 1;
            }
        }
        assert_eq!(ds.events.len(), changes);
        for e in &ds.events {
            assert_ne!(e.from_gear, e.to_gear);
            assert!(ds.traces[0].t.contains(&e.t));
        }
    }

    #[test]
    fn idle_constants_match_configuration() {
        let cfg = cfg();
        let ds = run_vcd(&cfg, &campaign(), SimMode::Vcd).unwrap();
        let (t_min, f_idle) = extract_idle_constants(&ds).unwrap();
        assert!((f_idle - cfg.engine.idle_fuel).abs() < 1e-6);
        assert!((t_min - cfg.engine.min_torque).abs() < 1e-9);
    }

    #[test]
    fn idle_requires_standstill() {
        let c = DriveCycle::new("fast", vec![0.0, 30.0], vec![6.0, 6.0]).unwrap();
        let ds = run_vcd(&cfg(), &[c], SimMode::Vcd).unwrap();
        assert!(matches!(extract_idle_constants(&ds), Err(ExtractError::NoIdleData)));
        assert!(matches!(
            extract_fuel_cut_thresholds(&ds, &cfg().params),
            Err(ExtractError::NoFuelCutData)
        ));
    }

    #[test]
    fn idle_mean_independent_of_segment_length() {
        let short = DriveCycle::new("a", vec![0.0, 5.0], vec![0.0, 0.0]).unwrap();
        let long = DriveCycle::new("b", vec![0.0, 50.0], vec![0.0, 0.0]).unwrap();
        let cfg = cfg();
        let a = extract_idle_constants(&run_vcd(&cfg, std::slice::from_ref(&short), SimMode::Vcd).unwrap()).unwrap();
        let b = extract_idle_constants(&run_vcd(&cfg, &[short, long], SimMode::Vcd).unwrap()).unwrap();
        assert!((a.0 - b.0).abs() < 1e-12 && (a.1 - b.1).abs() < 1e-12);
    }

    #[test]
    fn fuel_cut_thresholds_near_configuration() {
        let cfg = cfg();
        let ds = run_vcd(&cfg, &campaign(), SimMode::Vcd).unwrap();
        let (v_c, f_wc) = extract_fuel_cut_thresholds(&ds, &cfg.params).unwrap();
        assert!(v_c > cfg.reference.fuel_cut_speed);
        assert!(v_c < cfg.reference.fuel_cut_speed + 2.0, "v_c = {v_c}");
        assert!(f_wc < cfg.reference.fuel_cut_force);
    }

    #[test]
    fn downshift_median_and_fill() {
        let ev = |from: u8, v: f64| ShiftEvent {
            cycle: "x".into(),
            t: 0.0,
            from_gear: from,
            to_gear: from - 1,
            v,
            pedal: 0.0,
        };
        let ds = VcdDataset {
            mode: SimMode::Vcd,
            traces: vec![],
            events: vec![ev(2, 4.0), ev(2, 5.0), ev(2, 6.0), ev(4, 12.0)],
        };
        let m = extract_downshift_map(&ds, 4).unwrap();
        assert_eq!(m.cutoffs[0], 5.0);
        assert_eq!(m.cutoffs[2], 12.0);
        assert!(m.filled[1] && !m.filled[0] && !m.filled[2]);
        assert!((m.cutoffs[1] - 8.5).abs() < 1e-12);
        let empty = VcdDataset {
            mode: SimMode::Vcd,
            traces: vec![],
            events: vec![],
        };
        assert!(matches!(extract_downshift_map(&empty, 4), Err(ExtractError::NoDownshiftData)));
    }

    #[test]
    fn downshift_cutoffs_within_hysteresis() {
        let cfg = cfg();
        let ds = run_vcd(&cfg, &campaign(), SimMode::Vcd).unwrap();
        let m = extract_downshift_map(&ds, cfg.params.n_gears()).unwrap();
        for b in 1..cfg.params.n_gears() {
            let down = cfg.shift.downshift_speed(0.0, b);
            let band = cfg.shift.upshift_speed(0.0, b) - down;
            assert!((m.cutoffs[b - 1] - down).abs() < band, "boundary {b}: {} vs {down}", m.cutoffs[b - 1]);
        }
    }

    #[test]
    fn maps_recover_configuration() {
        let cfg = cfg();
        let ds = run_vcd(&cfg, &campaign(), SimMode::Vcd).unwrap();
        let maps = fit_all_maps(&ds, &cfg, &MapDegrees::default()).unwrap();
        let p = &cfg.params;
        for g in 1..=p.n_gears() as u8 {
            let raw = maps.speed_map(g).monomial_coefficients();
            let ratio = p.gear_ratio(g).unwrap();
            assert!((raw[1][0] - ratio).abs() < 1e-6, "gear {g}: {}", raw[1][0]);
            assert!(raw[0][1].abs() < 1e-9);
            let traw = maps.torque_map(g).monomial_coefficients();
            let expect = p.r_tire / (p.final_drive * ratio * p.efficiency);
            assert!((traw[0][1] - expect).abs() < 1e-9);
        }
        // residual on all positive-fuel moving steps, fitted or not
        let (mut sse, mut sum, mut n) = (0.0, 0.0, 0.0);
        for tr in &ds.traces {
            let d = tr.dynamics.as_ref().unwrap();
            for i in 0..tr.len() {
                if tr.v[i] >= STANDSTILL_SPEED && tr.fuel[i] > 0.0 {
                    sse += (maps.fuel.eval(d.engine_speed[i], d.engine_torque[i]) - tr.fuel[i]).powi(2);
                    sum += tr.fuel[i];
                    n += 1.0;
                }
            }
        }
        assert!((sse / n).sqrt() < 0.01 * sum / n);
    }

    #[test]
    fn missing_gear_is_reported() {
        let c = DriveCycle::new("slow", vec![0.0, 30.0, 60.0, 90.0, 120.0], vec![0.0, 8.0, 3.0, 8.0, 0.0]).unwrap();
        let ds = run_vcd(&cfg(), &[c], SimMode::Vcd).unwrap();
        assert!(matches!(
            fit_all_maps(&ds, &cfg(), &MapDegrees::default()),
            Err(ExtractError::InsufficientGearData { .. })
        ));
    }

    #[test]
    fn torque_correction_recovers_offset() {
        let mut cfg = cfg();
        let cycles = campaign();
        let vcd = run_vcd(&cfg, &cycles, SimMode::Vcd).unwrap();
        let maps = fit_all_maps(&vcd, &cfg, &MapDegrees::default()).unwrap();
        // maps fitted on the same runs: no residual
        let zero = extract_torque_correction(&vcd, &cfg, &maps, &CorrectionBins::default()).unwrap();
        assert!(zero.y.iter().all(|y| y.abs() < 1e-6));
        cfg.reference.torque_correction = Curve::constant(5.0);
        let base = run_vcd(&cfg, &cycles, SimMode::Base).unwrap();
        let c = extract_torque_correction(&base, &cfg, &maps, &CorrectionBins::default()).unwrap();
        assert!(c.x.len() >= 4);
        assert!(c.y.iter().all(|y| (y - 5.0).abs() < 0.5), "{:?}", c.y);
    }

    #[test]
    fn extraction_is_order_independent() {
        let cfg = cfg();
        let mut cycles = campaign();
        let a = extract(&cfg, &cycles, &MapDegrees::default(), &CorrectionBins::default()).unwrap();
        cycles.reverse();
        let b = extract(&cfg, &cycles, &MapDegrees::default(), &CorrectionBins::default()).unwrap();
        assert_eq!(a, b);
    }
}
