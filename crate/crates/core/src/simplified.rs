//! Closed-form fuel-rate model
//! `f_s = max{ℓ, C(v) + P(v) a + Q(v) a₊² + Z(v) θ}` with a lower bound β at
//! low speed and a fuel-cut region below the boundary `a_c(v, θ)`.
//!
//! Coefficients are fitted by least squares on a regular midpoint grid
//! against any [`FuelOracle`], normally the semi-principled model.

use serde::{Deserialize, Serialize};

use crate::poly::{horner, lstsq, lstsq_ineq, FitError};
use crate::semi::{InputDomain, SemiPrincipledModel};
use crate::trace::{Step, Trace};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum SimplifiedError {
    #[error("fit: {0}")]
    Fit(#[from] FitError),
    #[error("positivity constraint cannot be met: {0}")]
    ConstraintInfeasible(String),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

/// Source of fuel rates to fit against.
pub trait FuelOracle {
    /// g/s
    fn fuel(&self, v: f64, a: f64, theta: f64) -> f64;
    /// Demand beyond the powertrain envelope at this point; such points
    /// can be left out of the fit.
    fn saturated(&self, _v: f64, _a: f64, _theta: f64) -> bool {
        false
    }
    /// The engine sits at its idle operating point (standstill or closed
    /// throttle at minimum torque). Idle cells are not fitted.
    fn idle(&self, v: f64, _a: f64, _theta: f64) -> bool {
        v < crate::reference::STANDSTILL_SPEED
    }
    /// Fuel-cut speed threshold, m/s.
    fn v_c(&self) -> f64;
    /// Low-speed fuel floor, g/s.
    fn beta(&self) -> f64;
}

impl FuelOracle for SemiPrincipledModel {
    fn fuel(&self, v: f64, a: f64, theta: f64) -> f64 {
        self.eval(v, a, theta).fuel
    }

    fn saturated(&self, v: f64, a: f64, theta: f64) -> bool {
        self.eval(v, a, theta).saturated
    }

    fn idle(&self, v: f64, a: f64, theta: f64) -> bool {
        self.eval(v, a, theta).idle
    }

    fn v_c(&self) -> f64 {
        self.constants.v_c
    }

    fn beta(&self) -> f64 {
        self.constants.f_idle
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Axis {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Axis {
    pub fn midpoints(&self) -> Vec<f64> {
        crate::interp::midpoints(self.lo, self.hi, self.n)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitGrid {
    pub v: Axis,
    pub a: Axis,
    pub theta: Axis,
}

impl Default for FitGrid {
    fn default() -> Self {
        Self {
            v: Axis { lo: 0.0, hi: 40.0, n: 80 },
            a: Axis { lo: -5.0, hi: 5.0, n: 80 },
            theta: Axis {
                lo: -0.15,
                hi: 0.15,
                n: 11,
            },
        }
    }
}

impl FitGrid {
    fn validate(&self) -> Result<(), SimplifiedError> {
        for (name, ax) in [("v", self.v), ("a", self.a), ("theta", self.theta)] {
            if ax.n < 10 || !(ax.hi > ax.lo) {
                return Err(SimplifiedError::InvalidGrid(format!(
                    "{name} axis needs at least 10 cells over a non-empty range"
                )));
            }
        }
        Ok(())
    }

    pub fn domain(&self) -> InputDomain {
        InputDomain {
            v: (self.v.lo, self.v.hi),
            a: (self.a.lo, self.a.hi),
            theta: (self.theta.lo, self.theta.hi),
        }
    }

    /// Same ranges, `factor` times the cells per axis.
    pub fn refined(&self, factor: usize) -> Self {
        let r = |ax: Axis| Axis { n: ax.n * factor, ..ax };
        Self {
            v: r(self.v),
            a: r(self.a),
            theta: r(self.theta),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SimplifiedDegrees {
    pub c: usize,
    pub p: usize,
    pub q: usize,
    pub z: usize,
    /// Total degree of `a_c(v, θ)`.
    pub a_c: usize,
}

impl Default for SimplifiedDegrees {
    fn default() -> Self {
        Self {
            c: 3,
            p: 2,
            q: 1,
            z: 1,
            a_c: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitOptions {
    pub grid: FitGrid,
    pub degrees: SimplifiedDegrees,
    /// Leave out cells where the oracle reports saturation.
    pub exclude_saturated: bool,
    /// Upper end of the operating range for the monotonicity property, m/s².
    pub a_max: f64,
    /// Margin added when the positivity constraint is enforced, g/s.
    pub positivity_margin: f64,
}

impl Default for FitOptions {
    fn default() -> Self {
        Self {
            grid: FitGrid::default(),
            degrees: SimplifiedDegrees::default(),
            exclude_saturated: true,
            a_max: 4.0,
            positivity_margin: 1e-3,
        }
    }
}

/// `a_c(v, θ) = Σ c_k v^i θ^j` over `i + j ≤ degree`, in the order of
/// [`total_degree_terms`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CutBoundary {
    pub degree: usize,
    pub coeffs: Vec<f64>,
    /// RMS of the fit against the located boundary points, m/s².
    pub rms: f64,
    pub lines: usize,
}

pub fn total_degree_terms(degree: usize) -> Vec<(usize, usize)> {
    (0..=degree)
        .flat_map(|d| (0..=d).map(move |j| (d - j, j)))
        .collect()
}

fn boundary_row(degree: usize, v: f64, theta: f64) -> Vec<f64> {
    total_degree_terms(degree)
        .into_iter()
        .map(|(i, j)| v.powi(i as i32) * theta.powi(j as i32))
        .collect()
}

impl CutBoundary {
    pub fn eval(&self, v: f64, theta: f64) -> f64 {
        boundary_row(self.degree, v, theta)
            .iter()
            .zip(&self.coeffs)
            .map(|(x, c)| x * c)
            .sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitDiagnostics {
    /// Quadrature RMS error over fitted cells, g/s.
    pub rms: f64,
    pub max_abs: f64,
    pub cells: usize,
    pub excluded_cut: usize,
    pub excluded_idle: usize,
    pub excluded_saturated: usize,
    /// Speeds where the positivity constraint is held active, m/s.
    #[serde(default)]
    pub positivity_active: Vec<f64>,
    /// Amount added to `C(0)` when the active set could not satisfy the
    /// constraint, g/s. Normally zero.
    pub positivity_shift: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimplifiedModel {
    /// g/s
    pub beta: f64,
    /// m/s
    pub v_c: f64,
    /// `C(v) = Σ c[i] vⁱ`, g/s with v in m/s.
    pub c: Vec<f64>,
    /// g/s per m/s².
    pub p: Vec<f64>,
    /// g/s per (m/s²)².
    pub q: Vec<f64>,
    /// g/s per rad.
    pub z: Vec<f64>,
    /// `None` when the oracle shows no fuel cut inside the grid.
    pub a_c: Option<CutBoundary>,
    pub domain: InputDomain,
    pub a_max: f64,
    pub diagnostics: FitDiagnostics,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimplifiedOutput {
    pub fuel: f64,
    pub cut: bool,
    pub flagged: bool,
}

impl SimplifiedModel {
    /// The polynomial part `f_p`.
    pub fn f_p(&self, v: f64, a: f64, theta: f64) -> f64 {
        let ap = a.max(0.0);
        horner(&self.c, v) + horner(&self.p, v) * a + horner(&self.q, v) * ap * ap + horner(&self.z, v) * theta
    }

    pub fn c_at(&self, v: f64) -> f64 {
        horner(&self.c, v)
    }

    pub fn p_at(&self, v: f64) -> f64 {
        horner(&self.p, v)
    }

    pub fn q_at(&self, v: f64) -> f64 {
        horner(&self.q, v)
    }

    pub fn z_at(&self, v: f64) -> f64 {
        horner(&self.z, v)
    }

    /// Fuel-cut boundary `a_c(v, θ)`; `-∞` when there is none.
    pub fn a_c_at(&self, v: f64, theta: f64) -> f64 {
        self.a_c.as_ref().map_or(f64::NEG_INFINITY, |b| b.eval(v, theta))
    }

    /// Lower end of the meaningful acceleration range at `v`: the level-road
    /// fuel-cut boundary, kept inside the fitted acceleration range.
    pub fn a_min(&self, v: f64) -> f64 {
        self.a_c_at(v, 0.0).clamp(self.domain.a.0, self.domain.a.1)
    }

    pub fn eval(&self, v: f64, a: f64, theta: f64) -> SimplifiedOutput {
        let (v, a, theta, flagged) = self.domain.clamp(v, a, theta);
        if v > self.v_c && a < self.a_c_at(v, theta) {
            return SimplifiedOutput {
                fuel: 0.0,
                cut: true,
                flagged,
            };
        }
        let f = self.f_p(v, a, theta);
        let floor = if v <= self.v_c { self.beta } else { 0.0 };
        SimplifiedOutput {
            fuel: f.max(floor),
            cut: false,
            flagged,
        }
    }

    pub fn fuel(&self, v: f64, a: f64, theta: f64) -> f64 {
        self.eval(v, a, theta).fuel
    }

    /// Row-wise evaluation; the trace carries no engine signals.
    pub fn eval_trace(&self, name: &str, t: &[f64], v: &[f64], a: &[f64], grade: &[f64]) -> Trace {
        let mut trace = Trace::fuel_only(name, t.len());
        for i in 0..t.len() {
            let out = self.eval(v[i], a[i], grade[i]);
            trace.push(Step {
                t: t[i],
                v: v[i],
                a: a[i],
                grade: grade[i],
                gear: 0,
                engine_speed: f64::NAN,
                engine_torque: f64::NAN,
                pedal: f64::NAN,
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

fn feature_row(d: &SimplifiedDegrees, v: f64, a: f64, theta: f64) -> Vec<f64> {
    let ap = a.max(0.0);
    let mut row = Vec::with_capacity(d.c + d.p + d.q + d.z + 4);
    let vp = |i: usize| v.powi(i as i32);
    row.extend((0..=d.c).map(vp));
    row.extend((0..=d.p).map(|i| vp(i) * a));
    row.extend((0..=d.q).map(|i| vp(i) * ap * ap));
    row.extend((0..=d.z).map(|i| vp(i) * theta));
    row
}

fn split(d: &SimplifiedDegrees, x: &[f64]) -> [Vec<f64>; 4] {
    let (c, rest) = x.split_at(d.c + 1);
    let (p, rest) = rest.split_at(d.p + 1);
    let (q, z) = rest.split_at(d.q + 1);
    [c.to_vec(), p.to_vec(), q.to_vec(), z.to_vec()]
}

/// Grid cells used by the fit, with the oracle's fuel rate.
#[derive(Debug, Clone, Default)]
pub struct Samples {
    pub points: Vec<(f64, f64, f64)>,
    pub fuel: Vec<f64>,
    pub excluded_cut: usize,
    pub excluded_idle: usize,
    pub excluded_saturated: usize,
}

pub fn collect_samples(oracle: &dyn FuelOracle, opts: &FitOptions) -> Samples {
    let mut s = Samples::default();
    let (vs, as_, ts) = (opts.grid.v.midpoints(), opts.grid.a.midpoints(), opts.grid.theta.midpoints());
    for &v in &vs {
        for &theta in &ts {
            for &a in &as_ {
                let f = oracle.fuel(v, a, theta);
                if f == 0.0 {
                    s.excluded_cut += 1;
                    continue;
                }
                if oracle.idle(v, a, theta) {
                    s.excluded_idle += 1;
                    continue;
                }
                if opts.exclude_saturated && oracle.saturated(v, a, theta) {
                    s.excluded_saturated += 1;
                    continue;
                }
                s.points.push((v, a, theta));
                s.fuel.push(f);
            }
        }
    }
    s
}

/// Largest acceleration with zero fuel on each `(v, θ)` grid line above
/// `v_c`, refined by bisection between grid points.
pub fn locate_cut_boundary(oracle: &dyn FuelOracle, grid: &FitGrid) -> Vec<(f64, f64, f64)> {
    let as_ = grid.a.midpoints();
    let mut out = Vec::new();
    for &v in &grid.v.midpoints() {
        if v <= oracle.v_c() {
            continue;
        }
        for &theta in &grid.theta.midpoints() {
            let zero: Vec<bool> = as_.iter().map(|&a| oracle.fuel(v, a, theta) == 0.0).collect();
            let Some(j) = zero.iter().rposition(|&z| z) else {
                continue;
            };
            if j + 1 == as_.len() {
                continue;
            }
            let (mut lo, mut hi) = (as_[j], as_[j + 1]);
            for _ in 0..50 {
                let mid = 0.5 * (lo + hi);
                if oracle.fuel(v, mid, theta) == 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            out.push((v, theta, lo));
        }
    }
    out
}

fn fit_boundary(points: &[(f64, f64, f64)], degree: usize) -> Result<Option<CutBoundary>, SimplifiedError> {
    if points.is_empty() {
        return Ok(None);
    }
    let rows: Vec<Vec<f64>> = points.iter().map(|&(v, t, _)| boundary_row(degree, v, t)).collect();
    let b: Vec<f64> = points.iter().map(|p| p.2).collect();
    let coeffs = lstsq(&rows, &b)?;
    let mut boundary = CutBoundary {
        degree,
        coeffs,
        rms: 0.0,
        lines: points.len(),
    };
    let sse: f64 = points.iter().map(|&(v, t, a)| (boundary.eval(v, t) - a).powi(2)).sum();
    boundary.rms = (sse / points.len() as f64).sqrt();
    Ok(Some(boundary))
}

/// Least-squares coefficients before the positivity constraint, in the
/// order C, P, Q, Z.
pub fn unconstrained_coefficients(samples: &Samples, degrees: &SimplifiedDegrees) -> Result<Vec<f64>, SimplifiedError> {
    let rows: Vec<Vec<f64>> = samples
        .points
        .iter()
        .map(|&(v, a, t)| feature_row(degrees, v, a, t))
        .collect();
    Ok(lstsq(&rows, &samples.fuel)?)
}

/// Quadrature RMS error of coefficient vector `x` over `samples`.
pub fn quadrature_rms(samples: &Samples, degrees: &SimplifiedDegrees, x: &[f64]) -> f64 {
    let sse: f64 = samples
        .points
        .iter()
        .zip(&samples.fuel)
        .map(|(&(v, a, t), f)| {
            let pred: f64 = feature_row(degrees, v, a, t).iter().zip(x).map(|(r, c)| r * c).sum();
            (pred - f).powi(2)
        })
        .sum();
    (sse / samples.points.len().max(1) as f64).sqrt()
}

pub fn fit_simplified(oracle: &dyn FuelOracle, opts: &FitOptions) -> Result<SimplifiedModel, SimplifiedError> {
    opts.grid.validate()?;
    let d = &opts.degrees;
    let samples = collect_samples(oracle, opts);
    let rows: Vec<Vec<f64>> = samples
        .points
        .iter()
        .map(|&(v, a, t)| feature_row(d, v, a, t))
        .collect();
    let a_c = fit_boundary(&locate_cut_boundary(oracle, &opts.grid), d.a_c)?;
    let mut model = SimplifiedModel {
        beta: oracle.beta(),
        v_c: oracle.v_c(),
        c: Vec::new(),
        p: Vec::new(),
        q: Vec::new(),
        z: Vec::new(),
        a_c,
        domain: opts.grid.domain(),
        a_max: opts.a_max,
        diagnostics: FitDiagnostics {
            rms: 0.0,
            max_abs: 0.0,
            cells: samples.points.len(),
            excluded_cut: samples.excluded_cut,
            excluded_idle: samples.excluded_idle,
            excluded_saturated: samples.excluded_saturated,
            positivity_active: Vec::new(),
            positivity_shift: 0.0,
        },
    };

    // Positivity as inequalities on the check grid.
    let x = lstsq(&rows, &samples.fuel)?;
    [model.c, model.p, model.q, model.z] = split(d, &x);
    let worst = positivity_minimum(&model);
    if !worst.is_finite() {
        return Err(SimplifiedError::ConstraintInfeasible(format!(
            "f_p at a_min is not finite ({worst})"
        )));
    }
    let mut active = Vec::new();
    if worst <= 0.0 {
        let speeds = positivity_speeds(&model);
        let con: Vec<Vec<f64>> = speeds.iter().map(|&v| feature_row(d, v, model.a_min(v), 0.0)).collect();
        let h = vec![opts.positivity_margin; con.len()];
        let (x, binding) = lstsq_ineq(&rows, &samples.fuel, &con, &h).map_err(|e| match e {
            FitError::Constrained(msg) => SimplifiedError::ConstraintInfeasible(msg),
            other => other.into(),
        })?;
        [model.c, model.p, model.q, model.z] = split(d, &x);
        active = binding.iter().map(|&i| speeds[i]).collect();
    }
    let worst = positivity_minimum(&model);
    if worst <= 0.0 {
        let shift = -worst + opts.positivity_margin;
        model.c[0] += shift;
        model.diagnostics.positivity_shift = shift;
    }
    model.diagnostics.positivity_active = active;
    let (mut sse, mut max_abs) = (0.0_f64, 0.0_f64);
    for (&(v, a, t), f) in samples.points.iter().zip(&samples.fuel) {
        let e = model.fuel(v, a, t) - f;
        sse += e * e;
        max_abs = max_abs.max(e.abs());
    }
    model.diagnostics.rms = (sse / samples.points.len() as f64).sqrt();
    model.diagnostics.max_abs = max_abs;
    Ok(model)
}

/// Number of speeds checked by [`positivity_minimum`].
pub const POSITIVITY_POINTS: usize = 200;

/// `min_v f_p(v, a_min(v), 0)` over the fitted speed range.
pub fn positivity_minimum(model: &SimplifiedModel) -> f64 {
    positivity_worst(model).1
}

fn positivity_speeds(model: &SimplifiedModel) -> Vec<f64> {
    crate::interp::linspace(model.domain.v.0, model.domain.v.1, POSITIVITY_POINTS)
}

/// Speed and value of [`positivity_minimum`].
pub fn positivity_worst(model: &SimplifiedModel) -> (f64, f64) {
    positivity_speeds(model)
        .into_iter()
        .map(|v| (v, model.f_p(v, model.a_min(v), 0.0)))
        .fold((f64::NAN, f64::INFINITY), |best, cur| if cur.1 < best.1 { cur } else { best })
}
