//! Piecewise-linear curves and bilinear tables.

use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum InterpError {
    #[error("breakpoints and values differ in length ({0} vs {1})")]
    LengthMismatch(usize, usize),
    #[error("at least one breakpoint is required")]
    Empty,
    #[error("breakpoints must be strictly increasing")]
    NotIncreasing,
    #[error("table shape {rows}x{cols} does not match axes {nx}x{ny}")]
    Shape {
        rows: usize,
        cols: usize,
        nx: usize,
        ny: usize,
    },
}

/// Locate the bracketing segment of `x` in the increasing slice `xs`.
/// Returns the left index and the interpolation weight, clamped to the ends.
pub(crate) fn bracket(xs: &[f64], x: f64) -> (usize, f64) {
    let n = xs.len();
    if n == 1 || x <= xs[0] {
        return (0, 0.0);
    }
    if x >= xs[n - 1] {
        return (n - 2, 1.0);
    }
    let hi = xs.partition_point(|&b| b <= x);
    let lo = hi - 1;
    (lo, (x - xs[lo]) / (xs[hi] - xs[lo]))
}

fn check_increasing(xs: &[f64]) -> Result<(), InterpError> {
    if xs.is_empty() {
        return Err(InterpError::Empty);
    }
    if xs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(InterpError::NotIncreasing);
    }
    Ok(())
}

/// A 1-D piecewise-linear curve, held constant beyond its end points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Curve {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
}

impl Curve {
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Result<Self, InterpError> {
        if x.len() != y.len() {
            return Err(InterpError::LengthMismatch(x.len(), y.len()));
        }
        check_increasing(&x)?;
        Ok(Self { x, y })
    }

    pub fn constant(value: f64) -> Self {
        Self {
            x: vec![0.0],
            y: vec![value],
        }
    }

    pub fn validate(&self) -> Result<(), InterpError> {
        if self.x.len() != self.y.len() {
            return Err(InterpError::LengthMismatch(self.x.len(), self.y.len()));
        }
        check_increasing(&self.x)
    }

    pub fn eval(&self, x: f64) -> f64 {
        if self.y.len() == 1 {
            return self.y[0];
        }
        let (i, w) = bracket(&self.x, x);
        self.y[i] + w * (self.y[i + 1] - self.y[i])
    }

    pub fn min_y(&self) -> f64 {
        self.y.iter().copied().fold(f64::INFINITY, f64::min)
    }

    pub fn max_y(&self) -> f64 {
        self.y.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }
}

/// Bilinear table `values[i][j]` over `x[i]`, `y[j]`, clamped at the edges.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Table2D {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    pub values: Vec<Vec<f64>>,
}

impl Table2D {
    pub fn new(x: Vec<f64>, y: Vec<f64>, values: Vec<Vec<f64>>) -> Result<Self, InterpError> {
        let table = Self { x, y, values };
        table.validate()?;
        Ok(table)
    }

    pub fn validate(&self) -> Result<(), InterpError> {
        check_increasing(&self.x)?;
        check_increasing(&self.y)?;
        let cols = self.values.first().map_or(0, Vec::len);
        if self.values.len() != self.x.len() || self.values.iter().any(|r| r.len() != self.y.len())
        {
            return Err(InterpError::Shape {
                rows: self.values.len(),
                cols,
                nx: self.x.len(),
                ny: self.y.len(),
            });
        }
        Ok(())
    }

    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let (nx, ny) = (self.x.len(), self.y.len());
        let (i, wx) = bracket(&self.x, x);
        let (j, wy) = bracket(&self.y, y);
        let i1 = (i + 1).min(nx - 1);
        let j1 = (j + 1).min(ny - 1);
        let v00 = self.values[i][j];
        let v01 = self.values[i][j1];
        let v10 = self.values[i1][j];
        let v11 = self.values[i1][j1];
        let lo = v00 + wy * (v01 - v00);
        let hi = v10 + wy * (v11 - v10);
        lo + wx * (hi - lo)
    }
}

/// Evenly spaced points from `start` to `end` inclusive.
pub fn linspace(start: f64, end: f64, n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![start],
        _ => (0..n)
            .map(|i| start + (end - start) * i as f64 / (n - 1) as f64)
            .collect(),
    }
}

/// Cell midpoints of `n` equal cells spanning `[start, end]`.
pub fn midpoints(start: f64, end: f64, n: usize) -> Vec<f64> {
    let h = (end - start) / n as f64;
    (0..n).map(|i| start + (i as f64 + 0.5) * h).collect()
}
