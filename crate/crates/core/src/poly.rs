//! Least-squares polynomial surfaces on a tensor monomial basis.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

/// Default cap on the total degree `d1 + d2` of a fitted surface.
pub const DEFAULT_MAX_TOTAL_DEGREE: usize = 4;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum FitError {
    #[error("rank-deficient design: {samples} samples, {params} parameters, rank {rank}")]
    RankDeficient {
        samples: usize,
        params: usize,
        rank: usize,
    },
    #[error("total degree {degree} exceeds the cap {cap}")]
    DegreeTooHigh { degree: usize, cap: usize },
    #[error("input contains non-finite values")]
    NonFinite,
    #[error("inputs differ in length")]
    LengthMismatch,
    #[error("inequality-constrained fit failed: {0}")]
    Constrained(String),
}

/// Solve `min ‖A c − b‖₂` for a dense design given row by row.
///
/// Columns are scaled to unit norm before the SVD; a singular value below
/// `1e-10` of the largest counts as rank loss.
pub fn lstsq(rows: &[Vec<f64>], b: &[f64]) -> Result<Vec<f64>, FitError> {
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if n != b.len() || rows.iter().any(|r| r.len() != m) {
        return Err(FitError::LengthMismatch);
    }
    if rows.iter().flatten().chain(b).any(|x| !x.is_finite()) {
        return Err(FitError::NonFinite);
    }
    if n < m || m == 0 {
        return Err(FitError::RankDeficient {
            samples: n,
            params: m,
            rank: n.min(m),
        });
    }
    let mut a = DMatrix::from_fn(n, m, |i, j| rows[i][j]);
    let mut scale = vec![1.0; m];
    for (j, s) in scale.iter_mut().enumerate() {
        let norm = a.column(j).norm();
        if norm > 0.0 {
            *s = norm;
            a.column_mut(j).scale_mut(1.0 / norm);
        }
    }
    let svd = a.svd(true, true);
    let smax = svd.singular_values.max();
    let tol = smax * 1e-10;
    let rank = svd.singular_values.iter().filter(|&&s| s > tol).count();
    if rank < m {
        return Err(FitError::RankDeficient {
            samples: n,
            params: m,
            rank,
        });
    }
    let rhs = DVector::from_column_slice(b);
    let sol = svd.solve(&rhs, tol).expect("u and v were computed");
    Ok(sol.iter().zip(&scale).map(|(c, s)| c / s).collect())
}

/// [`lstsq`] subject to the linear equalities `G c = h`, one row of `G` per
/// entry of `con`.
///
/// Solved in the null space of `G`: a minimum-norm particular solution plus
/// the least-squares fit of the remaining freedom. Redundant constraints are
/// tolerated if they are consistent.
pub fn lstsq_eq(rows: &[Vec<f64>], b: &[f64], con: &[Vec<f64>], h: &[f64]) -> Result<Vec<f64>, FitError> {
    if con.is_empty() {
        return lstsq(rows, b);
    }
    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if n != b.len() || con.len() != h.len() || rows.iter().chain(con).any(|r| r.len() != m) {
        return Err(FitError::LengthMismatch);
    }
    if rows.iter().chain(con).flatten().chain(b).chain(h).any(|x| !x.is_finite()) {
        return Err(FitError::NonFinite);
    }
    let mut a = DMatrix::from_fn(n, m, |i, j| rows[i][j]);
    let mut g = DMatrix::from_fn(con.len(), m, |i, j| con[i][j]);
    let mut scale = vec![1.0; m];
    for (j, s) in scale.iter_mut().enumerate() {
        let norm = a.column(j).norm();
        if norm > 0.0 {
            *s = norm;
            a.column_mut(j).scale_mut(1.0 / norm);
            g.column_mut(j).scale_mut(1.0 / norm);
        }
    }
    let g_svd = g.clone().svd(true, true);
    let tol = g_svd.singular_values.max() * 1e-10;
    let particular = g_svd
        .solve(&DVector::from_column_slice(h), tol)
        .expect("u and v were computed");
    let eig = (g.transpose() * &g).symmetric_eigen();
    let emax = eig.eigenvalues.amax();
    let free: Vec<usize> = (0..m).filter(|&j| eig.eigenvalues[j] <= emax * 1e-12).collect();
    let mut x = particular;
    if !free.is_empty() {
        let basis = DMatrix::from_fn(m, free.len(), |i, k| eig.eigenvectors[(i, free[k])]);
        let reduced = &a * &basis;
        let resid = DVector::from_column_slice(b) - &a * &x;
        let red_rows: Vec<Vec<f64>> = (0..n).map(|i| reduced.row(i).iter().copied().collect()).collect();
        let y = lstsq(&red_rows, resid.as_slice())?;
        x += basis * DVector::from_vec(y);
    }
    Ok(x.iter().zip(&scale).map(|(c, s)| c / s).collect())
}

/// [`lstsq`] subject to `G c ≥ h`, one row of `G` per entry of `con`.
///
/// The design is reduced to its triangular factor and handed to an
/// interior-point QP solver in column-scaled variables. Returns the
/// coefficients and the indices of constraints that end up binding.
pub fn lstsq_ineq(rows: &[Vec<f64>], b: &[f64], con: &[Vec<f64>], h: &[f64]) -> Result<(Vec<f64>, Vec<usize>), FitError> {
    use clarabel::algebra::CscMatrix;
    use clarabel::solver::{DefaultSettingsBuilder, DefaultSolver, IPSolver, NonnegativeConeT, SolverStatus};

    let n = rows.len();
    let m = rows.first().map_or(0, Vec::len);
    if n != b.len() || con.len() != h.len() || rows.iter().chain(con).any(|r| r.len() != m) {
        return Err(FitError::LengthMismatch);
    }
    if rows.iter().chain(con).flatten().chain(b).chain(h).any(|x| !x.is_finite()) {
        return Err(FitError::NonFinite);
    }
    if n < m || m == 0 {
        return Err(FitError::RankDeficient {
            samples: n,
            params: m,
            rank: n.min(m),
        });
    }
    let mut a = DMatrix::from_fn(n, m, |i, j| rows[i][j]);
    let mut g = DMatrix::from_fn(con.len(), m, |i, j| con[i][j]);
    let mut scale = vec![1.0; m];
    for (j, s) in scale.iter_mut().enumerate() {
        let norm = a.column(j).norm();
        if norm > 0.0 {
            *s = norm;
            a.column_mut(j).scale_mut(1.0 / norm);
            g.column_mut(j).scale_mut(1.0 / norm);
        }
    }
    let qr = a.qr();
    let r = qr.r();
    let qtb = qr.q().transpose() * DVector::from_column_slice(b);
    let hess = r.transpose() * &r;
    let lin = -(r.transpose() * qtb);
    let upper: Vec<Vec<f64>> = (0..m)
        .map(|i| (0..m).map(|j| if j >= i { hess[(i, j)] } else { 0.0 }).collect())
        .collect();
    let p_mat = CscMatrix::from(upper.iter().map(|r| r.iter()));
    // G y ≥ h  ⇔  −G y + s = −h, s ≥ 0
    let neg_g: Vec<Vec<f64>> = (0..con.len()).map(|i| g.row(i).iter().map(|x| -x).collect()).collect();
    let a_mat = CscMatrix::from(neg_g.iter().map(|r| r.iter()));
    let neg_h: Vec<f64> = h.iter().map(|x| -x).collect();
    let cones = [NonnegativeConeT(con.len())];
    let settings = DefaultSettingsBuilder::default()
        .verbose(false)
        .tol_gap_abs(1e-12)
        .tol_gap_rel(1e-12)
        .tol_feas(1e-12)
        .build()
        .map_err(|e| FitError::Constrained(format!("{e:?}")))?;
    let mut solver = DefaultSolver::new(&p_mat, lin.as_slice(), &a_mat, &neg_h, &cones, settings)
        .map_err(|e| FitError::Constrained(format!("{e:?}")))?;
    solver.solve();
    match solver.solution.status {
        SolverStatus::Solved | SolverStatus::AlmostSolved => {}
        other => return Err(FitError::Constrained(format!("{other:?}"))),
    }
    let y = &solver.solution.x;
    let x: Vec<f64> = y.iter().zip(&scale).map(|(c, s)| c / s).collect();
    let active = (0..con.len())
        .filter(|&i| {
            let lhs: f64 = con[i].iter().zip(&x).map(|(a, b)| a * b).sum();
            lhs - h[i] <= 1e-7 * h[i].abs().max(1e-3)
        })
        .collect();
    Ok((x, active))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub x: (f64, f64),
    pub y: (f64, f64),
}

impl Domain {
    pub fn clamp(&self, x: f64, y: f64) -> (f64, f64, bool) {
        let cx = x.clamp(self.x.0, self.x.1);
        let cy = y.clamp(self.y.0, self.y.1);
        (cx, cy, cx != x || cy != y)
    }
}

/// `z = Σ c[i][j] uⁱ wʲ` with `u = (x - mean.0) / scale.0`,
/// `w = (y - mean.1) / scale.1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyMap2D {
    pub degree: (usize, usize),
    pub coeffs: Vec<Vec<f64>>,
    pub mean: (f64, f64),
    pub scale: (f64, f64),
    pub domain: Domain,
    /// RMS residual on the fitted data.
    pub rms: f64,
    pub samples: usize,
}

fn powers(x: f64, d: usize) -> Vec<f64> {
    let mut p = Vec::with_capacity(d + 1);
    let mut acc = 1.0;
    for _ in 0..=d {
        p.push(acc);
        acc *= x;
    }
    p
}

fn standardize(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let var = xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / n;
    let sd = var.sqrt();
    (mean, if sd > 0.0 { sd } else { 1.0 })
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

impl PolyMap2D {
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        let pu = powers((x - self.mean.0) / self.scale.0, self.degree.0);
        let pw = powers((y - self.mean.1) / self.scale.1, self.degree.1);
        let mut z = 0.0;
        for (i, row) in self.coeffs.iter().enumerate() {
            for (j, c) in row.iter().enumerate() {
                z += c * pu[i] * pw[j];
            }
        }
        z
    }

    /// Evaluate with inputs clamped to the fitted domain; the flag reports
    /// whether clamping happened.
    pub fn eval_clamped(&self, x: f64, y: f64) -> (f64, bool) {
        let (cx, cy, clamped) = self.domain.clamp(x, y);
        (self.eval(cx, cy), clamped)
    }

    /// Coefficients `a[i][j]` of `Σ a[i][j] xⁱ yʲ` in the raw inputs.
    pub fn monomial_coefficients(&self) -> Vec<Vec<f64>> {
        let (d1, d2) = self.degree;
        // (x - m)/s)^i = Σ_p C(i,p) x^p (-m)^(i-p) / s^i
        let expand = |d: usize, m: f64, s: f64| -> Vec<Vec<f64>> {
            (0..=d)
                .map(|i| {
                    (0..=d)
                        .map(|p| {
                            if p > i {
                                0.0
                            } else {
                                binomial(i, p) * (-m).powi((i - p) as i32) / s.powi(i as i32)
                            }
                        })
                        .collect()
                })
                .collect()
        };
        let ex = expand(d1, self.mean.0, self.scale.0);
        let ey = expand(d2, self.mean.1, self.scale.1);
        let mut out = vec![vec![0.0; d2 + 1]; d1 + 1];
        for i in 0..=d1 {
            for j in 0..=d2 {
                let c = self.coeffs[i][j];
                for p in 0..=i {
                    for q in 0..=j {
                        out[p][q] += c * ex[i][p] * ey[j][q];
                    }
                }
            }
        }
        out
    }
}

/// Ordinary least squares of `zs` on the tensor monomials of `(xs, ys)` up
/// to `degree`, with inputs standardized before solving.
pub fn fit_poly2d(
    xs: &[f64],
    ys: &[f64],
    zs: &[f64],
    degree: (usize, usize),
    max_total_degree: usize,
) -> Result<PolyMap2D, FitError> {
    if degree.0 + degree.1 > max_total_degree {
        return Err(FitError::DegreeTooHigh {
            degree: degree.0 + degree.1,
            cap: max_total_degree,
        });
    }
    if xs.len() != ys.len() || xs.len() != zs.len() {
        return Err(FitError::LengthMismatch);
    }
    let params = (degree.0 + 1) * (degree.1 + 1);
    if xs.len() < params {
        return Err(FitError::RankDeficient {
            samples: xs.len(),
            params,
            rank: xs.len(),
        });
    }
    let (mx, sx) = standardize(xs);
    let (my, sy) = standardize(ys);
    let rows: Vec<Vec<f64>> = xs
        .iter()
        .zip(ys)
        .map(|(&x, &y)| {
            let pu = powers((x - mx) / sx, degree.0);
            let pw = powers((y - my) / sy, degree.1);
            pu.iter().flat_map(|u| pw.iter().map(move |w| u * w)).collect()
        })
        .collect();
    let c = lstsq(&rows, zs)?;
    let coeffs: Vec<Vec<f64>> = c.chunks(degree.1 + 1).map(<[f64]>::to_vec).collect();
    let bounds = |v: &[f64]| v.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &x| (lo.min(x), hi.max(x)));
    let mut map = PolyMap2D {
        degree,
        coeffs,
        mean: (mx, my),
        scale: (sx, sy),
        domain: Domain {
            x: bounds(xs),
            y: bounds(ys),
        },
        rms: 0.0,
        samples: xs.len(),
    };
    let sse: f64 = xs
        .iter()
        .zip(ys)
        .zip(zs)
        .map(|((&x, &y), &z)| (map.eval(x, y) - z).powi(2))
        .sum();
    map.rms = (sse / xs.len() as f64).sqrt();
    Ok(map)
}

/// A polynomial in one variable, `Σ c[i] xⁱ`.
pub fn horner(coeffs: &[f64], x: f64) -> f64 {
    coeffs.iter().rev().fold(0.0, |acc, c| acc * x + c)
}
