//! Simplex-constrained least squares, `min ||x - Z a||^2` over `a` in the
//! standard simplex, by projected gradient with a `1/L` step.

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{shape, Error, Result};
use crate::simplex::{project_in_place, SimplexPoint};
use crate::types::{DataMatrix, StochasticMatrix, StochasticVector};

/// Inner-solver knobs.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolverConfig {
    pub max_inner_iters: usize,
    /// Stop once an iteration lowers the objective by less than `tol` relative.
    pub tol: f64,
    /// Power-iteration budget for the Lipschitz estimate.
    pub power_iters: usize,
    pub power_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            max_inner_iters: 200,
            tol: 1e-9,
            power_iters: 50,
            power_tol: 1e-8,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if self.max_inner_iters < 1 {
            return Err(Error::InvalidParameter("max_inner_iters must be >= 1".into()));
        }
        if self.tol.is_nan() || self.tol <= 0.0 || self.power_tol.is_nan() || self.power_tol <= 0.0 {
            return Err(Error::InvalidParameter("solver tolerances must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Solution {
    pub point: SimplexPoint,
    /// `||x - Z a||^2` at the returned point.
    pub residual_sq: f64,
    pub iterations: usize,
}

/// `||x - Z a||^2`.
pub fn objective(z: &DMatrix<f64>, x: &[f64], a: &[f64]) -> f64 {
    residual(z, x, a).iter().map(|r| r * r).sum()
}

/// `2 Z^T (Z a - x)`.
pub fn gradient(z: &DMatrix<f64>, x: &[f64], a: &[f64]) -> Vec<f64> {
    let r = residual(z, x, a);
    let m = z.nrows();
    z.as_slice()
        .chunks_exact(m)
        .map(|col| 2.0 * col.iter().zip(&r).map(|(c, r)| c * r).sum::<f64>())
        .collect()
}

/// `Z a - x`.
fn residual(z: &DMatrix<f64>, x: &[f64], a: &[f64]) -> Vec<f64> {
    let m = z.nrows();
    let mut r: Vec<f64> = x.iter().map(|v| -v).collect();
    for (col, &w) in z.as_slice().chunks_exact(m).zip(a) {
        if w != 0.0 {
            r.iter_mut().zip(col).for_each(|(r, c)| *r += w * c);
        }
    }
    r
}

/// Largest eigenvalue of a symmetric positive semidefinite operator by power
/// iteration. `None` when the estimate has not settled within the budget.
pub(crate) fn power_iteration(
    dim: usize,
    iters: usize,
    tol: f64,
    apply: impl Fn(&[f64]) -> Vec<f64>,
) -> Option<f64> {
    let mut v: Vec<f64> = (0..dim).map(|i| 1.0 + ((i * 7919) % 97) as f64 / 97.0).collect();
    normalize(&mut v);
    let mut lambda = 0.0;
    for _ in 0..iters {
        let mut w = apply(&v);
        let est: f64 = w.iter().zip(&v).map(|(a, b)| a * b).sum();
        let norm = normalize(&mut w);
        if norm == 0.0 {
            return Some(0.0);
        }
        if (est - lambda).abs() <= tol * est.abs() {
            return Some(est.max(lambda));
        }
        lambda = est;
        v = w;
    }
    None
}

fn normalize(v: &mut [f64]) -> f64 {
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if n > 0.0 {
        v.iter_mut().for_each(|x| *x /= n);
    }
    n
}

/// Lipschitz constant of the gradient of `||x - Z a||^2`, i.e. `2 lambda_max(Z^T Z)`.
pub(crate) fn lipschitz(z: &DMatrix<f64>, cfg: &SolverConfig) -> f64 {
    let k = z.ncols();
    let gram = z.transpose() * z;
    let lambda = power_iteration(k, cfg.power_iters, cfg.power_tol, |v| {
        let v = nalgebra::DVector::from_column_slice(v);
        (&gram * v).as_slice().to_vec()
    })
    .unwrap_or_else(|| {
        log::debug!("power iteration did not settle for a {k}-column Gram matrix, using trace bound");
        gram.trace()
    });
    2.0 * lambda
}

/// Projected-gradient core shared by the public entry points.
///
/// Steps that fail to lower the objective double `lipschitz` and retry, so the
/// objective sequence is non-increasing. `stop_below` ends the search early
/// once the objective drops to that level.
pub(crate) fn solve_raw(
    z: &DMatrix<f64>,
    x: &[f64],
    cfg: &SolverConfig,
    warm: Option<&[f64]>,
    lipschitz: f64,
    stop_below: Option<f64>,
) -> (Vec<f64>, f64, usize) {
    let k = z.ncols();
    let mut a = match warm {
        Some(w) => w.to_vec(),
        None => vec![1.0 / k as f64; k],
    };
    let mut f = objective(z, x, &a);
    if lipschitz <= 0.0 {
        return (a, f, 0);
    }
    // Residuals at rounding level cannot be reduced further in a meaningful way.
    let floor = stop_below.unwrap_or(0.0).max(f64::EPSILON * f64::EPSILON * (1.0 + dot(x, x)));
    let mut step_l = lipschitz;
    let mut iterations = 0;
    let mut cand = vec![0.0; k];
    let mut scratch = Vec::with_capacity(k);
    // Extrapolated point and momentum weight (monotone accelerated variant:
    // `a` only moves on objective decrease; momentum restarts otherwise).
    let mut y = a.clone();
    let mut fy = f;
    let mut t = 1.0_f64;
    while iterations < cfg.max_inner_iters && f > floor {
        iterations += 1;
        let g = gradient(z, x, &y);
        let mut fc = fy;
        for _ in 0..60 {
            for ((c, yi), gi) in cand.iter_mut().zip(&y).zip(&g) {
                *c = yi - gi / step_l;
            }
            project_in_place(&mut cand, &mut scratch);
            fc = objective(z, x, &cand);
            let (lin, sq) = cand.iter().zip(&y).zip(&g).fold((0.0, 0.0), |(l, s), ((c, yi), gi)| {
                let d = c - yi;
                (l + gi * d, s + d * d)
            });
            if fc <= fy + lin + 0.5 * step_l * sq + 1e-15 * fy.abs() {
                break;
            }
            step_l *= 2.0;
        }
        let plain = t == 1.0;
        if fc <= f {
            debug_assert!(cand.iter().all(|&v| v >= 0.0) && (cand.iter().sum::<f64>() - 1.0).abs() < 1e-10);
            let decrease = f - fc;
            let previous = f;
            let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
            let beta = (t - 1.0) / t_next;
            for ((yi, c), ai) in y.iter_mut().zip(&cand).zip(&a) {
                *yi = c + beta * (c - ai);
            }
            std::mem::swap(&mut a, &mut cand);
            f = fc;
            if decrease <= cfg.tol * previous {
                if plain {
                    break;
                }
                // Confirm with a plain gradient step before stopping.
                y.copy_from_slice(&a);
                fy = f;
                t = 1.0;
                continue;
            }
            project_in_place(&mut y, &mut scratch);
            fy = objective(z, x, &y);
            t = t_next;
        } else if !plain {
            y.copy_from_slice(&a);
            fy = f;
            t = 1.0;
        } else {
            break;
        }
    }
    (a, f, iterations)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn check_inputs(z: &DataMatrix, x: &[f64]) -> Result<()> {
    if x.len() != z.nrows() {
        return Err(shape("solve_simplex_ls", format!("x of length {}", z.nrows()), x.len()));
    }
    if let Some(i) = x.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { row: i, col: 0 });
    }
    Ok(())
}

/// Best convex combination of the columns of `z` approximating `x`.
///
/// Starts from `warm_start` when given, otherwise from the barycenter.
pub fn solve_simplex_ls(
    z: &DataMatrix,
    x: &[f64],
    cfg: &SolverConfig,
    warm_start: Option<&SimplexPoint>,
) -> Result<Solution> {
    cfg.validate()?;
    check_inputs(z, x)?;
    if let Some(w) = warm_start {
        if w.dim() != z.ncols() {
            return Err(shape("solve_simplex_ls warm start", z.ncols(), w.dim()));
        }
    }
    let l = lipschitz(z.as_matrix(), cfg);
    let (a, residual_sq, iterations) = solve_raw(z.as_matrix(), x, cfg, warm_start.map(|w| w.as_slice()), l, None);
    Ok(Solution {
        point: StochasticVector::from_raw_unchecked(a),
        residual_sq,
        iterations,
    })
}

/// Column-wise [`solve_simplex_ls`] for every point of `x`.
///
/// Columns are solved independently (in parallel); the result does not depend
/// on scheduling.
pub fn solve_simplex_ls_batch(
    z: &DataMatrix,
    x: &DataMatrix,
    cfg: &SolverConfig,
    warm: Option<&StochasticMatrix>,
) -> Result<StochasticMatrix> {
    Ok(solve_batch_with_residuals(z, x, cfg, warm)?.0)
}

/// Batch solve that also returns the per-column squared residuals.
pub fn solve_batch_with_residuals(
    z: &DataMatrix,
    x: &DataMatrix,
    cfg: &SolverConfig,
    warm: Option<&StochasticMatrix>,
) -> Result<(StochasticMatrix, Vec<f64>)> {
    cfg.validate()?;
    if x.nrows() != z.nrows() {
        return Err(shape("solve_simplex_ls_batch", format!("X with {} rows", z.nrows()), x.nrows()));
    }
    if let Some(w) = warm {
        if w.nrows() != z.ncols() || w.ncols() != x.ncols() {
            return Err(shape(
                "solve_simplex_ls_batch warm start",
                format!("{}x{}", z.ncols(), x.ncols()),
                format!("{}x{}", w.nrows(), w.ncols()),
            ));
        }
    }
    let l = lipschitz(z.as_matrix(), cfg);
    Ok(batch_raw(z.as_matrix(), x, cfg, warm.map(|w| w.as_matrix()), l))
}

pub(crate) fn batch_raw(
    z: &DMatrix<f64>,
    x: &DataMatrix,
    cfg: &SolverConfig,
    warm: Option<&DMatrix<f64>>,
    lipschitz: f64,
) -> (StochasticMatrix, Vec<f64>) {
    let k = z.ncols();
    let solved: Vec<(Vec<f64>, f64)> = (0..x.ncols())
        .into_par_iter()
        .map(|i| {
            let w = warm.map(|w| &w.as_slice()[i * k..(i + 1) * k]);
            let (a, f, _) = solve_raw(z, x.column(i), cfg, w, lipschitz, None);
            (a, f)
        })
        .collect();
    let residuals = solved.iter().map(|(_, f)| *f).collect();
    let data: Vec<f64> = solved.into_iter().flat_map(|(a, _)| a).collect();
    (StochasticMatrix::from_matrix_unchecked(DMatrix::from_vec(k, x.ncols(), data)), residuals)
}
