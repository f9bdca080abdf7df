//! Archetypal analysis by alternating projected-gradient descent on
//! `||X - X B A||^2` over column-stochastic `B` (`n x k`) and `A` (`k x n`).

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::cls::{self, power_iteration, SolverConfig};
use crate::error::{Error, Result};
use crate::simplex::project_in_place;
use crate::sivm;
use crate::types::{reconstruction_sq, DataMatrix, Factorization, StochasticMatrix, StochasticVector};

/// How the first `B` is chosen.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Init {
    /// Indicator columns at the SiVM picks.
    SivmSeeded,
    /// Indicator columns at `k` distinct points drawn with the configured seed.
    RandomColumns,
    /// Column `j` averages the `j`-th of `k` balanced contiguous blocks of points.
    UniformB,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AAConfig {
    pub k: usize,
    pub max_outer_iters: usize,
    /// Stop when an outer iteration lowers the RSS by less than this fraction.
    pub outer_tol: f64,
    pub init: Init,
    pub seed: u64,
    pub inner: SolverConfig,
}

impl AAConfig {
    pub fn new(k: usize) -> Self {
        Self {
            k,
            max_outer_iters: 500,
            outer_tol: 1e-6,
            init: Init::SivmSeeded,
            seed: 0,
            inner: SolverConfig::default(),
        }
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.k < 1 {
            return Err(Error::InvalidParameter("number of archetypes k must be >= 1".into()));
        }
        if self.k > n {
            return Err(Error::InvalidParameter(format!("k = {} exceeds the number of points n = {n}", self.k)));
        }
        if self.outer_tol.is_nan() || self.outer_tol <= 0.0 {
            return Err(Error::InvalidParameter("outer_tol must be positive".into()));
        }
        self.inner.validate()
    }
}

/// Starting `B` for `cfg.init`.
pub fn initial_b(x: &DataMatrix, cfg: &AAConfig) -> Result<StochasticMatrix> {
    cfg.validate(x.ncols())?;
    let n = x.ncols();
    match cfg.init {
        Init::SivmSeeded => StochasticMatrix::indicator(n, &sivm::select_sivm(x, cfg.k)?.indices),
        Init::RandomColumns => {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            let picks = rand::seq::index::sample(&mut rng, n, cfg.k).into_vec();
            StochasticMatrix::indicator(n, &picks)
        }
        Init::UniformB => {
            let cols = balanced_blocks(n, cfg.k)
                .into_iter()
                .map(|(start, len)| {
                    let mut v = vec![0.0; n];
                    v[start..start + len].fill(1.0 / len as f64);
                    StochasticVector::new(v)
                })
                .collect::<Result<Vec<_>>>()?;
            StochasticMatrix::from_columns(cols)
        }
    }
}

/// `(start, len)` of `k` contiguous blocks covering `0..n`, larger blocks first.
pub(crate) fn balanced_blocks(n: usize, k: usize) -> Vec<(usize, usize)> {
    let (base, extra) = (n / k, n % k);
    let mut start = 0;
    (0..k)
        .map(|j| {
            let len = base + usize::from(j < extra);
            let block = (start, len);
            start += len;
            block
        })
        .collect()
}

/// Full archetypal analysis of `x` with `cfg.k` archetypes.
pub fn fit_aa(x: &DataMatrix, cfg: &AAConfig) -> Result<Factorization> {
    let b0 = initial_b(x, cfg)?;
    fit_aa_from(x, cfg, b0, None)
}

/// Archetypal analysis restricted to hull vertices `v`; recover coefficients
/// for the remaining points afterwards with [`transform`].
pub fn fit_aa_on_vertices(v: &DataMatrix, k: usize, cfg: &AAConfig) -> Result<Factorization> {
    let cfg = AAConfig { k, ..*cfg };
    fit_aa(v, &cfg)
}

/// Coefficients of arbitrary points against fixed archetypes `z`.
pub fn transform(z: &DataMatrix, x: &DataMatrix, inner: &SolverConfig) -> Result<StochasticMatrix> {
    cls::solve_simplex_ls_batch(z, x, inner, None)
}

/// Refits with one more archetype, seeded by the previous solution plus the
/// data point farthest (in summed distance) from the current archetypes.
///
/// The padded starting point reproduces `prev` exactly, so the returned RSS
/// never exceeds `prev.rss`.
pub fn grow(x: &DataMatrix, prev: &Factorization, cfg: &AAConfig) -> Result<Factorization> {
    let (n, k) = (x.ncols(), prev.k());
    let cfg = AAConfig { k: k + 1, ..*cfg };
    cfg.validate(n)?;
    if prev.b.nrows() != n {
        return Err(crate::error::shape("grow", format!("factorization of {n} points"), prev.b.nrows()));
    }
    let extra = sivm::furthest_from(x, &prev.z)?;
    let mut b = DMatrix::zeros(n, k + 1);
    b.columns_mut(0, k).copy_from(prev.b.as_matrix());
    b[(extra, k)] = 1.0;
    let mut a = DMatrix::zeros(k + 1, n);
    a.rows_mut(0, k).copy_from(prev.a.as_matrix());
    fit_aa_from(
        x,
        &cfg,
        StochasticMatrix::from_matrix_unchecked(b),
        Some(StochasticMatrix::from_matrix_unchecked(a)),
    )
}

/// Alternating minimization from an explicit starting point.
///
/// `a0`, when given, warm-starts the first coefficient solve.
pub fn fit_aa_from(
    x: &DataMatrix,
    cfg: &AAConfig,
    b0: StochasticMatrix,
    a0: Option<StochasticMatrix>,
) -> Result<Factorization> {
    let n = x.ncols();
    cfg.validate(n)?;
    if b0.nrows() != n || b0.ncols() != cfg.k {
        return Err(crate::error::shape("fit_aa B0", format!("{n}x{}", cfg.k), format!("{}x{}", b0.nrows(), b0.ncols())));
    }
    if let Some(a0) = &a0 {
        if a0.nrows() != cfg.k || a0.ncols() != n {
            return Err(crate::error::shape("fit_aa A0", format!("{}x{n}", cfg.k), format!("{}x{}", a0.nrows(), a0.ncols())));
        }
    }

    let xm = x.as_matrix();
    let mut b = b0.into_inner();
    let mut z = xm * &b;
    let mut a = match a0 {
        Some(a0) => a0.into_inner(),
        None => DMatrix::from_element(cfg.k, n, 1.0 / cfg.k as f64),
    };
    let mut rss = reconstruction_sq(xm, &z, &a)?;
    // The first coefficient solve starts from `a` and may only improve on it.
    let (a_new, rss_new) = update_a(x, &z, &a, cfg)?;
    if rss_new <= rss {
        a = a_new;
        rss = rss_new;
    }

    let mut history = vec![rss];
    let mut converged = rss == 0.0;
    let mut iterations = 0;
    while !converged && iterations < cfg.max_outer_iters {
        iterations += 1;
        let previous = rss;

        let (b_new, rss_b) = update_b(xm, &b, &a, rss, &cfg.inner);
        b = b_new;
        z = xm * &b;
        rss = rss_b;

        let (a_new, rss_a) = update_a(x, &z, &a, cfg)?;
        if rss_a <= rss {
            a = a_new;
            rss = rss_a;
        }

        history.push(rss);
        converged = rss == 0.0 || previous - rss <= cfg.outer_tol * previous;
    }

    Ok(Factorization {
        b: StochasticMatrix::from_matrix_unchecked(b),
        a: StochasticMatrix::from_matrix_unchecked(a),
        z: DataMatrix::new(z)?,
        rss,
        rss_history: history,
        iterations,
        converged,
        seed: cfg.seed,
    })
}

/// Warm-started coefficient solve for every point.
fn update_a(x: &DataMatrix, z: &DMatrix<f64>, a: &DMatrix<f64>, cfg: &AAConfig) -> Result<(DMatrix<f64>, f64)> {
    let l = cls::lipschitz(z, &cfg.inner);
    let a_new = cls::batch_raw(z, x, &cfg.inner, Some(a), l).0.into_inner();
    let rss = reconstruction_sq(x.as_matrix(), z, &a_new)?;
    Ok((a_new, rss))
}

/// `2 X^T (X B A - X) A^T`.
fn b_gradient(x: &DMatrix<f64>, b: &DMatrix<f64>, a: &DMatrix<f64>) -> DMatrix<f64> {
    let r = x * b * a - x;
    (x.transpose() * (r * a.transpose())) * 2.0
}

/// Lipschitz constant of the `B` gradient: twice the largest eigenvalue of
/// `B -> X^T X B A A^T`, found by power iteration on the implicit operator.
fn b_lipschitz(x: &DMatrix<f64>, a: &DMatrix<f64>, inner: &SolverConfig) -> f64 {
    let (n, k) = (x.ncols(), a.nrows());
    let aat = a * a.transpose();
    let lambda = power_iteration(n * k, inner.power_iters, inner.power_tol, |v| {
        let bv = DMatrix::from_column_slice(n, k, v);
        let out = x.transpose() * (x * bv) * &aat;
        out.as_slice().to_vec()
    })
    .unwrap_or_else(|| {
        log::debug!("power iteration on the B Hessian did not settle, using trace bound");
        x.norm_squared() * aat.trace()
    });
    2.0 * lambda
}

fn project_columns(m: &mut DMatrix<f64>) {
    let n = m.nrows();
    let mut scratch = Vec::with_capacity(n);
    for col in m.as_mut_slice().chunks_exact_mut(n) {
        if col.iter().all(|v| v.is_finite()) {
            project_in_place(col, &mut scratch);
        }
    }
}

/// Accelerated projected gradient on `B` with `A` fixed (monotone variant:
/// the iterate only moves when the objective does not rise, and momentum is
/// reset when it would).
fn update_b(x: &DMatrix<f64>, b: &DMatrix<f64>, a: &DMatrix<f64>, rss: f64, inner: &SolverConfig) -> (DMatrix<f64>, f64) {
    let mut l = b_lipschitz(x, a, inner);
    let mut b = b.clone();
    let mut f = rss;
    if l <= 0.0 {
        return (b, f);
    }
    let objective = |m: &DMatrix<f64>| reconstruction_sq(x, &(x * m), a).unwrap_or(f64::INFINITY);
    let mut y = b.clone();
    let mut fy = f;
    let mut t = 1.0_f64;
    for _ in 0..inner.max_inner_iters {
        if f == 0.0 {
            break;
        }
        let g = b_gradient(x, &y, a);
        let mut trial = y.clone();
        let mut ft = fy;
        for _ in 0..60 {
            trial = &y - &g / l;
            project_columns(&mut trial);
            ft = objective(&trial);
            let d = &trial - &y;
            if ft <= fy + g.dot(&d) + 0.5 * l * d.norm_squared() + 1e-15 * fy.abs() {
                break;
            }
            l *= 2.0;
        }
        let t_next = 0.5 * (1.0 + (1.0 + 4.0 * t * t).sqrt());
        if ft <= f {
            let decrease = f - ft;
            let previous = f;
            y = &trial + (&trial - &b) * ((t - 1.0) / t_next);
            b = trial;
            f = ft;
            fy = objective(&y);
            t = t_next;
            if decrease <= inner.tol * previous {
                break;
            }
        } else if t > 1.0 {
            y = b.clone();
            fy = f;
            t = 1.0;
        } else {
            break;
        }
    }
    (b, f)
}
