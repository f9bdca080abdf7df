//! Matrix and stochastic-vector types shared by every solver.
//!
//! Data matrices follow the column-per-point layout: an `m x n` matrix holds
//! `n` points of dimension `m`. Storage is nalgebra's column-major `DMatrix`,
//! so a point is a contiguous slice.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{shape, Error, Result};

/// Tolerance on `|sum - 1|` accepted when validating stochastic input.
pub const STOCHASTIC_TOL: f64 = 1e-10;

/// Finite real matrix whose columns are data points.
#[derive(Debug, Clone, PartialEq)]
pub struct DataMatrix(DMatrix<f64>);

impl DataMatrix {
    pub fn new(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() == 0 || m.ncols() == 0 {
            return Err(Error::Empty("data matrix needs at least one row and one column"));
        }
        for (j, col) in m.column_iter().enumerate() {
            if let Some(i) = col.iter().position(|v| !v.is_finite()) {
                return Err(Error::NonFinite { row: i, col: j });
            }
        }
        Ok(Self(m))
    }

    /// Builds a matrix from a list of points (one `Vec` per column).
    pub fn from_columns(columns: &[Vec<f64>]) -> Result<Self> {
        let Some(first) = columns.first() else {
            return Err(Error::Empty("no columns"));
        };
        let m = first.len();
        if let Some((j, c)) = columns.iter().enumerate().find(|(_, c)| c.len() != m) {
            return Err(shape("DataMatrix::from_columns", format!("{m} rows"), format!("{} rows in column {j}", c.len())));
        }
        let data: Vec<f64> = columns.iter().flatten().copied().collect();
        Self::new(DMatrix::from_vec(m, columns.len(), data))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    pub fn nrows(&self) -> usize {
        self.0.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.0.ncols()
    }

    /// The `j`-th point.
    pub fn column(&self, j: usize) -> &[f64] {
        let m = self.0.nrows();
        &self.0.as_slice()[j * m..(j + 1) * m]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.0.as_slice().chunks_exact(self.0.nrows())
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    /// Keeps only the listed columns, in the order given.
    pub fn select_columns(&self, indices: &[usize]) -> Result<Self> {
        if indices.is_empty() {
            return Err(Error::Empty("column selection"));
        }
        let cols: Vec<Vec<f64>> = indices
            .iter()
            .map(|&j| {
                if j >= self.ncols() {
                    Err(Error::InvalidParameter(format!("column index {j} out of range 0..{}", self.ncols())))
                } else {
                    Ok(self.column(j).to_vec())
                }
            })
            .collect::<Result<_>>()?;
        Self::from_columns(&cols)
    }

    /// `self * b`, the archetype matrix `Z = X B`.
    pub fn mul_stochastic(&self, b: &StochasticMatrix) -> Result<DataMatrix> {
        if b.nrows() != self.ncols() {
            return Err(shape("X * B", format!("B with {} rows", self.ncols()), format!("{} rows", b.nrows())));
        }
        Ok(Self(&self.0 * b.as_matrix()))
    }

    pub fn frobenius_sq(&self) -> f64 {
        frobenius_sq(self)
    }
}

/// Non-negative vector with unit sum; a point of the standard simplex.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct StochasticVector(Vec<f64>);

impl StochasticVector {
    /// Validates `entries` and rescales the sum to exactly one (up to rounding).
    pub fn new(entries: Vec<f64>) -> Result<Self> {
        check_stochastic(&entries, 0)?;
        let s: f64 = entries.iter().sum();
        Ok(Self(entries.into_iter().map(|v| v / s).collect()))
    }

    /// Wraps entries already known to be stochastic (projection output).
    pub(crate) fn from_raw_unchecked(entries: Vec<f64>) -> Self {
        debug_assert!(check_stochastic(&entries, 0).is_ok());
        Self(entries)
    }

    pub fn uniform(q: usize) -> Result<Self> {
        if q == 0 {
            return Err(Error::InvalidParameter("simplex dimension must be at least 1".into()));
        }
        Ok(Self(vec![1.0 / q as f64; q]))
    }

    /// The `i`-th vertex `e_i` of the simplex in `R^q`.
    pub fn vertex(q: usize, i: usize) -> Result<Self> {
        if i >= q {
            return Err(Error::InvalidParameter(format!("vertex {i} out of range for dimension {q}")));
        }
        let mut v = vec![0.0; q];
        v[i] = 1.0;
        Ok(Self(v))
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.0
    }
}

impl TryFrom<Vec<f64>> for StochasticVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<StochasticVector> for Vec<f64> {
    fn from(v: StochasticVector) -> Self {
        v.0
    }
}

fn check_stochastic(entries: &[f64], col: usize) -> Result<()> {
    if entries.is_empty() {
        return Err(Error::Empty("stochastic vector"));
    }
    if let Some(i) = entries.iter().position(|v| !v.is_finite()) {
        return Err(Error::NonFinite { row: i, col });
    }
    if let Some(v) = entries.iter().find(|&&v| v < 0.0) {
        return Err(Error::NotStochastic { col, reason: format!("negative entry {v}") });
    }
    let s: f64 = entries.iter().sum();
    if (s - 1.0).abs() > STOCHASTIC_TOL {
        return Err(Error::NotStochastic { col, reason: format!("entries sum to {s}") });
    }
    Ok(())
}

/// Column-stochastic matrix (every column lies in the standard simplex).
#[derive(Debug, Clone, PartialEq)]
pub struct StochasticMatrix(DMatrix<f64>);

impl StochasticMatrix {
    /// Validates each column of `m`.
    pub fn from_matrix(m: DMatrix<f64>) -> Result<Self> {
        if m.nrows() == 0 || m.ncols() == 0 {
            return Err(Error::Empty("stochastic matrix"));
        }
        let rows = m.nrows();
        let mut m = m;
        for (j, col) in m.as_mut_slice().chunks_exact_mut(rows).enumerate() {
            check_stochastic(col, j)?;
            let s: f64 = col.iter().sum();
            col.iter_mut().for_each(|v| *v /= s);
        }
        Ok(Self(m))
    }

    pub fn from_columns(columns: Vec<StochasticVector>) -> Result<Self> {
        let Some(first) = columns.first() else {
            return Err(Error::Empty("stochastic matrix"));
        };
        let q = first.dim();
        if let Some((j, c)) = columns.iter().enumerate().find(|(_, c)| c.dim() != q) {
            return Err(shape("StochasticMatrix::from_columns", format!("dimension {q}"), format!("{} in column {j}", c.dim())));
        }
        let k = columns.len();
        let data: Vec<f64> = columns.into_iter().flat_map(StochasticVector::into_vec).collect();
        Ok(Self(DMatrix::from_vec(q, k, data)))
    }

    pub fn identity(n: usize) -> Self {
        Self(DMatrix::identity(n, n))
    }

    /// `rows x indices.len()` matrix with column `j` equal to `e_{indices[j]}`.
    pub fn indicator(rows: usize, indices: &[usize]) -> Result<Self> {
        let cols = indices
            .iter()
            .map(|&i| StochasticVector::vertex(rows, i))
            .collect::<Result<Vec<_>>>()?;
        Self::from_columns(cols)
    }

    /// Every column uniform `1/rows`.
    pub fn uniform(rows: usize, cols: usize) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Empty("stochastic matrix"));
        }
        Ok(Self(DMatrix::from_element(rows, cols, 1.0 / rows as f64)))
    }

    /// Columns drawn uniformly from the simplex (flat Dirichlet).
    pub fn random<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::Empty("stochastic matrix"));
        }
        let mut m = DMatrix::zeros(rows, cols);
        for mut col in m.column_iter_mut() {
            // -ln(U) with U in (0, 1] is standard exponential.
            col.iter_mut().for_each(|v| *v = -(1.0 - rng.random::<f64>()).ln());
            let s: f64 = col.iter().sum();
            if s > 0.0 {
                col.iter_mut().for_each(|v| *v /= s);
            } else {
                col.fill(1.0 / rows as f64);
            }
        }
        Ok(Self(m))
    }

    pub(crate) fn from_matrix_unchecked(m: DMatrix<f64>) -> Self {
        Self(m)
    }

    pub fn nrows(&self) -> usize {
        self.0.nrows()
    }

    pub fn ncols(&self) -> usize {
        self.0.ncols()
    }

    pub fn column(&self, j: usize) -> &[f64] {
        let q = self.0.nrows();
        &self.0.as_slice()[j * q..(j + 1) * q]
    }

    pub fn columns(&self) -> impl Iterator<Item = &[f64]> + '_ {
        self.0.as_slice().chunks_exact(self.0.nrows())
    }

    pub fn as_matrix(&self) -> &DMatrix<f64> {
        &self.0
    }

    pub fn into_inner(self) -> DMatrix<f64> {
        self.0
    }

    /// Product of two stochastic matrices, itself column stochastic.
    pub fn mul(&self, rhs: &StochasticMatrix) -> Result<StochasticMatrix> {
        if self.ncols() != rhs.nrows() {
            return Err(shape("B * A", format!("{} rows", self.ncols()), format!("{} rows", rhs.nrows())));
        }
        Ok(Self(&self.0 * &rhs.0))
    }
}

/// Result of one archetypal-analysis run: `X ~ Z A` with `Z = X B`.
#[derive(Debug, Clone, PartialEq)]
pub struct Factorization {
    /// `n x k`, columns mix data points into archetypes.
    pub b: StochasticMatrix,
    /// `k x n`, columns mix archetypes into reconstructions.
    pub a: StochasticMatrix,
    /// `m x k` archetypes.
    pub z: DataMatrix,
    pub rss: f64,
    pub rss_history: Vec<f64>,
    pub iterations: usize,
    pub converged: bool,
    pub seed: u64,
}

impl Factorization {
    pub fn k(&self) -> usize {
        self.b.ncols()
    }
}

/// Squared Frobenius norm, the sum of squared entries.
pub fn frobenius_sq(m: &DataMatrix) -> f64 {
    sum_sq(m.as_matrix().as_slice())
}

pub(crate) fn sum_sq(values: &[f64]) -> f64 {
    values.iter().map(|v| v * v).sum()
}

/// The archetypal objective `||X - X B A||^2`.
pub fn residual_sq(x: &DataMatrix, b: &StochasticMatrix, a: &StochasticMatrix) -> Result<f64> {
    let (n, k) = (b.nrows(), b.ncols());
    if x.ncols() != n {
        return Err(shape("residual_sq", format!("B with {} rows (X has {} columns)", x.ncols(), x.ncols()), format!("B is {n}x{k}")));
    }
    if a.nrows() != k || a.ncols() != n {
        return Err(shape("residual_sq", format!("A of shape {k}x{n}"), format!("{}x{}", a.nrows(), a.ncols())));
    }
    let z = x.as_matrix() * b.as_matrix();
    reconstruction_sq(x.as_matrix(), &z, a.as_matrix())
}

/// `||X - Z A||^2` for already-formed archetypes.
pub(crate) fn reconstruction_sq(x: &DMatrix<f64>, z: &DMatrix<f64>, a: &DMatrix<f64>) -> Result<f64> {
    if z.nrows() != x.nrows() || a.nrows() != z.ncols() || a.ncols() != x.ncols() {
        return Err(shape(
            "reconstruction",
            format!("Z {}x? and A ?x{}", x.nrows(), x.ncols()),
            format!("Z {}x{}, A {}x{}", z.nrows(), z.ncols(), a.nrows(), a.ncols()),
        ));
    }
    let recon = z * a;
    Ok(x.iter().zip(recon.iter()).map(|(u, v)| (u - v) * (u - v)).sum())
}

/// Clamps negatives to zero and rescales to unit sum.
///
/// A vector with no positive entry maps to the uniform vector.
pub fn normalize_column(v: &[f64]) -> Result<StochasticVector> {
    if v.is_empty() {
        return Err(Error::Empty("cannot normalize an empty vector"));
    }
    if let Some(i) = v.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { row: i, col: 0 });
    }
    let clamped: Vec<f64> = v.iter().map(|&x| x.max(0.0)).collect();
    let s: f64 = clamped.iter().sum();
    if s <= 0.0 {
        log::warn!("normalize_column: no positive entry among {} values, using uniform", v.len());
        return StochasticVector::uniform(v.len());
    }
    Ok(StochasticVector::from_raw_unchecked(clamped.into_iter().map(|x| x / s).collect()))
}
