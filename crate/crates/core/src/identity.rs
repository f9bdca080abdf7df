//! Stochastic low-rank approximations `B A` of the `q x q` identity and
//! certificates comparing their measured error `||I - B A||^2` with the
//! closed forms.
//!
//! For hull vertices `V`, `||V - V B A||^2 = ||V (I - B A)||^2`, so these
//! constructions bound what archetypal analysis and SiVM can achieve.

use nalgebra::DMatrix;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{shape, Error, Result};
use crate::types::{StochasticMatrix, StochasticVector};

/// Absolute tolerance between predicted and measured error.
pub const CERT_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ConstructionKind {
    /// `B` holds `k` vertices of the simplex.
    SivmVertices,
    /// `k = 1`, `B` is the simplex centroid.
    CentroidRank1,
    /// One `b_j` at the centre of each block of a partition of the vertices.
    Partition,
}

/// Block sizes `q_1, .., q_k >= 1` summing to `q`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Partition(Vec<usize>);

impl Partition {
    pub fn new(parts: Vec<usize>, q: usize) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidParameter("partition needs at least one part".into()));
        }
        if parts.contains(&0) {
            return Err(Error::InvalidParameter(format!("partition {parts:?} has an empty part")));
        }
        let total: usize = parts.iter().sum();
        if total != q {
            return Err(Error::InvalidParameter(format!("partition {parts:?} sums to {total}, expected q = {q}")));
        }
        Ok(Self(parts))
    }

    /// Sizes `ceil(q/k)` then `floor(q/k)`.
    pub fn balanced(q: usize, k: usize) -> Result<Self> {
        if k < 1 || k > q {
            return Err(Error::InvalidParameter(format!("balanced partition needs 1 <= k <= q, got q = {q}, k = {k}")));
        }
        let (base, extra) = (q / k, q % k);
        Self::new((0..k).map(|j| base + usize::from(j < extra)).collect(), q)
    }

    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    pub fn q(&self) -> usize {
        self.0.iter().sum()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityApproxCertificate {
    pub q: usize,
    pub k: usize,
    pub kind: ConstructionKind,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub partition: Option<Partition>,
    pub predicted_error: f64,
    pub measured_error: f64,
    pub abs_gap: f64,
    pub pass: bool,
}

fn check_qk(q: usize, k: usize) -> Result<()> {
    if k < 1 {
        return Err(Error::InvalidParameter("k must be >= 1".into()));
    }
    if k > q {
        return Err(Error::InvalidParameter(format!("k = {k} exceeds q = {q}")));
    }
    Ok(())
}

/// `B = [e_1, .., e_k]`; vertex `i <= k` is reproduced exactly and every other
/// vertex maps to the centre of the selected face.
pub fn sivm_identity_factors(q: usize, k: usize) -> Result<(StochasticMatrix, StochasticMatrix)> {
    check_qk(q, k)?;
    let b = StochasticMatrix::indicator(q, &(0..k).collect::<Vec<_>>())?;
    let cols = (0..q)
        .map(|i| if i < k { StochasticVector::vertex(k, i) } else { StochasticVector::uniform(k) })
        .collect::<Result<Vec<_>>>()?;
    let a = StochasticMatrix::from_columns(cols)?;

    #[cfg(debug_assertions)]
    if q <= 64 {
        let x = crate::types::DataMatrix::identity(q);
        let z = x.mul_stochastic(&b)?;
        let solved = crate::cls::solve_simplex_ls_batch(&z, &x, &crate::cls::SolverConfig::default(), None)?;
        debug_assert!((solved.as_matrix() - a.as_matrix()).abs().max() < 1e-9);
    }
    Ok((b, a))
}

/// `b = 1/q`, `A = 1^T`.
pub fn centroid_rank1_factors(q: usize) -> Result<(StochasticMatrix, StochasticMatrix)> {
    if q < 1 {
        return Err(Error::InvalidParameter("q must be >= 1".into()));
    }
    Ok((StochasticMatrix::uniform(q, 1)?, StochasticMatrix::uniform(1, q)?))
}

/// Column `j` of `B` is uniform on the indices of block `j`; column `i` of `A`
/// is `e_j` for the block containing `i`. Blocks are contiguous index ranges.
pub fn partition_identity_factors(q: usize, p: &Partition) -> Result<(StochasticMatrix, StochasticMatrix)> {
    if p.q() != q {
        return Err(Error::InvalidParameter(format!("partition {:?} does not sum to q = {q}", p.parts())));
    }
    let k = p.k();
    let mut b = DMatrix::zeros(q, k);
    let mut a = DMatrix::zeros(k, q);
    let mut start = 0;
    for (j, &size) in p.parts().iter().enumerate() {
        for i in start..start + size {
            b[(i, j)] = 1.0 / size as f64;
            a[(j, i)] = 1.0;
        }
        start += size;
    }
    Ok((StochasticMatrix::from_matrix(b)?, StochasticMatrix::from_matrix(a)?))
}

/// `||I - B A||^2`, formed explicitly.
pub fn frobenius_gap(b: &StochasticMatrix, a: &StochasticMatrix) -> Result<f64> {
    let q = b.nrows();
    if a.nrows() != b.ncols() || a.ncols() != q {
        return Err(shape(
            "frobenius_gap",
            format!("A of shape {}x{q}", b.ncols()),
            format!("{}x{}", a.nrows(), a.ncols()),
        ));
    }
    let gap = DMatrix::<f64>::identity(q, q) - b.as_matrix() * a.as_matrix();
    Ok(gap.iter().map(|v| v * v).sum())
}

/// Upper bound `2q` valid for every stochastic pair.
pub fn worst_case_bound(q: usize) -> f64 {
    2.0 * q as f64
}

/// Error of the SiVM vertex construction, `(q - k)(k + 1)/k`.
pub fn sivm_error(q: usize, k: usize) -> Result<f64> {
    check_qk(q, k)?;
    Ok((q - k) as f64 * (k as f64 + 1.0) / k as f64)
}

/// Error of any partition construction, `q - k`.
pub fn partition_error(q: usize, k: usize) -> Result<f64> {
    check_qk(q, k)?;
    Ok((q - k) as f64)
}

/// Error of the centroid construction, `q - 1`.
pub fn centroid_error(q: usize) -> Result<f64> {
    check_qk(q, 1)?;
    Ok((q - 1) as f64)
}

/// Partition error over SiVM error, `k / (k + 1)`; independent of `q`.
pub fn relative_accuracy(k: usize) -> Result<f64> {
    if k < 1 {
        return Err(Error::InvalidParameter("relative accuracy needs k >= 1".into()));
    }
    Ok(k as f64 / (k as f64 + 1.0))
}

/// Builds the factors for `kind` (and the partition actually used, if any).
pub fn construct(
    q: usize,
    k: usize,
    kind: ConstructionKind,
    partition: Option<Partition>,
) -> Result<(StochasticMatrix, StochasticMatrix, Option<Partition>)> {
    check_qk(q, k)?;
    match kind {
        ConstructionKind::SivmVertices => {
            let (b, a) = sivm_identity_factors(q, k)?;
            Ok((b, a, None))
        }
        ConstructionKind::CentroidRank1 => {
            if k != 1 {
                return Err(Error::InvalidParameter(format!("centroid construction is rank one, got k = {k}")));
            }
            let (b, a) = centroid_rank1_factors(q)?;
            Ok((b, a, None))
        }
        ConstructionKind::Partition => {
            let p = match partition {
                Some(p) => p,
                None => Partition::balanced(q, k)?,
            };
            if p.k() != k {
                return Err(Error::InvalidParameter(format!("partition {:?} has {} parts, expected k = {k}", p.parts(), p.k())));
            }
            let (b, a) = partition_identity_factors(q, &p)?;
            Ok((b, a, Some(p)))
        }
    }
}

pub fn predicted_error(q: usize, k: usize, kind: ConstructionKind) -> Result<f64> {
    match kind {
        ConstructionKind::SivmVertices => sivm_error(q, k),
        ConstructionKind::CentroidRank1 => centroid_error(q),
        ConstructionKind::Partition => partition_error(q, k),
    }
}

/// Builds the construction and compares its measured error with the closed form.
pub fn certify(q: usize, k: usize, kind: ConstructionKind, partition: Option<Partition>) -> Result<IdentityApproxCertificate> {
    let (b, a, partition) = construct(q, k, kind, partition)?;
    certify_factors(q, k, kind, partition, &b, &a)
}

/// Certificate for caller-supplied factors against the closed form of `kind`.
pub fn certify_factors(
    q: usize,
    k: usize,
    kind: ConstructionKind,
    partition: Option<Partition>,
    b: &StochasticMatrix,
    a: &StochasticMatrix,
) -> Result<IdentityApproxCertificate> {
    if b.nrows() != q || b.ncols() != k {
        return Err(shape("certify_factors", format!("B of shape {q}x{k}"), format!("{}x{}", b.nrows(), b.ncols())));
    }
    let predicted_error = predicted_error(q, k, kind)?;
    let measured_error = frobenius_gap(b, a)?;
    let abs_gap = (predicted_error - measured_error).abs();
    Ok(IdentityApproxCertificate {
        q,
        k,
        kind,
        partition,
        predicted_error,
        measured_error,
        abs_gap,
        pass: abs_gap <= CERT_TOL,
    })
}

/// Random column-stochastic pair (`q x k`, `k x q`) drawn from a mixture of
/// flat, sharply peaked and vertex-sparse columns, to probe the bounds from
/// the interior and the boundary of the simplex.
pub fn sample_stochastic_pair<R: Rng + ?Sized>(q: usize, k: usize, rng: &mut R) -> Result<(StochasticMatrix, StochasticMatrix)> {
    check_qk(q, k)?;
    Ok((sample_matrix(q, k, rng)?, sample_matrix(k, q, rng)?))
}

fn sample_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Result<StochasticMatrix> {
    let mut m = DMatrix::zeros(rows, cols);
    for mut col in m.column_iter_mut() {
        match rng.random_range(0..3) {
            0 => col.iter_mut().for_each(|v| *v = -(1.0 - rng.random::<f64>()).ln()),
            1 => col.iter_mut().for_each(|v| *v = rng.random::<f64>().powi(8)),
            _ => {
                let support = rng.random_range(1..=rows.min(3));
                for _ in 0..support {
                    col[rng.random_range(0..rows)] += rng.random::<f64>() + 1e-3;
                }
            }
        }
        let s: f64 = col.iter().sum();
        if s > 0.0 {
            col.iter_mut().for_each(|v| *v /= s);
        } else {
            col.fill(1.0 / rows as f64);
        }
    }
    StochasticMatrix::from_matrix(m)
}
