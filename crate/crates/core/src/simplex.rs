//! Geometry of the standard simplex: Euclidean projection, centroid, and the
//! heights that govern the vertex-selection error.

use crate::error::{Error, Result};
use crate::types::StochasticVector;

/// A point of the standard simplex.
pub type SimplexPoint = StochasticVector;

/// Euclidean projection of `v` onto the standard simplex.
///
/// The result is `max(v - tau, 0)` where `tau` solves
/// `sum(max(v - tau, 0)) = 1`. Inputs that are already stochastic (to
/// rounding) are returned unchanged, which makes the map idempotent
/// bit-for-bit.
pub fn project_to_simplex(v: &[f64]) -> Result<SimplexPoint> {
    let q = v.len();
    if q == 0 {
        return Err(Error::Empty("cannot project an empty vector"));
    }
    if let Some(i) = v.iter().position(|x| !x.is_finite()) {
        return Err(Error::NonFinite { row: i, col: 0 });
    }
    if is_feasible(v) {
        return Ok(StochasticVector::from_raw_unchecked(v.to_vec()));
    }

    let mut w = v.to_vec();
    let mut scratch = Vec::with_capacity(q);
    project_in_place(&mut w, &mut scratch);
    Ok(StochasticVector::from_raw_unchecked(w))
}

/// In-place projection of a finite `v`; `scratch` is reused across calls.
pub(crate) fn project_in_place(v: &mut [f64], scratch: &mut Vec<f64>) {
    let q = v.len();
    if is_feasible(v) {
        return;
    }
    // Michelot's iteration: drop entries at or below the running threshold
    // until the support is stable. The threshold grows monotonically and
    // reaches the sort-based value in at most `q` passes.
    scratch.clear();
    scratch.extend_from_slice(v);
    let mut tau = (scratch.iter().sum::<f64>() - 1.0) / q as f64;
    loop {
        let before = scratch.len();
        scratch.retain(|&u| u > tau);
        if scratch.len() == before || scratch.is_empty() {
            break;
        }
        tau = (scratch.iter().sum::<f64>() - 1.0) / scratch.len() as f64;
    }

    v.iter_mut().for_each(|x| *x = (*x - tau).max(0.0));
    let s: f64 = v.iter().sum();
    if (s - 1.0).abs() > feasibility_tol(q) {
        v.iter_mut().for_each(|x| *x /= s);
    }
}

fn feasibility_tol(q: usize) -> f64 {
    4.0 * q as f64 * f64::EPSILON
}

fn is_feasible(v: &[f64]) -> bool {
    v.iter().all(|&x| x >= 0.0) && (v.iter().sum::<f64>() - 1.0).abs() <= feasibility_tol(v.len())
}

/// Barycenter `1/q` of the simplex in `R^q`.
pub fn simplex_centroid(q: usize) -> Result<SimplexPoint> {
    if q < 1 {
        return Err(Error::InvalidParameter("simplex centroid needs q >= 1".into()));
    }
    StochasticVector::uniform(q)
}

/// Height of the standard simplex spanned by the `m` unit vectors of `R^m`,
/// `sqrt(m / (2 (m - 1))) * sqrt(2)`.
pub fn simplex_height(m: usize) -> Result<f64> {
    if m < 2 {
        return Err(Error::InvalidParameter(format!("simplex height needs m >= 2, got {m}")));
    }
    let m = m as f64;
    Ok((m / (2.0 * (m - 1.0))).sqrt() * std::f64::consts::SQRT_2)
}

/// Distance from an unselected vertex to the face spanned by `k` other
/// vertices, `sqrt((k + 1) / (2k)) * sqrt(2)`.
pub fn vertex_to_subsimplex_distance(k: usize) -> Result<f64> {
    if k < 1 {
        return Err(Error::InvalidParameter(format!("sub-simplex needs k >= 1 vertices, got {k}")));
    }
    let k = k as f64;
    Ok(((k + 1.0) / (2.0 * k)).sqrt() * std::f64::consts::SQRT_2)
}
