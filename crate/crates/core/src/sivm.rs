//! Greedy selection of data points that are as far apart as possible.
//!
//! The rule is furthest-sum: the first pick is the point farthest from the
//! data centroid, every later pick maximizes the summed Euclidean distance to
//! the points already chosen. Ties go to the lowest index.

use rayon::prelude::*;

use crate::cls::{self, SolverConfig};
use crate::error::{Error, Result};
use crate::types::{residual_sq, DataMatrix, Factorization, StochasticMatrix};

#[derive(Debug, Clone, PartialEq)]
pub struct SelectionResult {
    /// Distinct column indices in pick order.
    pub indices: Vec<usize>,
    /// Greedy objective of each pick: distance to the centroid for the first,
    /// summed distance to earlier picks afterwards.
    pub selection_scores: Vec<f64>,
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Index of the largest score among `candidates`, lowest index on ties.
fn argmax(scores: &[f64], eligible: impl Fn(usize) -> bool) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &s) in scores.iter().enumerate() {
        if !eligible(i) {
            continue;
        }
        match best {
            Some((_, b)) if s <= b => {}
            _ => best = Some((i, s)),
        }
    }
    best
}

pub fn select_sivm(x: &DataMatrix, k: usize) -> Result<SelectionResult> {
    let n = x.ncols();
    if k < 1 {
        return Err(Error::InvalidParameter("SiVM needs k >= 1".into()));
    }
    if k > n {
        return Err(Error::InvalidParameter(format!("SiVM cannot select k = {k} of {n} points")));
    }
    let m = x.nrows();
    let mut centroid = vec![0.0; m];
    for col in x.columns() {
        centroid.iter_mut().zip(col).for_each(|(c, v)| *c += v);
    }
    centroid.iter_mut().for_each(|c| *c /= n as f64);

    let from_centroid: Vec<f64> = (0..n).into_par_iter().map(|i| distance(x.column(i), &centroid)).collect();
    let (first, score) = argmax(&from_centroid, |_| true).expect("n >= 1");

    let mut selected = vec![false; n];
    let mut indices = vec![first];
    let mut selection_scores = vec![score];
    selected[first] = true;

    let mut sums = vec![0.0; n];
    while indices.len() < k {
        let last = x.column(*indices.last().expect("non-empty"));
        let added: Vec<f64> = (0..n).into_par_iter().map(|i| distance(x.column(i), last)).collect();
        sums.iter_mut().zip(&added).for_each(|(s, d)| *s += d);
        let (next, score) = argmax(&sums, |i| !selected[i]).expect("k <= n leaves a candidate");
        selected[next] = true;
        indices.push(next);
        selection_scores.push(score);
    }
    Ok(SelectionResult { indices, selection_scores })
}

/// The data point with the largest summed distance to the columns of `anchors`.
///
/// Used to grow a set of archetypes by one.
pub fn furthest_from(x: &DataMatrix, anchors: &DataMatrix) -> Result<usize> {
    if anchors.nrows() != x.nrows() {
        return Err(crate::error::shape("furthest_from", x.nrows(), anchors.nrows()));
    }
    let sums: Vec<f64> = (0..x.ncols())
        .into_par_iter()
        .map(|i| anchors.columns().map(|a| distance(x.column(i), a)).sum())
        .collect();
    Ok(argmax(&sums, |_| true).expect("n >= 1").0)
}

/// Fast approximate archetypal analysis: archetypes are the SiVM picks and
/// only `A` is optimized.
pub fn sivm_factorization(x: &DataMatrix, k: usize, inner: &SolverConfig, seed: u64) -> Result<Factorization> {
    let sel = select_sivm(x, k)?;
    factorization_from_selection(x, &sel.indices, inner, seed)
}

/// Indicator `B` on `indices`, optimal `A` given that `B`.
pub fn factorization_from_selection(
    x: &DataMatrix,
    indices: &[usize],
    inner: &SolverConfig,
    seed: u64,
) -> Result<Factorization> {
    let b = StochasticMatrix::indicator(x.ncols(), indices)?;
    let z = x.mul_stochastic(&b)?;
    let a = cls::solve_simplex_ls_batch(&z, x, inner, None)?;
    let rss = residual_sq(x, &b, &a)?;
    Ok(Factorization {
        b,
        a,
        z,
        rss,
        rss_history: vec![rss],
        iterations: 0,
        converged: true,
        seed,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(p: &[[f64; 2]]) -> DataMatrix {
        DataMatrix::from_columns(&p.iter().map(|q| q.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    #[test]
    fn square_corners_are_all_selected() {
        let x = pts(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5]]);
        let sel = select_sivm(&x, 4).unwrap();
        let mut idx = sel.indices.clone();
        assert_eq!(sel.indices, vec![0, 2, 1, 3]);
        idx.sort();
        assert_eq!(idx, vec![0, 1, 2, 3]);
    }

    #[test]
    fn pair_selection_matches_exhaustive_search() {
        let data = [[0.0, 0.0], [1.0, 0.0], [0.5, 0.1], [0.5, 0.05]];
        let x = pts(&data);
        let mut best = (0, 0, -1.0);
        for i in 0..4 {
            for j in (i + 1)..4 {
                let d = distance(&data[i], &data[j]);
                if d > best.2 {
                    best = (i, j, d);
                }
            }
        }
        let mut sel = select_sivm(&x, 2).unwrap().indices;
        sel.sort();
        assert_eq!(sel, vec![best.0, best.1]);
        assert_eq!(sel, vec![0, 1]);
    }

    #[test]
    fn single_pick_is_farthest_from_centroid() {
        let x = pts(&[[0.0, 0.0], [1.0, 0.0], [5.0, 0.0], [1.0, 1.0]]);
        let sel = select_sivm(&x, 1).unwrap();
        assert_eq!(sel.indices, vec![2]);
        assert!((sel.selection_scores[0] - (3.25f64.powi(2) + 0.25f64.powi(2)).sqrt()).abs() < 1e-12);
    }

    #[test]
    fn rejects_bad_k() {
        let x = DataMatrix::identity(3);
        assert!(select_sivm(&x, 0).is_err());
        assert!(select_sivm(&x, 4).is_err());
    }

    #[test]
    fn identity_data_picks_leading_vertices() {
        let sel = select_sivm(&DataMatrix::identity(7), 4).unwrap();
        assert_eq!(sel.indices, vec![0, 1, 2, 3]);
    }

    #[test]
    fn identity_rss_matches_closed_form() {
        let cfg = SolverConfig::default();
        for q in 2..=30 {
            let x = DataMatrix::identity(q);
            for k in 1..=q {
                let f = sivm_factorization(&x, k, &cfg, 0).unwrap();
                let expected = (q - k) as f64 * (k as f64 + 1.0) / k as f64;
                assert!((f.rss - expected).abs() <= 1e-8, "q={q} k={k} rss={}", f.rss);
            }
        }
    }

    #[test]
    fn triangle_with_interior_points_leaves_only_interior_residuals() {
        let x = pts(&[[0.0, 0.0], [4.0, 0.0], [0.0, 3.0], [1.0, 1.0], [2.0, 0.5], [0.5, 2.0]]);
        let cfg = SolverConfig { max_inner_iters: 5000, tol: 1e-15, ..SolverConfig::default() };
        let f = sivm_factorization(&x, 3, &cfg, 0).unwrap();
        let order = select_sivm(&x, 3).unwrap().indices;
        let mut sel = order.clone();
        sel.sort();
        assert_eq!(sel, vec![0, 1, 2]);
        // Vertices reconstruct exactly; each interior point is its own
        // projection onto the triangle, so the oracle residual is zero.
        let z = x.select_columns(&[0, 1, 2]).unwrap();
        let mut per_point = 0.0;
        for i in 3..6 {
            per_point += cls::solve_simplex_ls(&z, x.column(i), &cfg, None).unwrap().residual_sq;
        }
        for i in 0..3 {
            let j = order.iter().position(|&s| s == i).unwrap();
            assert!((f.a.column(i)[j] - 1.0).abs() < 1e-9, "{:?}", f.a.column(i));
        }
        assert!((f.rss - per_point).abs() < 1e-10, "rss={} oracle={}", f.rss, per_point);
        assert!(f.rss < 1e-10);
    }

    #[test]
    fn extension_pick_is_far_from_anchors() {
        let x = pts(&[[0.0, 0.0], [1.0, 0.0], [0.5, 3.0], [0.5, 0.2]]);
        let anchors = pts(&[[0.0, 0.0], [1.0, 0.0]]);
        assert_eq!(furthest_from(&x, &anchors).unwrap(), 2);
    }
}
