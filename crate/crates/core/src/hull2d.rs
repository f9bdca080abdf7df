//! Exact convex hull of planar point sets, plus a dimension-free extremality
//! test used as its oracle.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::types::DataMatrix;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HullResult {
    /// Counter-clockwise, starting at the lexicographically smallest vertex.
    pub vertex_indices: Vec<usize>,
    pub q: usize,
}

fn cross(o: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - o[0]) * (b[1] - o[1]) - (a[1] - o[1]) * (b[0] - o[0])
}

fn point(x: &DataMatrix, i: usize) -> [f64; 2] {
    let c = x.column(i);
    [c[0], c[1]]
}

/// Andrew's monotone chain. Collinear boundary points and duplicates are
/// dropped (a duplicate set is represented by its lowest index).
pub fn convex_hull_2d(points: &DataMatrix) -> Result<HullResult> {
    if points.nrows() != 2 {
        return Err(Error::InvalidParameter(format!("convex_hull_2d needs 2-D points, got dimension {}", points.nrows())));
    }
    let n = points.ncols();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| {
        let (p, q) = (point(points, i), point(points, j));
        p[0].total_cmp(&q[0]).then(p[1].total_cmp(&q[1])).then(i.cmp(&j))
    });
    order.dedup_by(|later, earlier| point(points, *later) == point(points, *earlier));

    if order.len() <= 2 {
        return Ok(HullResult { q: order.len(), vertex_indices: order });
    }

    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for &i in &order {
        let p = point(points, i);
        for d in 0..2 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    let scale = (hi[0] - lo[0]).max(hi[1] - lo[1]);
    let tol = 1e-12 * scale * scale;

    let mut hull: Vec<usize> = Vec::with_capacity(2 * order.len());
    let chain = |hull: &mut Vec<usize>, i: usize, floor: usize| {
        while hull.len() >= floor + 2 {
            let (a, b) = (hull[hull.len() - 2], hull[hull.len() - 1]);
            if cross(point(points, a), point(points, b), point(points, i)) <= tol {
                hull.pop();
            } else {
                break;
            }
        }
        hull.push(i);
    };
    for &i in &order {
        chain(&mut hull, i, 0);
    }
    let lower_len = hull.len() - 1;
    for &i in order.iter().rev().skip(1) {
        chain(&mut hull, i, lower_len);
    }
    hull.pop();
    Ok(HullResult { q: hull.len(), vertex_indices: hull })
}

/// Coordinates of the hull vertices in hull order.
pub fn hull_polygon(points: &DataMatrix, hull: &HullResult) -> Vec<[f64; 2]> {
    hull.vertex_indices.iter().map(|&i| point(points, i)).collect()
}

/// Whether point `i` is not a convex combination of the other points, i.e.
/// `min ||x_i - X_{-i} a||^2 > tol` over the simplex.
///
/// The search stops as soon as the objective drops to `tol` or a Frank-Wolfe
/// duality bound certifies that the minimum exceeds it.
pub fn extremality_test(x: &DataMatrix, i: usize, tol: f64) -> Result<bool> {
    let n = x.ncols();
    if n < 2 {
        return Err(Error::InvalidParameter("extremality test needs at least two points".into()));
    }
    if i >= n {
        return Err(Error::InvalidParameter(format!("point index {i} out of range 0..{n}")));
    }
    let target = x.column(i);
    let shifted: Vec<Vec<f64>> = (0..n)
        .filter(|&j| j != i)
        .map(|j| x.column(j).iter().zip(target).map(|(p, t)| p - t).collect())
        .collect();
    Ok(min_norm_sq(&shifted, tol) > tol)
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn combine(pts: &[Vec<f64>], set: &[usize], w: &[f64]) -> Vec<f64> {
    let mut y = vec![0.0; pts[0].len()];
    for (&j, &wj) in set.iter().zip(w) {
        for (yi, pi) in y.iter_mut().zip(&pts[j]) {
            *yi += wj * pi;
        }
    }
    y
}

/// Affine-hull minimum-norm coefficients over `set` (sum to one).
fn affine_min_norm(pts: &[Vec<f64>], set: &[usize]) -> Option<Vec<f64>> {
    let m = set.len();
    let mut kkt = DMatrix::<f64>::zeros(m + 1, m + 1);
    for (r, &a) in set.iter().enumerate() {
        for (c, &b) in set.iter().enumerate() {
            kkt[(r, c)] = dot(&pts[a], &pts[b]);
        }
        kkt[(r, m)] = 1.0;
        kkt[(m, r)] = 1.0;
    }
    let mut rhs = nalgebra::DVector::<f64>::zeros(m + 1);
    rhs[m] = 1.0;
    let sol = kkt.lu().solve(&rhs)?;
    let v: Vec<f64> = sol.iter().take(m).copied().collect();
    v.iter().all(|c| c.is_finite()).then_some(v)
}

/// Squared distance from the origin to the hull of `pts` (Wolfe's
/// minimum-norm-point method). Returns early once the answer is known to
/// lie on one side of `tol`.
fn min_norm_sq(pts: &[Vec<f64>], tol: f64) -> f64 {
    let scale = pts.iter().map(|p| dot(p, p)).fold(0.0, f64::max).max(f64::MIN_POSITIVE);
    let eps = 1e-13 * scale;
    let first = (0..pts.len())
        .min_by(|&a, &b| dot(&pts[a], &pts[a]).total_cmp(&dot(&pts[b], &pts[b])))
        .expect("non-empty point set");
    let mut set = vec![first];
    let mut w = vec![1.0];
    for _ in 0..10 * pts.len() + 100 {
        let y = combine(pts, &set, &w);
        let yy = dot(&y, &y);
        if yy <= tol {
            return yy;
        }
        let (j, yp) = (0..pts.len())
            .map(|j| (j, dot(&y, &pts[j])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty point set");
        if yp > 0.0 && yp * yp / yy > tol {
            return yp * yp / yy;
        }
        if yy - yp <= eps || set.contains(&j) {
            return yy;
        }
        set.push(j);
        w.push(0.0);
        loop {
            let Some(v) = affine_min_norm(pts, &set) else {
                // Affinely dependent corral; drop the newest point and stop.
                set.pop();
                w.pop();
                return dot(&combine(pts, &set, &w), &combine(pts, &set, &w));
            };
            if v.iter().all(|&c| c > 1e-14) {
                w = v;
                break;
            }
            let theta = w
                .iter()
                .zip(&v)
                .filter(|(_, &vi)| vi <= 1e-14)
                .map(|(&wi, &vi)| wi / (wi - vi))
                .fold(1.0, f64::min);
            for (wi, vi) in w.iter_mut().zip(&v) {
                *wi += theta * (vi - *wi);
            }
            let keep: Vec<bool> = w.iter().map(|&c| c > 1e-14).collect();
            let mut it = keep.iter();
            set.retain(|_| *it.next().unwrap());
            let mut it = keep.iter();
            w.retain(|_| *it.next().unwrap());
            let total: f64 = w.iter().sum();
            w.iter_mut().for_each(|c| *c /= total);
        }
    }
    let y = combine(pts, &set, &w);
    dot(&y, &y)
}

fn point_segment_distance(p: [f64; 2], a: [f64; 2], b: [f64; 2]) -> f64 {
    let (dx, dy) = (b[0] - a[0], b[1] - a[1]);
    let len2 = dx * dx + dy * dy;
    let t = if len2 > 0.0 {
        (((p[0] - a[0]) * dx + (p[1] - a[1]) * dy) / len2).clamp(0.0, 1.0)
    } else {
        0.0
    };
    ((p[0] - a[0] - t * dx).powi(2) + (p[1] - a[1] - t * dy).powi(2)).sqrt()
}

/// Distance from `p` to the filled convex polygon `poly` (CCW); zero inside.
pub fn distance_to_convex_polygon(p: [f64; 2], poly: &[[f64; 2]]) -> f64 {
    match poly.len() {
        0 => f64::INFINITY,
        1 => point_segment_distance(p, poly[0], poly[0]),
        _ => {
            let edges = || (0..poly.len()).map(|i| (poly[i], poly[(i + 1) % poly.len()]));
            if poly.len() >= 3 && edges().all(|(a, b)| cross(a, b, p) >= 0.0) {
                return 0.0;
            }
            edges().map(|(a, b)| point_segment_distance(p, a, b)).fold(f64::INFINITY, f64::min)
        }
    }
}

/// Hausdorff distance between two filled convex polygons given CCW.
pub fn convex_polygon_hausdorff(p: &[[f64; 2]], q: &[[f64; 2]]) -> f64 {
    let one_sided = |from: &[[f64; 2]], to: &[[f64; 2]]| {
        from.iter().map(|&v| distance_to_convex_polygon(v, to)).fold(0.0, f64::max)
    };
    one_sided(p, q).max(one_sided(q, p))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn pts(p: &[[f64; 2]]) -> DataMatrix {
        DataMatrix::from_columns(&p.iter().map(|q| q.to_vec()).collect::<Vec<_>>()).unwrap()
    }

    fn square_and_center() -> DataMatrix {
        pts(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.5]])
    }

    #[test]
    fn square_with_center() {
        let h = convex_hull_2d(&square_and_center()).unwrap();
        assert_eq!(h.vertex_indices, vec![0, 1, 2, 3]);
        assert_eq!(h.q, 4);
    }

    #[test]
    fn collinear_points_keep_endpoints() {
        let h = convex_hull_2d(&pts(&[[1.0, 1.0], [0.0, 0.0], [2.0, 2.0]])).unwrap();
        assert_eq!(h.vertex_indices, vec![1, 2]);
    }

    #[test]
    fn edge_midpoints_and_duplicates_are_dropped() {
        let h = convex_hull_2d(&pts(&[[0.0, 0.0], [2.0, 0.0], [1.0, 0.0], [2.0, 2.0], [2.0, 0.0], [0.0, 2.0], [0.0, 1.0]])).unwrap();
        assert_eq!(h.vertex_indices, vec![0, 1, 3, 5]);
    }

    #[test]
    fn degenerate_inputs() {
        assert_eq!(convex_hull_2d(&pts(&[[3.0, 1.0]])).unwrap().vertex_indices, vec![0]);
        assert_eq!(convex_hull_2d(&pts(&[[3.0, 1.0], [3.0, 1.0]])).unwrap().vertex_indices, vec![0]);
        assert!(convex_hull_2d(&DataMatrix::identity(3)).is_err());
    }

    #[test]
    fn decagon_with_interior_points() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let mut p: Vec<[f64; 2]> = (0..10)
            .map(|j| {
                let t = std::f64::consts::TAU * j as f64 / 10.0;
                [t.cos(), t.sin()]
            })
            .collect();
        for _ in 0..100 {
            let (r, t) = (0.8 * rng.random::<f64>().sqrt(), rng.random_range(0.0..std::f64::consts::TAU));
            p.push([r * t.cos(), r * t.sin()]);
        }
        let x = pts(&p);
        let h = convex_hull_2d(&x).unwrap();
        assert_eq!(h.q, 10);
        let mut v = h.vertex_indices.clone();
        v.sort();
        assert_eq!(v, (0..10).collect::<Vec<_>>());
        let oracle: Vec<usize> = (0..x.ncols()).filter(|&i| extremality_test(&x, i, 1e-10).unwrap()).collect();
        assert_eq!(oracle, v);
    }

    #[test]
    fn extremality_examples() {
        let x = square_and_center();
        assert!(extremality_test(&x, 0, 1e-10).unwrap());
        assert!(!extremality_test(&x, 4, 1e-10).unwrap());
        let edge = pts(&[[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0], [0.5, 0.0]]);
        assert!(!extremality_test(&edge, 4, 1e-10).unwrap());
        assert!(extremality_test(&pts(&[[0.0, 0.0]]), 0, 1e-10).is_err());
    }

    #[test]
    fn hull_is_ccw_and_idempotent() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        for _ in 0..30 {
            let n = rng.random_range(3..80);
            let p: Vec<[f64; 2]> = (0..n).map(|_| [rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)]).collect();
            let x = pts(&p);
            let h = convex_hull_2d(&x).unwrap();
            let poly = hull_polygon(&x, &h);
            for i in 0..poly.len() {
                let (a, b, c) = (poly[i], poly[(i + 1) % poly.len()], poly[(i + 2) % poly.len()]);
                assert!(cross(a, b, c) > 0.0);
            }
            let again = convex_hull_2d(&pts(&poly)).unwrap();
            assert_eq!(again.vertex_indices, (0..poly.len()).collect::<Vec<_>>());
            // Every point lies in the hull.
            for &pt in &p {
                assert!(distance_to_convex_polygon(pt, &poly) < 1e-12);
            }
        }
    }

    #[test]
    fn hausdorff_of_nested_squares() {
        let outer = [[0.0, 0.0], [2.0, 0.0], [2.0, 2.0], [0.0, 2.0]];
        let inner = [[0.5, 0.5], [1.5, 0.5], [1.5, 1.5], [0.5, 1.5]];
        assert!((convex_polygon_hausdorff(&outer, &inner) - 0.5f64.hypot(0.5)).abs() < 1e-12);
        assert_eq!(convex_polygon_hausdorff(&outer, &outer), 0.0);
    }
}
