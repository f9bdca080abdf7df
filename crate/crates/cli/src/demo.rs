use aak_core::aa::grow;
use aak_core::hull2d::{convex_polygon_hausdorff, hull_polygon};
use aak_core::io::{write_matrix_csv, write_svg_hull_plot, HullOverlay, Orientation};
use aak_core::synthetic::{generate, Shape};
use aak_core::{convex_hull_2d, fit_aa, AAConfig, DataMatrix};
use serde::Serialize;

use crate::args::{DemoArgs, ShapeArg};
use crate::error::{emit, CliError};
use crate::factorize::with_suffix;

#[derive(Debug, Serialize)]
struct DemoRow {
    k: usize,
    rss: f64,
    iterations: usize,
    converged: bool,
    archetypes: Vec<[f64; 2]>,
    hausdorff_to_data_hull: f64,
}

#[derive(Debug, Serialize)]
struct DemoReport {
    shape: &'static str,
    n: usize,
    seed: u64,
    k_min: usize,
    k_max: usize,
    data_hull_vertices: Vec<usize>,
    rows: Vec<DemoRow>,
    rss_non_increasing: bool,
}

/// Parses the inclusive range `A..B`.
pub fn parse_k_range(s: &str) -> Result<(usize, usize), CliError> {
    let bad = || CliError::Validation(format!("--k-range must look like A..B with 1 <= A <= B, got {s:?}"));
    let (a, b) = s.split_once("..").ok_or_else(bad)?;
    let a: usize = a.trim().parse().map_err(|_| bad())?;
    let b: usize = b.trim().parse().map_err(|_| bad())?;
    if a == 0 || a > b {
        return Err(bad());
    }
    Ok((a, b))
}

fn polygon(points: &DataMatrix) -> Result<Vec<[f64; 2]>, CliError> {
    let hull = convex_hull_2d(points)?;
    Ok(hull_polygon(points, &hull))
}

pub fn run(args: &DemoArgs) -> Result<(), CliError> {
    let (k_min, k_max) = parse_k_range(&args.k_range)?;
    let (shape, name) = match args.shape {
        ShapeArg::Ring => (Shape::Ring, "ring"),
        ShapeArg::Blob => (Shape::Blob, "blob"),
        ShapeArg::Square => (Shape::Square, "square"),
    };
    let x = generate(shape, args.n, args.seed)?;
    if k_max > x.ncols() {
        return Err(CliError::Validation(format!("--k-range upper end {k_max} exceeds n = {}", x.ncols())));
    }
    let data_hull = convex_hull_2d(&x)?;
    let data_poly = hull_polygon(&x, &data_hull);

    let mut cfg = AAConfig::new(k_min);
    cfg.seed = args.seed;
    let mut fits = vec![fit_aa(&x, &cfg)?];
    for _ in k_min..k_max {
        let next = grow(&x, fits.last().expect("at least one fit"), &cfg)?;
        fits.push(next);
    }

    let mut overlays: Vec<HullOverlay> = vec![("data hull".to_string(), data_poly.clone())];
    let mut rows = Vec::with_capacity(fits.len());
    for f in &fits {
        let poly = polygon(&f.z)?;
        rows.push(DemoRow {
            k: f.k(),
            rss: f.rss,
            iterations: f.iterations,
            converged: f.converged,
            archetypes: f.z.columns().map(|c| [c[0], c[1]]).collect(),
            hausdorff_to_data_hull: convex_polygon_hausdorff(&poly, &data_poly),
        });
        overlays.push((format!("k = {}", f.k()), poly));
    }
    write_svg_hull_plot(&x, &overlays, &args.svg)?;
    if let Some(prefix) = &args.csv_prefix {
        write_matrix_csv(&x, with_suffix(prefix, ".points.csv"), Orientation::PointsAsRows)?;
        for f in &fits {
            write_matrix_csv(&f.z, with_suffix(prefix, &format!(".k{}.Z.csv", f.k())), Orientation::PointsAsRows)?;
        }
    }

    let rss_non_increasing = rows.windows(2).all(|w| w[1].rss <= w[0].rss + 1e-12);
    let report = DemoReport {
        shape: name,
        n: x.ncols(),
        seed: args.seed,
        k_min,
        k_max,
        data_hull_vertices: data_hull.vertex_indices,
        rows,
        rss_non_increasing,
    };
    let text = serde_json::to_string_pretty(&report).map_err(|e| CliError::Runtime(e.to_string()))?;
    emit(&format!("{text}\n"))
}
