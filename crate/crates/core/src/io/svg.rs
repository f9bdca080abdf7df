use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::types::DataMatrix;

/// A labelled polygon, vertices in drawing order.
pub type HullOverlay = (String, Vec<[f64; 2]>);

const SIZE: f64 = 640.0;
const MARGIN: f64 = 48.0;
const PALETTE: [&str; 10] = [
    "#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b", "#e377c2", "#7f7f7f", "#bcbd22", "#17becf",
];

/// SVG of the points as dots with each hull drawn as a closed path.
pub fn render_svg_hull_plot(points: &DataMatrix, hulls: &[HullOverlay]) -> Result<String> {
    if points.nrows() != 2 {
        return Err(Error::InvalidParameter(format!("hull plots need 2-D data, got dimension {}", points.nrows())));
    }
    let coords = points.columns().map(|c| [c[0], c[1]]).chain(hulls.iter().flat_map(|(_, h)| h.iter().copied()));
    let (mut lo, mut hi) = ([f64::INFINITY; 2], [f64::NEG_INFINITY; 2]);
    for p in coords {
        for d in 0..2 {
            lo[d] = lo[d].min(p[d]);
            hi[d] = hi[d].max(p[d]);
        }
    }
    let span = (hi[0] - lo[0]).max(hi[1] - lo[1]).max(f64::MIN_POSITIVE);
    let scale = (SIZE - 2.0 * MARGIN) / span;
    let map = |p: [f64; 2]| (MARGIN + (p[0] - lo[0]) * scale, SIZE - MARGIN - (p[1] - lo[1]) * scale);

    let mut s = String::new();
    let w = &mut s;
    // write! into a String is infallible.
    let _ = writeln!(w, r#"<?xml version="1.0" encoding="UTF-8"?>"#);
    let _ = writeln!(
        w,
        r#"<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">"#
    );
    let _ = writeln!(w, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(w, r##"<g id="points" fill="#444444">"##);
    for c in points.columns() {
        let (x, y) = map([c[0], c[1]]);
        let _ = writeln!(w, r#"<circle cx="{x:.3}" cy="{y:.3}" r="2"/>"#);
    }
    let _ = writeln!(w, "</g>");
    for (i, (label, hull)) in hulls.iter().enumerate() {
        let color = PALETTE[i % PALETTE.len()];
        let mut d = String::new();
        for (j, &p) in hull.iter().enumerate() {
            let (x, y) = map(p);
            let _ = write!(d, "{}{x:.3},{y:.3} ", if j == 0 { "M" } else { "L" });
        }
        d.push('Z');
        let _ = writeln!(
            w,
            r#"<path class="hull" d="{d}" fill="none" stroke="{color}" stroke-width="1.5"><title>{}</title></path>"#,
            escape(label)
        );
    }
    if !hulls.is_empty() {
        let _ = writeln!(w, r#"<g id="legend" font-family="sans-serif" font-size="12">"#);
        for (i, (label, _)) in hulls.iter().enumerate() {
            let color = PALETTE[i % PALETTE.len()];
            let y = 16.0 + 16.0 * i as f64;
            let _ = writeln!(w, r#"<line x1="8" y1="{y}" x2="28" y2="{y}" stroke="{color}" stroke-width="2"/>"#);
            let _ = writeln!(w, r#"<text x="34" y="{}">{}</text>"#, y + 4.0, escape(label));
        }
        let _ = writeln!(w, "</g>");
    }
    let _ = writeln!(w, "</svg>");
    Ok(s)
}

pub fn write_svg_hull_plot(points: &DataMatrix, hulls: &[HullOverlay], path: impl AsRef<Path>) -> Result<()> {
    let svg = render_svg_hull_plot(points, hulls)?;
    super::write_text(path.as_ref(), &svg)
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;").replace('"', "&quot;")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn square() -> DataMatrix {
        DataMatrix::from_columns(&[vec![0.0, 0.0], vec![1.0, 0.0], vec![1.0, 1.0], vec![0.0, 1.0]]).unwrap()
    }

    fn corners() -> Vec<[f64; 2]> {
        vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]
    }

    #[test]
    fn one_closed_path_per_hull() {
        let svg = render_svg_hull_plot(&square(), &[("data hull".into(), corners())]).unwrap();
        assert_eq!(svg.matches("<path").count(), 1);
        let d = svg.split(" d=\"").nth(1).unwrap().split('"').next().unwrap();
        assert_eq!(d.matches(['M', 'L']).count(), 4);
        assert!(d.ends_with('Z'));
        assert_eq!(svg.matches("<circle").count(), 4);

        let overlay = vec![("data hull".into(), corners()), ("k=3".into(), vec![[0.0, 0.0], [1.0, 0.0], [1.0, 1.0]])];
        let svg = render_svg_hull_plot(&square(), &overlay).unwrap();
        assert_eq!(svg.matches("<path").count(), 2);
        assert!(svg.contains(">k=3</text>"));
    }

    #[test]
    fn points_only_without_hulls() {
        let svg = render_svg_hull_plot(&square(), &[]).unwrap();
        assert_eq!(svg.matches("<path").count(), 0);
        assert!(!svg.contains("legend"));
    }

    #[test]
    fn output_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let (p1, p2) = (dir.path().join("a.svg"), dir.path().join("b.svg"));
        write_svg_hull_plot(&square(), &[("h".into(), corners())], &p1).unwrap();
        write_svg_hull_plot(&square(), &[("h".into(), corners())], &p2).unwrap();
        assert_eq!(std::fs::read(p1).unwrap(), std::fs::read(p2).unwrap());
    }

    #[test]
    fn rejects_non_planar_data() {
        assert!(render_svg_hull_plot(&DataMatrix::identity(3), &[]).is_err());
    }
}
