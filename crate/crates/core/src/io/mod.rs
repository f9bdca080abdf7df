//! File formats: CSV matrices, JSON run reports and SVG hull plots.
//!
//! Files keep one point per row; in memory points are columns. Readers and
//! writers transpose at this boundary.

mod csv;
mod report;
mod svg;

pub use self::csv::{read_matrix_csv, write_matrix_csv, AsMatrix, Orientation};
pub use self::report::{read_report, write_report, RunReport};
pub use self::svg::{render_svg_hull_plot, write_svg_hull_plot, HullOverlay};

use std::path::Path;

use crate::error::{Error, Result};

pub(crate) fn write_text(path: &Path, contents: &str) -> Result<()> {
    if path.as_os_str().is_empty() {
        return Err(Error::Io {
            path: path.to_path_buf(),
            source: std::io::Error::new(std::io::ErrorKind::InvalidInput, "empty output path"),
        });
    }
    std::fs::write(path, contents).map_err(|source| Error::Io { path: path.to_path_buf(), source })
}
