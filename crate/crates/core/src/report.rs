//! Artifact output: atomic file writes and log-log SVG plots.

use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use tempfile::NamedTempFile;

use crate::error::{Error, Result};
use crate::scalar::Real;

/// Writes `contents` to a temporary file beside `path` and renames it into place.
pub fn write_atomic(path: &Path, contents: &[u8]) -> Result<()> {
    let dir = match path.parent() {
        Some(d) if !d.as_os_str().is_empty() => d,
        _ => Path::new("."),
    };
    let mut tmp = NamedTempFile::new_in(dir)?;
    tmp.write_all(contents)?;
    tmp.as_file().sync_all()?;
    tmp.persist(path).map_err(|e| Error::Io(e.error.to_string()))?;
    Ok(())
}

const WIDTH: f64 = 640.0;
const HEIGHT: f64 = 480.0;
const MARGIN: f64 = 60.0;

/// Log-log scatter of `points` with a guide line of slope `guide_slope`
/// through the first point.
pub fn plot_svg<T: Real>(points: &[(T, T)], guide_slope: T, title: &str) -> Result<String> {
    let logs: Vec<(f64, f64)> = points
        .iter()
        .map(|&(x, y)| (x.to_f64_lossy(), y.to_f64_lossy()))
        .filter(|&(x, y)| x > 0.0 && y > 0.0 && x.is_finite() && y.is_finite())
        .map(|(x, y)| (x.log10(), y.log10()))
        .collect();
    if logs.len() < 2 {
        return Err(Error::InsufficientData(format!("a plot needs 2 positive points, got {}", logs.len())));
    }
    let k = guide_slope.to_f64_lossy();
    let (x0, y0) = logs[0];
    let (mut xmin, mut xmax) = (f64::INFINITY, f64::NEG_INFINITY);
    let (mut ymin, mut ymax) = (f64::INFINITY, f64::NEG_INFINITY);
    for &(x, y) in &logs {
        xmin = xmin.min(x);
        xmax = xmax.max(x);
        ymin = ymin.min(y);
        ymax = ymax.max(y);
    }
    let guide = |x: f64| y0 + k * (x - x0);
    ymin = ymin.min(guide(xmin)).min(guide(xmax));
    ymax = ymax.max(guide(xmin)).max(guide(xmax));
    if xmax - xmin < 1e-12 {
        xmin -= 0.5;
        xmax += 0.5;
    }
    if ymax - ymin < 1e-12 {
        ymin -= 0.5;
        ymax += 0.5;
    }
    let px = |x: f64| MARGIN + (x - xmin) / (xmax - xmin) * (WIDTH - 2.0 * MARGIN);
    let py = |y: f64| HEIGHT - MARGIN - (y - ymin) / (ymax - ymin) * (HEIGHT - 2.0 * MARGIN);

    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{WIDTH}" height="{HEIGHT}" viewBox="0 0 {WIDTH} {HEIGHT}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(svg, r#"<text x="{MARGIN}" y="30" font-family="sans-serif" font-size="14">{}</text>"#, escape(title));
    let (l, r, t, b) = (MARGIN, WIDTH - MARGIN, MARGIN, HEIGHT - MARGIN);
    let _ = writeln!(svg, r#"<path class="axes" d="M{l} {t} L{l} {b} L{r} {b}" stroke="black" fill="none"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{l}" y="{:.1}" font-family="sans-serif" font-size="11">log10 x: [{xmin:.3}, {xmax:.3}]  log10 y: [{ymin:.3}, {ymax:.3}]</text>"#,
        b + 35.0
    );
    let _ = writeln!(
        svg,
        r#"<line class="guide" x1="{:.3}" y1="{:.3}" x2="{:.3}" y2="{:.3}" stroke="gray" stroke-dasharray="6 4"/>"#,
        px(xmin),
        py(guide(xmin)),
        px(xmax),
        py(guide(xmax))
    );
    let _ = writeln!(svg, r#"<text x="{:.1}" y="{:.1}" font-family="sans-serif" font-size="11">slope {k}</text>"#, r - 80.0, t + 15.0);
    for &(x, y) in &logs {
        let _ = writeln!(svg, r#"<circle class="marker" cx="{:.3}" cy="{:.3}" r="4" fill="steelblue"/>"#, px(x), py(y));
    }
    svg.push_str("</svg>\n");
    Ok(svg)
}

/// Renders [`plot_svg`] and writes it atomically to `path`.
pub fn emit_plot<T: Real>(points: &[(T, T)], guide_slope: T, title: &str, path: &Path) -> Result<()> {
    write_atomic(path, plot_svg(points, guide_slope, title)?.as_bytes())
}

fn escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn two_points_two_markers_one_guide() {
        let svg = plot_svg(&[(0.1, 1.0), (0.01, 0.5)], 1.0 / 6.0, "st1").unwrap();
        assert_eq!(svg.matches("class=\"marker\"").count(), 2);
        assert_eq!(svg.matches("class=\"guide\"").count(), 1);
        assert!(svg.contains("slope 0.16666"));
    }

    #[test]
    fn one_point_is_rejected() {
        assert!(matches!(plot_svg(&[(1.0, 1.0)], 1.0, ""), Err(Error::InsufficientData(_))));
        assert!(matches!(plot_svg(&[(1.0, 1.0), (0.0, 2.0)], 1.0, ""), Err(Error::InsufficientData(_))));
    }

    #[test]
    fn atomic_write_is_deterministic() {
        let dir = tempfile::tempdir().unwrap();
        let (a, b) = (dir.path().join("a.svg"), dir.path().join("b.svg"));
        let pts = [(1e-3, 2.0), (1e-2, 3.0), (1e-1, 5.0)];
        emit_plot(&pts, 0.2, "x", &a).unwrap();
        emit_plot(&pts, 0.2, "x", &b).unwrap();
        assert_eq!(std::fs::read(&a).unwrap(), std::fs::read(&b).unwrap());
        assert!(write_atomic(&dir.path().join("missing/x.txt"), b"1").is_err());
    }
}
