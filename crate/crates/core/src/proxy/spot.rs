use std::fmt::Write as _;
use std::path::Path;

use super::query::ExactTracer;
use crate::dataset::{sample_directions, Entrance};
use crate::error::{Error, Result};
use crate::io::atomic_write;
use crate::optics::{trace, OpticalSystem, Ray3, Vec3};

/// RMS distance of the points from their centroid.
pub fn rms_radius(points: &[[f64; 2]]) -> f64 {
    if points.is_empty() {
        return 0.0;
    }
    let n = points.len() as f64;
    let cx = points.iter().map(|p| p[0]).sum::<f64>() / n;
    let cy = points.iter().map(|p| p[1]).sum::<f64>() / n;
    (points
        .iter()
        .map(|p| (p[0] - cx).powi(2) + (p[1] - cy).powi(2))
        .sum::<f64>()
        / n)
        .sqrt()
}

/// Rays from one source point toward uniform points on the entrance disk,
/// as `(p_i, d_i)` rows, keeping only those that reach the target.
pub fn spot_inputs(system: &OpticalSystem, p_i: [f64; 2], rays: usize, seed: u64) -> Result<Vec<[f64; 4]>> {
    let entrance = Entrance::of_system(system)?;
    let dirs = sample_directions(p_i, system.source_z, entrance, rays, seed, 0)?;
    let origin = Vec3::new(p_i[0], p_i[1], system.source_z);
    Ok(dirs
        .into_iter()
        .filter(|&d| trace(&Ray3::new(origin, d), system).emerged().is_some())
        .map(|d| [p_i[0], p_i[1], d.x, d.y])
        .collect())
}

/// Exact spot from one source point: `rays` directions toward the entrance
/// disk, traced and carried to `depth_z`. Blocked rays are skipped.
pub fn exact_spot(
    system: &OpticalSystem,
    p_i: [f64; 2],
    rays: usize,
    seed: u64,
    depth_z: f64,
) -> Result<Vec<[f64; 2]>> {
    let inputs = spot_inputs(system, p_i, rays, seed)?;
    ExactTracer { system }.trace_to_depth(&inputs, depth_z)
}

/// Writes a scatter plot of the spot as SVG next to a CSV of the same points.
pub fn spot_diagram(points: &[[f64; 2]], svg_path: &Path, csv_path: &Path, title: &str) -> Result<()> {
    if points.iter().any(|p| !p[0].is_finite() || !p[1].is_finite()) {
        return Err(Error::NonFinite("spot diagram point".into()));
    }
    let mut csv = String::from("x_mm,y_mm\n");
    for p in points {
        let _ = writeln!(csv, "{},{}", p[0], p[1]);
    }

    const SIZE: f64 = 480.0;
    const MARGIN: f64 = 40.0;
    let (mut x0, mut x1, mut y0, mut y1) = (f64::MAX, f64::MIN, f64::MAX, f64::MIN);
    for p in points {
        x0 = x0.min(p[0]);
        x1 = x1.max(p[0]);
        y0 = y0.min(p[1]);
        y1 = y1.max(p[1]);
    }
    if points.is_empty() {
        (x0, x1, y0, y1) = (-1.0, 1.0, -1.0, 1.0);
    }
    let (cx, cy) = (0.5 * (x0 + x1), 0.5 * (y0 + y1));
    let half = (0.5 * (x1 - x0).max(y1 - y0)).max(1e-6) * 1.05;
    let s = (SIZE - 2.0 * MARGIN) / (2.0 * half);
    let total = SIZE;
    let mut svg = String::new();
    let _ = writeln!(
        svg,
        r#"<svg xmlns="http://www.w3.org/2000/svg" width="{total}" height="{total}" viewBox="0 0 {total} {total}">"#
    );
    let _ = writeln!(svg, r#"<rect width="100%" height="100%" fill="white"/>"#);
    let _ = writeln!(
        svg,
        r#"<text x="{MARGIN}" y="24" font-family="sans-serif" font-size="14">{} (n={}, rms={:.4} mm, span={:.4} mm)</text>"#,
        xml_escape(title),
        points.len(),
        rms_radius(points),
        2.0 * half
    );
    let _ = writeln!(
        svg,
        r#"<rect x="{MARGIN}" y="{MARGIN}" width="{w}" height="{w}" fill="none" stroke="black"/>"#,
        w = SIZE - 2.0 * MARGIN
    );
    for p in points {
        let px = MARGIN + (p[0] - cx + half) * s;
        let py = SIZE - MARGIN - (p[1] - cy + half) * s;
        let _ = writeln!(
            svg,
            r#"<circle class="ray" cx="{px:.2}" cy="{py:.2}" r="1" fill="navy"/>"#
        );
    }
    svg.push_str("</svg>\n");

    atomic_write(csv_path, csv.as_bytes())?;
    atomic_write(svg_path, svg.as_bytes())
}

fn xml_escape(s: &str) -> String {
    s.replace('&', "&amp;").replace('<', "&lt;").replace('>', "&gt;")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::{design_singlet, paraxial_image_z, DEFAULT_CENTER_THICKNESS, DEFAULT_INDEX};

    #[test]
    fn rms_of_symmetric_points() {
        assert_eq!(rms_radius(&[]), 0.0);
        let pts = [[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0], [0.0, -1.0]];
        assert!((rms_radius(&pts) - 1.0).abs() < 1e-15);
        let shifted: Vec<[f64; 2]> = pts.iter().map(|p| [p[0] + 5.0, p[1] - 3.0]).collect();
        assert!((rms_radius(&shifted) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn svg_and_csv_agree() {
        let dir = tempfile::tempdir().unwrap();
        let pts = [[0.0, 0.0], [0.1, -0.2], [0.3, 0.05]];
        let svg = dir.path().join("s.svg");
        let csv = dir.path().join("s.csv");
        spot_diagram(&pts, &svg, &csv, "axial <spot>").unwrap();
        let svg = std::fs::read_to_string(svg).unwrap();
        let csv = std::fs::read_to_string(csv).unwrap();
        assert_eq!(svg.matches(r#"class="ray""#).count(), 3);
        assert_eq!(csv.lines().count(), 4);
        assert!(svg.contains("&lt;spot&gt;"));
    }

    #[test]
    fn axial_spot_tightens_near_focus() {
        let sys = design_singlet(60.0, 20.0, DEFAULT_INDEX, DEFAULT_CENTER_THICKNESS).unwrap();
        let focus = paraxial_image_z(&sys, sys.source_z).unwrap();
        let near = exact_spot(&sys, [0.0, 0.0], 2000, 1, focus).unwrap();
        let far = exact_spot(&sys, [0.0, 0.0], 2000, 1, focus + 20.0).unwrap();
        assert!(near.len() > 1900);
        assert!(rms_radius(&near) < rms_radius(&far));
    }
}
