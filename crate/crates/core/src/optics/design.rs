use super::surface::{OpticalSystem, Surface};
use crate::error::{Error, Result};

/// N-BK7 style crown glass at 589 nm.
pub const DEFAULT_INDEX: f64 = 1.5168;

/// Default center thickness for the 60 mm / 50.6 mm singlet. An 8 mm blank
/// cannot cover the full aperture (its two caps cross at r ≈ 22 mm), so the
/// default is the thinnest whole millimeter that leaves at least 1 mm of edge.
pub const DEFAULT_CENTER_THICKNESS: f64 = 13.0;

/// Clearance from the last vertex to the training target plane.
pub const TARGET_CLEARANCE: f64 = 1.0;

/// Power of a symmetric biconvex lens (`R1 = -R2 = r`) from the thick-lens equation.
fn biconvex_power(r: f64, index: f64, thickness: f64) -> f64 {
    let (r1, r2) = (r, -r);
    (index - 1.0) * (1.0 / r1 - 1.0 / r2 + (index - 1.0) * thickness / (index * r1 * r2))
}

/// Designs a symmetric biconvex singlet with vertex 1 at `z = 0`.
///
/// The source plane sits at `z = -2 * focal` (unit-magnification conjugate)
/// and the training target plane 1 mm behind the rear vertex.
pub fn design_singlet(focal: f64, aperture: f64, index: f64, center_thickness: f64) -> Result<OpticalSystem> {
    let positive = |v: f64| v > 0.0 && v.is_finite();
    if !positive(focal) || !positive(aperture) || !positive(center_thickness) || !(index > 1.0 && index.is_finite()) {
        return Err(Error::InvalidArgument(format!(
            "need focal > 0, aperture > 0, index > 1, thickness > 0 (got {focal}, {aperture}, {index}, {center_thickness})"
        )));
    }
    let semi = aperture / 2.0;
    let target = 1.0 / focal;
    // Power rises monotonically as r shrinks toward (n-1)t/n.
    let knee = (index - 1.0) * center_thickness / index;
    let lo = semi.max(knee);
    if biconvex_power(lo, index, center_thickness) <= target {
        return Err(Error::Infeasible(format!(
            "a {focal} mm focal length needs |R| below the {semi} mm semi-aperture"
        )));
    }
    let mut hi = lo.max(1.0) * 2.0;
    while biconvex_power(hi, index, center_thickness) > target {
        hi *= 2.0;
    }
    let mut lo = lo;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if biconvex_power(mid, index, center_thickness) > target {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= f64::EPSILON * hi {
            break;
        }
    }
    let r = 0.5 * (lo + hi);
    OpticalSystem::new(
        vec![
            Surface::spherical(0.0, r, semi, index),
            Surface::spherical(center_thickness, -r, semi, 1.0),
        ],
        1.0,
        -2.0 * focal,
        center_thickness + TARGET_CLEARANCE,
    )
}

/// A stack of `elements` weak symmetric biconvex lenses in air whose combined
/// power is roughly that of a single `focal` mm lens. Used to compare tracer
/// cost against surface count.
pub fn element_stack(elements: usize, focal: f64, aperture: f64) -> Result<OpticalSystem> {
    if elements == 0 {
        return Err(Error::InvalidArgument(
            "element_stack needs at least one element".into(),
        ));
    }
    let semi = aperture / 2.0;
    let index = DEFAULT_INDEX;
    let r = 2.0 * focal * elements as f64 * (index - 1.0);
    let sag = r - (r * r - semi * semi).sqrt();
    let thickness = 2.0 * sag + 1.0;
    let gap = 2.0 * sag + 1.0;
    let mut surfaces = Vec::with_capacity(2 * elements);
    let mut z = 0.0;
    for _ in 0..elements {
        surfaces.push(Surface::spherical(z, r, semi, index));
        surfaces.push(Surface::spherical(z + thickness, -r, semi, 1.0));
        z += thickness + gap;
    }
    let last = z - gap;
    OpticalSystem::new(surfaces, 1.0, -2.0 * focal, last + TARGET_CLEARANCE)
}

/// Axial thickness of a two-surface lens at its rim.
pub fn edge_thickness(system: &OpticalSystem) -> Option<f64> {
    match system.surfaces.as_slice() {
        [a, b] => {
            let front = a.vertex_z + a.sag(a.semi_aperture.powi(2))?;
            let back = b.vertex_z + b.sag(b.semi_aperture.powi(2))?;
            Some(back - front)
        }
        _ => None,
    }
}
