//! First-order (paraxial) analysis with 2x2 ray-transfer matrices acting on
//! `(height, index * slope)`.

use super::surface::{OpticalSystem, SurfaceKind};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemMatrix {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl SystemMatrix {
    pub const IDENTITY: Self = Self {
        a: 1.0,
        b: 0.0,
        c: 0.0,
        d: 1.0,
    };

    /// `self * rhs`: apply `rhs` first.
    pub fn then_after(self, rhs: Self) -> Self {
        Self {
            a: self.a * rhs.a + self.b * rhs.c,
            b: self.a * rhs.b + self.b * rhs.d,
            c: self.c * rhs.a + self.d * rhs.c,
            d: self.c * rhs.b + self.d * rhs.d,
        }
    }

    pub fn refraction(n1: f64, n2: f64, radius: f64) -> Self {
        Self {
            c: -(n2 - n1) / radius,
            ..Self::IDENTITY
        }
    }

    pub fn transfer(distance: f64, index: f64) -> Self {
        Self {
            b: distance / index,
            ..Self::IDENTITY
        }
    }

    /// Matrix from the first vertex plane to the last vertex plane.
    pub fn of_system(system: &OpticalSystem) -> Self {
        let mut m = Self::IDENTITY;
        let mut n = system.index_before_first;
        let mut prev_z: Option<f64> = None;
        for s in &system.surfaces {
            if let Some(z) = prev_z {
                m = Self::transfer(s.vertex_z - z, n).then_after(m);
            }
            match s.kind {
                SurfaceKind::Spherical { radius } => {
                    m = Self::refraction(n, s.index_after, radius).then_after(m);
                    n = s.index_after;
                }
                SurfaceKind::Planar => n = s.index_after,
                SurfaceKind::Stop => {}
            }
            prev_z = Some(s.vertex_z);
        }
        m
    }
}

/// Effective focal length `-1 / C` of the composed system matrix.
pub fn paraxial_efl(system: &OpticalSystem) -> Result<f64> {
    let c = SystemMatrix::of_system(system).c;
    if c == 0.0 || c.abs() < 1e-15 {
        return Err(Error::Afocal);
    }
    Ok(-1.0 / c)
}

/// Axial position of the paraxial image of an on-axis point at `object_z`.
pub fn paraxial_image_z(system: &OpticalSystem, object_z: f64) -> Result<f64> {
    let (first, last) = match (system.surfaces.first(), system.surfaces.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(Error::Afocal),
    };
    let m = SystemMatrix::of_system(system).then_after(SystemMatrix::transfer(
        first.vertex_z - object_z,
        system.index_before_first,
    ));
    if m.d == 0.0 {
        // Object at the front focal point: image at infinity.
        return Err(Error::Afocal);
    }
    let n_out = system.index_after_last();
    Ok(last.vertex_z - n_out * m.b / m.d)
}
