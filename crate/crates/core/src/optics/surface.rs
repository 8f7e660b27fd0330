use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SurfaceKind {
    /// Spherical cap. The radius is positive when the center of curvature lies
    /// downstream of the vertex.
    Spherical {
        radius: f64,
    },
    Planar,
    /// Aperture stop: clips, never refracts.
    Stop,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Surface {
    pub kind: SurfaceKind,
    pub vertex_z: f64,
    pub semi_aperture: f64,
    /// Refractive index of the medium after this surface (589 nm).
    pub index_after: f64,
}

impl Surface {
    pub fn spherical(vertex_z: f64, radius: f64, semi_aperture: f64, index_after: f64) -> Self {
        Self {
            kind: SurfaceKind::Spherical { radius },
            vertex_z,
            semi_aperture,
            index_after,
        }
    }

    pub fn planar(vertex_z: f64, semi_aperture: f64, index_after: f64) -> Self {
        Self {
            kind: SurfaceKind::Planar,
            vertex_z,
            semi_aperture,
            index_after,
        }
    }

    pub fn stop(vertex_z: f64, semi_aperture: f64, index_after: f64) -> Self {
        Self {
            kind: SurfaceKind::Stop,
            vertex_z,
            semi_aperture,
            index_after,
        }
    }

    pub fn radius(&self) -> Option<f64> {
        match self.kind {
            SurfaceKind::Spherical { radius } => Some(radius),
            _ => None,
        }
    }

    pub fn refracts(&self) -> bool {
        !matches!(self.kind, SurfaceKind::Stop)
    }

    /// Axial departure from the vertex plane at squared lateral radius `rho2`.
    /// `None` past the sphere's equator.
    pub fn sag(&self, rho2: f64) -> Option<f64> {
        match self.kind {
            SurfaceKind::Spherical { radius } => {
                let q = radius * radius - rho2;
                (q >= 0.0).then(|| radius - radius.signum() * q.sqrt())
            }
            _ => Some(0.0),
        }
    }

    /// Axial range `[min, max]` the surface occupies over its clear aperture.
    pub fn axial_extent(&self) -> (f64, f64) {
        let edge = self.vertex_z + self.sag(self.semi_aperture * self.semi_aperture).unwrap_or(0.0);
        (self.vertex_z.min(edge), self.vertex_z.max(edge))
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSystem(m));
        if !(self.semi_aperture > 0.0 && self.semi_aperture.is_finite()) {
            return bad(format!("semi_aperture must be > 0, got {}", self.semi_aperture));
        }
        if !(self.index_after >= 1.0 && self.index_after.is_finite()) {
            return bad(format!("index_after must be >= 1, got {}", self.index_after));
        }
        if !self.vertex_z.is_finite() {
            return bad("vertex_z must be finite".into());
        }
        if let SurfaceKind::Spherical { radius } = self.kind {
            if !(radius.is_finite() && radius.abs() > self.semi_aperture) {
                return bad(format!(
                    "|radius| = {} must exceed semi_aperture = {}",
                    radius.abs(),
                    self.semi_aperture
                ));
            }
        }
        Ok(())
    }
}

/// An ordered list of surfaces plus the source and training-target planes.
#[derive(Debug, Clone, PartialEq)]
pub struct OpticalSystem {
    pub surfaces: Vec<Surface>,
    pub index_before_first: f64,
    pub source_z: f64,
    pub target_z: f64,
}

impl OpticalSystem {
    pub fn new(surfaces: Vec<Surface>, index_before_first: f64, source_z: f64, target_z: f64) -> Result<Self> {
        let sys = Self {
            surfaces,
            index_before_first,
            source_z,
            target_z,
        };
        sys.validate()?;
        Ok(sys)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.index_before_first >= 1.0) {
            return Err(Error::InvalidSystem(format!(
                "index_before must be >= 1, got {}",
                self.index_before_first
            )));
        }
        if !(self.source_z.is_finite() && self.target_z.is_finite()) {
            return Err(Error::InvalidSystem("source_z and target_z must be finite".into()));
        }
        for (i, s) in self.surfaces.iter().enumerate() {
            s.validate()
                .map_err(|e| Error::InvalidSystem(format!("surface {i}: {e}")))?;
        }
        for w in self.surfaces.windows(2) {
            if w[1].vertex_z <= w[0].vertex_z {
                return Err(Error::InvalidSystem("vertex_z must be strictly increasing".into()));
            }
        }
        match (self.surfaces.first(), self.surfaces.last()) {
            (Some(first), Some(last)) => {
                if self.source_z >= first.vertex_z {
                    return Err(Error::InvalidSystem(format!(
                        "source_z {} must lie before the first vertex {}",
                        self.source_z, first.vertex_z
                    )));
                }
                if self.target_z <= last.vertex_z {
                    return Err(Error::InvalidSystem(format!(
                        "target_z {} must lie after the last vertex {}",
                        self.target_z, last.vertex_z
                    )));
                }
            }
            _ => {
                if self.target_z < self.source_z {
                    return Err(Error::InvalidSystem("target_z must not precede source_z".into()));
                }
            }
        }
        Ok(())
    }

    /// Refractive index of the medium the ray travels in after the last surface.
    pub fn index_after_last(&self) -> f64 {
        self.surfaces.last().map_or(self.index_before_first, |s| s.index_after)
    }

    pub fn refracting_surfaces(&self) -> usize {
        self.surfaces.iter().filter(|s| s.refracts()).count()
    }

    /// Distance from the rearmost point of the last surface to the target plane.
    pub fn target_clearance(&self) -> Option<f64> {
        self.surfaces.last().map(|s| self.target_z - s.axial_extent().1)
    }
}
