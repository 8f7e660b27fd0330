use super::intersect::intersect;
use super::refract::{refract, Refraction};
use super::surface::OpticalSystem;
use super::vec3::{Ray3, Vec3};
use super::{NEWTON_MAX_ITER, NEWTON_TOL};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Intersector {
    Analytic,
    Newton { tol: f64, max_iter: usize },
}

impl Default for Intersector {
    fn default() -> Self {
        Intersector::Newton {
            tol: NEWTON_TOL,
            max_iter: NEWTON_MAX_ITER,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TraceOutcome {
    /// The ray left the last surface; its origin lies on that surface.
    Emerged(Ray3),
    Vignetted(usize),
    TotalInternalReflection(usize),
    Missed(usize),
}

impl TraceOutcome {
    pub fn emerged(self) -> Option<Ray3> {
        match self {
            TraceOutcome::Emerged(r) => Some(r),
            _ => None,
        }
    }
}

/// Traces `ray` surface by surface using Newton intersections.
pub fn trace(ray: &Ray3, system: &OpticalSystem) -> TraceOutcome {
    trace_with(ray, system, Intersector::default())
}

pub fn trace_with(ray: &Ray3, system: &OpticalSystem, method: Intersector) -> TraceOutcome {
    let mut current = *ray;
    let mut n1 = system.index_before_first;
    for (i, surface) in system.surfaces.iter().enumerate() {
        let Some(hit) = intersect(&current, surface, method) else {
            return TraceOutcome::Missed(i);
        };
        if hit.point.rho2() > surface.semi_aperture * surface.semi_aperture {
            return TraceOutcome::Vignetted(i);
        }
        let direction = if surface.refracts() {
            match refract(current.direction, hit.normal, n1, surface.index_after) {
                Refraction::Transmitted(d) => d,
                Refraction::TotalInternalReflection => return TraceOutcome::TotalInternalReflection(i),
            }
        } else {
            current.direction
        };
        n1 = if surface.refracts() { surface.index_after } else { n1 };
        current = Ray3 {
            origin: hit.point,
            direction,
        };
    }
    TraceOutcome::Emerged(current)
}

/// Transverse position where `ray` crosses the plane `z = plane_z`.
#[inline]
pub fn propagate_to_plane(ray: &Ray3, plane_z: f64) -> Result<[f64; 2]> {
    let d = ray.direction;
    if !(d.z > 1e-9) {
        return Err(Error::NotForward(d.z));
    }
    let t = (plane_z - ray.origin.z) / d.z;
    let p: Vec3 = ray.at(t);
    Ok([p.x, p.y])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::{design_singlet, Surface};

    #[test]
    fn propagate_examples() {
        let r = Ray3::new(Vec3::new(1.0, 2.0, 0.0), Vec3::Z);
        assert_eq!(propagate_to_plane(&r, 5.0).unwrap(), [1.0, 2.0]);
        let r = Ray3::new(Vec3::default(), Vec3::new(0.6, 0.0, 0.8));
        let p = propagate_to_plane(&r, 8.0).unwrap();
        assert!((p[0] - 6.0).abs() < 1e-14 && p[1] == 0.0);
        let r = Ray3::new(Vec3::default(), Vec3::new(0.0, 1.0, 0.0));
        assert!(matches!(propagate_to_plane(&r, 5.0), Err(Error::NotForward(_))));
    }

    #[test]
    fn empty_system_is_identity() {
        let sys = OpticalSystem::new(vec![], 1.0, 0.0, 0.0).unwrap();
        let r = Ray3::new(Vec3::new(0.3, 0.1, 0.0), Vec3::new(0.1, -0.2, 1.0));
        assert_eq!(trace(&r, &sys), TraceOutcome::Emerged(r));
    }

    #[test]
    fn axial_ray_through_singlet_stays_axial() {
        let sys = design_singlet(60.0, 50.6, 1.5168, 8.0).unwrap();
        let r = Ray3::new(Vec3::new(0.0, 0.0, sys.source_z), Vec3::Z);
        let out = trace(&r, &sys).emerged().unwrap();
        assert_eq!(out.direction, Vec3::Z);
        assert_eq!((out.origin.x, out.origin.y), (0.0, 0.0));
    }

    #[test]
    fn reports_offending_surface() {
        let sys = OpticalSystem::new(
            vec![Surface::planar(0.0, 10.0, 1.5), Surface::stop(5.0, 1.0, 1.5)],
            1.0,
            -10.0,
            10.0,
        )
        .unwrap();
        let r = Ray3::new(Vec3::new(3.0, 0.0, -10.0), Vec3::Z);
        assert_eq!(trace(&r, &sys), TraceOutcome::Vignetted(1));
        let r = Ray3::new(Vec3::new(0.0, 0.0, -10.0), Vec3::new(1.0, 0.0, 0.0));
        assert_eq!(trace(&r, &sys), TraceOutcome::Missed(0));
    }

    #[test]
    fn tir_is_reported_with_surface_index() {
        // Glass slab whose exit face meets a steep ray past the critical angle.
        let sys = OpticalSystem::new(
            vec![Surface::planar(0.0, 100.0, 1.5), Surface::planar(1.0, 100.0, 1.0)],
            1.6,
            -1.0,
            2.0,
        )
        .unwrap();
        let r = Ray3::new(Vec3::new(0.0, 0.0, -1.0), Vec3::new(1.0, 0.0, 1.0));
        assert_eq!(trace(&r, &sys), TraceOutcome::TotalInternalReflection(1));
    }
}
