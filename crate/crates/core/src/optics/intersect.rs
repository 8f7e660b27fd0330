use super::surface::{Surface, SurfaceKind};
use super::trace::Intersector;
use super::vec3::{Ray3, Vec3};

/// A surface intersection: the hit point and the unit normal facing the
/// incoming ray (`normal · direction < 0`).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hit {
    pub point: Vec3,
    pub normal: Vec3,
    pub t: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NewtonHit {
    pub hit: Hit,
    /// Number of residual evaluations, including the converged one.
    pub iterations: usize,
}

/// Dispatches to the configured intersection routine.
#[inline]
pub fn intersect(ray: &Ray3, surface: &Surface, method: Intersector) -> Option<Hit> {
    match method {
        Intersector::Analytic => intersect_analytic(ray, surface),
        Intersector::Newton { tol, max_iter } => intersect_newton(ray, surface, tol, max_iter).map(|h| h.hit),
    }
}

/// Closed-form intersection with the surface's vertex-side cap (spheres) or
/// its plane. The clear aperture is not checked here; the tracer clips.
pub fn intersect_analytic(ray: &Ray3, surface: &Surface) -> Option<Hit> {
    match surface.kind {
        SurfaceKind::Planar | SurfaceKind::Stop => intersect_plane(ray, surface.vertex_z),
        SurfaceKind::Spherical { radius } => {
            let center = Vec3::new(0.0, 0.0, surface.vertex_z + radius);
            let oc = ray.origin - center;
            let b = oc.dot(ray.direction);
            let c = oc.dot(oc) - radius * radius;
            let disc = b * b - c;
            if disc < 0.0 {
                return None;
            }
            // Stable quadratic roots.
            let q = -(b + b.signum() * disc.sqrt());
            let (mut t0, mut t1) = if q == 0.0 { (-b, -b) } else { (q, c / q) };
            if t0 > t1 {
                std::mem::swap(&mut t0, &mut t1);
            }
            let on_cap = |t: f64| {
                let p = ray.at(t);
                t >= 0.0 && (p.z - center.z) * radius.signum() <= 0.0
            };
            let t = [t0, t1].into_iter().find(|&t| on_cap(t))?;
            let point = ray.at(t);
            Some(Hit {
                point,
                normal: facing((point - center) * (1.0 / radius.abs()), ray.direction),
                t,
            })
        }
    }
}

/// Newton iteration on the sag residual `f(t) = z(t) - vertex_z - sag(rho(t))`,
/// started from the ray's crossing of the vertex plane.
pub fn intersect_newton(ray: &Ray3, surface: &Surface, tol: f64, max_iter: usize) -> Option<NewtonHit> {
    let d = ray.direction;
    if d.z <= 0.0 {
        return None;
    }
    let mut t = (surface.vertex_z - ray.origin.z) / d.z;
    let radius = surface.radius();
    for it in 1..=max_iter {
        let p = ray.at(t);
        let rho2 = p.rho2();
        let sag = surface.sag(rho2)?;
        let f = p.z - surface.vertex_z - sag;
        if f.abs() < tol {
            if t < 0.0 || !p.is_finite() {
                return None;
            }
            let normal = match radius {
                Some(r) => {
                    let center = Vec3::new(0.0, 0.0, surface.vertex_z + r);
                    (p - center) * (1.0 / r.abs())
                }
                None => Vec3::new(0.0, 0.0, -1.0),
            };
            return Some(NewtonHit {
                hit: Hit {
                    point: p,
                    normal: facing(normal, d),
                    t,
                },
                iterations: it,
            });
        }
        let df = match radius {
            Some(r) => {
                let root = (r * r - rho2).sqrt();
                if root == 0.0 {
                    return None;
                }
                d.z - r.signum() * (p.x * d.x + p.y * d.y) / root
            }
            None => d.z,
        };
        if df == 0.0 || !df.is_finite() {
            return None;
        }
        t -= f / df;
    }
    None
}

fn intersect_plane(ray: &Ray3, z: f64) -> Option<Hit> {
    if ray.direction.z == 0.0 {
        return None;
    }
    let t = (z - ray.origin.z) / ray.direction.z;
    if !(t >= 0.0) {
        return None;
    }
    let mut point = ray.at(t);
    point.z = z;
    Some(Hit {
        point,
        normal: facing(Vec3::new(0.0, 0.0, -1.0), ray.direction),
        t,
    })
}

#[inline]
fn facing(n: Vec3, d: Vec3) -> Vec3 {
    if n.dot(d) > 0.0 {
        -n
    } else {
        n
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn axial(x: f64, z: f64) -> Ray3 {
        Ray3::new(Vec3::new(x, 0.0, z), Vec3::Z)
    }

    #[test]
    fn axial_ray_hits_vertex() {
        let s = Surface::spherical(0.0, 50.0, 20.0, 1.5);
        let h = intersect_analytic(&axial(0.0, -10.0), &s).unwrap();
        assert!((h.point - Vec3::new(0.0, 0.0, 0.0)).norm() < 1e-15);
        assert!((h.normal - Vec3::new(0.0, 0.0, -1.0)).norm() < 1e-15);
    }

    #[test]
    fn off_axis_sphere_hit_matches_quadratic() {
        let s = Surface::spherical(0.0, 50.0, 20.0, 1.5);
        let expected = 50.0 - (2500.0f64 - 100.0).sqrt();
        assert!((expected - 1.010205).abs() < 1e-6);
        let h = intersect_analytic(&axial(10.0, -10.0), &s).unwrap();
        assert!((h.point.z - expected).abs() < 1e-12);
        let n = intersect_newton(&axial(10.0, -10.0), &s, 1e-10, 64).unwrap();
        assert!((n.hit.point - h.point).norm() < 1e-9);
    }

    #[test]
    fn negative_radius_selects_rear_cap() {
        let s = Surface::spherical(5.0, -50.0, 20.0, 1.0);
        let h = intersect_analytic(&axial(10.0, 0.0), &s).unwrap();
        let expected = 5.0 - 50.0 + (2500.0f64 - 100.0).sqrt();
        assert!((h.point.z - expected).abs() < 1e-12);
        assert!(h.normal.dot(Vec3::Z) < 0.0);
    }

    #[test]
    fn plane_hit() {
        let s = Surface::planar(5.0, 10.0, 1.0);
        let h = intersect_analytic(&Ray3::new(Vec3::default(), Vec3::Z), &s).unwrap();
        assert_eq!(h.point, Vec3::new(0.0, 0.0, 5.0));
        assert_eq!(h.normal, Vec3::new(0.0, 0.0, -1.0));
    }

    #[test]
    fn newton_on_plane_converges_in_one_step() {
        let s = Surface::planar(5.0, 10.0, 1.0);
        let r = Ray3::new(Vec3::new(0.3, -0.2, 0.0), Vec3::new(0.1, 0.2, 1.0));
        let n = intersect_newton(&r, &s, 1e-10, 64).unwrap();
        assert_eq!(n.iterations, 1);
    }

    #[test]
    fn parallel_ray_misses_plane() {
        let s = Surface::planar(5.0, 10.0, 1.0);
        let r = Ray3::new(Vec3::default(), Vec3::new(1.0, 0.0, 0.0));
        assert!(intersect_analytic(&r, &s).is_none());
        assert!(intersect_newton(&r, &s, 1e-10, 64).is_none());
    }

    #[test]
    fn plane_behind_origin_misses() {
        let s = Surface::planar(-5.0, 10.0, 1.0);
        assert!(intersect_analytic(&axial(0.0, 0.0), &s).is_none());
    }

    #[test]
    fn ray_outside_sphere_misses() {
        let s = Surface::spherical(0.0, 50.0, 20.0, 1.5);
        assert!(intersect_analytic(&axial(60.0, -10.0), &s).is_none());
        assert!(intersect_newton(&axial(60.0, -10.0), &s, 1e-10, 64).is_none());
    }

    #[test]
    fn newton_exhausting_iterations_misses() {
        let s = Surface::spherical(0.0, 50.0, 20.0, 1.5);
        let r = Ray3::new(Vec3::new(15.0, 0.0, -10.0), Vec3::new(0.2, 0.0, 1.0));
        assert!(intersect_newton(&r, &s, 1e-10, 1).is_none());
        assert!(intersect_newton(&r, &s, 1e-10, 64).is_some());
    }
}
