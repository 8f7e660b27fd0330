use super::vec3::Vec3;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Refraction {
    Transmitted(Vec3),
    TotalInternalReflection,
}

impl Refraction {
    pub fn transmitted(self) -> Option<Vec3> {
        match self {
            Refraction::Transmitted(d) => Some(d),
            Refraction::TotalInternalReflection => None,
        }
    }
}

/// Vector Snell refraction of unit `direction` at a surface with unit
/// `normal` facing the incoming ray, from index `n1` into `n2`.
#[inline]
pub fn refract(direction: Vec3, normal: Vec3, n1: f64, n2: f64) -> Refraction {
    let mu = n1 / n2;
    let c = -normal.dot(direction);
    let k = 1.0 - mu * mu * (1.0 - c * c);
    if k < 0.0 {
        return Refraction::TotalInternalReflection;
    }
    let out = direction * mu + normal * (mu * c - k.sqrt());
    // One renormalization keeps |d| within an ulp or two of 1 after many surfaces.
    Refraction::Transmitted(out.normalize())
}

#[cfg(test)]
mod tests {
    use super::*;

    const N: Vec3 = Vec3::new(0.0, 0.0, -1.0);

    #[test]
    fn normal_incidence_is_unchanged() {
        let d = refract(Vec3::Z, N, 1.0, 1.5).transmitted().unwrap();
        assert!((d - Vec3::Z).norm() < 1e-15);
    }

    #[test]
    fn oblique_incidence_obeys_scalar_snell() {
        let d = refract(Vec3::new(0.6, 0.0, 0.8), N, 1.0, 1.5).transmitted().unwrap();
        assert!((d.x - 0.4).abs() < 1e-15);
        assert!(d.y.abs() < 1e-15);
        assert!((d.z - 0.84f64.sqrt()).abs() < 1e-15);
        assert!((d.z - 0.916515).abs() < 1e-6);
    }

    #[test]
    fn glass_to_air_past_critical_angle_is_tir() {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_eq!(
            refract(Vec3::new(s, 0.0, s), N, 1.5, 1.0),
            Refraction::TotalInternalReflection
        );
    }
}
