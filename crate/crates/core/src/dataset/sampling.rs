use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::optics::{OpticalSystem, Vec3};

/// Streams at or above this id are reserved for evaluation ray patterns, so
/// they never collide with per-cell training streams.
pub const NOVEL_STREAM_BASE: u64 = 1 << 62;

/// A counter-based ChaCha stream keyed by `(seed, stream)`.
pub fn stream_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// The disk rays are aimed at: the first surface's clear aperture in its vertex plane.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Entrance {
    pub z: f64,
    pub radius: f64,
}

impl Entrance {
    pub fn of_system(system: &OpticalSystem) -> Result<Self> {
        let first = system
            .surfaces
            .first()
            .ok_or_else(|| Error::InvalidSystem("system has no entrance surface to aim at".into()))?;
        if !(first.semi_aperture > 0.0) {
            return Err(Error::InvalidSystem("entrance surface has no aperture".into()));
        }
        Ok(Self {
            z: first.vertex_z,
            radius: first.semi_aperture,
        })
    }
}

/// Shirley–Chiu concentric map from the unit square to the unit disk.
pub fn concentric_disk(u: f64, v: f64) -> [f64; 2] {
    let (a, b) = (2.0 * u - 1.0, 2.0 * v - 1.0);
    if a == 0.0 && b == 0.0 {
        return [0.0, 0.0];
    }
    let (r, phi) = if a.abs() > b.abs() {
        (a, std::f64::consts::FRAC_PI_4 * (b / a))
    } else {
        (b, std::f64::consts::FRAC_PI_2 - std::f64::consts::FRAC_PI_4 * (a / b))
    };
    [r * phi.cos(), r * phi.sin()]
}

/// `count` points uniform on the entrance disk, drawn from stream `(seed, stream)`.
pub fn sample_disk_points(entrance: Entrance, count: usize, seed: u64, stream: u64) -> Vec<[f64; 2]> {
    let mut rng = stream_rng(seed, stream);
    (0..count)
        .map(|_| {
            let [x, y] = concentric_disk(rng.gen(), rng.gen());
            [x * entrance.radius, y * entrance.radius]
        })
        .collect()
}

/// Unit directions from a source point toward uniform points on the entrance disk.
pub fn sample_directions(
    origin: [f64; 2],
    source_z: f64,
    entrance: Entrance,
    count: usize,
    seed: u64,
    stream: u64,
) -> Result<Vec<Vec3>> {
    if count == 0 {
        return Err(Error::InvalidArgument("direction count must be >= 1".into()));
    }
    if !(entrance.z > source_z) {
        return Err(Error::InvalidArgument(format!(
            "entrance plane z = {} does not lie after the source plane z = {source_z}",
            entrance.z
        )));
    }
    let src = Vec3::new(origin[0], origin[1], source_z);
    Ok(sample_disk_points(entrance, count, seed, stream)
        .into_iter()
        .map(|[x, y]| (Vec3::new(x, y, entrance.z) - src).normalize())
        .collect())
}
