use crate::error::{Error, Result};
use crate::nn::MlpParams;
use crate::optics::{propagate_to_plane, trace, OpticalSystem, Ray3, Vec3};
use crate::par;

/// Anything that maps source rays `(p_i, d_i)` to rays on the training target
/// plane `(p_o, d_o)`.
pub trait RayMapper {
    fn map_rays(&self, inputs: &[[f64; 4]]) -> Result<Vec<[f64; 4]>>;
}

impl RayMapper for MlpParams {
    fn map_rays(&self, inputs: &[[f64; 4]]) -> Result<Vec<[f64; 4]>> {
        self.forward(inputs)
    }
}

/// The exact tracer behind the same interface as the proxy.
#[derive(Debug, Clone, Copy)]
pub struct ExactTracer<'a> {
    pub system: &'a OpticalSystem,
}

impl ExactTracer<'_> {
    fn ray(&self, index: usize, x: &[f64; 4]) -> Result<Ray3> {
        Ray3::from_transverse(Vec3::new(x[0], x[1], self.system.source_z), x[2], x[3]).ok_or(Error::BadDirection {
            index,
            dx: x[2],
            dy: x[3],
        })
    }

    /// Traces straight to `depth_z` without passing through the target plane.
    pub fn trace_to_depth(&self, inputs: &[[f64; 4]], depth_z: f64) -> Result<Vec<[f64; 2]>> {
        let idx: Vec<usize> = (0..inputs.len()).collect();
        par::map(&idx, |&i| {
            let out = trace(&self.ray(i, &inputs[i])?, self.system)
                .emerged()
                .ok_or_else(|| Error::Data(format!("ray {i} does not reach the target")))?;
            propagate_to_plane(&out, depth_z)
        })
        .into_iter()
        .collect()
    }
}

impl RayMapper for ExactTracer<'_> {
    fn map_rays(&self, inputs: &[[f64; 4]]) -> Result<Vec<[f64; 4]>> {
        let idx: Vec<usize> = (0..inputs.len()).collect();
        par::map(&idx, |&i| {
            let out = trace(&self.ray(i, &inputs[i])?, self.system)
                .emerged()
                .ok_or_else(|| Error::Data(format!("ray {i} does not reach the target")))?;
            let p = propagate_to_plane(&out, self.system.target_z)?;
            Ok([p[0], p[1], out.direction.x, out.direction.y])
        })
        .into_iter()
        .collect()
    }
}

/// Maps rays to the training target plane, then transports them through free
/// space to `depth_z`. Returns `(position, transverse direction)` per ray.
pub fn query_at_depth(
    mapper: &impl RayMapper,
    inputs: &[[f64; 4]],
    target_z: f64,
    depth_z: f64,
) -> Result<Vec<([f64; 2], [f64; 2])>> {
    if !(depth_z >= target_z) {
        return Err(Error::InvalidArgument(format!(
            "query depth {depth_z} lies before the target plane {target_z}"
        )));
    }
    let mapped = mapper.map_rays(inputs)?;
    mapped
        .iter()
        .enumerate()
        .map(|(i, o)| {
            let ray =
                Ray3::from_transverse(Vec3::new(o[0], o[1], target_z), o[2], o[3]).ok_or(Error::BadDirection {
                    index: i,
                    dx: o[2],
                    dy: o[3],
                })?;
            if depth_z == target_z {
                return Ok(([o[0], o[1]], [o[2], o[3]]));
            }
            Ok((propagate_to_plane(&ray, depth_z)?, [o[2], o[3]]))
        })
        .collect()
}
