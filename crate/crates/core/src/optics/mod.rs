//! Exact sequential ray tracing through axially-symmetric lens systems.
//!
//! The optical axis is +z. All lengths are millimeters and all arithmetic is
//! `f64`; ground truth at micrometer scale must not carry tracer error.

mod design;
mod intersect;
mod paraxial;
mod prescription;
mod refract;
mod surface;
mod trace;
mod vec3;

pub use design::{
    design_singlet, edge_thickness, element_stack, DEFAULT_CENTER_THICKNESS, DEFAULT_INDEX, TARGET_CLEARANCE,
};
pub use intersect::{intersect, intersect_analytic, intersect_newton, Hit, NewtonHit};
pub use paraxial::{paraxial_efl, paraxial_image_z, SystemMatrix};
pub use prescription::{parse_prescription, read_prescription, write_prescription};
pub use refract::{refract, Refraction};
pub use surface::{OpticalSystem, Surface, SurfaceKind};
pub use trace::{propagate_to_plane, trace, trace_with, Intersector, TraceOutcome};
pub use vec3::{Ray3, Vec3};

/// Newton tolerance on the sag residual, in mm.
pub const NEWTON_TOL: f64 = 1e-10;
pub const NEWTON_MAX_ITER: usize = 64;
