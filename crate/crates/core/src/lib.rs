//! Exact lens ray tracing, ray-pair dataset synthesis, and a learned
//! single-pass proxy that maps source rays to rays on a target plane.

pub mod dataset;
pub mod error;
pub mod io;
pub mod nn;
pub mod optics;
pub mod par;
pub mod proxy;

pub use error::{Error, Result};
