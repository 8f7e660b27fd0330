//! Plain-text lens prescription files.
//!
//! ```text
//! index_before=1
//! source_z=-120
//! target_z=14
//! surface kind=spherical vertex_z=0 radius=60.9 semi_aperture=25.3 index_after=1.5168
//! surface kind=spherical vertex_z=13 radius=-60.9 semi_aperture=25.3 index_after=1
//! ```
//!
//! `#` starts a comment. `planar` and `stop` surfaces omit `radius`; a stop
//! may omit `index_after`, inheriting the medium it sits in.

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use super::surface::{OpticalSystem, Surface, SurfaceKind};
use crate::error::{Error, Result};

pub fn read_prescription(path: &Path) -> Result<OpticalSystem> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_prescription(&text, path)
}

pub fn parse_prescription(text: &str, path: &Path) -> Result<OpticalSystem> {
    let err = |line: usize, msg: String| Error::Parse {
        path: PathBuf::from(path),
        line,
        msg,
    };
    let mut index_before = None;
    let mut source_z = None;
    let mut target_z = None;
    let mut surfaces = Vec::new();
    let mut medium = 1.0;
    let mut last_line = 0;

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        last_line = lineno;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut tokens = line.split_whitespace().peekable();
        if tokens.peek() == Some(&"surface") {
            tokens.next();
            let mut kind = None;
            let mut vertex_z = None;
            let mut radius = None;
            let mut semi = None;
            let mut index_after = None;
            for tok in tokens {
                let (k, v) = tok
                    .split_once('=')
                    .ok_or_else(|| err(lineno, format!("expected key=value, got `{tok}`")))?;
                if k == "kind" {
                    kind = Some(v.to_string());
                    continue;
                }
                let x: f64 = v
                    .parse()
                    .map_err(|_| err(lineno, format!("`{k}`: `{v}` is not a number")))?;
                let slot = match k {
                    "vertex_z" => &mut vertex_z,
                    "radius" => &mut radius,
                    "semi_aperture" => &mut semi,
                    "index_after" => &mut index_after,
                    _ => return Err(err(lineno, format!("unknown surface key `{k}`"))),
                };
                if slot.replace(x).is_some() {
                    return Err(err(lineno, format!("duplicate key `{k}`")));
                }
            }
            let need = |v: Option<f64>, k: &str| v.ok_or_else(|| err(lineno, format!("missing `{k}`")));
            let kind = match kind.as_deref() {
                Some("spherical") => SurfaceKind::Spherical {
                    radius: need(radius, "radius")?,
                },
                Some("planar") | Some("stop") if radius.is_some() => {
                    return Err(err(lineno, "`radius` is only valid for spherical surfaces".into()))
                }
                Some("planar") => SurfaceKind::Planar,
                Some("stop") => SurfaceKind::Stop,
                Some(other) => return Err(err(lineno, format!("unknown surface kind `{other}`"))),
                None => return Err(err(lineno, "missing `kind`".into())),
            };
            let index_after = match (kind, index_after) {
                (SurfaceKind::Stop, None) => medium,
                (_, v) => need(v, "index_after")?,
            };
            let s = Surface {
                kind,
                vertex_z: need(vertex_z, "vertex_z")?,
                semi_aperture: need(semi, "semi_aperture")?,
                index_after,
            };
            s.validate().map_err(|e| err(lineno, e.to_string()))?;
            if s.refracts() {
                medium = s.index_after;
            }
            surfaces.push(s);
        } else {
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| err(lineno, format!("expected key=value, got `{line}`")))?;
            let (k, v) = (k.trim(), v.trim());
            let x: f64 = v
                .parse()
                .map_err(|_| err(lineno, format!("`{k}`: `{v}` is not a number")))?;
            let slot = match k {
                "index_before" => {
                    if surfaces.is_empty() {
                        medium = x;
                    }
                    &mut index_before
                }
                "source_z" => &mut source_z,
                "target_z" => &mut target_z,
                _ => return Err(err(lineno, format!("unknown header key `{k}`"))),
            };
            if slot.replace(x).is_some() {
                return Err(err(lineno, format!("duplicate key `{k}`")));
            }
        }
    }
    let end = last_line.max(1);
    let source_z = source_z.ok_or_else(|| err(end, "missing `source_z`".into()))?;
    let target_z = target_z.ok_or_else(|| err(end, "missing `target_z`".into()))?;
    OpticalSystem::new(surfaces, index_before.unwrap_or(1.0), source_z, target_z).map_err(|e| err(end, e.to_string()))
}

pub fn write_prescription(system: &OpticalSystem) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "index_before={}", system.index_before_first);
    let _ = writeln!(out, "source_z={}", system.source_z);
    let _ = writeln!(out, "target_z={}", system.target_z);
    for s in &system.surfaces {
        let _ = match s.kind {
            SurfaceKind::Spherical { radius } => writeln!(
                out,
                "surface kind=spherical vertex_z={} radius={} semi_aperture={} index_after={}",
                s.vertex_z, radius, s.semi_aperture, s.index_after
            ),
            SurfaceKind::Planar => writeln!(
                out,
                "surface kind=planar vertex_z={} semi_aperture={} index_after={}",
                s.vertex_z, s.semi_aperture, s.index_after
            ),
            SurfaceKind::Stop => writeln!(
                out,
                "surface kind=stop vertex_z={} semi_aperture={} index_after={}",
                s.vertex_z, s.semi_aperture, s.index_after
            ),
        };
    }
    out
}
