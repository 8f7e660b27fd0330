use std::fmt;

use super::grid::SourceGrid;
use super::sampling::{sample_directions, Entrance};
use super::RaySample;
use crate::error::{Error, Result};
use crate::optics::{propagate_to_plane, trace, OpticalSystem, Ray3, TraceOutcome, Vec3};
use crate::par;

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct CellStats {
    pub cell_id: u32,
    pub emitted: usize,
    pub survived: usize,
    pub vignetted: usize,
    pub tir: usize,
    pub missed: usize,
}

impl CellStats {
    pub fn dropped(&self) -> usize {
        self.vignetted + self.tir + self.missed
    }
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct GenerationReport {
    pub cells: Vec<CellStats>,
}

impl GenerationReport {
    pub fn total(&self) -> CellStats {
        self.cells.iter().fold(CellStats::default(), |mut acc, c| {
            acc.emitted += c.emitted;
            acc.survived += c.survived;
            acc.vignetted += c.vignetted;
            acc.tir += c.tir;
            acc.missed += c.missed;
            acc
        })
    }
}

impl fmt::Display for GenerationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let t = self.total();
        writeln!(f, "# generation report")?;
        writeln!(
            f,
            "total emitted={} survived={} vignetted={} tir={} missed={}",
            t.emitted, t.survived, t.vignetted, t.tir, t.missed
        )?;
        writeln!(f, "cell_id,emitted,survived,vignetted,tir,missed")?;
        for c in &self.cells {
            writeln!(
                f,
                "{},{},{},{},{},{}",
                c.cell_id, c.emitted, c.survived, c.vignetted, c.tir, c.missed
            )?;
        }
        Ok(())
    }
}

/// Traces one source ray and reduces it to a record on the target plane.
pub fn trace_sample(
    system: &OpticalSystem,
    cell_id: u32,
    p_i: [f64; 2],
    direction: Vec3,
) -> Result<RaySample, TraceOutcome> {
    let ray = Ray3 {
        origin: Vec3::new(p_i[0], p_i[1], system.source_z),
        direction,
    };
    let outcome = trace(&ray, system);
    let out = outcome.emerged().ok_or(outcome)?;
    // A ray that leaves the last surface heading backward never reaches the target.
    let p_o = propagate_to_plane(&out, system.target_z).map_err(|_| TraceOutcome::Missed(system.surfaces.len()))?;
    Ok(RaySample {
        cell_id,
        p_i,
        d_i: [direction.x, direction.y],
        p_o,
        d_o: [out.direction.x, out.direction.y],
    })
}

/// Synthesizes `rays_per_cell` traced rays per grid cell, aimed at the first
/// surface's clear aperture. Cells run in parallel on independent streams.
pub fn generate(
    system: &OpticalSystem,
    grid: &SourceGrid,
    rays_per_cell: usize,
    seed: u64,
) -> Result<(Vec<RaySample>, GenerationReport)> {
    generate_toward(system, grid, rays_per_cell, seed, Entrance::of_system(system)?)
}

/// As [`generate`], aiming at an explicit entrance disk.
pub fn generate_toward(
    system: &OpticalSystem,
    grid: &SourceGrid,
    rays_per_cell: usize,
    seed: u64,
    entrance: Entrance,
) -> Result<(Vec<RaySample>, GenerationReport)> {
    grid.validate()?;
    system.validate()?;
    if rays_per_cell == 0 {
        return Err(Error::InvalidArgument("rays_per_cell must be >= 1".into()));
    }
    let cells = grid.cell_centers();
    let per_cell = par::map(&cells, |&(cell_id, p_i)| -> Result<(Vec<RaySample>, CellStats)> {
        let dirs = sample_directions(p_i, system.source_z, entrance, rays_per_cell, seed, cell_id as u64)?;
        let mut stats = CellStats {
            cell_id,
            emitted: dirs.len(),
            ..Default::default()
        };
        let mut out = Vec::with_capacity(dirs.len());
        for d in dirs {
            match trace_sample(system, cell_id, p_i, d) {
                Ok(s) => out.push(s),
                Err(TraceOutcome::Vignetted(_)) => stats.vignetted += 1,
                Err(TraceOutcome::TotalInternalReflection(_)) => stats.tir += 1,
                Err(_) => stats.missed += 1,
            }
        }
        stats.survived = out.len();
        if out.is_empty() {
            return Err(Error::EmptyCell { cell: cell_id });
        }
        Ok((out, stats))
    });
    let mut records = Vec::with_capacity(cells.len() * rays_per_cell);
    let mut report = GenerationReport::default();
    for r in per_cell {
        let (recs, stats) = r?;
        records.extend(recs);
        report.cells.push(stats);
    }
    Ok((records, report))
}
