use rand::Rng;

use super::eval::{evaluate, EvalReport};
use crate::dataset::{
    concentric_disk, stream_rng, trace_sample, DatasetSplit, Entrance, RaySample, SourceGrid, NOVEL_STREAM_BASE,
};
use crate::error::{Error, Result};
use crate::nn::MlpParams;
use crate::optics::{OpticalSystem, Vec3};
use crate::par;

const NOVEL_CHUNK: usize = 4096;

/// Scores the proxy on the held-out grid cells only.
pub fn experiment_unseen_cell(params: &MlpParams, records: &[RaySample], split: &DatasetSplit) -> Result<EvalReport> {
    if !split.is_disjoint() {
        return Err(Error::InvalidArgument(
            "test cells overlap the training cells; refusing to report a leaked score".into(),
        ));
    }
    let held_out: Vec<RaySample> = records
        .iter()
        .filter(|r| split.test_cells.contains(&r.cell_id))
        .copied()
        .collect();
    assert!(
        held_out.iter().all(|r| !split.train_cells.contains(&r.cell_id)),
        "held-out evaluation touched a training cell"
    );
    if held_out.is_empty() {
        return Err(Error::Data("no records fall in the test cells".into()));
    }
    evaluate(params, &held_out, "Unseen Grid Cell")
}

/// Fresh rays with origins uniform over the whole source square (not cell
/// centers) aimed uniformly at the entrance disk, traced exactly. Rays that do
/// not reach the target are dropped. Streams are disjoint from training.
pub fn novel_pattern_samples(
    system: &OpticalSystem,
    grid: &SourceGrid,
    count: usize,
    seed: u64,
) -> Result<Vec<RaySample>> {
    if count == 0 {
        return Err(Error::InvalidArgument("novel pattern needs at least one ray".into()));
    }
    grid.validate()?;
    let entrance = Entrance::of_system(system)?;
    let chunks: Vec<usize> = (0..count.div_ceil(NOVEL_CHUNK)).collect();
    let half = grid.extent / 2.0;
    let n = grid.cells_per_side;
    let parts = par::map(&chunks, |&c| {
        let mut rng = stream_rng(seed, NOVEL_STREAM_BASE + c as u64);
        let len = NOVEL_CHUNK.min(count - c * NOVEL_CHUNK);
        let mut out = Vec::with_capacity(len);
        for _ in 0..len {
            let (u, v): (f64, f64) = (rng.gen(), rng.gen());
            let p_i = [
                grid.center[0] - half + u * grid.extent,
                grid.center[1] - half + v * grid.extent,
            ];
            let [dx, dy] = concentric_disk(rng.gen(), rng.gen());
            let target = Vec3::new(dx * entrance.radius, dy * entrance.radius, entrance.z);
            let dir = (target - Vec3::new(p_i[0], p_i[1], system.source_z)).normalize();
            let col = ((u * n as f64) as u32).min(n - 1);
            let row = ((v * n as f64) as u32).min(n - 1);
            if let Ok(s) = trace_sample(system, row * n + col, p_i, dir) {
                out.push(s);
            }
        }
        out
    });
    Ok(parts.into_iter().flatten().collect())
}

/// Scores the proxy on a novel continuous ray pattern.
pub fn experiment_novel_pattern(
    params: &MlpParams,
    system: &OpticalSystem,
    grid: &SourceGrid,
    count: usize,
    seed: u64,
) -> Result<EvalReport> {
    let samples = novel_pattern_samples(system, grid, count, seed)?;
    if samples.is_empty() {
        return Err(Error::Data("no novel-pattern ray reached the target plane".into()));
    }
    evaluate(params, &samples, "Novel Ray Pattern")
}
