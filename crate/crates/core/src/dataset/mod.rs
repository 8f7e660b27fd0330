//! Ray-pair dataset synthesis: a grid source, Monte Carlo directions aimed at
//! the system entrance, exact traced ground truth, and the by-cell split.

mod generate;
mod grid;
mod io;
mod sampling;
mod split;

pub use generate::{generate, generate_toward, trace_sample, CellStats, GenerationReport};
pub use grid::SourceGrid;
pub use io::{load_binary, load_csv, save_binary, save_csv, Dataset, BINARY_MAGIC, BINARY_VERSION, CSV_HEADER};
pub use sampling::{concentric_disk, sample_directions, sample_disk_points, stream_rng, Entrance, NOVEL_STREAM_BASE};
pub use split::{split_cells, DatasetSplit};

/// One training record: source ray and traced ray on the target plane, with
/// directions stored as transverse components (`d_z` is implied positive).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RaySample {
    pub cell_id: u32,
    pub p_i: [f64; 2],
    pub d_i: [f64; 2],
    pub p_o: [f64; 2],
    pub d_o: [f64; 2],
}

impl RaySample {
    pub fn input(&self) -> [f64; 4] {
        [self.p_i[0], self.p_i[1], self.d_i[0], self.d_i[1]]
    }

    pub fn output(&self) -> [f64; 4] {
        [self.p_o[0], self.p_o[1], self.d_o[0], self.d_o[1]]
    }

    pub fn features(&self) -> [f64; 8] {
        let (i, o) = (self.input(), self.output());
        [i[0], i[1], i[2], i[3], o[0], o[1], o[2], o[3]]
    }
}
