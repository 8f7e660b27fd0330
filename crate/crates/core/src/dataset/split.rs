use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::Path;

use rand::seq::SliceRandom;

use super::grid::SourceGrid;
use super::sampling::stream_rng;
use crate::error::{Error, Result};

const SPLIT_STREAM: u64 = u64::MAX;

/// Train/test partition of grid cells. Rays are never split individually.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct DatasetSplit {
    pub train_cells: BTreeSet<u32>,
    pub test_cells: BTreeSet<u32>,
    pub seed: u64,
}

/// Seeded uniform permutation of the cell ids; the first `round(fraction * N)` train.
pub fn split_cells(grid: &SourceGrid, fraction: f64, seed: u64) -> Result<DatasetSplit> {
    if !(fraction > 0.0 && fraction < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "split fraction must be in (0, 1), got {fraction}"
        )));
    }
    let n = grid.cell_count() as usize;
    let n_train = (fraction * n as f64).round() as usize;
    if n_train == 0 || n_train == n {
        return Err(Error::InvalidArgument(format!(
            "fraction {fraction} of {n} cells leaves one side of the split empty"
        )));
    }
    let mut ids: Vec<u32> = (0..n as u32).collect();
    ids.shuffle(&mut stream_rng(seed, SPLIT_STREAM));
    Ok(DatasetSplit {
        train_cells: ids[..n_train].iter().copied().collect(),
        test_cells: ids[n_train..].iter().copied().collect(),
        seed,
    })
}

impl DatasetSplit {
    pub fn is_disjoint(&self) -> bool {
        self.train_cells.is_disjoint(&self.test_cells)
    }

    pub fn to_text(&self) -> String {
        let join = |s: &BTreeSet<u32>| s.iter().map(u32::to_string).collect::<Vec<_>>().join(" ");
        let mut out = String::new();
        let _ = writeln!(out, "seed={}", self.seed);
        let _ = writeln!(out, "train={}", join(&self.train_cells));
        let _ = writeln!(out, "test={}", join(&self.test_cells));
        out
    }

    pub fn from_text(text: &str, path: &Path) -> Result<Self> {
        let err = |line: usize, msg: String| Error::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        };
        let mut seed = None;
        let mut train = None;
        let mut test = None;
        for (i, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| err(i + 1, "expected key=value".into()))?;
            let ids = |v: &str| -> Result<BTreeSet<u32>> {
                v.split_whitespace()
                    .map(|t| t.parse().map_err(|_| err(i + 1, format!("bad cell id `{t}`"))))
                    .collect()
            };
            match k {
                "seed" => seed = Some(v.parse().map_err(|_| err(i + 1, format!("bad seed `{v}`")))?),
                "train" => train = Some(ids(v)?),
                "test" => test = Some(ids(v)?),
                _ => return Err(err(i + 1, format!("unknown key `{k}`"))),
            }
        }
        let end = text.lines().count().max(1);
        let split = DatasetSplit {
            seed: seed.ok_or_else(|| err(end, "missing `seed`".into()))?,
            train_cells: train.ok_or_else(|| err(end, "missing `train`".into()))?,
            test_cells: test.ok_or_else(|| err(end, "missing `test`".into()))?,
        };
        if !split.is_disjoint() {
            return Err(err(end, "train and test cells overlap".into()));
        }
        Ok(split)
    }
}
