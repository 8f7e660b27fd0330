use crate::error::{Error, Result};

/// Square source grid on the source plane; cells are enumerated row-major.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SourceGrid {
    /// Side length in mm.
    pub extent: f64,
    pub cells_per_side: u32,
    pub center: [f64; 2],
}

impl SourceGrid {
    pub fn new(extent: f64, cells_per_side: u32) -> Result<Self> {
        let g = Self {
            extent,
            cells_per_side,
            center: [0.0, 0.0],
        };
        g.validate()?;
        Ok(g)
    }

    pub fn validate(&self) -> Result<()> {
        if self.cells_per_side < 1 || !(self.extent > 0.0 && self.extent.is_finite()) {
            return Err(Error::InvalidArgument(format!(
                "grid needs extent > 0 and at least one cell (got {} mm, {} cells)",
                self.extent, self.cells_per_side
            )));
        }
        Ok(())
    }

    pub fn pitch(&self) -> f64 {
        self.extent / self.cells_per_side as f64
    }

    pub fn cell_count(&self) -> u32 {
        self.cells_per_side * self.cells_per_side
    }

    pub fn cell_center(&self, cell_id: u32) -> [f64; 2] {
        let (r, c) = (cell_id / self.cells_per_side, cell_id % self.cells_per_side);
        let half = self.extent / 2.0;
        let pitch = self.pitch();
        [
            self.center[0] - half + (c as f64 + 0.5) * pitch,
            self.center[1] - half + (r as f64 + 0.5) * pitch,
        ]
    }

    pub fn cell_centers(&self) -> Vec<(u32, [f64; 2])> {
        (0..self.cell_count()).map(|id| (id, self.cell_center(id))).collect()
    }
}
