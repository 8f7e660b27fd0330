//! Flat `key = value` pipeline configuration. Defaults reproduce the
//! full-scale experiment; a config file overrides them and command-line
//! flags override the file.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineConfig {
    /// Unset means `<out_dir>/prescription.txt`.
    pub prescription: Option<PathBuf>,
    pub focal: f64,
    pub aperture: f64,
    pub index: f64,
    pub thickness: f64,
    pub extent: f64,
    pub cells_per_side: u32,
    pub rays_per_cell: usize,
    pub seed: u64,
    pub split_fraction: f64,
    pub hidden_width: usize,
    pub hidden_layers: usize,
    pub skip_period: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub base_lr: f64,
    pub final_lr: f64,
    pub weight_decay: f64,
    pub novel_rays: usize,
    pub bench_batches: Vec<usize>,
    pub bench_reps: usize,
    pub spot_rays: usize,
    pub out_dir: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            prescription: None,
            focal: 60.0,
            aperture: 50.6,
            index: rayproxy::optics::DEFAULT_INDEX,
            thickness: rayproxy::optics::DEFAULT_CENTER_THICKNESS,
            extent: 12.0,
            cells_per_side: 24,
            rays_per_cell: 1024,
            seed: 0,
            split_fraction: 0.8,
            hidden_width: 256,
            hidden_layers: 6,
            skip_period: 3,
            epochs: 3000,
            batch_size: 256,
            base_lr: 5e-4,
            final_lr: 1e-5,
            weight_decay: 1e-2,
            novel_rays: 1_000_000,
            bench_batches: vec![100, 10_000, 1_000_000],
            bench_reps: 5,
            spot_rays: 4096,
            out_dir: PathBuf::from("out"),
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T>
where
    T::Err: std::fmt::Display,
{
    value
        .parse()
        .map_err(|e| anyhow::anyhow!("invalid value `{value}` for `{key}`: {e}"))
}

impl PipelineConfig {
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "prescription" => self.prescription = Some(PathBuf::from(value)),
            "focal" => self.focal = parse(key, value)?,
            "aperture" => self.aperture = parse(key, value)?,
            "index" => self.index = parse(key, value)?,
            "thickness" => self.thickness = parse(key, value)?,
            "extent" => self.extent = parse(key, value)?,
            "cells_per_side" => self.cells_per_side = parse(key, value)?,
            "rays_per_cell" => self.rays_per_cell = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "split_fraction" => self.split_fraction = parse(key, value)?,
            "hidden_width" => self.hidden_width = parse(key, value)?,
            "hidden_layers" => self.hidden_layers = parse(key, value)?,
            "skip_period" => self.skip_period = parse(key, value)?,
            "epochs" => self.epochs = parse(key, value)?,
            "batch_size" => self.batch_size = parse(key, value)?,
            "base_lr" => self.base_lr = parse(key, value)?,
            "final_lr" => self.final_lr = parse(key, value)?,
            "weight_decay" => self.weight_decay = parse(key, value)?,
            "novel_rays" => self.novel_rays = parse(key, value)?,
            "bench_batches" => self.bench_batches = parse_list(key, value)?,
            "bench_reps" => self.bench_reps = parse(key, value)?,
            "spot_rays" => self.spot_rays = parse(key, value)?,
            "out_dir" => self.out_dir = PathBuf::from(value),
            _ => bail!("unknown config key `{key}`"),
        }
        Ok(())
    }

    pub fn apply_text(&mut self, text: &str, origin: &Path) -> Result<()> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .with_context(|| format!("{}:{}: expected key = value", origin.display(), i + 1))?;
            self.set(k.trim(), v.trim())
                .with_context(|| format!("{}:{}", origin.display(), i + 1))?;
        }
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let mut cfg = Self::default();
        cfg.apply_text(&text, path)?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.extent > 0.0) || self.cells_per_side == 0 {
            bail!("grid needs extent > 0 and cells_per_side >= 1");
        }
        if self.rays_per_cell == 0 || self.epochs == 0 || self.batch_size == 0 {
            bail!("rays_per_cell, epochs and batch_size must be >= 1");
        }
        if !(self.split_fraction > 0.0 && self.split_fraction < 1.0) {
            bail!("split_fraction must lie in (0, 1)");
        }
        if self.hidden_width == 0 || self.hidden_layers == 0 || self.skip_period == 0 {
            bail!("hidden_width, hidden_layers and skip_period must be >= 1");
        }
        if !(self.base_lr > 0.0 && self.final_lr > 0.0) {
            bail!("learning rates must be positive");
        }
        if self.bench_batches.is_empty() || self.bench_batches.contains(&0) {
            bail!("bench_batches must list positive sizes");
        }
        Ok(())
    }

    pub fn prescription_path(&self) -> PathBuf {
        self.prescription
            .clone()
            .unwrap_or_else(|| self.out_dir.join("prescription.txt"))
    }
}

fn parse_list(key: &str, value: &str) -> Result<Vec<usize>> {
    value
        .split(',')
        .map(|t| parse::<f64>(key, t.trim()).and_then(|v| whole(key, v)))
        .collect()
}

/// Accepts `1e6` style counts.
fn whole(key: &str, v: f64) -> Result<usize> {
    if v >= 0.0 && v.fract() == 0.0 && v <= usize::MAX as f64 {
        Ok(v as usize)
    } else {
        bail!("`{key}` entries must be whole numbers, got {v}")
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_full_scale() {
        let c = PipelineConfig::default();
        assert_eq!((c.cells_per_side, c.extent, c.rays_per_cell), (24, 12.0, 1024));
        assert_eq!((c.split_fraction, c.epochs, c.base_lr), (0.8, 3000, 5e-4));
        assert_eq!((c.focal, c.aperture), (60.0, 50.6));
    }

    #[test]
    fn file_overrides_and_errors() {
        let mut c = PipelineConfig::default();
        c.apply_text(
            "# desk\ncells_per_side = 8\nbench_batches = 1e2, 1e4\n\nepochs=500 # short",
            Path::new("c"),
        )
        .unwrap();
        assert_eq!(c.cells_per_side, 8);
        assert_eq!(c.epochs, 500);
        assert_eq!(c.bench_batches, vec![100, 10_000]);
        let e = c.apply_text("epochs = 1\nwidth = 3", Path::new("c")).unwrap_err();
        assert!(format!("{e:#}").contains("c:2"), "{e:#}");
        assert!(c.apply_text("epochs = many", Path::new("c")).is_err());
    }
}
