use std::fmt::Write as _;

use rand::seq::SliceRandom;

use super::eval::{evaluate, EvalReport};
use crate::dataset::{stream_rng, Dataset, DatasetSplit, RaySample, SourceGrid};
use crate::error::{Error, Result};
use crate::nn::{fit_normalization, lr_at, Matrix, MlpConfig, MlpParams, OptimizerState, Reduction};

const SHUFFLE_STREAM: u64 = 0x5_4655;

pub const HISTORY_CSV_HEADER: &str = "epoch,lr,train_loss,test_pos_um,test_ang_deg";

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrainConfig {
    pub mlp: MlpConfig,
    pub epochs: usize,
    pub batch_size: usize,
    pub base_lr: f64,
    pub final_lr: f64,
    pub weight_decay: f64,
    /// Seeds the per-epoch shuffles.
    pub seed: u64,
    pub reduction: Reduction,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            mlp: MlpConfig::default(),
            epochs: 3000,
            batch_size: 256,
            base_lr: 5e-4,
            final_lr: 1e-5,
            weight_decay: 1e-2,
            seed: 0,
            reduction: Reduction::Ordered,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EpochRecord {
    pub epoch: usize,
    pub lr: f64,
    pub train_loss: f64,
    pub test_pos_um: f64,
    pub test_ang_deg: f64,
}

#[derive(Debug, Clone)]
pub struct TrainOutcome {
    pub final_params: MlpParams,
    /// Parameters from the epoch with the lowest held-out positional error.
    pub best_params: MlpParams,
    pub best_epoch: usize,
    pub history: Vec<EpochRecord>,
}

pub fn history_csv(history: &[EpochRecord]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{HISTORY_CSV_HEADER}");
    for h in history {
        let _ = writeln!(
            out,
            "{},{},{},{},{}",
            h.epoch, h.lr, h.train_loss, h.test_pos_um, h.test_ang_deg
        );
    }
    out
}

/// Rejects a dataset whose stored grid metadata disagrees with `grid`.
pub fn check_grid(dataset: &Dataset, grid: &SourceGrid) -> Result<()> {
    if dataset.extent != grid.extent || dataset.cells_per_side != grid.cells_per_side as u64 {
        return Err(Error::Data(format!(
            "dataset grid ({} mm, {} cells/side) does not match the configured grid ({} mm, {} cells/side)",
            dataset.extent, dataset.cells_per_side, grid.extent, grid.cells_per_side
        )));
    }
    Ok(())
}

/// Minimizes the normalized-output MSE over the training cells with AdamW,
/// scoring the held-out cells after every epoch. `on_epoch` sees each record
/// as it is produced.
pub fn train(
    records: &[RaySample],
    split: &DatasetSplit,
    config: &TrainConfig,
    mut on_epoch: impl FnMut(&EpochRecord),
) -> Result<TrainOutcome> {
    if config.epochs == 0 {
        return Err(Error::InvalidArgument("epochs must be >= 1".into()));
    }
    if config.batch_size == 0 {
        return Err(Error::InvalidArgument("batch_size must be >= 1".into()));
    }
    if !split.is_disjoint() {
        return Err(Error::InvalidArgument("train and test cells overlap".into()));
    }
    let train_set: Vec<RaySample> = records
        .iter()
        .filter(|r| split.train_cells.contains(&r.cell_id))
        .copied()
        .collect();
    let test_set: Vec<RaySample> = records
        .iter()
        .filter(|r| split.test_cells.contains(&r.cell_id))
        .copied()
        .collect();
    if train_set.is_empty() || test_set.is_empty() {
        return Err(Error::Data(format!(
            "split leaves {} training and {} test records",
            train_set.len(),
            test_set.len()
        )));
    }

    let mut params = MlpParams::new(config.mlp, fit_normalization(&train_set))?;
    let inputs: Vec<[f64; 4]> = train_set.iter().map(RaySample::input).collect();
    let targets: Vec<[f64; 4]> = train_set.iter().map(RaySample::output).collect();
    let x_all = params.input_matrix(&inputs);
    let y_all = params.target_matrix(&targets);
    let mut opt = OptimizerState::new(&params, config.base_lr, config.final_lr).with_weight_decay(config.weight_decay);
    let mut rng = stream_rng(config.seed, SHUFFLE_STREAM);
    let mut order: Vec<usize> = (0..train_set.len()).collect();

    let mut history = Vec::with_capacity(config.epochs);
    let mut best: Option<(EvalReport, MlpParams, usize)> = None;
    for epoch in 0..config.epochs {
        let lr = lr_at(config.base_lr, config.final_lr, epoch, config.epochs)?;
        order.shuffle(&mut rng);
        let mut loss_sum = 0.0;
        for batch in order.chunks(config.batch_size) {
            let x = gather(&x_all, batch);
            let y = gather(&y_all, batch);
            let (loss, grads) = params.loss_and_gradients(&x, &y, config.reduction)?;
            if !loss.is_finite() {
                return Err(Error::NonFinite(format!("training loss at epoch {epoch}")));
            }
            opt.step(&mut params, &grads, lr)
                .map_err(|e| Error::NonFinite(format!("epoch {epoch}: {e}")))?;
            loss_sum += loss * batch.len() as f64;
        }
        if !params.all_finite() {
            return Err(Error::NonFinite(format!("parameters after epoch {epoch}")));
        }
        let report = evaluate(&params, &test_set, "test")?;
        let rec = EpochRecord {
            epoch,
            lr,
            train_loss: loss_sum / train_set.len() as f64,
            test_pos_um: report.pos_error_um.mean,
            test_ang_deg: report.ang_error_deg.mean,
        };
        on_epoch(&rec);
        history.push(rec);
        let better = match &best {
            None => true,
            Some((b, _, _)) => {
                let key = |r: &EvalReport| (r.pos_error_um.mean, r.ang_error_deg.mean);
                key(&report) < key(b)
            }
        };
        if better {
            best = Some((report, params.clone(), epoch));
        }
    }
    let (_, best_params, best_epoch) = best.expect("at least one epoch ran");
    Ok(TrainOutcome {
        final_params: params,
        best_params,
        best_epoch,
        history,
    })
}

fn gather(m: &Matrix<f32>, rows: &[usize]) -> Matrix<f32> {
    let mut data = Vec::with_capacity(rows.len() * m.cols);
    for &r in rows {
        data.extend_from_slice(m.row(r));
    }
    Matrix::from_vec(rows.len(), m.cols, data)
}
