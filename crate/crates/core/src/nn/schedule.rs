use crate::error::{Error, Result};

/// Geometric decay from `base_lr` at epoch 0 to `final_lr` at `total_epochs`.
pub fn lr_at(base_lr: f64, final_lr: f64, epoch: usize, total_epochs: usize) -> Result<f64> {
    if total_epochs == 0 {
        return Err(Error::InvalidArgument("total_epochs must be >= 1".into()));
    }
    if epoch > total_epochs {
        return Err(Error::InvalidArgument(format!(
            "epoch {epoch} beyond schedule of {total_epochs}"
        )));
    }
    let frac = epoch as f64 / total_epochs as f64;
    Ok(base_lr * (final_lr / base_lr).powf(frac))
}
