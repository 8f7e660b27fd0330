use super::matrix::{Matrix, Scalar};
use crate::error::{Error, Result};

/// Mean over batch and features of the squared error.
pub fn mse_loss<T: Scalar>(pred: &Matrix<T>, target: &Matrix<T>) -> Result<f64> {
    if (pred.rows, pred.cols) != (target.rows, target.cols) {
        return Err(Error::Shape(format!(
            "prediction {}x{} vs target {}x{}",
            pred.rows, pred.cols, target.rows, target.cols
        )));
    }
    if pred.data.is_empty() {
        return Err(Error::Shape("empty batch".into()));
    }
    let sse: f64 = pred
        .data
        .iter()
        .zip(&target.data)
        .map(|(p, t)| {
            let e = p.to_f64() - t.to_f64();
            e * e
        })
        .sum();
    Ok(sse / pred.data.len() as f64)
}
