use std::fmt::Write as _;

use crate::dataset::RaySample;
use crate::error::{Error, Result};
use crate::nn::MlpParams;
use crate::optics::Vec3;

pub const EVAL_CSV_HEADER: &str =
    "condition,n_rays,pos_mean_um,pos_median_um,pos_p95_um,ang_mean_deg,ang_median_deg,ang_p95_deg";

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct Stats {
    pub mean: f64,
    pub median: f64,
    pub p95: f64,
}

impl Stats {
    /// Mean, median (midpoint for even counts) and nearest-rank 95th percentile.
    pub fn of(values: &mut [f64]) -> Stats {
        if values.is_empty() {
            return Stats::default();
        }
        values.sort_by(|a, b| a.total_cmp(b));
        let n = values.len();
        let mean = values.iter().sum::<f64>() / n as f64;
        let median = if n % 2 == 1 {
            values[n / 2]
        } else {
            0.5 * (values[n / 2 - 1] + values[n / 2])
        };
        let rank = ((0.95 * n as f64).ceil() as usize).clamp(1, n);
        Stats {
            mean,
            median,
            p95: values[rank - 1],
        }
    }
}

/// Positional (µm) and angular (degree) error statistics over a ray set.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub condition: String,
    pub n_rays: usize,
    pub pos_error_um: Stats,
    pub ang_error_deg: Stats,
}

impl EvalReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{}",
            self.condition,
            self.n_rays,
            self.pos_error_um.mean,
            self.pos_error_um.median,
            self.pos_error_um.p95,
            self.ang_error_deg.mean,
            self.ang_error_deg.median,
            self.ang_error_deg.p95
        )
    }
}

pub fn reports_csv(reports: &[EvalReport]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{EVAL_CSV_HEADER}");
    for r in reports {
        let _ = writeln!(out, "{}", r.csv_row());
    }
    out
}

fn unit(index: usize, dx: f64, dy: f64) -> Result<Vec3> {
    let s = dx * dx + dy * dy;
    if !(s < 1.0) {
        return Err(Error::BadDirection { index, dx, dy });
    }
    Ok(Vec3::new(dx, dy, (1.0 - s).sqrt()))
}

// A network can emit |d| >= 1 early in training. Such a prediction is scored
// as a grazing ray (d_z = 0) so it counts as a large error instead of
// aborting the run. Ground truth stays strict.
fn predicted_unit(index: usize, dx: f64, dy: f64) -> Result<Vec3> {
    if !(dx.is_finite() && dy.is_finite()) {
        return Err(Error::NonFinite(format!("predicted direction of ray {index}")));
    }
    let s = dx * dx + dy * dy;
    if s < 1.0 {
        return Ok(Vec3::new(dx, dy, (1.0 - s).sqrt()));
    }
    let r = s.sqrt();
    Ok(Vec3::new(dx / r, dy / r, 0.0))
}

/// Compares predicted and ground-truth `(p_o, d_o)` rows.
///
/// The angle is computed as `atan2(|a × b|, a · b)`, which equals the
/// arccos of the clamped dot product but keeps full precision near zero.
pub fn evaluate_predictions(pred: &[[f64; 4]], truth: &[[f64; 4]], condition: &str) -> Result<EvalReport> {
    if pred.is_empty() {
        return Err(Error::InvalidArgument("cannot evaluate an empty ray set".into()));
    }
    if pred.len() != truth.len() {
        return Err(Error::Shape(format!(
            "{} predictions vs {} targets",
            pred.len(),
            truth.len()
        )));
    }
    let mut pos = Vec::with_capacity(pred.len());
    let mut ang = Vec::with_capacity(pred.len());
    for (i, (p, t)) in pred.iter().zip(truth).enumerate() {
        let a = predicted_unit(i, p[2], p[3])?;
        let b = unit(i, t[2], t[3])?;
        pos.push(((p[0] - t[0]).hypot(p[1] - t[1])) * 1000.0);
        ang.push(a.cross(b).norm().atan2(a.dot(b)).to_degrees());
    }
    Ok(EvalReport {
        condition: condition.to_string(),
        n_rays: pred.len(),
        pos_error_um: Stats::of(&mut pos),
        ang_error_deg: Stats::of(&mut ang),
    })
}

/// Runs the proxy on `records` and scores it against their traced outputs.
pub fn evaluate(params: &MlpParams, records: &[RaySample], condition: &str) -> Result<EvalReport> {
    if records.is_empty() {
        return Err(Error::InvalidArgument("cannot evaluate an empty ray set".into()));
    }
    let inputs: Vec<[f64; 4]> = records.iter().map(RaySample::input).collect();
    let truth: Vec<[f64; 4]> = records.iter().map(RaySample::output).collect();
    let pred = params.forward(&inputs)?;
    evaluate_predictions(&pred, &truth, condition)
}
