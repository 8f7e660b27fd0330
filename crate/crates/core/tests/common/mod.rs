//! Finite-difference gradient oracle shared by the gradient tests and the
//! acceptance suite: an independent loop-based forward pass.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayproxy::nn::{Matrix, Mlp, MlpConfig, Normalization, Reduction};

pub const H: f64 = 1e-3;
const KINK: f64 = 1e-6;

/// Naive forward over one sample: returns outputs and every hidden pre-activation.
fn oracle_forward(net: &Mlp<f64>, x: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let dense = |l: usize, v: &[f64]| -> Vec<f64> {
        let layer = &net.layers[l];
        (0..layer.weight.rows)
            .map(|r| {
                layer.bias[r]
                    + (0..layer.weight.cols)
                        .map(|c| layer.weight.get(r, c) * v[c])
                        .sum::<f64>()
            })
            .collect()
    };
    let cfg = &net.config;
    let mut h = dense(0, x);
    let mut block_in = h.clone();
    let mut pre = Vec::new();
    for j in 1..=cfg.hidden_layers {
        let z = dense(j, &h);
        pre.extend(&z);
        let mut a: Vec<f64> = z.iter().map(|v| v.max(0.0)).collect();
        if j % cfg.skip_period == 0 {
            for (v, s) in a.iter_mut().zip(&block_in) {
                *v += s;
            }
            block_in = a.clone();
        }
        h = a;
    }
    (dense(cfg.hidden_layers + 1, &h), pre)
}

fn oracle_loss(net: &Mlp<f64>, xs: &Matrix<f64>, ys: &Matrix<f64>) -> (f64, Vec<f64>) {
    let mut sse = 0.0;
    let mut pre = Vec::new();
    for r in 0..xs.rows {
        let (out, z) = oracle_forward(net, xs.row(r));
        sse += out.iter().zip(ys.row(r)).map(|(a, b)| (a - b) * (a - b)).sum::<f64>();
        pre.extend(z);
    }
    (sse / (xs.rows * ys.cols) as f64, pre)
}

fn same_pattern(a: &[f64], b: &[f64]) -> bool {
    a.iter().zip(b).all(|(x, y)| (*x > 0.0) == (*y > 0.0))
}

/// Returns `(checked, skipped, worst relative error)` over every parameter.
pub fn check(cfg: MlpConfig, seed: u64) -> (usize, usize, f64) {
    let mut net = Mlp::<f32>::new(cfg, Normalization::default()).unwrap().cast::<f64>();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for layer in &mut net.layers {
        for b in &mut layer.bias {
            *b = rng.gen_range(-0.3..0.3);
        }
    }
    let n = 13;
    let xs = Matrix::from_vec(n, 4, (0..n * 4).map(|_| rng.gen_range(-1.0..1.0)).collect());
    let ys = Matrix::from_vec(n, 4, (0..n * 4).map(|_| rng.gen_range(-1.0..1.0)).collect());

    let (loss, grads) = net.loss_and_gradients(&xs, &ys, Reduction::Ordered).unwrap();
    let (oracle, base_pre) = oracle_loss(&net, &xs, &ys);
    assert!(
        (loss - oracle).abs() <= 1e-12 * oracle.max(1.0),
        "loss {loss} vs oracle {oracle}"
    );

    let mut checked = 0;
    let mut skipped = 0;
    let mut worst: f64 = 0.0;
    let analytic: Vec<f64> = grads.slices().flat_map(|s| s.iter().copied()).collect();
    let total = analytic.len();
    for k in 0..total {
        let nudge = |net: &mut Mlp<f64>, delta: f64| {
            let mut i = k;
            for s in net.params_mut() {
                if i < s.len() {
                    s[i] += delta;
                    return;
                }
                i -= s.len();
            }
        };
        nudge(&mut net, H);
        let (lp, pre_p) = oracle_loss(&net, &xs, &ys);
        nudge(&mut net, -2.0 * H);
        let (lm, pre_m) = oracle_loss(&net, &xs, &ys);
        nudge(&mut net, H);
        let near_kink = base_pre.iter().any(|z| z.abs() < KINK);
        if near_kink || !same_pattern(&base_pre, &pre_p) || !same_pattern(&base_pre, &pre_m) {
            skipped += 1;
            continue;
        }
        let fd = (lp - lm) / (2.0 * H);
        let a = analytic[k];
        let rel = (fd - a).abs() / (fd.abs().max(a.abs()).max(1e-8));
        worst = worst.max(rel);
        checked += 1;
    }
    (checked, skipped, worst)
}
