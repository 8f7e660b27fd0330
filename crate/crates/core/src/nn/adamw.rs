use super::matrix::Scalar;
use super::mlp::{Gradients, Mlp};
use crate::error::{Error, Result};

/// AdamW hyperparameters and moment accumulators.
#[derive(Debug, Clone, PartialEq)]
pub struct OptimizerState<T> {
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub weight_decay: f64,
    pub base_lr: f64,
    pub final_lr: f64,
    pub step: u64,
    m: Vec<Vec<T>>,
    v: Vec<Vec<T>>,
}

impl<T: Scalar> OptimizerState<T> {
    pub fn new(params: &Mlp<T>, base_lr: f64, final_lr: f64) -> Self {
        let zeros: Vec<Vec<T>> = params.params().map(|p| vec![T::ZERO; p.len()]).collect();
        Self {
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            weight_decay: 1e-2,
            base_lr,
            final_lr,
            step: 0,
            v: zeros.clone(),
            m: zeros,
        }
    }

    pub fn with_weight_decay(mut self, wd: f64) -> Self {
        self.weight_decay = wd;
        self
    }

    /// One decoupled-weight-decay Adam update at learning rate `lr`.
    /// Non-finite gradients abort the step and leave everything untouched.
    pub fn step(&mut self, params: &mut Mlp<T>, grads: &Gradients<T>, lr: f64) -> Result<()> {
        let shapes_ok = self.m.len() == grads.slices().count()
            && self.m.iter().zip(grads.slices()).all(|(m, g)| m.len() == g.len());
        if !shapes_ok {
            return Err(Error::Shape("gradients do not match optimizer state".into()));
        }
        if let Some((i, _)) = grads
            .slices()
            .enumerate()
            .find(|(_, g)| !g.iter().all(|v| v.is_finite()))
        {
            return Err(Error::NonFinite(format!(
                "gradient of parameter tensor {i} at step {}",
                self.step + 1
            )));
        }
        self.step += 1;
        let t = self.step as i32;
        let (b1, b2) = (self.beta1, self.beta2);
        let c1 = T::from_f64(1.0 / (1.0 - b1.powi(t)));
        let c2 = T::from_f64(1.0 / (1.0 - b2.powi(t)));
        let (tb1, tb2) = (T::from_f64(b1), T::from_f64(b2));
        let (ob1, ob2) = (T::from_f64(1.0 - b1), T::from_f64(1.0 - b2));
        let lr_t = T::from_f64(lr);
        let decay = T::from_f64(lr * self.weight_decay);
        let eps = T::from_f64(self.eps);
        for (((p, g), m), v) in params
            .params_mut()
            .zip(grads.slices())
            .zip(self.m.iter_mut())
            .zip(self.v.iter_mut())
        {
            for i in 0..p.len() {
                let gi = g[i];
                m[i] = flush(tb1 * m[i] + ob1 * gi);
                v[i] = flush(tb2 * v[i] + ob2 * gi * gi);
                let m_hat = m[i] * c1;
                let v_hat = v[i] * c2;
                p[i] = p[i] - lr_t * (m_hat / (v_hat.sqrt() + eps)) - decay * p[i];
            }
        }
        Ok(())
    }
}

/// Zeroes subnormal moments. A moment whose gradient stays exactly zero (a
/// dead ReLU unit) otherwise decays into the subnormal range and sticks at
/// the smallest subnormal, where every update takes the slow microcode path.
#[inline]
fn flush<T: Scalar>(x: T) -> T {
    if x < T::MIN_NORMAL && T::ZERO - x < T::MIN_NORMAL {
        T::ZERO
    } else {
        x
    }
}
