use rand::Rng;

use super::matrix::{Matrix, Scalar};
use super::norm::Normalization;
use crate::dataset::stream_rng;
use crate::error::{Error, Result};
use crate::par;

const INIT_STREAM: u64 = 0x1217;
/// Rows per gradient work item. Fixed so the reduction order never depends on
/// the worker count.
pub const GRAD_CHUNK: usize = 256;
const INFER_CHUNK: usize = 1024;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct MlpConfig {
    pub input_dim: usize,
    pub output_dim: usize,
    pub hidden_width: usize,
    pub hidden_layers: usize,
    /// A residual connection closes every `skip_period` hidden layers.
    pub skip_period: usize,
    pub weight_init_seed: u64,
}

impl Default for MlpConfig {
    fn default() -> Self {
        Self {
            input_dim: 4,
            output_dim: 4,
            hidden_width: 256,
            hidden_layers: 6,
            skip_period: 3,
            weight_init_seed: 0,
        }
    }
}

impl MlpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.input_dim == 0 || self.output_dim == 0 || self.hidden_width == 0 {
            return Err(Error::InvalidArgument("network dimensions must be positive".into()));
        }
        if self.hidden_layers < 1 || self.skip_period < 1 {
            return Err(Error::InvalidArgument(
                "need hidden_layers >= 1 and skip_period >= 1".into(),
            ));
        }
        Ok(())
    }

    /// `(out, in)` shapes of the input projection, hidden layers and output projection.
    pub fn layer_shapes(&self) -> Vec<(usize, usize)> {
        let w = self.hidden_width;
        let mut v = vec![(w, self.input_dim)];
        v.extend(std::iter::repeat_n((w, w), self.hidden_layers));
        v.push((self.output_dim, w));
        v
    }

    /// Whether hidden layer `j` (1-based) closes a residual block.
    #[inline]
    pub fn closes_block(&self, j: usize) -> bool {
        j.is_multiple_of(self.skip_period)
    }

    pub fn parameter_count(&self) -> usize {
        self.layer_shapes().iter().map(|(o, i)| o * i + o).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layer<T> {
    /// `(out, in)`, row-major.
    pub weight: Matrix<T>,
    pub bias: Vec<T>,
}

impl<T: Scalar> Layer<T> {
    fn zeros(out: usize, inp: usize) -> Self {
        Self {
            weight: Matrix::zeros(out, inp),
            bias: vec![T::ZERO; out],
        }
    }

    fn cast<U: Scalar>(&self) -> Layer<U> {
        Layer {
            weight: self.weight.cast(),
            bias: self.bias.iter().map(|v| U::from_f64(v.to_f64())).collect(),
        }
    }
}

/// A residual-skip ReLU MLP with its input/output normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct Mlp<T> {
    pub config: MlpConfig,
    pub layers: Vec<Layer<T>>,
    pub norm: Normalization,
}

/// Trained parameters are stored in single precision.
pub type MlpParams = Mlp<f32>;

/// Gradient buffers shaped like [`Mlp::layers`].
#[derive(Debug, Clone, PartialEq)]
pub struct Gradients<T> {
    pub layers: Vec<Layer<T>>,
}

impl<T: Scalar> Gradients<T> {
    pub fn zeros(config: &MlpConfig) -> Self {
        Self {
            layers: config
                .layer_shapes()
                .into_iter()
                .map(|(o, i)| Layer::zeros(o, i))
                .collect(),
        }
    }

    pub fn add_assign(&mut self, other: &Gradients<T>) {
        for (a, b) in self.slices_mut().zip(other.slices()) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += *y;
            }
        }
    }

    pub fn scale(&mut self, s: T) {
        for a in self.slices_mut() {
            for x in a.iter_mut() {
                *x = *x * s;
            }
        }
    }

    pub fn slices(&self) -> impl Iterator<Item = &[T]> {
        self.layers
            .iter()
            .flat_map(|l| [l.weight.data.as_slice(), l.bias.as_slice()])
    }

    pub fn slices_mut(&mut self) -> impl Iterator<Item = &mut [T]> {
        self.layers
            .iter_mut()
            .flat_map(|l| [l.weight.data.as_mut_slice(), l.bias.as_mut_slice()])
    }

    pub fn all_finite(&self) -> bool {
        self.slices().all(|s| s.iter().all(|v| v.is_finite()))
    }
}

/// How per-chunk gradients are combined.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Reduction {
    /// Fixed left-to-right order over fixed-size chunks: bit-reproducible.
    #[default]
    Ordered,
    /// Scheduler-ordered tree reduction.
    Unordered,
}

struct Activations<T> {
    /// `h[0]` is the input projection, `h[j]` the output of hidden layer `j`.
    h: Vec<Matrix<T>>,
    /// Pre-activations of hidden layers 1..=H (index `j - 1`).
    z: Vec<Matrix<T>>,
    out: Matrix<T>,
}

impl<T: Scalar> Mlp<T> {
    /// All-zero weights and biases.
    pub fn zeros(config: MlpConfig, norm: Normalization) -> Result<Self> {
        config.validate()?;
        Ok(Self {
            layers: Gradients::zeros(&config).layers,
            config,
            norm,
        })
    }

    /// Kaiming-uniform weights (fan-in, ReLU gain) from the seeded stream; zero biases.
    pub fn new(config: MlpConfig, norm: Normalization) -> Result<Self> {
        let mut mlp = Self::zeros(config, norm)?;
        let mut rng = stream_rng(config.weight_init_seed, INIT_STREAM);
        for layer in &mut mlp.layers {
            let bound = (6.0 / layer.weight.cols as f64).sqrt();
            for w in &mut layer.weight.data {
                *w = T::from_f64(rng.gen_range(-bound..bound));
            }
        }
        Ok(mlp)
    }

    pub fn cast<U: Scalar>(&self) -> Mlp<U> {
        Mlp {
            config: self.config,
            layers: self.layers.iter().map(Layer::cast).collect(),
            norm: self.norm,
        }
    }

    pub fn params(&self) -> impl Iterator<Item = &[T]> {
        self.layers
            .iter()
            .flat_map(|l| [l.weight.data.as_slice(), l.bias.as_slice()])
    }

    pub fn params_mut(&mut self) -> impl Iterator<Item = &mut [T]> {
        self.layers
            .iter_mut()
            .flat_map(|l| [l.weight.data.as_mut_slice(), l.bias.as_mut_slice()])
    }

    pub fn all_finite(&self) -> bool {
        self.params().all(|s| s.iter().all(|v| v.is_finite())) && self.norm.is_valid()
    }

    fn check_shapes(&self) -> Result<()> {
        let shapes = self.config.layer_shapes();
        let ok = shapes.len() == self.layers.len()
            && shapes
                .iter()
                .zip(&self.layers)
                .all(|(&(o, i), l)| l.weight.rows == o && l.weight.cols == i && l.bias.len() == o);
        if ok {
            Ok(())
        } else {
            Err(Error::Shape("parameters do not match the network config".into()))
        }
    }

    fn run(&self, x: &Matrix<T>, keep: bool) -> Activations<T> {
        let cfg = &self.config;
        let first = &self.layers[0];
        let mut h = x.affine(&first.weight, &first.bias);
        let mut block_in = h.clone();
        let mut hs = Vec::new();
        let mut zs = Vec::new();
        for j in 1..=cfg.hidden_layers {
            let layer = &self.layers[j];
            let z = h.affine(&layer.weight, &layer.bias);
            let mut a = z.clone();
            for v in &mut a.data {
                if !(*v > T::ZERO) {
                    *v = T::ZERO;
                }
            }
            if cfg.closes_block(j) {
                for (v, s) in a.data.iter_mut().zip(&block_in.data) {
                    *v += *s;
                }
                block_in = a.clone();
            }
            if keep {
                hs.push(h);
                zs.push(z);
            }
            h = a;
        }
        let last = &self.layers[cfg.hidden_layers + 1];
        let out = h.affine(&last.weight, &last.bias);
        hs.push(h);
        Activations { h: hs, z: zs, out }
    }

    /// Forward pass in normalized coordinates.
    pub fn forward_normalized(&self, x: &Matrix<T>) -> Result<Matrix<T>> {
        self.check_shapes()?;
        if x.cols != self.config.input_dim {
            return Err(Error::Shape(format!(
                "input has {} features, network expects {}",
                x.cols, self.config.input_dim
            )));
        }
        Ok(self.run(x, false).out)
    }

    /// Sum of squared errors over a chunk and its exact gradient.
    fn sse_gradients(&self, x: &Matrix<T>, y: &Matrix<T>) -> (f64, Gradients<T>) {
        let cfg = &self.config;
        let act = self.run(x, true);
        let mut grads = Gradients::zeros(cfg);

        let mut sse = 0.0;
        let mut d = act.out.clone();
        for (g, t) in d.data.iter_mut().zip(&y.data) {
            let e = *g - *t;
            sse += e.to_f64() * e.to_f64();
            *g = T::from_f64(2.0) * e;
        }

        let h_layers = cfg.hidden_layers;
        let out_layer = h_layers + 1;
        d.accumulate_outer(&act.h[h_layers], &mut grads.layers[out_layer].weight);
        d.accumulate_column_sums(&mut grads.layers[out_layer].bias);
        let mut dh = d.matmul(&self.layers[out_layer].weight);

        // Pending gradient for the input of the currently open residual block.
        let mut skip: Option<(usize, Matrix<T>)> = None;
        for j in (1..=h_layers).rev() {
            if cfg.closes_block(j) {
                skip = Some((j - cfg.skip_period, dh.clone()));
            }
            let z = &act.z[j - 1];
            for (g, zv) in dh.data.iter_mut().zip(&z.data) {
                if !(*zv > T::ZERO) {
                    *g = T::ZERO;
                }
            }
            let input = &act.h[j - 1];
            dh.accumulate_outer(input, &mut grads.layers[j].weight);
            dh.accumulate_column_sums(&mut grads.layers[j].bias);
            let mut next = dh.matmul(&self.layers[j].weight);
            if let Some((k, s)) = &skip {
                if *k == j - 1 {
                    for (a, b) in next.data.iter_mut().zip(&s.data) {
                        *a += *b;
                    }
                    skip = None;
                }
            }
            dh = next;
        }
        dh.accumulate_outer(x, &mut grads.layers[0].weight);
        dh.accumulate_column_sums(&mut grads.layers[0].bias);
        (sse, grads)
    }

    /// Mean-squared-error loss over normalized targets and its exact gradient.
    pub fn loss_and_gradients(
        &self,
        x: &Matrix<T>,
        y: &Matrix<T>,
        reduction: Reduction,
    ) -> Result<(f64, Gradients<T>)> {
        self.check_shapes()?;
        if x.rows == 0 {
            return Err(Error::Shape("empty batch".into()));
        }
        if x.rows != y.rows || x.cols != self.config.input_dim || y.cols != self.config.output_dim {
            return Err(Error::Shape(format!(
                "batch {}x{} / targets {}x{} do not fit the network",
                x.rows, x.cols, y.rows, y.cols
            )));
        }
        let rows: Vec<usize> = (0..x.rows).step_by(GRAD_CHUNK).collect();
        let chunk = |start: usize| {
            let end = (start + GRAD_CHUNK).min(x.rows);
            let xs = Matrix::from_vec(end - start, x.cols, x.data[start * x.cols..end * x.cols].to_vec());
            let ys = Matrix::from_vec(end - start, y.cols, y.data[start * y.cols..end * y.cols].to_vec());
            self.sse_gradients(&xs, &ys)
        };
        let (sse, mut grads) = match reduction {
            Reduction::Ordered => {
                let parts = par::map(&rows, |&s| chunk(s));
                let mut it = parts.into_iter();
                let (mut sse, mut g) = it.next().expect("non-empty batch");
                for (s, p) in it {
                    sse += s;
                    g.add_assign(&p);
                }
                (sse, g)
            }
            Reduction::Unordered => par::map_reduce_unordered(
                &rows,
                1,
                |s| chunk(s[0]),
                || (0.0, Gradients::zeros(&self.config)),
                |(s1, mut g1), (s2, g2)| {
                    g1.add_assign(&g2);
                    (s1 + s2, g1)
                },
            ),
        };
        let n = (x.rows * y.cols) as f64;
        grads.scale(T::from_f64(1.0 / n));
        Ok((sse / n, grads))
    }

    /// Normalizes raw rays into a network input matrix.
    pub fn input_matrix(&self, inputs: &[[f64; 4]]) -> Matrix<T> {
        let mut data = Vec::with_capacity(inputs.len() * 4);
        for x in inputs {
            data.extend(self.norm.normalize_input(*x).map(T::from_f64));
        }
        Matrix::from_vec(inputs.len(), 4, data)
    }

    pub fn target_matrix(&self, targets: &[[f64; 4]]) -> Matrix<T> {
        let mut data = Vec::with_capacity(targets.len() * 4);
        for y in targets {
            data.extend(self.norm.normalize_output(*y).map(T::from_f64));
        }
        Matrix::from_vec(targets.len(), 4, data)
    }

    /// Maps raw source rays `(p_i, d_i)` to raw target rays `(p_o, d_o)`.
    pub fn forward(&self, inputs: &[[f64; 4]]) -> Result<Vec<[f64; 4]>> {
        self.check_shapes()?;
        if self.config.input_dim != 4 || self.config.output_dim != 4 {
            return Err(Error::Shape("ray mapping needs a 4-in/4-out network".into()));
        }
        if let Some(i) = inputs.iter().position(|x| !x.iter().all(|v| v.is_finite())) {
            return Err(Error::NonFinite(format!("input ray {i}")));
        }
        let parts = par::map_chunks(inputs, INFER_CHUNK, |_, chunk| {
            let out = self.run(&self.input_matrix(chunk), false).out;
            out.data
                .chunks_exact(4)
                .map(|r| {
                    let y = [r[0].to_f64(), r[1].to_f64(), r[2].to_f64(), r[3].to_f64()];
                    self.norm.denormalize_output(y)
                })
                .collect::<Vec<_>>()
        });
        Ok(parts.into_iter().flatten().collect())
    }

    /// Gradient of the normalized-space MSE for raw rays and raw targets.
    pub fn backward(&self, inputs: &[[f64; 4]], targets: &[[f64; 4]]) -> Result<(f64, Gradients<T>)> {
        if inputs.len() != targets.len() {
            return Err(Error::Shape(format!(
                "{} inputs vs {} targets",
                inputs.len(),
                targets.len()
            )));
        }
        self.loss_and_gradients(
            &self.input_matrix(inputs),
            &self.target_matrix(targets),
            Reduction::Ordered,
        )
    }
}
