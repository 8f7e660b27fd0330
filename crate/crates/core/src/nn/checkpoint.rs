//! Weight checkpoints.
//!
//! Little-endian layout: magic `R2RW`, version u16, then the config as
//! `input_dim, output_dim, hidden_width, hidden_layers, skip_period` (u32 each),
//! activation code u8 (0 = ReLU), `weight_init_seed` u64; the normalization
//! tables as 4 input then 4 output `(offset, scale)` f64 pairs; then every
//! layer's row-major f32 weights followed by its f32 biases, input projection
//! first.

use std::path::Path;

use super::matrix::Matrix;
use super::mlp::{Layer, MlpConfig, MlpParams};
use super::norm::{Affine, Normalization};
use crate::error::{Error, Result};
use crate::io::{atomic_write, Reader};

pub const CHECKPOINT_MAGIC: &[u8; 4] = b"R2RW";
pub const CHECKPOINT_VERSION: u16 = 1;
const ACTIVATION_RELU: u8 = 0;

pub fn encode_checkpoint(params: &MlpParams) -> Vec<u8> {
    let c = &params.config;
    let mut buf = Vec::with_capacity(128 + 4 * c.parameter_count());
    buf.extend_from_slice(CHECKPOINT_MAGIC);
    buf.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
    for v in [
        c.input_dim,
        c.output_dim,
        c.hidden_width,
        c.hidden_layers,
        c.skip_period,
    ] {
        buf.extend_from_slice(&(v as u32).to_le_bytes());
    }
    buf.push(ACTIVATION_RELU);
    buf.extend_from_slice(&c.weight_init_seed.to_le_bytes());
    for a in params.norm.input.iter().chain(&params.norm.output) {
        buf.extend_from_slice(&a.offset.to_le_bytes());
        buf.extend_from_slice(&a.scale.to_le_bytes());
    }
    for p in params.params() {
        for v in p {
            buf.extend_from_slice(&v.to_le_bytes());
        }
    }
    buf
}

pub fn decode_checkpoint(bytes: &[u8]) -> Result<MlpParams> {
    let mut rd = Reader::new(bytes);
    let header = |rd: &Reader, msg: &str| Error::BadHeader {
        offset: rd.pos as u64,
        msg: msg.to_string(),
    };
    if rd.take(4) != Some(CHECKPOINT_MAGIC.as_slice()) {
        return Err(Error::BadHeader {
            offset: 0,
            msg: "bad magic, expected \"R2RW\"".into(),
        });
    }
    let version = rd.u16().ok_or_else(|| header(&rd, "truncated version"))?;
    if version != CHECKPOINT_VERSION {
        return Err(Error::VersionMismatch {
            found: version,
            expected: CHECKPOINT_VERSION,
        });
    }
    let mut dims = [0usize; 5];
    for d in &mut dims {
        *d = rd.u32().ok_or_else(|| header(&rd, "truncated config"))? as usize;
    }
    let act = rd.take(1).ok_or_else(|| header(&rd, "truncated config"))?[0];
    if act != ACTIVATION_RELU {
        return Err(header(&rd, &format!("unknown activation code {act}")));
    }
    let seed = rd.u64().ok_or_else(|| header(&rd, "truncated config"))?;
    let config = MlpConfig {
        input_dim: dims[0],
        output_dim: dims[1],
        hidden_width: dims[2],
        hidden_layers: dims[3],
        skip_period: dims[4],
        weight_init_seed: seed,
    };
    config.validate().map_err(|e| header(&rd, &e.to_string()))?;
    let mut affines = [Affine::IDENTITY; 8];
    for a in &mut affines {
        let offset = rd.f64().ok_or_else(|| header(&rd, "truncated normalization table"))?;
        let scale = rd.f64().ok_or_else(|| header(&rd, "truncated normalization table"))?;
        *a = Affine { offset, scale };
    }
    let norm = Normalization {
        input: affines[..4].try_into().unwrap(),
        output: affines[4..].try_into().unwrap(),
    };
    let mut layers = Vec::new();
    let mut tensor = 0u64;
    let mut read_f32s = |rd: &mut Reader, n: usize| -> Result<Vec<f32>> {
        let offset = rd.pos as u64;
        let out = (0..n)
            .map(|_| rd.f32())
            .collect::<Option<Vec<_>>>()
            .ok_or(Error::Truncated { index: tensor, offset });
        tensor += 1;
        out
    };
    for (o, i) in config.layer_shapes() {
        let w = read_f32s(&mut rd, o * i)?;
        let b = read_f32s(&mut rd, o)?;
        layers.push(Layer {
            weight: Matrix::from_vec(o, i, w),
            bias: b,
        });
    }
    if rd.remaining() != 0 {
        return Err(Error::Data(format!("{} trailing bytes in checkpoint", rd.remaining())));
    }
    let params = MlpParams { config, layers, norm };
    if !params.all_finite() {
        return Err(Error::NonFinite("checkpoint contains non-finite parameters".into()));
    }
    Ok(params)
}

pub fn save_checkpoint(path: &Path, params: &MlpParams) -> Result<()> {
    atomic_write(path, &encode_checkpoint(params))
}

pub fn load_checkpoint(path: &Path) -> Result<MlpParams> {
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    decode_checkpoint(&bytes)
}
