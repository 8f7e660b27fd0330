use crate::dataset::RaySample;

/// `normalized = (x - offset) * scale`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Affine {
    pub offset: f64,
    pub scale: f64,
}

impl Affine {
    pub const IDENTITY: Affine = Affine {
        offset: 0.0,
        scale: 1.0,
    };

    /// Maps `[min, max]` onto `[-1, 1]`; a constant feature maps to 0 with scale 1.
    pub fn from_range(min: f64, max: f64) -> Self {
        if max > min {
            Affine {
                offset: 0.5 * (min + max),
                scale: 2.0 / (max - min),
            }
        } else {
            Affine {
                offset: min,
                scale: 1.0,
            }
        }
    }

    #[inline]
    pub fn apply(&self, x: f64) -> f64 {
        (x - self.offset) * self.scale
    }

    #[inline]
    pub fn invert(&self, y: f64) -> f64 {
        y / self.scale + self.offset
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Normalization {
    pub input: [Affine; 4],
    pub output: [Affine; 4],
}

impl Default for Normalization {
    fn default() -> Self {
        Self {
            input: [Affine::IDENTITY; 4],
            output: [Affine::IDENTITY; 4],
        }
    }
}

impl Normalization {
    pub fn normalize_input(&self, x: [f64; 4]) -> [f64; 4] {
        std::array::from_fn(|i| self.input[i].apply(x[i]))
    }

    pub fn normalize_output(&self, y: [f64; 4]) -> [f64; 4] {
        std::array::from_fn(|i| self.output[i].apply(y[i]))
    }

    pub fn denormalize_output(&self, y: [f64; 4]) -> [f64; 4] {
        std::array::from_fn(|i| self.output[i].invert(y[i]))
    }

    pub fn is_valid(&self) -> bool {
        self.input
            .iter()
            .chain(&self.output)
            .all(|a| a.scale > 0.0 && a.scale.is_finite() && a.offset.is_finite())
    }
}

/// Per-feature min/max maps over the training records.
pub fn fit_normalization(records: &[RaySample]) -> Normalization {
    let mut lo = [f64::INFINITY; 8];
    let mut hi = [f64::NEG_INFINITY; 8];
    for r in records {
        for (i, v) in r.features().into_iter().enumerate() {
            lo[i] = lo[i].min(v);
            hi[i] = hi[i].max(v);
        }
    }
    if records.is_empty() {
        return Normalization::default();
    }
    Normalization {
        input: std::array::from_fn(|i| Affine::from_range(lo[i], hi[i])),
        output: std::array::from_fn(|i| Affine::from_range(lo[i + 4], hi[i + 4])),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_range() {
        let a = Affine::from_range(-6.0, 6.0);
        assert_eq!(
            a,
            Affine {
                offset: 0.0,
                scale: 1.0 / 6.0
            }
        );
    }

    #[test]
    fn constant_feature() {
        assert_eq!(
            Affine::from_range(2.5, 2.5),
            Affine {
                offset: 2.5,
                scale: 1.0
            }
        );
        assert_eq!(Affine::from_range(2.5, 2.5).apply(2.5), 0.0);
    }

    #[test]
    fn round_trip_and_bounds() {
        let recs: Vec<RaySample> = (0..50)
            .map(|i| {
                let x = i as f64 * 0.731;
                RaySample {
                    cell_id: 0,
                    p_i: [x.sin() * 6.0, 1.0],
                    d_i: [x.cos() * 0.2, (x * 1.3).sin() * 0.1],
                    p_o: [x.sin() * 20.0, x.cos() * 21.0],
                    d_o: [(2.0 * x).sin() * 0.4, 0.01 * x],
                }
            })
            .collect();
        let n = fit_normalization(&recs);
        assert!(n.is_valid());
        for r in &recs {
            let xi = n.normalize_input(r.input());
            assert!(xi.iter().all(|v| v.abs() <= 1.0 + 1e-6));
            let back = n.denormalize_output(n.normalize_output(r.output()));
            for (a, b) in back.iter().zip(r.output()) {
                assert!((a - b).abs() <= 1e-6 * b.abs().max(1e-12));
            }
        }
    }
}
