use std::fmt;
use std::time::Instant;

use super::query::{ExactTracer, RayMapper};
use crate::error::{Error, Result};
use crate::nn::MlpParams;
use crate::optics::OpticalSystem;

pub const BENCH_CSV_HEADER: &str = "method,batch_size,rays_per_second_median";

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Exact,
    Proxy,
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Method::Exact => "exact",
            Method::Proxy => "proxy",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BenchRow {
    pub method: Method,
    pub batch_size: usize,
    pub rays_per_second_median: f64,
}

/// Median rays/second over `reps` timed runs of one mapper on one batch.
pub fn time_mapper(mapper: &impl RayMapper, batch: &[[f64; 4]], reps: usize) -> Result<f64> {
    let mut rates = Vec::with_capacity(reps);
    for _ in 0..reps {
        let start = Instant::now();
        let out = mapper.map_rays(batch)?;
        let secs = start.elapsed().as_secs_f64().max(1e-9);
        std::hint::black_box(out);
        rates.push(batch.len() as f64 / secs);
    }
    rates.sort_by(f64::total_cmp);
    let n = rates.len();
    Ok(if n % 2 == 1 {
        rates[n / 2]
    } else {
        0.5 * (rates[n / 2 - 1] + rates[n / 2])
    })
}

/// Times the exact tracer and the proxy on identical batches built by cycling
/// through `pool` (rays known to reach the target).
pub fn bench(
    params: &MlpParams,
    system: &OpticalSystem,
    pool: &[[f64; 4]],
    batch_sizes: &[usize],
    reps: usize,
) -> Result<Vec<BenchRow>> {
    if reps < 5 {
        return Err(Error::InvalidArgument(format!(
            "need at least 5 repetitions, got {reps}"
        )));
    }
    if pool.is_empty() {
        return Err(Error::InvalidArgument("benchmark ray pool is empty".into()));
    }
    if batch_sizes.contains(&0) {
        return Err(Error::InvalidArgument("batch sizes must be positive".into()));
    }
    let exact = ExactTracer { system };
    let mut rows = Vec::new();
    for &b in batch_sizes {
        let batch: Vec<[f64; 4]> = pool.iter().cycle().take(b).copied().collect();
        for method in [Method::Exact, Method::Proxy] {
            let rate = match method {
                Method::Exact => time_mapper(&exact, &batch, reps)?,
                Method::Proxy => time_mapper(params, &batch, reps)?,
            };
            rows.push(BenchRow {
                method,
                batch_size: b,
                rays_per_second_median: rate,
            });
        }
    }
    Ok(rows)
}

pub fn bench_csv(rows: &[BenchRow]) -> String {
    let mut s = format!("{BENCH_CSV_HEADER}\n");
    for r in rows {
        s += &format!("{},{},{}\n", r.method, r.batch_size, r.rays_per_second_median);
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nn::{MlpConfig, Normalization};
    use crate::optics::{design_singlet, DEFAULT_CENTER_THICKNESS, DEFAULT_INDEX};

    #[test]
    fn rows_cover_both_methods() {
        let sys = design_singlet(60.0, 50.6, DEFAULT_INDEX, DEFAULT_CENTER_THICKNESS).unwrap();
        let cfg = MlpConfig {
            hidden_width: 8,
            hidden_layers: 3,
            ..MlpConfig::default()
        };
        let p = MlpParams::new(cfg, Normalization::default()).unwrap();
        let pool = [[0.0, 0.0, 0.0, 0.0], [1.0, 0.5, 0.01, -0.02]];
        let rows = bench(&p, &sys, &pool, &[3, 10], 5).unwrap();
        assert_eq!(rows.len(), 4);
        assert!(rows.iter().all(|r| r.rays_per_second_median > 0.0));
        let csv = bench_csv(&rows);
        assert_eq!(csv.lines().next(), Some(BENCH_CSV_HEADER));
        assert_eq!(csv.lines().count(), 5);
        assert!(bench(&p, &sys, &pool, &[3], 4).is_err());
    }
}
