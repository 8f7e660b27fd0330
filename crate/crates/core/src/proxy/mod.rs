//! The learned proxy tracer: training against synthesized ray pairs, error
//! metrics, generalization experiments, depth queries and throughput.

mod bench;
mod eval;
mod experiments;
mod query;
mod spot;
mod train;

pub use bench::{bench, bench_csv, time_mapper, BenchRow, Method, BENCH_CSV_HEADER};
pub use eval::{evaluate, evaluate_predictions, reports_csv, EvalReport, Stats, EVAL_CSV_HEADER};
pub use experiments::{experiment_novel_pattern, experiment_unseen_cell, novel_pattern_samples};
pub use query::{query_at_depth, ExactTracer, RayMapper};
pub use spot::{exact_spot, rms_radius, spot_diagram, spot_inputs};
pub use train::{check_grid, history_csv, train, EpochRecord, TrainConfig, TrainOutcome, HISTORY_CSV_HEADER};
