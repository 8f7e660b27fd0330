//! Acceptance gate. Every criterion prints one `ACCEPTANCE <n> PASS|FAIL` line
//! and fails its test on FAIL. Run with `--nocapture` to see the lines;
//! criterion 4 (full-scale, days on one core) is opt-in via `--ignored`.

mod common;

use std::sync::OnceLock;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayproxy::dataset::{generate, save_binary, split_cells, Dataset, DatasetSplit, RaySample, SourceGrid};
use rayproxy::nn::{encode_checkpoint, fit_normalization, MlpConfig, MlpParams};
use rayproxy::optics::{
    design_singlet, element_stack, intersect_analytic, intersect_newton, paraxial_efl, refract, trace, OpticalSystem,
    Ray3, Surface, Vec3, DEFAULT_CENTER_THICKNESS, DEFAULT_INDEX, NEWTON_MAX_ITER, NEWTON_TOL,
};
use rayproxy::proxy::{
    bench, bench_csv, experiment_novel_pattern, experiment_unseen_cell, query_at_depth, time_mapper, train, EvalReport,
    ExactTracer, Method, TrainConfig, TrainOutcome,
};

fn report(n: &str, ok: bool, detail: impl AsRef<str>) {
    println!(
        "ACCEPTANCE {n} {}: {}",
        if ok { "PASS" } else { "FAIL" },
        detail.as_ref()
    );
}

fn singlet() -> OpticalSystem {
    design_singlet(60.0, 50.6, DEFAULT_INDEX, DEFAULT_CENTER_THICKNESS).unwrap()
}

// ---------------------------------------------------------------- 1: physics

#[test]
fn criterion_1_physics_oracles() {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let mut failures = Vec::new();

    // Newton vs closed form on 10^4 valid rays.
    let mut worst_newton: f64 = 0.0;
    let mut compared = 0;
    while compared < 10_000 {
        let r: f64 = rng.gen_range(20.0..200.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 };
        let s = Surface::spherical(
            rng.gen_range(-3.0..3.0),
            r,
            rng.gen_range(0.3..0.9) * r.abs().min(25.0),
            1.5,
        );
        let o = Vec3::new(rng.gen_range(-8.0..8.0), rng.gen_range(-8.0..8.0), -50.0);
        let aim = Vec3::new(
            rng.gen_range(-s.semi_aperture..s.semi_aperture),
            rng.gen_range(-s.semi_aperture..s.semi_aperture),
            s.vertex_z,
        );
        let ray = Ray3::new(o, (aim - o).normalize());
        if let (Some(a), Some(n)) = (
            intersect_analytic(&ray, &s),
            intersect_newton(&ray, &s, NEWTON_TOL, NEWTON_MAX_ITER),
        ) {
            if a.point.rho2() <= s.semi_aperture * s.semi_aperture {
                worst_newton = worst_newton.max((a.point - n.hit.point).norm());
                compared += 1;
            }
        }
    }
    if !(worst_newton < 1e-9) {
        failures.push(format!("newton/analytic {worst_newton:e}"));
    }

    // Refraction identities on 10^5 random interfaces.
    let (mut norm, mut snell, mut triple, mut rev): (f64, f64, f64, f64) = (0.0, 0.0, 0.0, 0.0);
    for _ in 0..100_000 {
        let n = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        )
        .normalize();
        let mut d = Vec3::new(
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
            rng.gen_range(-1.0..1.0),
        )
        .normalize();
        if d.dot(n) >= -1e-3 {
            d = -d;
            if d.dot(n) >= -1e-3 {
                continue;
            }
        }
        let (n1, n2) = (rng.gen_range(1.0..2.0), rng.gen_range(1.0..2.0));
        if let Some(t) = refract(d, n, n1, n2).transmitted() {
            norm = norm.max((t.norm() - 1.0).abs());
            snell = snell.max((n1 * d.cross(n).norm() - n2 * t.cross(n).norm()).abs());
            triple = triple.max(t.dot(d.cross(n)).abs());
            if let Some(b) = refract(-t, -n, n2, n1).transmitted() {
                rev = rev.max((b + d).norm());
            }
        }
    }
    for (name, v, tol) in [
        ("unit norm", norm, 1e-12),
        ("snell", snell, 1e-12),
        ("coplanarity", triple, 1e-12),
        ("reversibility", rev, 1e-10),
    ] {
        if !(v < tol) {
            failures.push(format!("{name} {v:e}"));
        }
    }

    // Flat plate and the axial fixed point.
    let mut plate: f64 = 0.0;
    for _ in 0..10_000 {
        let index = rng.gen_range(1.0..3.0);
        let t = rng.gen_range(0.5..30.0);
        let sys = OpticalSystem::new(
            vec![Surface::planar(0.0, 1e5, index), Surface::planar(t, 1e5, 1.0)],
            1.0,
            -10.0,
            t + 5.0,
        )
        .unwrap();
        let d = Vec3::new(rng.gen_range(-0.6..0.6), rng.gen_range(-0.6..0.6), 1.0).normalize();
        let out = trace(&Ray3::new(Vec3::new(0.0, 0.0, -10.0), d), &sys)
            .emerged()
            .unwrap();
        plate = plate.max(
            (out.direction - d)
                .x
                .abs()
                .max((out.direction - d).y.abs())
                .max((out.direction - d).z.abs()),
        );
    }
    if !(plate < 1e-12) {
        failures.push(format!("flat plate {plate:e}"));
    }
    for sys in [singlet(), element_stack(5, 60.0, 20.0).unwrap()] {
        let out = trace(&Ray3::new(Vec3::new(0.0, 0.0, sys.source_z), Vec3::Z), &sys)
            .emerged()
            .unwrap();
        if out.direction != Vec3::Z || out.origin.x != 0.0 || out.origin.y != 0.0 {
            failures.push("axial ray left the axis".into());
        }
    }

    let efl = paraxial_efl(&singlet()).unwrap();
    if !((efl - 60.0).abs() <= 0.06) {
        failures.push(format!("efl {efl}"));
    }
    let elapsed = start.elapsed();
    if elapsed > Duration::from_secs(60) {
        failures.push(format!("runtime {elapsed:?}"));
    }
    report(
        "1",
        failures.is_empty(),
        format!(
            "newton/analytic {worst_newton:.1e} mm on {compared} rays; norm {norm:.1e}, snell {snell:.1e}, \
             triple {triple:.1e}, reverse {rev:.1e}, plate {plate:.1e}; efl {efl:.6} mm; {:.1}s {}",
            elapsed.as_secs_f64(),
            failures.join("; ")
        ),
    );
    assert!(failures.is_empty(), "{failures:?}");
}

// ---------------------------------------------------------------- 2: gradients

#[test]
fn criterion_2_gradient_check() {
    let start = Instant::now();
    let cfg = MlpConfig {
        hidden_width: 8,
        hidden_layers: 3,
        weight_init_seed: 4,
        ..MlpConfig::default()
    };
    let (checked, skipped, worst) = common::check(cfg, 1);
    let elapsed = start.elapsed();
    let ok = worst < 1e-4 && checked > 0 && elapsed < Duration::from_secs(60);
    report(
        "2",
        ok,
        format!(
            "{checked} params checked, {skipped} near a ReLU kink skipped, worst relative error {worst:.2e} (h = {}), {:.2}s",
            common::H,
            elapsed.as_secs_f64()
        ),
    );
    assert!(ok);
}

// ---------------------------------------------------------------- desk-scale run

const DESK_EXTENT: f64 = 12.0;
const DESK_CELLS: u32 = 8;
const DESK_RAYS_PER_CELL: usize = 256;
const DESK_SEED: u64 = 0;

fn desk_train_config() -> TrainConfig {
    TrainConfig {
        mlp: MlpConfig {
            hidden_width: 128,
            hidden_layers: 6,
            skip_period: 3,
            weight_init_seed: DESK_SEED,
            ..MlpConfig::default()
        },
        epochs: 500,
        batch_size: 64,
        base_lr: 1e-3,
        final_lr: 1e-6,
        seed: DESK_SEED,
        ..TrainConfig::default()
    }
}

struct DeskRun {
    system: OpticalSystem,
    grid: SourceGrid,
    records: Vec<RaySample>,
    split: DatasetSplit,
    dataset_bytes: Vec<u8>,
    outcome: TrainOutcome,
    train_time: Duration,
}

fn desk_run() -> DeskRun {
    let system = singlet();
    let grid = SourceGrid::new(DESK_EXTENT, DESK_CELLS).unwrap();
    let (records, _) = generate(&system, &grid, DESK_RAYS_PER_CELL, DESK_SEED).unwrap();
    let split = split_cells(&grid, 0.8, DESK_SEED).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("dataset.bin");
    let ds = Dataset {
        extent: DESK_EXTENT,
        cells_per_side: DESK_CELLS.into(),
        records,
    };
    save_binary(&path, &ds).unwrap();
    let dataset_bytes = std::fs::read(&path).unwrap();
    let start = Instant::now();
    let outcome = train(&ds.records, &split, &desk_train_config(), |_| {}).unwrap();
    DeskRun {
        system,
        grid,
        records: ds.records,
        split,
        dataset_bytes,
        outcome,
        train_time: start.elapsed(),
    }
}

fn shared_desk_run() -> &'static DeskRun {
    static RUN: OnceLock<DeskRun> = OnceLock::new();
    RUN.get_or_init(desk_run)
}

/// Epochs `e` whose train loss did not fall by 1% over the next 50 epochs,
/// checked up to the final 100 epochs.
fn stalled_windows(losses: &[f64]) -> Vec<usize> {
    let last = losses.len().saturating_sub(100);
    (0..losses.len())
        .filter(|&e| e + 50 <= last)
        .filter(|&e| !(losses[e + 50] <= 0.99 * losses[e]))
        .collect()
}

fn describe(r: &EvalReport) -> String {
    format!(
        "{}: pos mean {:.2} um (median {:.2}, p95 {:.2}), ang mean {:.4} deg",
        r.condition, r.pos_error_um.mean, r.pos_error_um.median, r.pos_error_um.p95, r.ang_error_deg.mean
    )
}

#[test]
fn criterion_3_desk_scale_training() {
    let run = shared_desk_run();
    let params = &run.outcome.final_params;
    let unseen = experiment_unseen_cell(params, &run.records, &run.split).unwrap();
    let novel = experiment_novel_pattern(params, &run.system, &run.grid, 100_000, DESK_SEED).unwrap();
    let losses: Vec<f64> = run.outcome.history.iter().map(|h| h.train_loss).collect();
    let stalled = stalled_windows(&losses);

    let acc_ok = unseen.pos_error_um.mean < 50.0 && unseen.ang_error_deg.mean < 0.5;
    let time_ok = run.train_time < Duration::from_secs(15 * 60);
    let ok = acc_ok && stalled.is_empty() && time_ok;
    report(
        "3",
        ok,
        format!(
            "{}; loss windows not falling 1%: {:?}; train loss {:.3e} -> {:.3e}; {:.0}s training",
            describe(&unseen),
            stalled,
            losses[0],
            losses[losses.len() - 1],
            run.train_time.as_secs_f64()
        ),
    );
    // Logged, not gated: continuous origins are further out of distribution.
    println!(
        "ACCEPTANCE 3 note: {}; novel >= unseen: {}",
        describe(&novel),
        novel.pos_error_um.mean >= unseen.pos_error_um.mean
    );
    assert!(ok);
}

// ---------------------------------------------------------------- 4: full scale

#[test]
#[ignore = "full-scale reproduction takes days on a single core; run with --ignored"]
fn criterion_4_full_scale() {
    let system = singlet();
    let grid = SourceGrid::new(12.0, 24).unwrap();
    let (records, _) = generate(&system, &grid, 1024, 0).unwrap();
    let split = split_cells(&grid, 0.8, 0).unwrap();
    let cfg = TrainConfig {
        epochs: 3000,
        batch_size: 256,
        ..TrainConfig::default()
    };
    let outcome = train(&records, &split, &cfg, |r| {
        if r.epoch % 50 == 0 {
            eprintln!(
                "epoch {} loss {:.3e} pos {:.2} um",
                r.epoch, r.train_loss, r.test_pos_um
            );
        }
    })
    .unwrap();
    let unseen = experiment_unseen_cell(&outcome.final_params, &records, &split).unwrap();
    let novel = experiment_novel_pattern(&outcome.final_params, &system, &grid, 1_000_000, 0).unwrap();
    let ok = unseen.pos_error_um.mean < 10.0 && unseen.ang_error_deg.mean < 0.2;
    report("4", ok, format!("{}; {}", describe(&unseen), describe(&novel)));
    assert!(ok);
}

// ---------------------------------------------------------------- 5: plumbing

#[test]
fn criterion_5_pipeline_exactness() {
    let sys = singlet();
    let grid = SourceGrid::new(12.0, 10).unwrap();
    let (records, _) = generate(&sys, &grid, 120, 99).unwrap();
    let inputs: Vec<[f64; 4]> = records.iter().take(10_000).map(|r| r.input()).collect();
    let exact = ExactTracer { system: &sys };
    let mut worst: f64 = 0.0;
    for depth in [sys.target_z + 3.0, sys.target_z + 105.0, sys.target_z + 1000.0] {
        let piped = query_at_depth(&exact, &inputs, sys.target_z, depth).unwrap();
        let direct = exact.trace_to_depth(&inputs, depth).unwrap();
        for (p, d) in piped.iter().zip(&direct) {
            worst = worst.max((p.0[0] - d[0]).abs().max((p.0[1] - d[1]).abs()));
        }
    }
    let ok = inputs.len() == 10_000 && worst < 1e-10;
    report(
        "5",
        ok,
        format!("{} rays, worst deviation {worst:.2e} mm", inputs.len()),
    );
    assert!(ok);
}

// ---------------------------------------------------------------- 6: determinism

#[test]
fn criterion_6_determinism() {
    let a = shared_desk_run();
    // The repeat runs on a different worker count.
    let b = rayon::ThreadPoolBuilder::new()
        .num_threads(3)
        .build()
        .unwrap()
        .install(desk_run);
    let same_data = a.dataset_bytes == b.dataset_bytes;
    let same_final = encode_checkpoint(&a.outcome.final_params) == encode_checkpoint(&b.outcome.final_params);
    let same_best = encode_checkpoint(&a.outcome.best_params) == encode_checkpoint(&b.outcome.best_params);
    let ok = same_data && same_final && same_best;
    report(
        "6",
        ok,
        format!(
            "dataset {} bytes identical: {same_data}; final checkpoint identical: {same_final}; best identical: {same_best}",
            a.dataset_bytes.len()
        ),
    );
    assert!(ok);
}

// ---------------------------------------------------------------- 7: throughput

#[test]
fn criterion_7_benchmark() {
    let run = shared_desk_run();
    let pool: Vec<[f64; 4]> = run.records.iter().map(|r| r.input()).collect();
    let rows = bench(
        &run.outcome.final_params,
        &run.system,
        &pool,
        &[100, 10_000, 1_000_000],
        5,
    )
    .unwrap();
    let csv = bench_csv(&rows);
    println!("{csv}");
    let shape_ok = rows.len() == 6 && csv.lines().count() == 7;

    // Surface-count trend on 10^4 rays: a 10-surface stack against the singlet,
    // each with a proxy of the desk architecture.
    let stack = element_stack(5, 60.0, 20.0).unwrap();
    let rate = |sys: &OpticalSystem| {
        let grid = SourceGrid::new(12.0, 8).unwrap();
        let (records, _) = generate(sys, &grid, 160, 1).unwrap();
        let batch: Vec<[f64; 4]> = records.iter().map(|r| r.input()).cycle().take(10_000).collect();
        let proxy = MlpParams::new(desk_train_config().mlp, fit_normalization(&records)).unwrap();
        let exact = time_mapper(&ExactTracer { system: sys }, &batch, 7).unwrap();
        let learned = time_mapper(&proxy, &batch, 7).unwrap();
        (exact, learned)
    };
    let (exact_2, proxy_2) = rate(&run.system);
    let (exact_10, proxy_10) = rate(&stack);
    let exact_ratio = exact_2 / exact_10;
    let proxy_ratio = proxy_2 / proxy_10;
    let trend_ok = exact_ratio > 2.0 && (0.67..1.5).contains(&proxy_ratio);
    let ok = shape_ok && trend_ok;
    report(
        "7",
        ok,
        format!(
            "{} rows; exact singlet/10-surface rate ratio {exact_ratio:.2} (> 2), proxy ratio {proxy_ratio:.2} (~1)",
            rows.len()
        ),
    );
    let at = |m: Method, b: usize| {
        rows.iter()
            .find(|r| r.method == m && r.batch_size == b)
            .map(|r| r.rays_per_second_median)
            .unwrap()
    };
    println!(
        "ACCEPTANCE 7 note: batch 1e4 singlet exact {:.3e} rays/s vs proxy {:.3e} rays/s on this CPU; \
         untrained-proxy trend pair singlet {proxy_2:.3e}, 10-surface {proxy_10:.3e}; \
         exact trend pair singlet {exact_2:.3e}, 10-surface {exact_10:.3e}",
        at(Method::Exact, 10_000),
        at(Method::Proxy, 10_000)
    );
    assert!(ok);
}
