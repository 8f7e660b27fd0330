mod config;

use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};
use rayproxy::dataset::{generate, load_binary, save_binary, save_csv, split_cells, Dataset, DatasetSplit, SourceGrid};
use rayproxy::io::atomic_write;
use rayproxy::nn::{load_checkpoint, save_checkpoint, MlpConfig, MlpParams, Reduction};
use rayproxy::optics::{
    design_singlet, paraxial_efl, paraxial_image_z, propagate_to_plane, read_prescription, write_prescription,
    OpticalSystem, Ray3, Vec3,
};
use rayproxy::proxy::{
    bench, bench_csv, check_grid, exact_spot, experiment_novel_pattern, experiment_unseen_cell, history_csv,
    reports_csv, spot_diagram, spot_inputs, train, RayMapper, TrainConfig,
};

use config::PipelineConfig;

const DATASET_BIN: &str = "dataset.bin";
const DATASET_CSV: &str = "dataset.csv";
const SPLIT_TXT: &str = "split.txt";
const GEN_REPORT: &str = "generation_report.txt";
const CKPT_BEST: &str = "checkpoint_best.r2rw";
const CKPT_FINAL: &str = "checkpoint_final.r2rw";
const HISTORY_CSV: &str = "history.csv";
const EVAL_CSV: &str = "eval.csv";
const EVAL_REPORT: &str = "eval_report.txt";
const BENCH_CSV: &str = "bench.csv";

/// Exact lens ray tracing and a learned single-pass proxy for it.
#[derive(Parser, Debug)]
#[command(name = "rayproxy", version)]
struct Cli {
    /// Flat `key = value` config file; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Worker threads for data-parallel sections (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Allow nondeterministic parallel gradient reduction.
    #[arg(long, global = true)]
    fast: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Design a symmetric biconvex singlet and write its prescription.
    Design(DesignArgs),
    /// Trace the grid source through the system and split cells into train/test.
    Gen(GenArgs),
    /// Fit the proxy network on the training cells.
    Train(TrainArgs),
    /// Score the trained proxy on unseen cells and a novel ray pattern.
    Eval(EvalArgs),
    /// Compare exact-tracer and proxy throughput.
    Bench(BenchArgs),
    /// Spot diagrams from one source point, exact and (if trained) proxy.
    Plot(PlotArgs),
}

#[derive(Args, Debug)]
struct DesignArgs {
    #[arg(long)]
    focal: f64,
    #[arg(long)]
    aperture: f64,
    #[arg(long)]
    index: Option<f64>,
    #[arg(long)]
    thickness: Option<f64>,
    /// Defaults to `<out-dir>/prescription.txt`.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct GenArgs {
    #[arg(long)]
    prescription: Option<PathBuf>,
    #[arg(long)]
    extent: Option<f64>,
    #[arg(long)]
    cells: Option<u32>,
    #[arg(long)]
    rays_per_cell: Option<usize>,
    #[arg(long)]
    split_fraction: Option<f64>,
}

#[derive(Args, Debug)]
struct TrainArgs {
    #[arg(long)]
    prescription: Option<PathBuf>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    hidden_width: Option<usize>,
    #[arg(long)]
    hidden_layers: Option<usize>,
    #[arg(long)]
    skip_period: Option<usize>,
    #[arg(long)]
    batch_size: Option<usize>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    final_lr: Option<f64>,
    #[arg(long)]
    weight_decay: Option<f64>,
}

#[derive(Args, Debug)]
struct EvalArgs {
    #[arg(long)]
    prescription: Option<PathBuf>,
    /// Defaults to the best-test checkpoint in the output directory.
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    #[arg(long)]
    novel_rays: Option<usize>,
}

#[derive(Args, Debug)]
struct BenchArgs {
    #[arg(long)]
    prescription: Option<PathBuf>,
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Comma-separated, e.g. `1e2,1e4,1e6`.
    #[arg(long)]
    batch_sizes: Option<String>,
    #[arg(long)]
    reps: Option<usize>,
}

#[derive(Args, Debug)]
struct PlotArgs {
    #[arg(long)]
    prescription: Option<PathBuf>,
    #[arg(long)]
    checkpoint: Option<PathBuf>,
    /// Source point, mm.
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    x: f64,
    #[arg(long, default_value_t = 0.0, allow_hyphen_values = true)]
    y: f64,
    /// Image-space depth, mm. Defaults to the paraxial image of the source plane.
    #[arg(long, allow_hyphen_values = true)]
    depth: Option<f64>,
    #[arg(long)]
    rays: Option<usize>,
}

/// An error with the process exit status it maps to.
struct Failure {
    code: u8,
    err: anyhow::Error,
}

trait ExitClass<T> {
    /// Bad configuration or arguments: exit 2.
    fn usage(self) -> Result<T, Failure>;
    /// Anything that went wrong while doing the work: exit 1.
    fn runtime(self) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> ExitClass<T> for Result<T, E> {
    fn usage(self) -> Result<T, Failure> {
        self.map_err(|e| Failure { code: 2, err: e.into() })
    }
    fn runtime(self) -> Result<T, Failure> {
        self.map_err(|e| Failure { code: 1, err: e.into() })
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {:#}", f.err);
            ExitCode::from(f.code)
        }
    }
}

fn run(cli: Cli) -> Result<(), Failure> {
    let mut cfg = match &cli.config {
        Some(p) => PipelineConfig::load(p).usage()?,
        None => PipelineConfig::default(),
    };
    if let Some(d) = &cli.out_dir {
        cfg.out_dir = d.clone();
    }
    if let Some(s) = cli.seed {
        cfg.seed = s;
    }
    if let Some(n) = cli.threads {
        set_threads(n)?;
    }
    let reduction = if cli.fast {
        Reduction::Unordered
    } else {
        Reduction::Ordered
    };

    match cli.command {
        Command::Design(a) => cmd_design(cfg, a),
        Command::Gen(a) => {
            override_opt(&mut cfg.prescription, a.prescription.map(Some));
            override_opt(&mut cfg.extent, a.extent);
            override_opt(&mut cfg.cells_per_side, a.cells);
            override_opt(&mut cfg.rays_per_cell, a.rays_per_cell);
            override_opt(&mut cfg.split_fraction, a.split_fraction);
            cfg.validate().usage()?;
            cmd_gen(&cfg)
        }
        Command::Train(a) => {
            override_opt(&mut cfg.prescription, a.prescription.map(Some));
            override_opt(&mut cfg.epochs, a.epochs);
            override_opt(&mut cfg.hidden_width, a.hidden_width);
            override_opt(&mut cfg.hidden_layers, a.hidden_layers);
            override_opt(&mut cfg.skip_period, a.skip_period);
            override_opt(&mut cfg.batch_size, a.batch_size);
            override_opt(&mut cfg.base_lr, a.lr);
            override_opt(&mut cfg.final_lr, a.final_lr);
            override_opt(&mut cfg.weight_decay, a.weight_decay);
            cfg.validate().usage()?;
            cmd_train(&cfg, reduction)
        }
        Command::Eval(a) => {
            override_opt(&mut cfg.prescription, a.prescription.map(Some));
            override_opt(&mut cfg.novel_rays, a.novel_rays);
            cfg.validate().usage()?;
            cmd_eval(&cfg, a.checkpoint)
        }
        Command::Bench(a) => {
            override_opt(&mut cfg.prescription, a.prescription.map(Some));
            if let Some(list) = a.batch_sizes {
                cfg.set("bench_batches", &list).usage()?;
            }
            override_opt(&mut cfg.bench_reps, a.reps);
            cfg.validate().usage()?;
            cmd_bench(&cfg, a.checkpoint)
        }
        Command::Plot(a) => {
            override_opt(&mut cfg.prescription, a.prescription.clone().map(Some));
            override_opt(&mut cfg.spot_rays, a.rays);
            cmd_plot(&cfg, &a)
        }
    }
}

fn override_opt<T>(slot: &mut T, value: Option<T>) {
    if let Some(v) = value {
        *slot = v;
    }
}

#[cfg(feature = "parallel")]
fn set_threads(n: usize) -> Result<(), Failure> {
    if n == 0 {
        return Err(anyhow!("--threads must be >= 1")).usage();
    }
    rayon::ThreadPoolBuilder::new().num_threads(n).build_global().runtime()
}

#[cfg(not(feature = "parallel"))]
fn set_threads(n: usize) -> Result<(), Failure> {
    if n == 0 {
        return Err(anyhow!("--threads must be >= 1")).usage();
    }
    eprintln!("note: built without the `parallel` feature; --threads {n} ignored");
    Ok(())
}

fn ensure_out_dir(cfg: &PipelineConfig) -> Result<(), Failure> {
    std::fs::create_dir_all(&cfg.out_dir)
        .with_context(|| format!("creating {}", cfg.out_dir.display()))
        .runtime()
}

fn out(cfg: &PipelineConfig, name: &str) -> PathBuf {
    cfg.out_dir.join(name)
}

fn require(path: &Path, what: &str) -> Result<(), Failure> {
    if path.exists() {
        Ok(())
    } else {
        Err(anyhow!("{what} not found: {}", path.display())).runtime()
    }
}

fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    atomic_write(path, text.as_bytes()).runtime()
}

fn cmd_design(cfg: PipelineConfig, a: DesignArgs) -> Result<(), Failure> {
    let index = a.index.unwrap_or(cfg.index);
    let thickness = a.thickness.unwrap_or(cfg.thickness);
    let sys = design_singlet(a.focal, a.aperture, index, thickness).usage()?;
    let efl = paraxial_efl(&sys).runtime()?;
    let path = a.out.unwrap_or_else(|| cfg.prescription_path());
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).runtime()?;
    }
    write_text(&path, &write_prescription(&sys))?;
    println!(
        "wrote {} (R = {:.6} mm, paraxial EFL = {:.6} mm)",
        path.display(),
        sys.surfaces[0].radius().unwrap_or(f64::INFINITY),
        efl
    );
    Ok(())
}

/// Reads the configured prescription, designing the default singlet when no
/// prescription was named and none exists yet.
fn resolve_system(cfg: &PipelineConfig, allow_design: bool) -> Result<OpticalSystem, Failure> {
    let path = cfg.prescription_path();
    if path.exists() {
        return read_prescription(&path).runtime();
    }
    if !allow_design || cfg.prescription.is_some() {
        return Err(anyhow!("prescription not found: {}", path.display())).runtime();
    }
    let sys = design_singlet(cfg.focal, cfg.aperture, cfg.index, cfg.thickness).usage()?;
    write_text(&path, &write_prescription(&sys))?;
    eprintln!("designed default singlet -> {}", path.display());
    Ok(sys)
}

fn cmd_gen(cfg: &PipelineConfig) -> Result<(), Failure> {
    ensure_out_dir(cfg)?;
    let sys = resolve_system(cfg, true)?;
    let grid = SourceGrid::new(cfg.extent, cfg.cells_per_side).usage()?;
    let split = split_cells(&grid, cfg.split_fraction, cfg.seed).usage()?;
    let (records, report) = generate(&sys, &grid, cfg.rays_per_cell, cfg.seed).runtime()?;
    let ds = Dataset {
        extent: grid.extent,
        cells_per_side: u64::from(grid.cells_per_side),
        records,
    };
    save_binary(&out(cfg, DATASET_BIN), &ds).runtime()?;
    save_csv(&out(cfg, DATASET_CSV), &ds.records).runtime()?;
    write_text(&out(cfg, SPLIT_TXT), &split.to_text())?;
    write_text(&out(cfg, GEN_REPORT), &report.to_string())?;
    let t = report.total();
    println!(
        "{} records from {} cells ({} dropped: {} vignetted, {} TIR, {} missed); {} train / {} test cells",
        ds.records.len(),
        grid.cell_count(),
        t.dropped(),
        t.vignetted,
        t.tir,
        t.missed,
        split.train_cells.len(),
        split.test_cells.len()
    );
    Ok(())
}

fn load_inputs(cfg: &PipelineConfig) -> Result<(OpticalSystem, Dataset, DatasetSplit), Failure> {
    let sys = resolve_system(cfg, false)?;
    let bin = out(cfg, DATASET_BIN);
    require(&bin, "dataset")?;
    let ds = load_binary(&bin).runtime()?;
    let split_path = out(cfg, SPLIT_TXT);
    require(&split_path, "split")?;
    let text = std::fs::read_to_string(&split_path).runtime()?;
    let split = DatasetSplit::from_text(&text, &split_path).runtime()?;
    Ok((sys, ds, split))
}

fn cmd_train(cfg: &PipelineConfig, reduction: Reduction) -> Result<(), Failure> {
    let (_, ds, split) = load_inputs(cfg)?;
    let grid = SourceGrid::new(cfg.extent, cfg.cells_per_side).usage()?;
    check_grid(&ds, &grid).usage()?;
    let tc = TrainConfig {
        mlp: MlpConfig {
            hidden_width: cfg.hidden_width,
            hidden_layers: cfg.hidden_layers,
            skip_period: cfg.skip_period,
            weight_init_seed: cfg.seed,
            ..MlpConfig::default()
        },
        epochs: cfg.epochs,
        batch_size: cfg.batch_size,
        base_lr: cfg.base_lr,
        final_lr: cfg.final_lr,
        weight_decay: cfg.weight_decay,
        seed: cfg.seed,
        reduction,
    };
    let every = (cfg.epochs / 20).max(1);
    let outcome = train(&ds.records, &split, &tc, |r| {
        if r.epoch % every == 0 || r.epoch + 1 == cfg.epochs {
            eprintln!(
                "epoch {:>5}  lr {:.3e}  loss {:.4e}  test pos {:.3} um  ang {:.4} deg",
                r.epoch, r.lr, r.train_loss, r.test_pos_um, r.test_ang_deg
            );
        }
    })
    .runtime()?;
    save_checkpoint(&out(cfg, CKPT_BEST), &outcome.best_params).runtime()?;
    save_checkpoint(&out(cfg, CKPT_FINAL), &outcome.final_params).runtime()?;
    write_text(&out(cfg, HISTORY_CSV), &history_csv(&outcome.history))?;
    let best = &outcome.history[outcome.best_epoch];
    println!(
        "best epoch {}: test pos {:.3} um, ang {:.4} deg",
        outcome.best_epoch, best.test_pos_um, best.test_ang_deg
    );
    Ok(())
}

fn load_params(cfg: &PipelineConfig, path: Option<PathBuf>) -> Result<MlpParams, Failure> {
    let path = path.unwrap_or_else(|| out(cfg, CKPT_BEST));
    require(&path, "checkpoint")?;
    load_checkpoint(&path).runtime()
}

fn cmd_eval(cfg: &PipelineConfig, checkpoint: Option<PathBuf>) -> Result<(), Failure> {
    let params = load_params(cfg, checkpoint)?;
    let (sys, ds, split) = load_inputs(cfg)?;
    let grid = SourceGrid::new(ds.extent, u32::try_from(ds.cells_per_side).runtime()?).runtime()?;
    let unseen = experiment_unseen_cell(&params, &ds.records, &split).runtime()?;
    let novel = experiment_novel_pattern(&params, &sys, &grid, cfg.novel_rays, cfg.seed).runtime()?;
    let reports = [unseen, novel];
    write_text(&out(cfg, EVAL_CSV), &reports_csv(&reports))?;

    let mut table = String::new();
    let _ = writeln!(table, "# Errors are per-ray; the reference column compares the mean.");
    let _ = writeln!(
        table,
        "# Reference values: unseen cell 2.4 um / 0.06 deg, novel pattern 5.9 um / 0.076 deg."
    );
    let _ = writeln!(
        table,
        "{:<20} {:>9} {:>10} {:>10} {:>10} {:>10} {:>10} {:>10}",
        "condition", "n_rays", "pos_mean", "pos_med", "pos_p95", "ang_mean", "ang_med", "ang_p95"
    );
    for r in &reports {
        let _ = writeln!(
            table,
            "{:<20} {:>9} {:>10.3} {:>10.3} {:>10.3} {:>10.5} {:>10.5} {:>10.5}",
            r.condition,
            r.n_rays,
            r.pos_error_um.mean,
            r.pos_error_um.median,
            r.pos_error_um.p95,
            r.ang_error_deg.mean,
            r.ang_error_deg.median,
            r.ang_error_deg.p95
        );
    }
    write_text(&out(cfg, EVAL_REPORT), &table)?;
    print!("{table}");
    Ok(())
}

fn cmd_bench(cfg: &PipelineConfig, checkpoint: Option<PathBuf>) -> Result<(), Failure> {
    let params = load_params(cfg, checkpoint)?;
    let (sys, ds, _) = load_inputs(cfg)?;
    let pool: Vec<[f64; 4]> = ds.records.iter().map(|r| r.input()).collect();
    let rows = bench(&params, &sys, &pool, &cfg.bench_batches, cfg.bench_reps).usage()?;
    let csv = bench_csv(&rows);
    write_text(&out(cfg, BENCH_CSV), &csv)?;
    print!("{csv}");
    Ok(())
}

fn cmd_plot(cfg: &PipelineConfig, a: &PlotArgs) -> Result<(), Failure> {
    ensure_out_dir(cfg)?;
    if cfg.spot_rays == 0 {
        return Err(anyhow!("--rays must be >= 1")).usage();
    }
    let sys = resolve_system(cfg, false)?;
    let depth = match a.depth {
        Some(d) => d,
        None => paraxial_image_z(&sys, sys.source_z).runtime()?,
    };
    if depth < sys.target_z {
        return Err(anyhow!("depth {depth} lies before the target plane {}", sys.target_z)).usage();
    }
    let p_i = [a.x, a.y];
    let exact = exact_spot(&sys, p_i, cfg.spot_rays, cfg.seed, depth).runtime()?;
    if exact.is_empty() {
        return Err(anyhow!("no ray from ({}, {}) reaches the target", a.x, a.y)).runtime();
    }
    let title = format!("exact, source ({}, {}) mm, z = {depth:.3} mm", a.x, a.y);
    spot_diagram(&exact, &out(cfg, "spot_exact.svg"), &out(cfg, "spot_exact.csv"), &title).runtime()?;
    println!(
        "exact spot: {} rays -> {}",
        exact.len(),
        out(cfg, "spot_exact.svg").display()
    );

    let ckpt = a.checkpoint.clone().unwrap_or_else(|| out(cfg, CKPT_BEST));
    if ckpt.exists() {
        let params = load_checkpoint(&ckpt).runtime()?;
        let inputs = spot_inputs(&sys, p_i, cfg.spot_rays, cfg.seed).runtime()?;
        // An imperfect proxy can predict a direction that is not a forward unit
        // vector; such rays cannot be propagated and are left out of the plot.
        let mapped = params.map_rays(&inputs).runtime()?;
        let proxy: Vec<[f64; 2]> = mapped
            .iter()
            .filter_map(|o| Ray3::from_transverse(Vec3::new(o[0], o[1], sys.target_z), o[2], o[3]))
            .map(|ray| propagate_to_plane(&ray, depth))
            .collect::<Result<_, _>>()
            .runtime()?;
        if proxy.len() < mapped.len() {
            eprintln!(
                "warning: {} of {} proxy rays predicted an invalid direction and were skipped",
                mapped.len() - proxy.len(),
                mapped.len()
            );
        }
        if proxy.is_empty() {
            return Err(anyhow!("the proxy predicted no valid ray")).runtime();
        }
        let title = format!("proxy, source ({}, {}) mm, z = {depth:.3} mm", a.x, a.y);
        spot_diagram(&proxy, &out(cfg, "spot_proxy.svg"), &out(cfg, "spot_proxy.csv"), &title).runtime()?;
        println!(
            "proxy spot: {} rays -> {}",
            proxy.len(),
            out(cfg, "spot_proxy.svg").display()
        );
    }
    Ok(())
}
