//! Command-line entry point.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::config::{parse_pairs, TrainConfig};
use crate::data::metrics::format_float;
use crate::data::{read_metrics, ring_centers, write_image_grid, Checkpoint, DatasetKind, MetricsWriter};
use crate::error::{Error, Result};
use crate::nn::gradient_suite;
use crate::nn::optim::MomentumConfig;
use crate::rbm::{train_heldout, HeldoutConfig};
use crate::tensor::Tensor;
use crate::trainer::{feature_autocorrelation, gibbs_sweep, mode_coverage, Trainer};

/// Environment variable naming the directory under which per-run output
/// directories are created when `--out` is not given.
pub const OUT_ROOT_ENV: &str = "AAN_OUT_ROOT";
pub const MANIFEST_FILE: &str = "manifest.txt";
pub const METRICS_FILE: &str = "metrics.csv";
pub const CHECKPOINT_FILE: &str = "checkpoint.aanc";

#[derive(Debug, Parser)]
#[command(name = "aan", version, about = "Train and inspect GANs fed by an RBM over discriminator features")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Train an AAN or the baseline GAN.
    Train(TrainArgs),
    /// Decode RBM chains started from real images after each Gibbs step.
    SweepGibbs(SweepArgs),
    /// Train a tiny RBM with CD and track its exact held-out log-likelihood.
    EvalRbm(EvalRbmArgs),
    /// Check every layer's backward pass against finite differences.
    GradCheck(GradCheckArgs),
    /// Write generator samples from a checkpoint.
    ExportSamples(ExportArgs),
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Flat `key = value` configuration file; flags override it.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// aan or gan.
    #[arg(long)]
    pub mode: Option<String>,
    /// mnist or toy2d.
    #[arg(long)]
    pub dataset: Option<String>,
    #[arg(long)]
    pub feature_dim: Option<usize>,
    #[arg(long)]
    pub cd_steps: Option<usize>,
    /// Total number of steps; with --resume, the step to stop at.
    #[arg(long)]
    pub steps: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long)]
    pub batch_size: Option<usize>,
    /// toy2d, mnist-small or celeba-paper.
    #[arg(long)]
    pub preset: Option<String>,
    /// Any configuration key, as KEY=VALUE; repeatable.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Continue from a checkpoint; metrics rows after its step are discarded.
    #[arg(long)]
    pub resume: Option<PathBuf>,
    /// Number of samples in the final sample grid.
    #[arg(long, default_value_t = 64)]
    pub samples: usize,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Number of source images (grid rows).
    #[arg(long, default_value_t = 8)]
    pub images: usize,
    #[arg(long, default_value_t = 10)]
    pub max_steps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EvalRbmArgs {
    #[arg(long, default_value_t = 4)]
    pub nv: usize,
    #[arg(long, default_value_t = 3)]
    pub nh: usize,
    #[arg(long, default_value_t = 500)]
    pub steps: usize,
    #[arg(long, default_value_t = 2)]
    pub cd_steps: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct GradCheckArgs {
    #[arg(long, default_value_t = 50)]
    pub instances: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

#[derive(Debug, Args)]
pub struct ExportArgs {
    #[arg(long)]
    pub checkpoint: PathBuf,
    #[arg(long, default_value_t = 64)]
    pub count: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

/// Grad-check passes when the worst relative error is below this.
pub const GRAD_CHECK_TOLERANCE: f64 = 1e-5;

/// Parses `args` (including the program name) and runs the command. Returns
/// the process exit status: 0 on success, 1 on failure, 2 on usage errors.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match dispatch(cli.command) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            1
        }
    }
}

fn dispatch(cmd: Command) -> Result<i32> {
    match cmd {
        Command::Train(a) => train(a),
        Command::SweepGibbs(a) => sweep(a),
        Command::EvalRbm(a) => eval_rbm(a),
        Command::GradCheck(a) => grad_check(a),
        Command::ExportSamples(a) => export(a),
    }
}

/// `--out` if given, else `$AAN_OUT_ROOT/<UTC timestamp>-seed<seed>` (root defaults to `runs`).
pub fn output_dir(out: Option<&Path>, seed: u64) -> PathBuf {
    match out {
        Some(p) => p.to_path_buf(),
        None => {
            let root = std::env::var_os(OUT_ROOT_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("runs"));
            let stamp = chrono::Utc::now().format("%Y%m%dT%H%M%SZ");
            root.join(format!("{stamp}-seed{seed}"))
        }
    }
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

fn train_pairs(a: &TrainArgs, base: BTreeMap<String, String>) -> Result<BTreeMap<String, String>> {
    let mut pairs = base;
    if let Some(path) = &a.config {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        pairs.extend(parse_pairs(&text)?);
    }
    let flags: [(&str, Option<String>); 8] = [
        ("mode", a.mode.clone()),
        ("dataset", a.dataset.clone()),
        ("feature_dim", a.feature_dim.map(|v| v.to_string())),
        ("cd_steps", a.cd_steps.map(|v| v.to_string())),
        ("steps", a.steps.map(|v| v.to_string())),
        ("seed", a.seed.map(|v| v.to_string())),
        ("batch_size", a.batch_size.map(|v| v.to_string())),
        ("preset", a.preset.clone()),
    ];
    for (k, v) in flags {
        if let Some(v) = v {
            pairs.insert(k.to_string(), v);
        }
    }
    for kv in &a.set {
        let (k, v) = kv
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got '{kv}'")))?;
        pairs.insert(k.trim().to_string(), v.trim().to_string());
    }
    Ok(pairs)
}

/// Everything needed to rerun: the resolved configuration, then artifact
/// paths as comments so the file is itself a valid `--config`.
pub fn manifest_text(cfg: &TrainConfig, out: &Path, samples: &Path, resumed_from: Option<&Path>) -> String {
    let mut s = String::from("# aan run manifest; usable as --config\n");
    s.push_str(&cfg.to_text());
    s.push_str(&format!("# out_dir = {}\n", out.display()));
    s.push_str(&format!("# metrics = {}\n", out.join(METRICS_FILE).display()));
    s.push_str(&format!("# samples = {}\n", samples.display()));
    s.push_str(&format!("# checkpoint = {}\n", out.join(CHECKPOINT_FILE).display()));
    if let Some(r) = resumed_from {
        s.push_str(&format!("# resumed_from = {}\n", r.display()));
    }
    s
}

fn samples_path(out: &Path, dataset: DatasetKind, stem: &str) -> PathBuf {
    match dataset {
        DatasetKind::Mnist => out.join(format!("{stem}.pgm")),
        DatasetKind::Toy2d => out.join(format!("{stem}.csv")),
    }
}

fn grid_dims(n: usize) -> (usize, usize) {
    let cols = (n as f64).sqrt().ceil() as usize;
    (n.div_ceil(cols), cols)
}

/// PGM grid for images, `x,y` CSV for points.
fn write_samples(samples: &Tensor, dataset: DatasetKind, rows: usize, cols: usize, path: &Path) -> Result<()> {
    match dataset {
        DatasetKind::Mnist => write_image_grid(samples, rows, cols, path),
        DatasetKind::Toy2d => {
            let mut s = String::from("x,y\n");
            for i in 0..samples.batch() {
                let p = samples.sample(i);
                s.push_str(&format!("{},{}\n", format_float(p[0]), format_float(p[1])));
            }
            write_file(path, &s)
        }
    }
}

/// Keeps only rows up to `step`, so a resumed run appends where the checkpoint left off.
fn truncate_metrics(path: &Path, step: u64) -> Result<()> {
    if !path.exists() {
        return Ok(());
    }
    let rows = read_metrics(path)?;
    std::fs::remove_file(path).map_err(|e| Error::io(path, e))?;
    let mut w = MetricsWriter::open(path)?;
    for r in rows.iter().filter(|r| r.step <= step) {
        w.append(r)?;
    }
    w.flush()
}

fn train(a: TrainArgs) -> Result<i32> {
    let resume = match &a.resume {
        Some(p) => Some(Checkpoint::load(p)?),
        None => None,
    };
    let base = match &resume {
        Some(c) => parse_pairs(&c.config)?,
        None => BTreeMap::new(),
    };
    let cfg = TrainConfig::from_pairs(&train_pairs(&a, base)?)?;
    let out = output_dir(a.out.as_deref(), cfg.seed);
    create_dir(&out)?;
    let samples = samples_path(&out, cfg.dataset, "samples");
    write_file(&out.join(MANIFEST_FILE), &manifest_text(&cfg, &out, &samples, a.resume.as_deref()))?;

    let mut trainer = Trainer::new(cfg.clone())?;
    let metrics_path = out.join(METRICS_FILE);
    match &resume {
        Some(ckpt) => {
            trainer.restore(ckpt)?;
            truncate_metrics(&metrics_path, ckpt.step)?;
        }
        None => {
            if metrics_path.exists() {
                std::fs::remove_file(&metrics_path).map_err(|e| Error::io(&metrics_path, e))?;
            }
        }
    }
    let mut writer = MetricsWriter::open(&metrics_path)?;
    let mut last = None;
    while trainer.state.step < cfg.steps {
        let m = match trainer.step() {
            Ok(m) => m,
            Err(e) => {
                writer.flush()?;
                eprintln!("error: step {} aborted: {e}", trainer.state.step + 1);
                return Ok(1);
            }
        };
        writer.append(&m)?;
        if cfg.checkpoint_every > 0 && m.step % cfg.checkpoint_every == 0 {
            trainer.checkpoint().save(out.join(format!("checkpoint-{:08}.aanc", m.step)))?;
        }
        last = Some(m);
    }
    writer.flush()?;
    drop(writer);
    trainer.checkpoint().save(out.join(CHECKPOINT_FILE))?;
    let n = a.samples.max(2);
    let fakes = trainer.generate(n, cfg.seed)?;
    let (rows, cols) = grid_dims(n);
    write_samples(&fakes, cfg.dataset, rows, cols, &samples)?;

    let mut stdout = std::io::stdout().lock();
    let _ = writeln!(stdout, "run directory: {}", out.display());
    if let Some(m) = last {
        let _ = writeln!(
            stdout,
            "step {}: E[log D(x)] {:.4}  E[log D(G)] {:.4}  ratio {:.4}  d_loss {:.4}  g_loss {:.4}  diversity {:.4}",
            m.step, m.log_d_real, m.log_d_fake, m.ratio, m.d_loss, m.g_loss, m.sample_diversity
        );
    }
    if cfg.dataset == DatasetKind::Toy2d {
        let cov = mode_coverage(&fakes, &ring_centers(cfg.toy_centers, cfg.toy_radius), coverage_radius(&cfg))?;
        let _ = writeln!(stdout, "modes covered: {}/{} {:?}", cov.covered, cfg.toy_centers, cov.histogram);
    }
    if trainer.state.collapse_flagged {
        let _ = writeln!(stdout, "warning: sample diversity stayed below the collapse threshold");
    }
    Ok(0)
}

/// Assignment radius for toy mode coverage: three noise standard deviations.
pub fn coverage_radius(cfg: &TrainConfig) -> f64 {
    3.0 * cfg.toy_noise_std
}

fn sweep(a: SweepArgs) -> Result<i32> {
    if a.images == 0 || a.max_steps == 0 {
        return Err(Error::InvalidArgument("--images and --max-steps must be >= 1".into()));
    }
    let ckpt = Checkpoint::load(&a.checkpoint)?;
    let trainer = Trainer::from_checkpoint(&ckpt)?;
    let cfg = &trainer.config;
    let out = output_dir(a.out.as_deref(), a.seed);
    create_dir(&out)?;
    let source = trainer.heldout.as_ref().unwrap_or(&trainer.train);
    let n = a.images.min(source.len());
    let real = source.samples.slice_batch(0, n);
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let s = &trainer.state;
    let sweep = gibbs_sweep(&real, &s.rbm.params, &s.d, &s.g, a.max_steps, cfg.binarize, &mut rng)?;
    let grid = samples_path(&out, cfg.dataset, "sweep");
    write_samples(&sweep.grid, cfg.dataset, n, a.max_steps + 1, &grid)?;
    let lags = a.max_steps.min(sweep.states.len() - 1);
    let ac = feature_autocorrelation(&sweep.states, lags)?;
    let mut text = String::from("lag,autocorrelation\n");
    for (lag, v) in ac.iter().enumerate() {
        let v = v.map(format_float).unwrap_or_else(|| "undefined".into());
        text.push_str(&format!("{lag},{v}\n"));
    }
    write_file(&out.join("autocorrelation.csv"), &text)?;
    println!("wrote {} and {}", grid.display(), out.join("autocorrelation.csv").display());
    Ok(0)
}

fn eval_rbm(a: EvalRbmArgs) -> Result<i32> {
    let cfg = HeldoutConfig {
        n_visible: a.nv,
        n_hidden: a.nh,
        steps: a.steps,
        cd_steps: a.cd_steps,
        optimizer: MomentumConfig::default(),
        seed: a.seed,
        eval_every: (a.steps / 20).max(1),
        ..HeldoutConfig::default()
    };
    let run = train_heldout(&cfg)?;
    if let Some(out) = &a.out {
        create_dir(out)?;
        let mut text = String::from("step,heldout_log_likelihood\n");
        for (step, ll) in &run.trace {
            text.push_str(&format!("{step},{}\n", format_float(*ll)));
        }
        write_file(&out.join("eval_rbm.csv"), &text)?;
    }
    println!(
        "held-out log-likelihood: initial {:.6}, after {} steps {:.6} (change {:+.6})",
        run.initial,
        a.steps,
        run.last,
        run.last - run.initial
    );
    Ok(0)
}

fn grad_check(a: GradCheckArgs) -> Result<i32> {
    let start = std::time::Instant::now();
    let cases = gradient_suite(a.instances, a.seed)?;
    let mut by_kind: BTreeMap<String, f64> = BTreeMap::new();
    for c in &cases {
        let kind = c.name.split_whitespace().nth(1).unwrap_or("?").to_string();
        let e = by_kind.entry(kind).or_insert(0.0);
        *e = e.max(c.report.max_relative_error);
    }
    for (kind, err) in &by_kind {
        println!("{kind:<24} max relative error {err:.3e}");
    }
    let worst = cases
        .iter()
        .max_by(|x, y| x.report.max_relative_error.total_cmp(&y.report.max_relative_error));
    let max = worst.map(|w| w.report.max_relative_error).unwrap_or(0.0);
    println!(
        "{} cases in {:.2?}; max relative error {max:.3e}{}",
        cases.len(),
        start.elapsed(),
        worst.map(|w| format!(" ({}, {})", w.name, w.report.worst)).unwrap_or_default()
    );
    Ok(if max < GRAD_CHECK_TOLERANCE { 0 } else { 1 })
}

fn export(a: ExportArgs) -> Result<i32> {
    if a.count == 0 {
        return Err(Error::InvalidArgument("--count must be >= 1".into()));
    }
    let ckpt = Checkpoint::load(&a.checkpoint)?;
    let trainer = Trainer::from_checkpoint(&ckpt)?;
    let out = output_dir(a.out.as_deref(), a.seed);
    create_dir(&out)?;
    let fakes = trainer.generate(a.count, a.seed)?;
    let path = samples_path(&out, trainer.config.dataset, "samples");
    let (rows, cols) = grid_dims(a.count);
    write_samples(&fakes, trainer.config.dataset, rows, cols, &path)?;
    println!("wrote {}", path.display());
    Ok(0)
}
