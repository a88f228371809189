use std::io::Write;
use std::net::SocketAddr;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use xmtc_core::artifacts::{self, load_model, load_sweep_meta, load_testset, save_loo, save_sweep};
use xmtc_core::early::{self, accuracy_curve, confusion, leave_one_out};
use xmtc_core::explain::{partial_dependence, pdp_grid};
use xmtc_core::io::save_dataset;
use xmtc_core::synth::{synthesize, SynthConfig};
use xmtc_core::DrCifConfig;

use crate::api::{router, AppState};
use crate::dataset::{load_with_split, DEFAULT_SPLIT_SEED, DEFAULT_TEST_FRAC};

pub const DATA_DIR_ENV: &str = "XMTC_DATA_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "xmtc",
    version,
    about = "Growing-window interval forests for early time-series classification"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Generate a synthetic reach-to-grasp-like dataset directory.
    Synth(SynthArgs),
    /// Train one forest per window and store the sweep.
    Train(TrainArgs),
    /// Print the accuracy curve (or one confusion matrix) as CSV.
    Eval(EvalArgs),
    /// Print partial dependence curves of one window model as CSV.
    Pdp(PdpArgs),
    /// Grouped leave-one-out over the window grid, as CSV.
    Loo(LooArgs),
    /// Serve the HTTP API (and optionally the web UI).
    Serve(ServeArgs),
}

#[derive(Debug, Args)]
pub struct SynthArgs {
    /// Output dataset directory.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value = "synth")]
    pub id: String,
    /// Comma-separated object names.
    #[arg(long, value_delimiter = ',', default_value = "bottle,cup,knife,pen")]
    pub objects: Vec<String>,
    #[arg(long, default_value_t = 30)]
    pub per_class: usize,
    #[arg(long, default_value_t = 12)]
    pub channels: usize,
    #[arg(long, default_value_t = 300.0)]
    pub length_mean: f64,
    #[arg(long, default_value_t = 30.0)]
    pub length_std: f64,
    #[arg(long, default_value_t = 250)]
    pub length_min: usize,
    #[arg(long, default_value_t = 350)]
    pub length_max: usize,
    #[arg(long, default_value_t = 10)]
    pub t_side: usize,
    #[arg(long, default_value_t = 150)]
    pub t_obj: usize,
    #[arg(long, default_value_t = 0.05)]
    pub noise: f64,
    /// Number of pseudo-users.
    #[arg(long, default_value_t = 6)]
    pub groups: usize,
    #[arg(long, default_value_t = 0.3)]
    pub test_frac: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
}

impl SynthArgs {
    pub fn config(&self) -> SynthConfig {
        SynthConfig {
            id: self.id.clone(),
            objects: self.objects.clone(),
            series_per_class: self.per_class,
            n_channels: self.channels,
            length_mean: self.length_mean,
            length_std: self.length_std,
            length_min: self.length_min,
            length_max: self.length_max,
            t_side: self.t_side,
            t_obj: self.t_obj,
            noise_std: self.noise,
            n_groups: self.groups,
            test_frac: self.test_frac,
            seed: self.seed,
        }
    }
}

#[derive(Debug, Args)]
pub struct ForestArgs {
    #[arg(long, default_value_t = early::DEFAULT_STEP)]
    pub step: usize,
    #[arg(long, default_value_t = 200)]
    pub trees: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Attributes drawn per tree.
    #[arg(long, default_value_t = 10)]
    pub attributes: usize,
}

impl ForestArgs {
    pub fn config(&self) -> DrCifConfig {
        DrCifConfig {
            n_trees: self.trees,
            attributes_per_tree: self.attributes,
            seed: self.seed,
            ..DrCifConfig::default()
        }
    }
}

#[derive(Debug, Args)]
pub struct TrainArgs {
    /// Dataset directory.
    pub dataset: PathBuf,
    /// Output sweep directory; defaults to `./{dataset}-step{S}-trees{N}-seed{R}`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[command(flatten)]
    pub forest: ForestArgs,
    /// Test fraction for datasets without a stored split.
    #[arg(long, default_value_t = DEFAULT_TEST_FRAC)]
    pub test_frac: f64,
    #[arg(long, default_value_t = DEFAULT_SPLIT_SEED)]
    pub split_seed: u64,
    #[arg(long, short)]
    pub quiet: bool,
}

#[derive(Debug, Args)]
pub struct EvalArgs {
    /// Sweep directory.
    pub sweep: PathBuf,
    /// Print the confusion matrix of this window instead of the curve.
    #[arg(long)]
    pub confusion: Option<usize>,
}

#[derive(Debug, Args)]
pub struct PdpArgs {
    /// Sweep directory.
    pub sweep: PathBuf,
    #[arg(long)]
    pub window: usize,
    /// Channel index or name; all channels when omitted.
    #[arg(long)]
    pub channel: Option<String>,
    #[arg(long, default_value_t = 20)]
    pub grid: usize,
}

#[derive(Debug, Args)]
pub struct LooArgs {
    /// Dataset directory.
    pub dataset: PathBuf,
    #[command(flatten)]
    pub forest: ForestArgs,
    /// Print per-window summaries instead of per-fold accuracies.
    #[arg(long)]
    pub summary: bool,
    /// Also store the result as `loo.json` in this sweep directory.
    #[arg(long)]
    pub save: Option<PathBuf>,
    #[arg(long, short)]
    pub quiet: bool,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[arg(long, default_value_t = 8080)]
    pub port: u16,
    #[arg(long, default_value = "127.0.0.1")]
    pub host: String,
    /// Data directory; the XMTC_DATA_DIR environment variable takes precedence.
    #[arg(long, default_value = "data")]
    pub data_dir: PathBuf,
    /// Directory of static UI assets served for non-API paths.
    #[arg(long)]
    pub ui_dir: Option<PathBuf>,
}

impl ServeArgs {
    pub fn resolved_data_dir(&self) -> PathBuf {
        match std::env::var_os(DATA_DIR_ENV) {
            Some(v) if !v.is_empty() => PathBuf::from(v),
            _ => self.data_dir.clone(),
        }
    }
}

fn require_dir(path: &Path, what: &str) -> Result<()> {
    if !path.is_dir() {
        bail!("{what} {} does not exist", path.display());
    }
    Ok(())
}

fn require_sweep(path: &Path) -> Result<()> {
    require_dir(path, "sweep directory")?;
    if !path.join(artifacts::SWEEP_FILE).is_file() {
        bail!("{} holds no trained sweep", path.display());
    }
    Ok(())
}

/// Runs every command except `serve`, writing tables to `out`.
pub fn run(command: &Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Synth(a) => {
            let ds = synthesize(&a.config())?;
            save_dataset(&ds, &a.out)?;
            writeln!(out, "wrote {} series to {}", ds.series.len(), a.out.display())?;
        }
        Command::Train(a) => train(a, out)?,
        Command::Eval(a) => eval(a, out)?,
        Command::Pdp(a) => pdp(a, out)?,
        Command::Loo(a) => loo(a, out)?,
        Command::Serve(_) => bail!("serve runs on the async runtime; use serve()"),
    }
    Ok(())
}

fn train(a: &TrainArgs, out: &mut dyn Write) -> Result<()> {
    require_dir(&a.dataset, "dataset directory")?;
    let ds = load_with_split(&a.dataset, a.test_frac, a.split_seed)
        .with_context(|| format!("loading {}", a.dataset.display()))?;
    let config = a.forest.config();
    let sid = artifacts::sweep_id(&ds.id, a.forest.step, &config);
    let dir = a.out.clone().unwrap_or_else(|| PathBuf::from(&sid));
    if dir.join(artifacts::SWEEP_FILE).exists() {
        bail!("{} already holds a sweep", dir.display());
    }
    let quiet = a.quiet;
    let sweep = early::train_sweep(&ds, &config, a.forest.step, |p| {
        if !quiet && p.done < p.total {
            eprintln!("training window {} ({}/{})", p.window_len, p.done + 1, p.total);
        }
    })?;
    save_sweep(&sweep, &ds.test(), &dir)?;
    writeln!(
        out,
        "wrote sweep {sid} ({} windows) to {}",
        sweep.grid.len(),
        dir.display()
    )?;
    Ok(())
}

fn eval(a: &EvalArgs, out: &mut dyn Write) -> Result<()> {
    require_sweep(&a.sweep)?;
    let sweep = load_sweep_meta(&a.sweep)?;
    let mut w = csv::Writer::from_writer(out);
    match a.confusion {
        None => {
            w.write_record(["window_len", "accuracy", "n_shorter_all", "n_shorter_test"])?;
            for p in accuracy_curve(&sweep) {
                w.write_record([
                    p.window_len.to_string(),
                    p.accuracy.to_string(),
                    p.n_shorter_all.to_string(),
                    p.n_shorter_test.to_string(),
                ])?;
            }
        }
        Some(window) => {
            let m = confusion(&sweep, window)?;
            let mut header = vec!["true\\predicted".to_string()];
            header.extend(m.classes.iter().cloned());
            w.write_record(&header)?;
            for (name, row) in m.classes.iter().zip(&m.counts) {
                let mut rec = vec![name.clone()];
                rec.extend(row.iter().map(|c| c.to_string()));
                w.write_record(&rec)?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

fn pdp(a: &PdpArgs, out: &mut dyn Write) -> Result<()> {
    require_sweep(&a.sweep)?;
    let sweep = load_sweep_meta(&a.sweep)?;
    if sweep.grid.position(a.window).is_none() {
        bail!("window {} is not part of the sweep grid {:?}", a.window, sweep.grid);
    }
    let model = load_model(&a.sweep, a.window)?;
    let testset = load_testset(&a.sweep)?;
    let channels: Vec<usize> = match &a.channel {
        None => (0..model.n_channels()).collect(),
        Some(c) => {
            let idx = c
                .parse::<usize>()
                .ok()
                .filter(|&i| i < model.n_channels())
                .or_else(|| model.channels.iter().position(|n| n == c));
            match idx {
                Some(i) => vec![i],
                None => bail!("unknown channel {c:?}; channels are {:?}", model.channels),
            }
        }
    };
    let grid = pdp_grid(a.grid)?;
    let eval = testset.test();
    let mut w = csv::Writer::from_writer(out);
    let mut header = vec!["channel".to_string(), "value".to_string()];
    header.extend(model.classes.iter().cloned());
    w.write_record(&header)?;
    for c in channels {
        let curves = partial_dependence(&model, &eval, c, &grid)?;
        for (g, v) in grid.iter().enumerate() {
            let mut rec = vec![curves.name.clone(), v.to_string()];
            rec.extend(curves.curves.iter().map(|k| k[g].to_string()));
            w.write_record(&rec)?;
        }
    }
    w.flush()?;
    Ok(())
}

fn loo(a: &LooArgs, out: &mut dyn Write) -> Result<()> {
    require_dir(&a.dataset, "dataset directory")?;
    let ds = xmtc_core::io::load_dataset(&a.dataset)?;
    let quiet = a.quiet;
    let result = leave_one_out(&ds, &a.forest.config(), a.forest.step, |g, p| {
        if !quiet && p.done < p.total {
            eprintln!("group {g}: window {} ({}/{})", p.window_len, p.done + 1, p.total);
        }
    })?;
    if let Some(dir) = &a.save {
        require_sweep(dir)?;
        save_loo(&result, dir)?;
    }
    let mut w = csv::Writer::from_writer(out);
    if a.summary {
        w.write_record(["window_len", "mean", "std", "min", "q1", "median", "q3", "max"])?;
        for s in &result.summary {
            w.write_record([
                s.window_len.to_string(),
                s.mean.to_string(),
                s.std.to_string(),
                s.min.to_string(),
                s.q1.to_string(),
                s.median.to_string(),
                s.q3.to_string(),
                s.max.to_string(),
            ])?;
        }
    } else {
        w.write_record(["group", "window_len", "accuracy"])?;
        let windows = result.grid.windows();
        for f in &result.folds {
            for (wl, acc) in windows.iter().zip(&f.accuracy) {
                w.write_record([f.group.clone(), wl.to_string(), acc.to_string()])?;
            }
        }
    }
    w.flush()?;
    Ok(())
}

pub async fn serve(a: &ServeArgs) -> Result<()> {
    let data_dir = a.resolved_data_dir();
    std::fs::create_dir_all(data_dir.join(crate::api::DATASETS_DIR))
        .with_context(|| format!("creating {}", data_dir.display()))?;
    if let Some(ui) = &a.ui_dir {
        require_dir(ui, "UI directory")?;
    }
    let app = router(AppState::new(&data_dir), a.ui_dir.as_deref());
    let addr: SocketAddr = format!("{}:{}", a.host, a.port)
        .parse()
        .with_context(|| format!("bad listen address {}:{}", a.host, a.port))?;
    let listener = tokio::net::TcpListener::bind(addr)
        .await
        .with_context(|| format!("binding {addr}"))?;
    tracing::info!(%addr, data_dir = %data_dir.display(), "serving");
    axum::serve(listener, app).await?;
    Ok(())
}
