//! `clam` — train, apply, and analyze attractor-dynamics clustering models,
//! with a Lloyd's k-means baseline, metrics reports, a synthetic generator,
//! a hyperparameter grid runner, and a 2-D basin-of-attraction mapper.

mod config;

use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use clam_core::baselines::{lloyd_kmeans, soft_kmeans, SoftAssignConfig};
use clam_core::basins::{compute_basins, write_grid_csv, write_memory_csv, write_ppm, Rect};
use clam_core::data::{load_csv, standardize};
use clam_core::infer::infer;
use clam_core::matrix::Matrix;
use clam_core::metrics::{ari, cluster_sizes, entropy_profile, nmi, silhouette};
use clam_core::model::{Dataset, DynamicsConfig, Metric, PrototypeSet};
use clam_core::model_file::{dataset_hash, ModelFile, Provenance};
use clam_core::synth::gen_elongated;
use clam_core::trainer::{train, FillMode, LossVariant, MaskSpec, TrainConfig};

use config::FileConfig;

#[derive(Parser)]
#[command(name = "clam", version, about = "Clustering with associative-memory attractor dynamics")]
struct Cli {
    /// Worker threads (default: CLAM_THREADS env var, else all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Learn prototypes from a CSV dataset.
    Train(TrainArgs),
    /// Assign cluster labels to a CSV dataset using a saved model.
    Infer(InferArgs),
    /// Score a labeling: silhouette, NMI/ARI vs ground truth, sizes, entropy.
    Eval(EvalArgs),
    /// Rasterize 2-D basins of attraction vs the Voronoi partition.
    BasinMap(BasinMapArgs),
    /// Generate a synthetic dataset.
    Synth(SynthArgs),
    /// Run a hyperparameter grid and emit a results table.
    Grid(GridArgs),
    /// Run a baseline clusterer with the same report format.
    Baseline(BaselineArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum MetricArg {
    Euclidean,
    Spherical,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum FillArg {
    Mean,
    Min,
    Max,
    Zero,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum VariantArg {
    Masked,
    Unmasked,
}

#[derive(Args)]
struct TrainArgs {
    /// TOML file providing defaults for the flags below.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    data: Option<PathBuf>,
    /// Label column (header name or zero-based index); evaluation only.
    #[arg(long)]
    label_column: Option<String>,
    /// Standardize features to zero mean, unit variance before training.
    #[arg(long)]
    standardize: bool,
    #[arg(long)]
    k: Option<usize>,
    /// Inverse temperature β.
    #[arg(long)]
    beta: Option<f64>,
    /// Recursion depth T.
    #[arg(long)]
    steps: Option<usize>,
    /// dt/τ; defaults to 1/steps.
    #[arg(long)]
    step_factor: Option<f64>,
    #[arg(long, value_enum)]
    metric: Option<MetricArg>,
    #[arg(long)]
    lr: Option<f64>,
    #[arg(long)]
    batch: Option<usize>,
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long)]
    restarts: Option<usize>,
    #[arg(long)]
    mask_prob: Option<f64>,
    #[arg(long, value_enum)]
    mask_fill: Option<FillArg>,
    #[arg(long, value_enum)]
    variant: Option<VariantArg>,
    /// Learn per-memory attraction weights jointly.
    #[arg(long)]
    train_weights: bool,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory for model.json, labels.csv, train_log.csv.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct InferArgs {
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    label_column: Option<String>,
    /// Output labels CSV (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    label_column: Option<String>,
    /// Predicted labels CSV (one label per row, optional header).
    #[arg(long)]
    labels: PathBuf,
    /// Model file; enables the entropy histogram and reuses its
    /// standardization.
    #[arg(long)]
    model: Option<PathBuf>,
    /// Standardize features before scoring (ignored when --model carries a
    /// recorded transform).
    #[arg(long)]
    standardize: bool,
    /// Histogram bins for the entropy profile.
    #[arg(long, default_value_t = 20)]
    bins: usize,
    /// Output JSON file (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BasinMapArgs {
    /// Saved model to take memories and dynamics from.
    #[arg(long, conflicts_with = "memories")]
    model: Option<PathBuf>,
    /// Literal 2-D memories, e.g. "0,0;2,1;-1,3".
    #[arg(long)]
    memories: Option<String>,
    #[arg(long)]
    beta: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    /// Grid bounds "min_x,min_y,max_x,max_y" (default: memory bbox + 20%).
    #[arg(long)]
    bounds: Option<String>,
    #[arg(long, default_value_t = 200)]
    width: usize,
    #[arg(long, default_value_t = 200)]
    height: usize,
    /// Prefix for the .ppm, .csv, and _memories.csv outputs.
    #[arg(long)]
    out_prefix: PathBuf,
}

#[derive(Args)]
struct SynthArgs {
    /// Generator kind.
    #[arg(long, default_value = "elongated")]
    kind: String,
    #[arg(long, default_value_t = 100)]
    n_per: usize,
    #[arg(long, default_value_t = 2)]
    clusters: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV (x,y,label).
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct GridArgs {
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    label_column: Option<String>,
    #[arg(long)]
    standardize: bool,
    #[arg(long)]
    k: usize,
    /// Comma-separated β values.
    #[arg(long, value_delimiter = ',', default_value = "1.0")]
    beta: Vec<f64>,
    /// Comma-separated T values.
    #[arg(long, value_delimiter = ',', default_value = "10")]
    steps: Vec<usize>,
    /// Comma-separated learning rates.
    #[arg(long, value_delimiter = ',', default_value = "0.1")]
    lr: Vec<f64>,
    /// Comma-separated mask probabilities.
    #[arg(long, value_delimiter = ',', default_value = "0.15")]
    mask_prob: Vec<f64>,
    #[arg(long, default_value_t = 8)]
    batch: usize,
    #[arg(long, default_value_t = 50)]
    epochs: usize,
    #[arg(long, default_value_t = 3)]
    restarts: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output CSV table (default: stdout).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BaselineArgs {
    /// lloyd or soft.
    #[arg(long, default_value = "lloyd")]
    algo: String,
    #[arg(long)]
    data: PathBuf,
    #[arg(long)]
    label_column: Option<String>,
    #[arg(long)]
    standardize: bool,
    #[arg(long)]
    k: usize,
    /// Independent inits for Lloyd's.
    #[arg(long, default_value_t = 1000)]
    n_init: usize,
    /// Softmax sharpness for the soft relaxation.
    #[arg(long, default_value_t = 1.0)]
    gamma: f64,
    #[arg(long, default_value_t = 200)]
    epochs: usize,
    #[arg(long, default_value_t = 0.01)]
    lr: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

fn main() {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    if let Err(e) = run(cli) {
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cli: Cli) -> Result<()> {
    let threads = cli.threads.or_else(|| {
        std::env::var("CLAM_THREADS")
            .ok()
            .and_then(|v| v.parse().ok())
    });
    if let Some(t) = threads {
        rayon::ThreadPoolBuilder::new()
            .num_threads(t)
            .build_global()
            .context("configuring thread pool")?;
    }
    match cli.command {
        Command::Train(args) => cmd_train(args),
        Command::Infer(args) => cmd_infer(args),
        Command::Eval(args) => cmd_eval(args),
        Command::BasinMap(args) => cmd_basin_map(args),
        Command::Synth(args) => cmd_synth(args),
        Command::Grid(args) => cmd_grid(args),
        Command::Baseline(args) => cmd_baseline(args),
    }
}

fn load_dataset(path: &Path, label_column: Option<&str>, standardized: bool) -> Result<Dataset> {
    let ds = load_csv(path, label_column)
        .with_context(|| format!("loading {}", path.display()))?;
    if standardized {
        Ok(standardize(&ds)?)
    } else {
        Ok(ds)
    }
}

fn write_or_print(out: Option<&Path>, content: &str) -> Result<()> {
    match out {
        Some(path) => {
            std::fs::write(path, content)
                .with_context(|| format!("writing {}", path.display()))?;
        }
        None => print!("{content}"),
    }
    Ok(())
}

fn write_labels_csv(path: &Path, labels: &[usize]) -> Result<()> {
    let mut text = String::from("label\n");
    for l in labels {
        text.push_str(&format!("{l}\n"));
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn read_labels_csv(path: &Path) -> Result<Vec<usize>> {
    let text =
        std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut labels = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || (i == 0 && line.parse::<usize>().is_err()) {
            continue;
        }
        labels.push(
            line.parse::<usize>()
                .with_context(|| format!("bad label '{line}' on line {}", i + 1))?,
        );
    }
    if labels.is_empty() {
        bail!("no labels found in {}", path.display());
    }
    Ok(labels)
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let file = match &args.config {
        Some(path) => FileConfig::load(path)?,
        None => FileConfig::default(),
    };
    let data_path = args
        .data
        .clone()
        .or_else(|| file.data.as_ref().map(PathBuf::from))
        .ok_or_else(|| anyhow!("--data is required (flag or config file)"))?;
    let label_column = args.label_column.clone().or_else(|| file.label_column.clone());
    let standardized = args.standardize || file.standardize.unwrap_or(false);
    let k = args
        .k
        .or(file.k)
        .ok_or_else(|| anyhow!("--k is required (flag or config file)"))?;

    let steps = args.steps.or(file.steps).unwrap_or(10);
    let beta = args.beta.or(file.beta).unwrap_or(1.0);
    let metric = match args.metric {
        Some(MetricArg::Euclidean) => Metric::Euclidean,
        Some(MetricArg::Spherical) => Metric::Spherical,
        None => match file.metric.as_deref() {
            Some("spherical") => Metric::Spherical,
            Some("euclidean") | None => Metric::Euclidean,
            Some(other) => bail!("unknown metric '{other}'"),
        },
    };
    let step_factor = args
        .step_factor
        .or(file.step_factor)
        .unwrap_or(1.0 / steps as f64);
    let dyn_cfg = DynamicsConfig::with_step_factor(beta, steps, step_factor, metric)?;

    let defaults = TrainConfig::default();
    let variant = match args.variant {
        Some(VariantArg::Masked) => LossVariant::Masked,
        Some(VariantArg::Unmasked) => LossVariant::Unmasked,
        None => match file.variant.as_deref() {
            Some("unmasked") => LossVariant::Unmasked,
            Some("masked") | None => LossVariant::Masked,
            Some(other) => bail!("unknown variant '{other}'"),
        },
    };
    let train_cfg = TrainConfig {
        batch_size: args.batch.or(file.batch).unwrap_or(defaults.batch_size),
        max_epochs: args.epochs.or(file.epochs).unwrap_or(defaults.max_epochs),
        restarts: args.restarts.or(file.restarts).unwrap_or(defaults.restarts),
        initial_lr: args.lr.or(file.lr).unwrap_or(defaults.initial_lr),
        lr_reduce_factor: file.lr_reduce_factor.unwrap_or(defaults.lr_reduce_factor),
        lr_patience_epochs: file.lr_patience.unwrap_or(defaults.lr_patience_epochs),
        min_lr: file.min_lr.unwrap_or(defaults.min_lr),
        lr_loss_threshold: file.lr_threshold.unwrap_or(defaults.lr_loss_threshold),
        variant,
        train_weights: args.train_weights || file.train_weights.unwrap_or(false),
        seed: args.seed.or(file.seed).unwrap_or(0),
    };
    let mask_spec = MaskSpec {
        probability: args.mask_prob.or(file.mask_prob).unwrap_or(0.15),
        fill_mode: match args.mask_fill {
            Some(FillArg::Mean) => FillMode::Mean,
            Some(FillArg::Min) => FillMode::Min,
            Some(FillArg::Max) => FillMode::Max,
            Some(FillArg::Zero) => FillMode::Zero,
            None => match file.mask_fill.as_deref() {
                Some("min") => FillMode::Min,
                Some("max") => FillMode::Max,
                Some("zero") => FillMode::Zero,
                Some("mean") | None => FillMode::Mean,
                Some(other) => bail!("unknown mask fill '{other}'"),
            },
        },
    };
    let out_dir = args
        .out
        .clone()
        .or_else(|| file.out.as_ref().map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("clam_run"));

    let data = load_dataset(&data_path, label_column.as_deref(), standardized)?;
    let report = train(&data, k, &dyn_cfg, &mask_spec, &train_cfg)?;

    std::fs::create_dir_all(&out_dir)
        .with_context(|| format!("creating {}", out_dir.display()))?;

    let provenance = Provenance {
        dataset_sha256: Some(dataset_hash(&data)),
        seed: Some(train_cfg.seed),
        train: Some(train_cfg.clone()),
        mask: Some(mask_spec),
        standardized,
        standardization: data.standardization.clone(),
    };
    let model = ModelFile::new(&report.best_protos, dyn_cfg, provenance);
    model.save(out_dir.join("model.json"))?;

    let mut log = String::from("restart,epoch,loss,lr\n");
    for (r, curve) in report.restarts.iter().enumerate() {
        for rec in &curve.records {
            log.push_str(&format!("{r},{},{},{}\n", rec.epoch, rec.loss, rec.lr));
        }
    }
    std::fs::write(out_dir.join("train_log.csv"), log)?;

    let assignment = infer(&data, &report.best_protos, &dyn_cfg)?;
    write_labels_csv(&out_dir.join("labels.csv"), &assignment.labels)?;

    println!(
        "trained k={k} on {} points: restart {} of {} selected, final loss {:.6}",
        data.len(),
        report.chosen_restart,
        train_cfg.restarts,
        report.final_loss
    );
    println!("wrote {}", out_dir.join("model.json").display());
    Ok(())
}

/// Applies the standardization recorded in a model to fresh data.
fn apply_model_standardization(model: &ModelFile, data: &Dataset) -> Result<Dataset> {
    match &model.provenance.standardization {
        None => Ok(data.clone()),
        Some(tr) => {
            if tr.mean.len() != data.dim() {
                bail!(
                    "model standardization is {}-dimensional, data is {}-dimensional",
                    tr.mean.len(),
                    data.dim()
                );
            }
            let mut pts = data.points.clone();
            for i in 0..data.len() {
                let row = pts.row_mut(i);
                for (j, v) in row.iter_mut().enumerate() {
                    *v = (*v - tr.mean[j]) / tr.std[j];
                }
            }
            Ok(Dataset::new(pts, data.labels.clone())?)
        }
    }
}

fn cmd_infer(args: InferArgs) -> Result<()> {
    let model = ModelFile::load(&args.model)
        .with_context(|| format!("loading model {}", args.model.display()))?;
    let protos = model.prototype_set()?;
    let raw = load_dataset(&args.data, args.label_column.as_deref(), false)?;
    let data = apply_model_standardization(&model, &raw)?;
    let assignment = infer(&data, &protos, &model.dynamics)?;
    match &args.out {
        Some(path) => write_labels_csv(path, &assignment.labels)?,
        None => {
            println!("label");
            for l in &assignment.labels {
                println!("{l}");
            }
        }
    }
    Ok(())
}

fn metrics_report(
    data: &Dataset,
    predicted: &[usize],
    model: Option<&ModelFile>,
    bins: usize,
) -> Result<serde_json::Value> {
    if predicted.len() != data.len() {
        bail!(
            "{} predicted labels for {} points",
            predicted.len(),
            data.len()
        );
    }
    let k = predicted.iter().max().map(|m| m + 1).unwrap_or(0);
    let sizes = cluster_sizes(predicted, k);
    if sizes.iter().filter(|&&s| s > 0).count() == data.len() && data.len() > 1 {
        bail!("silhouette undefined: every cluster is a singleton (k = n)");
    }
    let sc = silhouette(&data.points, predicted)?;
    let mut report = serde_json::Map::new();
    report.insert("sc".into(), serde_json::json!(sc));
    report.insert("cluster_sizes".into(), serde_json::json!(sizes));
    if let Some(truth) = &data.labels {
        report.insert("nmi".into(), serde_json::json!(nmi(truth, predicted)?));
        report.insert("ari".into(), serde_json::json!(ari(truth, predicted)?));
    }
    if let Some(model) = model {
        let protos = model.prototype_set()?;
        let prof = entropy_profile(&data.points, &protos, model.dynamics.beta, bins)?;
        let mean_h = prof.entropies.iter().sum::<f64>() / prof.entropies.len() as f64;
        report.insert("entropy_mean".into(), serde_json::json!(mean_h));
        report.insert("entropy_bin_edges".into(), serde_json::json!(prof.bin_edges));
        report.insert("entropy_counts".into(), serde_json::json!(prof.counts));
    }
    Ok(serde_json::Value::Object(report))
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let model = match &args.model {
        Some(path) => {
            Some(ModelFile::load(path).with_context(|| format!("loading {}", path.display()))?)
        }
        None => None,
    };
    let raw = load_dataset(&args.data, args.label_column.as_deref(), false)?;
    let data = match &model {
        Some(m) if m.provenance.standardization.is_some() => {
            apply_model_standardization(m, &raw)?
        }
        _ if args.standardize => standardize(&raw)?,
        _ => raw,
    };
    let predicted = read_labels_csv(&args.labels)?;
    let report = metrics_report(&data, &predicted, model.as_ref(), args.bins)?;
    let text = serde_json::to_string_pretty(&report)? + "\n";
    write_or_print(args.out.as_deref(), &text)
}

fn parse_memories(text: &str) -> Result<Matrix> {
    let mut rows = Vec::new();
    for part in text.split(';') {
        let coords: Vec<f64> = part
            .split(',')
            .map(|v| v.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .with_context(|| format!("bad memory '{part}'"))?;
        if coords.len() != 2 {
            bail!("memory '{part}' is not 2-D");
        }
        rows.push(coords);
    }
    Ok(Matrix::from_rows(&rows)?)
}

fn cmd_basin_map(args: BasinMapArgs) -> Result<()> {
    let (protos, mut dyn_cfg) = match (&args.model, &args.memories) {
        (Some(path), None) => {
            let model = ModelFile::load(path)?;
            (model.prototype_set()?, model.dynamics)
        }
        (None, Some(text)) => {
            let protos = PrototypeSet::new(parse_memories(text)?)?;
            (protos, DynamicsConfig::new(1.0, 10)?)
        }
        _ => bail!("provide exactly one of --model or --memories"),
    };
    if let Some(beta) = args.beta {
        dyn_cfg = DynamicsConfig::with_step_factor(
            beta,
            dyn_cfg.steps,
            dyn_cfg.step_factor,
            dyn_cfg.metric,
        )?;
    }
    if let Some(steps) = args.steps {
        dyn_cfg = DynamicsConfig::with_step_factor(
            dyn_cfg.beta,
            steps,
            1.0 / steps as f64,
            dyn_cfg.metric,
        )?;
    }
    let bounds = match &args.bounds {
        None => None,
        Some(text) => {
            let v: Vec<f64> = text
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<_, _>>()
                .context("parsing --bounds")?;
            if v.len() != 4 {
                bail!("--bounds needs min_x,min_y,max_x,max_y");
            }
            Some(Rect {
                min_x: v[0],
                min_y: v[1],
                max_x: v[2],
                max_y: v[3],
            })
        }
    };
    let grid = compute_basins(&protos, &dyn_cfg, bounds, args.width, args.height)?;
    let prefix = &args.out_prefix;
    let ppm = prefix.with_extension("ppm");
    let csv = prefix.with_extension("csv");
    let mem = PathBuf::from(format!("{}_memories.csv", prefix.display()));
    write_ppm(&grid, &ppm)?;
    write_grid_csv(&grid, &csv)?;
    write_memory_csv(&protos, &mem)?;
    println!(
        "basin/Voronoi agreement: {:.4} ({}x{} grid, beta={}, T={})",
        grid.agreement, args.width, args.height, dyn_cfg.beta, dyn_cfg.steps
    );
    println!("wrote {} {} {}", ppm.display(), csv.display(), mem.display());
    Ok(())
}

fn cmd_synth(args: SynthArgs) -> Result<()> {
    if args.kind != "elongated" {
        bail!("unknown generator '{}'", args.kind);
    }
    let ds = gen_elongated(args.n_per, args.clusters, args.seed)?;
    let labels = ds.labels.as_ref().expect("generator attaches labels");
    let mut text = String::from("x,y,label\n");
    for (p, label) in ds.points.iter_rows().zip(labels) {
        text.push_str(&format!("{},{},{}\n", p[0], p[1], label));
    }
    std::fs::write(&args.out, text)
        .with_context(|| format!("writing {}", args.out.display()))?;
    println!(
        "wrote {} ({} points, {} clusters, seed {})",
        args.out.display(),
        ds.len(),
        args.clusters,
        args.seed
    );
    Ok(())
}

fn cmd_grid(args: GridArgs) -> Result<()> {
    let data = load_dataset(&args.data, args.label_column.as_deref(), args.standardize)?;
    let mut table = String::from("beta,steps,lr,mask_prob,final_loss,sc,nmi\n");
    for &beta in &args.beta {
        for &steps in &args.steps {
            for &lr in &args.lr {
                for &mask_prob in &args.mask_prob {
                    let dyn_cfg = DynamicsConfig::new(beta, steps)?;
                    let cfg = TrainConfig {
                        batch_size: args.batch,
                        max_epochs: args.epochs,
                        restarts: args.restarts,
                        initial_lr: lr,
                        seed: args.seed,
                        ..TrainConfig::default()
                    };
                    let mask = MaskSpec {
                        probability: mask_prob,
                        fill_mode: FillMode::Mean,
                    };
                    let report = train(&data, args.k, &dyn_cfg, &mask, &cfg)?;
                    let assignment = infer(&data, &report.best_protos, &dyn_cfg)?;
                    let sc = silhouette(&data.points, &assignment.labels)
                        .map(|v| format!("{v:.6}"))
                        .unwrap_or_else(|_| "nan".into());
                    let nmi_s = match &data.labels {
                        Some(truth) => format!("{:.6}", nmi(truth, &assignment.labels)?),
                        None => String::new(),
                    };
                    table.push_str(&format!(
                        "{beta},{steps},{lr},{mask_prob},{:.6},{sc},{nmi_s}\n",
                        report.final_loss
                    ));
                }
            }
        }
    }
    write_or_print(args.out.as_deref(), &table)
}

fn cmd_baseline(args: BaselineArgs) -> Result<()> {
    let data = load_dataset(&args.data, args.label_column.as_deref(), args.standardize)?;
    let (labels, extra): (Vec<usize>, serde_json::Value) = match args.algo.as_str() {
        "lloyd" => {
            let model = lloyd_kmeans(&data.points, args.k, args.n_init, args.seed)?;
            let labels = model.assign(&data.points);
            (
                labels,
                serde_json::json!({"inertia": model.inertia, "n_init": model.n_init}),
            )
        }
        "soft" => {
            let cfg = SoftAssignConfig {
                gamma: args.gamma,
                epochs: args.epochs,
                lr: args.lr,
            };
            let (protos, objective) = soft_kmeans(&data.points, args.k, &cfg, args.seed)?;
            let labels: Vec<usize> = data
                .points
                .iter_rows()
                .map(|x| clam_core::infer::nearest_memory(x, &protos).0)
                .collect();
            (labels, serde_json::json!({"objective": objective}))
        }
        other => bail!("unknown baseline '{other}' (expected lloyd or soft)"),
    };
    let mut report = metrics_report(&data, &labels, None, 20)?;
    if let (serde_json::Value::Object(obj), serde_json::Value::Object(extra)) =
        (&mut report, extra)
    {
        obj.extend(extra);
    }
    let text = serde_json::to_string_pretty(&report)? + "\n";
    write_or_print(args.out.as_deref(), &text)
}
