//! Command-line jobs.
//!
//! Every subcommand resolves to a [`JobConfig`], which is written to
//! `config.json` in the output directory and can be replayed with
//! `rvflx run --config`. Its SHA-256 is stamped into every artifact.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::activations::ActivationKind;
use crate::data::{
    discover_datasets, load_path, load_unlabeled_csv, stratified_kfold, CsvOptions, Dataset, LabelColumn, ZScoreParams,
    MANIFEST_FILE,
};
use crate::error::{Error, Result};
use crate::experiment::{
    run_ablation, run_grid, run_sensitivity_alpha, write_results_csv, write_results_json, write_timings, Grid,
    ResultsFile, ResultsMetadata, RunFailure, RunResult, RESULTS_SCHEMA_VERSION,
};
use crate::matrix::{RealMatrix, Rng, TransposeKind};
use crate::models::{predict, train_with, FittedModel, HyperParams, ModelKind, TrainOptions, STREAM_TRANSFORM};
use crate::stats::{compare, AccuracyTable};
use crate::transforms::{fit_apply_autoencoder, fit_natural, Varpi};

pub const CONFIG_SCHEMA_VERSION: u32 = 1;
pub const MODEL_FILE_SCHEMA_VERSION: u32 = 1;

impl Error {
    /// 2 for configuration and argument errors, 1 otherwise.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::Config(_) | Error::Argument(_) => 2,
            _ => 1,
        }
    }
}

#[derive(Parser, Debug)]
#[command(name = "rvflx", version, about = "Random vector functional link networks with complex hidden layers")]
pub struct Cli {
    /// Worker threads for grid evaluation (0 = all cores). Results do not
    /// depend on it.
    #[arg(long, global = true, env = "RVFLX_JOBS", default_value_t = 1)]
    pub jobs: usize,
    /// Base seed for folds and random weights.
    #[arg(long, global = true, env = "RVFLX_SEED", default_value_t = 0)]
    pub seed: u64,
    /// Repeat for more log output.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    pub verbose: u8,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Args, Debug, Clone)]
pub struct OutArgs {
    /// Output directory.
    #[arg(long, env = "RVFLX_OUT")]
    pub out: PathBuf,
    /// Write into an existing, non-empty output directory.
    #[arg(long, env = "RVFLX_FORCE")]
    pub force: bool,
}

#[derive(Args, Debug, Clone)]
pub struct CsvArgs {
    #[arg(long, default_value_t = ',')]
    pub delimiter: char,
    /// first, last or a zero-based column index.
    #[arg(long, default_value = "last")]
    pub label_column: LabelColumn,
    /// The file has no header row.
    #[arg(long)]
    pub no_header: bool,
}

#[derive(Args, Debug, Clone)]
pub struct HyperArgs {
    #[arg(long, default_value_t = 1.0)]
    pub c: f64,
    #[arg(long, default_value_t = 103)]
    pub n_hidden: usize,
    #[arg(long, default_value = "relu")]
    pub activation: ActivationKind,
    #[arg(long, default_value_t = 0.0)]
    pub alpha: f64,
    #[arg(long, default_value_t = 1)]
    pub varpi: u8,
    /// Drop the direct input-to-output link (complex kinds).
    #[arg(long)]
    pub no_direct_link: bool,
}

#[derive(Args, Debug, Clone)]
pub struct SolveArgs {
    /// Use the plain transpose instead of the conjugate transpose in the
    /// complex output solve.
    #[arg(long)]
    pub literal_transpose: bool,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum ConvertMethod {
    Natural,
    Auto,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Convert a real dataset to complex form.
    Convert {
        #[arg(long)]
        input: PathBuf,
        #[arg(long, value_enum, default_value = "natural")]
        method: ConvertMethod,
        #[arg(long, default_value_t = 1.0)]
        c: f64,
        #[arg(long, default_value_t = 1)]
        varpi: u8,
        #[command(flatten)]
        csv: CsvArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Train one model on a whole dataset and save it.
    Train {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        model: ModelKind,
        #[command(flatten)]
        hyper: HyperArgs,
        #[command(flatten)]
        solve: SolveArgs,
        #[command(flatten)]
        csv: CsvArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Score a dataset with a saved model.
    Predict {
        /// model.json written by `train`.
        #[arg(long)]
        model: PathBuf,
        #[arg(long)]
        data: PathBuf,
        /// Every column is a feature.
        #[arg(long)]
        unlabeled: bool,
        #[command(flatten)]
        csv: CsvArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Grid search with k-fold CV over datasets and models.
    Benchmark {
        /// Dataset directories, CSV files, or directories of dataset
        /// directories.
        #[arg(long, required = true, num_args = 1..)]
        data: Vec<PathBuf>,
        #[arg(long, value_delimiter = ',')]
        models: Option<Vec<ModelKind>>,
        /// JSON file overriding grid axes.
        #[arg(long)]
        grid: Option<PathBuf>,
        #[command(flatten)]
        solve: SolveArgs,
        #[command(flatten)]
        csv: CsvArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Cross-validated accuracy as a function of alpha.
    Sensitivity {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        model: ModelKind,
        #[command(flatten)]
        hyper: HyperArgs,
        #[arg(long, value_delimiter = ',')]
        alpha_values: Option<Vec<f64>>,
        /// Pick the other hyperparameters by grid search first.
        #[arg(long)]
        tune: bool,
        #[arg(long)]
        grid: Option<PathBuf>,
        #[command(flatten)]
        solve: SolveArgs,
        #[command(flatten)]
        csv: CsvArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Full model against its alpha=0 and no-direct-link variants.
    Ablate {
        #[arg(long)]
        data: PathBuf,
        #[arg(long)]
        model: ModelKind,
        #[command(flatten)]
        hyper: HyperArgs,
        #[arg(long)]
        tune: bool,
        #[arg(long)]
        grid: Option<PathBuf>,
        #[command(flatten)]
        solve: SolveArgs,
        #[command(flatten)]
        csv: CsvArgs,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Friedman and Nemenyi tests over a results table.
    Stats {
        /// results.csv from `benchmark`, or a wide dataset x model table.
        #[arg(long)]
        results: PathBuf,
        #[arg(long, default_value_t = 0.05)]
        alpha_level: f64,
        #[command(flatten)]
        out: OutArgs,
    },
    /// Replay a saved config.json.
    Run {
        #[arg(long)]
        config: PathBuf,
        #[command(flatten)]
        out: OutArgs,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvSettings {
    pub delimiter: char,
    pub label_column: LabelColumn,
    pub header: bool,
}

impl From<&CsvArgs> for CsvSettings {
    fn from(a: &CsvArgs) -> Self {
        Self {
            delimiter: a.delimiter,
            label_column: a.label_column,
            header: !a.no_header,
        }
    }
}

impl CsvSettings {
    fn options(&self) -> Result<CsvOptions> {
        if !self.delimiter.is_ascii() {
            return Err(Error::Config(format!("delimiter '{}' must be ASCII", self.delimiter)));
        }
        Ok(CsvOptions {
            delimiter: self.delimiter as u8,
            label_column: self.label_column,
            header: self.header,
        })
    }
}

/// A fully resolved job.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JobConfig {
    pub schema_version: u32,
    pub seed: u64,
    #[serde(flatten)]
    pub job: Job,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "snake_case")]
pub enum Job {
    Convert {
        input: PathBuf,
        csv: CsvSettings,
        method: ConvertMethod,
        c: f64,
        varpi: Varpi,
    },
    Train {
        data: PathBuf,
        csv: CsvSettings,
        model: ModelKind,
        hyperparams: HyperParams,
        transpose: TransposeKind,
    },
    Predict {
        model_file: PathBuf,
        data: PathBuf,
        csv: CsvSettings,
        unlabeled: bool,
    },
    Benchmark {
        datasets: Vec<PathBuf>,
        csv: CsvSettings,
        grid: Grid,
    },
    Sensitivity {
        data: PathBuf,
        csv: CsvSettings,
        model: ModelKind,
        hyperparams: HyperParams,
        alpha_values: Vec<f64>,
        tune: Option<Grid>,
        transpose: TransposeKind,
    },
    Ablate {
        data: PathBuf,
        csv: CsvSettings,
        model: ModelKind,
        hyperparams: HyperParams,
        tune: Option<Grid>,
        transpose: TransposeKind,
    },
    Stats {
        results: PathBuf,
        alpha_level: f64,
    },
}

impl JobConfig {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let c: JobConfig = serde_json::from_str(s).map_err(|e| Error::Config(format!("config file: {e}")))?;
        if c.schema_version != CONFIG_SCHEMA_VERSION {
            return Err(Error::Config(format!("unsupported config schema version {}", c.schema_version)));
        }
        Ok(c)
    }

    /// Hex SHA-256 of the compact JSON form.
    pub fn hash(&self) -> Result<String> {
        Ok(hex::encode(Sha256::digest(serde_json::to_vec(self)?)))
    }

    pub fn command_name(&self) -> &'static str {
        match self.job {
            Job::Convert { .. } => "convert",
            Job::Train { .. } => "train",
            Job::Predict { .. } => "predict",
            Job::Benchmark { .. } => "benchmark",
            Job::Sensitivity { .. } => "sensitivity",
            Job::Ablate { .. } => "ablate",
            Job::Stats { .. } => "stats",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Outcome {
    Success,
    /// Some datasets or models failed; whatever finished was written.
    Partial,
}

impl Outcome {
    pub fn exit_code(self) -> u8 {
        match self {
            Outcome::Success => 0,
            Outcome::Partial => 1,
        }
    }
}

/// Model file written by `train`: the z-score fitted on the training data
/// plus the model itself.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelFile {
    pub schema_version: u32,
    pub dataset: String,
    pub config_hash: String,
    pub zscore: ZScoreParams,
    pub model: FittedModel,
}

fn transpose_of(s: &SolveArgs) -> TransposeKind {
    if s.literal_transpose {
        TransposeKind::Literal
    } else {
        TransposeKind::Hermitian
    }
}

fn hyperparams_of(h: &HyperArgs, seed: u64) -> Result<HyperParams> {
    let hp = HyperParams {
        c: h.c,
        n_hidden: h.n_hidden,
        activation: h.activation,
        alpha: h.alpha,
        varpi: Varpi::new(h.varpi)?,
        direct_link: !h.no_direct_link,
        seed,
    };
    hp.validate()?;
    Ok(hp)
}

/// Grid from an optional file; `seeds` falls back to `[seed]` when the file
/// does not set it.
fn load_grid(path: Option<&Path>, seed: u64) -> Result<Grid> {
    let Some(path) = path else {
        return Ok(Grid { seeds: vec![seed], ..Grid::default() });
    };
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let raw: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))?;
    let mut grid = Grid::from_json(&text)?;
    if raw.get("seeds").is_none() {
        grid.seeds = vec![seed];
    }
    Ok(grid)
}

/// Turns parsed arguments into a job and its output settings.
pub fn resolve(cli: &Cli) -> Result<(JobConfig, OutArgs)> {
    let seed = cli.seed;
    let (job, out) = match &cli.command {
        Command::Convert { input, method, c, varpi, csv, out } => (
            Job::Convert {
                input: input.clone(),
                csv: csv.into(),
                method: *method,
                c: *c,
                varpi: Varpi::new(*varpi)?,
            },
            out,
        ),
        Command::Train { data, model, hyper, solve, csv, out } => (
            Job::Train {
                data: data.clone(),
                csv: csv.into(),
                model: *model,
                hyperparams: hyperparams_of(hyper, seed)?,
                transpose: transpose_of(solve),
            },
            out,
        ),
        Command::Predict { model, data, unlabeled, csv, out } => (
            Job::Predict {
                model_file: model.clone(),
                data: data.clone(),
                csv: csv.into(),
                unlabeled: *unlabeled,
            },
            out,
        ),
        Command::Benchmark { data, models, grid, solve, csv, out } => {
            let mut g = load_grid(grid.as_deref(), seed)?;
            if let Some(m) = models {
                if m.is_empty() {
                    return Err(Error::Config("--models is empty".into()));
                }
                g.models = m.clone();
            }
            if solve.literal_transpose {
                g.transpose = TransposeKind::Literal;
            }
            (
                Job::Benchmark {
                    datasets: data.clone(),
                    csv: csv.into(),
                    grid: g,
                },
                out,
            )
        }
        Command::Sensitivity { data, model, hyper, alpha_values, tune, grid, solve, csv, out } => (
            Job::Sensitivity {
                data: data.clone(),
                csv: csv.into(),
                model: *model,
                hyperparams: hyperparams_of(hyper, seed)?,
                alpha_values: alpha_values.clone().unwrap_or_else(|| Grid::default().alpha_values),
                tune: if *tune { Some(load_grid(grid.as_deref(), seed)?) } else { None },
                transpose: transpose_of(solve),
            },
            out,
        ),
        Command::Ablate { data, model, hyper, tune, grid, solve, csv, out } => (
            Job::Ablate {
                data: data.clone(),
                csv: csv.into(),
                model: *model,
                hyperparams: hyperparams_of(hyper, seed)?,
                tune: if *tune { Some(load_grid(grid.as_deref(), seed)?) } else { None },
                transpose: transpose_of(solve),
            },
            out,
        ),
        Command::Stats { results, alpha_level, out } => (
            Job::Stats {
                results: results.clone(),
                alpha_level: *alpha_level,
            },
            out,
        ),
        Command::Run { config, out } => {
            let text = fs::read_to_string(config).map_err(|e| Error::Config(format!("{}: {e}", config.display())))?;
            return Ok((JobConfig::from_json(&text)?, out.clone()));
        }
    };
    Ok((
        JobConfig {
            schema_version: CONFIG_SCHEMA_VERSION,
            seed,
            job,
        },
        out.clone(),
    ))
}

/// Creates `out`, refusing a non-empty existing directory unless `force`.
pub fn prepare_out_dir(out: &Path, force: bool) -> Result<()> {
    if out.exists() {
        if !out.is_dir() {
            return Err(Error::Config(format!("{} exists and is not a directory", out.display())));
        }
        if !force && fs::read_dir(out)?.next().is_some() {
            return Err(Error::Config(format!(
                "output directory {} is not empty; pass --force to overwrite",
                out.display()
            )));
        }
    }
    fs::create_dir_all(out)?;
    Ok(())
}

pub fn run(cli: &Cli) -> Result<Outcome> {
    let (config, out) = resolve(cli)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .map_err(|e| Error::Config(format!("thread pool: {e}")))?;
    pool.install(|| execute(&config, &out.out, out.force))
}

/// Runs a job and writes its artifacts under `out`.
pub fn execute(config: &JobConfig, out: &Path, force: bool) -> Result<Outcome> {
    prepare_out_dir(out, force)?;
    let hash = config.hash()?;
    fs::write(out.join("config.json"), config.to_json()? + "\n")?;
    log::info!("{} job, config hash {hash}", config.command_name());
    let seed = config.seed;
    match &config.job {
        Job::Convert { input, csv, method, c, varpi } => convert(input, csv, *method, *c, *varpi, seed, out),
        Job::Train { data, csv, model, hyperparams, transpose } => {
            train_job(data, csv, *model, hyperparams, *transpose, &hash, out)
        }
        Job::Predict { model_file, data, csv, unlabeled } => predict_job(model_file, data, csv, *unlabeled, out),
        Job::Benchmark { datasets, csv, grid } => benchmark(datasets, csv, grid, seed, &hash, out),
        Job::Sensitivity { data, csv, model, hyperparams, alpha_values, tune, transpose } => {
            let (ds, hp, plan) = tuned_setup(data, csv, *model, hyperparams, tune.as_ref(), seed)?;
            let curve = run_sensitivity_alpha(&ds, *model, &hp, alpha_values, &plan, *transpose)?;
            let mut text = String::from("alpha,mean_accuracy,std_dev,fold_accuracies\n");
            for p in &curve {
                let _ = writeln!(text, "{},{},{},{}", p.alpha, p.mean_accuracy, p.std_dev, join(&p.fold_accuracies));
            }
            fs::write(out.join("sensitivity.csv"), text)?;
            let payload = serde_json::json!({
                "schema_version": RESULTS_SCHEMA_VERSION,
                "config_hash": hash,
                "dataset": ds.name,
                "model": model,
                "hyperparams": hp,
                "curve": curve,
            });
            fs::write(out.join("sensitivity.json"), serde_json::to_string_pretty(&payload)? + "\n")?;
            for p in &curve {
                println!("alpha {:<4} accuracy {:.4} (sd {:.4})", p.alpha, p.mean_accuracy, p.std_dev);
            }
            Ok(Outcome::Success)
        }
        Job::Ablate { data, csv, model, hyperparams, tune, transpose } => {
            let (ds, hp, plan) = tuned_setup(data, csv, *model, hyperparams, tune.as_ref(), seed)?;
            let rows = run_ablation(&ds, *model, &hp, &plan, *transpose)?;
            let mut text = String::from("variant,alpha,direct_link,mean_accuracy,std_dev,eta_rows,fold_accuracies\n");
            for r in &rows {
                let _ = writeln!(
                    text,
                    "{},{},{},{},{},{},{}",
                    r.variant.name(),
                    r.hyperparams.alpha,
                    r.hyperparams.direct_link,
                    r.mean_accuracy,
                    r.std_dev,
                    r.eta_rows,
                    join(&r.fold_accuracies)
                );
                println!("{:<12} accuracy {:.4} (sd {:.4})", r.variant.name(), r.mean_accuracy, r.std_dev);
            }
            fs::write(out.join("ablation.csv"), text)?;
            let payload = serde_json::json!({
                "schema_version": RESULTS_SCHEMA_VERSION,
                "config_hash": hash,
                "dataset": ds.name,
                "model": model,
                "rows": rows,
            });
            fs::write(out.join("ablation.json"), serde_json::to_string_pretty(&payload)? + "\n")?;
            Ok(Outcome::Success)
        }
        Job::Stats { results, alpha_level } => {
            let table = AccuracyTable::from_csv(results)?;
            let report = compare(&table, *alpha_level)?;
            let text = report.render_text();
            print!("{text}");
            fs::write(out.join("report.txt"), &text)?;
            let payload = serde_json::json!({ "config_hash": hash, "report": report });
            fs::write(out.join("report.json"), serde_json::to_string_pretty(&payload)? + "\n")?;
            Ok(Outcome::Success)
        }
    }
}

fn join(xs: &[f64]) -> String {
    xs.iter().map(f64::to_string).collect::<Vec<_>>().join(";")
}

fn tuned_setup(
    data: &Path,
    csv: &CsvSettings,
    model: ModelKind,
    hp: &HyperParams,
    tune: Option<&Grid>,
    seed: u64,
) -> Result<(Dataset, HyperParams, crate::data::FoldPlan)> {
    let ds = load_path(data, &csv.options()?)?;
    let n_folds = tune.map_or(5, |g| g.n_folds);
    let plan = stratified_kfold(&ds, n_folds, seed)?;
    let hp = match tune {
        Some(grid) => {
            let res = run_grid(&ds, model, grid, &plan)?;
            log::info!("tuned {model} on {}: {:?} at {:.4}%", ds.name, res.best, res.mean_accuracy);
            res.best
        }
        None => *hp,
    };
    Ok((ds, hp, plan))
}

fn convert(
    input: &Path,
    csv: &CsvSettings,
    method: ConvertMethod,
    c: f64,
    varpi: Varpi,
    seed: u64,
    out: &Path,
) -> Result<Outcome> {
    let ds = load_path(input, &csv.options()?)?;
    let z = &ds.features;
    let (transform, zx) = match method {
        ConvertMethod::Natural => (fit_natural(z), crate::matrix::ComplexMatrix::from_real(z)),
        ConvertMethod::Auto => {
            let mut rng = Rng::with_stream(seed, STREAM_TRANSFORM);
            fit_apply_autoencoder(z, c, varpi, &mut rng)?
        }
    };
    let r = z.cols();
    let mut w = csv::Writer::from_path(out.join("complex.csv"))?;
    let mut header: Vec<String> = (0..r).map(|j| format!("re_{j}")).collect();
    header.extend((0..r).map(|j| format!("im_{j}")));
    header.push("label".into());
    w.write_record(&header)?;
    for i in 0..zx.rows() {
        let row = zx.row(i);
        let mut rec: Vec<String> = row.iter().map(|v| v.re.to_string()).collect();
        rec.extend(row.iter().map(|v| v.im.to_string()));
        rec.push(ds.class_names[ds.labels[i]].clone());
        w.write_record(&rec)?;
    }
    w.flush()?;
    fs::write(out.join("transform.json"), serde_json::to_string_pretty(&transform)? + "\n")?;
    log::info!("converted {} rows of {}", zx.rows(), ds.name);
    Ok(Outcome::Success)
}

fn train_job(
    data: &Path,
    csv: &CsvSettings,
    kind: ModelKind,
    hp: &HyperParams,
    transpose: TransposeKind,
    hash: &str,
    out: &Path,
) -> Result<Outcome> {
    let ds = load_path(data, &csv.options()?)?;
    let zscore = ZScoreParams::fit(&ds.features);
    let z = zscore.apply(&ds.features)?;
    let model =
        train_with(kind, hp, &z, &ds.targets_onehot, &TrainOptions { transpose })?.with_class_labels(ds.class_names.clone())?;
    let pred = predict(&model, &z)?;
    let hits = pred.labels.iter().zip(&ds.labels).filter(|(a, b)| a == b).count();
    println!(
        "trained {kind} on {} ({} rows), training accuracy {:.4}%",
        ds.name,
        ds.n_samples(),
        100.0 * hits as f64 / ds.n_samples() as f64
    );
    let file = ModelFile {
        schema_version: MODEL_FILE_SCHEMA_VERSION,
        dataset: ds.name,
        config_hash: hash.to_string(),
        zscore,
        model,
    };
    fs::write(out.join("model.json"), serde_json::to_string(&file)? + "\n")?;
    Ok(Outcome::Success)
}

pub fn load_model_file(path: &Path) -> Result<ModelFile> {
    let text = fs::read_to_string(path)?;
    let file: ModelFile = serde_json::from_str(&text)?;
    if file.schema_version != MODEL_FILE_SCHEMA_VERSION {
        return Err(Error::Data(format!("unsupported model file schema {}", file.schema_version)));
    }
    // re-validate the embedded model
    let model = FittedModel::from_json(&serde_json::to_string(&file.model)?)?;
    Ok(ModelFile { model, ..file })
}

fn predict_job(model_file: &Path, data: &Path, csv: &CsvSettings, unlabeled: bool, out: &Path) -> Result<Outcome> {
    let file = load_model_file(model_file)?;
    let (features, truth): (RealMatrix, Option<Vec<String>>) = if unlabeled {
        let opts = csv.options()?;
        (load_unlabeled_csv(data, opts.delimiter, opts.header)?, None)
    } else {
        let ds = load_path(data, &csv.options()?)?;
        let names = ds.labels.iter().map(|&l| ds.class_names[l].clone()).collect();
        (ds.features, Some(names))
    };
    let z = file.zscore.apply(&features)?;
    let pred = predict(&file.model, &z)?;
    let labels = &file.model.class_labels;
    let mut w = csv::Writer::from_path(out.join("predictions.csv"))?;
    let mut header = vec!["row".to_string(), "predicted".to_string()];
    header.extend(labels.iter().map(|l| format!("score_{l}")));
    w.write_record(&header)?;
    for (i, &p) in pred.labels.iter().enumerate() {
        let mut rec = vec![i.to_string(), labels[p].clone()];
        rec.extend(pred.scores.row(i).iter().map(f64::to_string));
        w.write_record(&rec)?;
    }
    w.flush()?;
    let accuracy = truth.map(|t| {
        let hits = pred.labels.iter().zip(&t).filter(|(&p, name)| &labels[p] == *name).count();
        100.0 * hits as f64 / t.len() as f64
    });
    if let Some(a) = accuracy {
        println!("accuracy {a:.4}% on {} rows", pred.labels.len());
    }
    let summary = serde_json::json!({ "rows": pred.labels.len(), "accuracy": accuracy });
    fs::write(out.join("summary.json"), serde_json::to_string_pretty(&summary)? + "\n")?;
    Ok(Outcome::Success)
}

/// Dataset sources named on the command line, with directories of dataset
/// directories expanded.
fn expand_datasets(paths: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut out = Vec::new();
    for p in paths {
        if p.is_dir() && !p.join(MANIFEST_FILE).exists() && !p.join("data.csv").exists() {
            let found = discover_datasets(p)?;
            if found.is_empty() {
                return Err(Error::Config(format!("no datasets under {}", p.display())));
            }
            out.extend(found);
        } else {
            out.push(p.clone());
        }
    }
    Ok(out)
}

fn benchmark(paths: &[PathBuf], csv: &CsvSettings, grid: &Grid, seed: u64, hash: &str, out: &Path) -> Result<Outcome> {
    grid.validate()?;
    let opts = csv.options()?;
    let mut results: Vec<RunResult> = Vec::new();
    let mut failures: Vec<RunFailure> = Vec::new();
    for path in expand_datasets(paths)? {
        let ds = match load_path(&path, &opts) {
            Ok(ds) => ds,
            Err(e) => {
                log::error!("{}: {e}", path.display());
                failures.push(RunFailure { dataset: path.display().to_string(), kind: None, error: e.to_string() });
                continue;
            }
        };
        let plan = match stratified_kfold(&ds, grid.n_folds, seed) {
            Ok(p) => p,
            Err(e) => {
                log::error!("{}: {e}", ds.name);
                failures.push(RunFailure { dataset: ds.name.clone(), kind: None, error: e.to_string() });
                continue;
            }
        };
        for &kind in &grid.models {
            log::info!("{} / {kind}: {} grid points", ds.name, grid.n_points(kind));
            match run_grid(&ds, kind, grid, &plan) {
                Ok(r) => {
                    println!(
                        "{:<24} {:<11} {:>8.4} +- {:.4}  ({:.1}s)",
                        ds.name,
                        kind.name(),
                        r.mean_accuracy,
                        r.std_dev,
                        r.wall_time_secs
                    );
                    results.push(r);
                }
                Err(e) => {
                    log::error!("{} / {kind}: {e}", ds.name);
                    failures.push(RunFailure { dataset: ds.name.clone(), kind: Some(kind), error: e.to_string() });
                }
            }
        }
    }
    let meta = ResultsMetadata::new(hash, seed, grid);
    write_results_csv(&out.join("results.csv"), &results, &meta)?;
    write_results_json(
        &out.join("results.json"),
        &ResultsFile {
            schema_version: RESULTS_SCHEMA_VERSION,
            metadata: meta,
            results: results.clone(),
            failures: failures.clone(),
        },
    )?;
    write_timings(&out.join("timings.csv"), &results)?;
    Ok(if failures.is_empty() { Outcome::Success } else { Outcome::Partial })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn config_round_trip_and_hash() {
        let cli = Cli::parse_from([
            "rvflx", "--seed", "3", "benchmark", "--data", "a", "b", "--models", "rvfl,rvflx_auto", "--out", "o",
        ]);
        let (cfg, out) = resolve(&cli).unwrap();
        assert_eq!(out.out, PathBuf::from("o"));
        let back = JobConfig::from_json(&cfg.to_json().unwrap()).unwrap();
        assert_eq!(back, cfg);
        assert_eq!(back.hash().unwrap(), cfg.hash().unwrap());
        let Job::Benchmark { grid, .. } = &cfg.job else { panic!("benchmark job") };
        assert_eq!(grid.models, vec![ModelKind::Rvfl, ModelKind::RvflxAuto]);
        assert_eq!(grid.seeds, vec![3]);
    }

    #[test]
    fn out_dir_guard() {
        let dir = tempfile::tempdir().unwrap();
        fs::write(dir.path().join("x"), "1").unwrap();
        assert!(matches!(prepare_out_dir(dir.path(), false), Err(Error::Config(_))));
        prepare_out_dir(dir.path(), true).unwrap();
        prepare_out_dir(&dir.path().join("fresh"), false).unwrap();
    }

    #[test]
    fn bad_varpi_is_a_config_level_error() {
        let cli = Cli::parse_from(["rvflx", "train", "--data", "d", "--model", "rvfl", "--varpi", "2", "--out", "o"]);
        assert_eq!(resolve(&cli).unwrap_err().exit_code(), 2);
    }
}
