//! `ccim` command line: dataset generation, dictionary building, training,
//! evaluation, bias audits, and comparison runs.
//!
//! Exit codes: 0 on success, 2 for usage/validation problems, 1 for runtime
//! faults. Every output directory (or output file's directory) receives a
//! `manifest.json` describing the invocation.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use ccim_core::ablation::{run_ablation, sweep_n, Variant};
use ccim_core::dictionary::{
    build_dictionary, default_pca_dims, deserialize_dictionary, preset_size, random_dictionary,
    serialize_dictionary,
};
use ccim_core::error::{Error, Result};
use ccim_core::matrix::Matrix;
use ccim_core::metrics::MetricsReport;
use ccim_core::model::{
    checkpoint_from_json, checkpoint_to_json, evaluate, train, ModelConfig, TrainState,
};
use ccim_core::synthetic::{
    bias_audit, context_features, generate, load_dataset_dir, write_audit_report,
    write_dataset_dir, Dataset, GeneratorConfig,
};

#[derive(Parser)]
#[command(name = "ccim", version, about = "Context-deconfounded training toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic confounded dataset (train.csv, test.csv).
    GenData(GenDataArgs),
    /// Build a confounder dictionary from context features.
    BuildDict(BuildDictArgs),
    /// Train a model and write checkpoint + metrics.
    Train(TrainArgs),
    /// Evaluate a checkpoint on a dataset.
    Eval(EvalArgs),
    /// Per-context bias audit for one emotion.
    Audit(AuditArgs),
    /// Train and compare ablation variants.
    Ablate(AblateArgs),
    /// Sweep the dictionary size N.
    SweepN(SweepNArgs),
}

#[derive(Args)]
struct GenDataArgs {
    /// Generator config JSON.
    #[arg(long)]
    config: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output directory.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct BuildDictArgs {
    /// Feature CSV: plain numeric rows, or a dataset file written by
    /// gen-data (context columns are extracted).
    #[arg(long)]
    features: PathBuf,
    /// Dictionary size: a number or a preset name (emotic, caer-s,
    /// groupwalk).
    #[arg(long)]
    n: String,
    /// PCA dimensions for the clustering space (default min(64, d, rows)).
    #[arg(long)]
    pca_dims: Option<usize>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output dictionary JSON path.
    #[arg(long)]
    out: PathBuf,
    /// Build a random dictionary instead of clustering.
    #[arg(long)]
    random: bool,
    /// Keep subject leakage in the context rows (masking ablation).
    #[arg(long)]
    no_mask_input: bool,
    /// Scale of the random dictionary entries.
    #[arg(long, default_value_t = 1.0)]
    scale: f64,
}

#[derive(Args)]
struct TrainArgs {
    /// Dataset directory from gen-data.
    #[arg(long)]
    data: PathBuf,
    /// Dictionary JSON (required for CCIM configs).
    #[arg(long)]
    dict: Option<PathBuf>,
    /// Model config JSON.
    #[arg(long)]
    model: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    /// Run directory for checkpoint.json, metrics.csv, manifest.json.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EvalArgs {
    #[arg(long)]
    data: PathBuf,
    /// Dictionary the checkpoint was trained with (CCIM checkpoints only).
    #[arg(long)]
    dict: Option<PathBuf>,
    #[arg(long)]
    checkpoint: PathBuf,
    #[arg(long)]
    out: PathBuf,
    /// Also dump fused and context features per test sample.
    #[arg(long)]
    export_features: bool,
}

#[derive(Args)]
struct AuditArgs {
    #[arg(long)]
    data: PathBuf,
    /// Emotion id to audit one-vs-rest.
    #[arg(long)]
    emotion: usize,
    /// Audit the test split instead of train.
    #[arg(long)]
    test_split: bool,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AblateArgs {
    #[arg(long)]
    data: PathBuf,
    /// Comma-separated variant ids.
    #[arg(long)]
    variants: String,
    /// Number of seeds (seed, seed+1, ...).
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Dictionary size for clustered/random variants.
    #[arg(long, default_value_t = 8)]
    n: usize,
    #[arg(long)]
    pca_dims: Option<usize>,
    /// Model config JSON (defaults to a small CCIM-ready config).
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct SweepNArgs {
    #[arg(long)]
    data: PathBuf,
    /// Comma-separated dictionary sizes, e.g. 2,4,8,16,32.
    #[arg(long)]
    n_list: String,
    #[arg(long, default_value_t = 1)]
    seeds: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    pca_dims: Option<usize>,
    #[arg(long)]
    model: Option<PathBuf>,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Serialize)]
struct RunManifest {
    tool_version: &'static str,
    subcommand: String,
    flags: BTreeMap<String, String>,
    seed: Option<u64>,
    inputs: Vec<String>,
    outputs: Vec<String>,
    wall_clock_ms: u128,
}

/// Write the manifest atomically (temp file + rename) next to the outputs.
fn write_manifest(dir: &Path, manifest: &RunManifest) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    let text = serde_json::to_string_pretty(manifest)?;
    let tmp = dir.join(".manifest.json.tmp");
    std::fs::write(&tmp, text)?;
    std::fs::rename(&tmp, dir.join("manifest.json"))?;
    Ok(())
}

fn manifest_dir_for_file(path: &Path) -> PathBuf {
    path.parent()
        .filter(|p| !p.as_os_str().is_empty())
        .map(|p| p.to_path_buf())
        .unwrap_or_else(|| PathBuf::from("."))
}

struct ManifestBuilder {
    subcommand: String,
    flags: BTreeMap<String, String>,
    seed: Option<u64>,
    inputs: Vec<String>,
    outputs: Vec<String>,
    started: Instant,
}

impl ManifestBuilder {
    fn new(subcommand: &str) -> Self {
        ManifestBuilder {
            subcommand: subcommand.to_string(),
            flags: BTreeMap::new(),
            seed: None,
            inputs: Vec::new(),
            outputs: Vec::new(),
            started: Instant::now(),
        }
    }

    fn flag(&mut self, key: &str, value: impl ToString) -> &mut Self {
        self.flags.insert(key.to_string(), value.to_string());
        self
    }

    fn input(&mut self, path: &Path) -> &mut Self {
        self.inputs.push(path.display().to_string());
        self
    }

    fn output(&mut self, path: &Path) -> &mut Self {
        self.outputs.push(path.display().to_string());
        self
    }

    fn finish(&self, dir: &Path) -> Result<()> {
        write_manifest(
            dir,
            &RunManifest {
                tool_version: env!("CARGO_PKG_VERSION"),
                subcommand: self.subcommand.clone(),
                flags: self.flags.clone(),
                seed: self.seed,
                inputs: self.inputs.clone(),
                outputs: self.outputs.clone(),
                wall_clock_ms: self.started.elapsed().as_millis(),
            },
        )
    }
}

fn main() {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::GenData(args) => cmd_gen_data(args),
        Command::BuildDict(args) => cmd_build_dict(args),
        Command::Train(args) => cmd_train(args),
        Command::Eval(args) => cmd_eval(args),
        Command::Audit(args) => cmd_audit(args),
        Command::Ablate(args) => cmd_ablate(args),
        Command::SweepN(args) => cmd_sweep_n(args),
    };
    if let Err(err) = outcome {
        eprintln!("error: {err}");
        std::process::exit(if err.is_usage() { 2 } else { 1 });
    }
}

fn read_generator_config(path: &Path) -> Result<GeneratorConfig> {
    let text = std::fs::read_to_string(path)?;
    let config: GeneratorConfig = serde_json::from_str(&text)
        .map_err(|e| Error::Validation(format!("bad generator config: {e}")))?;
    config.validate()?;
    Ok(config)
}

fn read_model_config(path: &Path) -> Result<ModelConfig> {
    let text = std::fs::read_to_string(path)?;
    let config: ModelConfig = serde_json::from_str(&text)
        .map_err(|e| Error::Validation(format!("bad model config: {e}")))?;
    config.validate()?;
    Ok(config)
}

fn cmd_gen_data(args: GenDataArgs) -> Result<()> {
    let config = read_generator_config(&args.config)?;
    let (train_data, test_data) = generate(&config, args.seed)?;
    write_dataset_dir(&train_data, &test_data, &args.out)?;

    let mut m = ManifestBuilder::new("gen-data");
    m.seed = Some(args.seed);
    m.flag("config", args.config.display())
        .flag("seed", args.seed)
        .flag("out", args.out.display())
        .input(&args.config)
        .output(&args.out.join("train.csv"))
        .output(&args.out.join("test.csv"))
        .output(&args.out.join("fingerprint.json"));
    m.finish(&args.out)
}

/// Read dictionary-building features. Dataset files (recognized by their
/// header) yield context columns with the masking flag honored; plain CSVs
/// are taken row by row, header optional.
fn read_feature_csv(path: &Path, mask_input: bool) -> Result<Matrix> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().peekable();
    let first = match lines.peek() {
        Some(l) => *l,
        None => return Err(Error::Validation("feature file is empty".into())),
    };

    if first.starts_with("split,label,context_id") {
        // dataset file: pull the context columns through the library path so
        // masking semantics stay consistent
        let dir = manifest_dir_for_file(path);
        let (train_data, test_data) = load_dataset_dir(&dir)?;
        let data = if path.file_name().and_then(|s| s.to_str()) == Some("test.csv") {
            test_data
        } else {
            train_data
        };
        return Ok(context_features(&data, mask_input));
    }

    let mut rows: Vec<Vec<f64>> = Vec::new();
    for (ln, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut row = Vec::new();
        let mut numeric = true;
        for field in line.split(',') {
            match field.trim().parse::<f64>() {
                Ok(v) => row.push(v),
                Err(_) => {
                    numeric = false;
                    break;
                }
            }
        }
        if !numeric {
            if ln == 0 {
                continue; // header
            }
            return Err(Error::Validation(format!(
                "non-numeric field on line {}",
                ln + 1
            )));
        }
        rows.push(row);
    }
    if rows.is_empty() {
        return Err(Error::Validation("feature file holds no numeric rows".into()));
    }
    Matrix::from_rows(rows)
}

fn cmd_build_dict(args: BuildDictArgs) -> Result<()> {
    let n = match args.n.parse::<usize>() {
        Ok(v) => v,
        Err(_) => preset_size(&args.n).ok_or_else(|| {
            Error::Parameter(format!(
                "--n must be a number or one of emotic, caer-s, groupwalk; got `{}`",
                args.n
            ))
        })?,
    };
    let features = read_feature_csv(&args.features, !args.no_mask_input)?;
    let dict = if args.random {
        random_dictionary(n, features.cols(), args.seed, args.scale)?
    } else {
        let d_p = args
            .pca_dims
            .unwrap_or_else(|| default_pca_dims(features.rows(), features.cols()));
        build_dictionary(&features, n, d_p, args.seed)?
    };
    if let Some(parent) = args.out.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    serialize_dictionary(&dict, &args.out)?;

    let mut m = ManifestBuilder::new("build-dict");
    m.seed = Some(args.seed);
    m.flag("features", args.features.display())
        .flag("n", n)
        .flag("random", args.random)
        .flag("no_mask_input", args.no_mask_input)
        .flag("seed", args.seed)
        .flag("out", args.out.display())
        .input(&args.features)
        .output(&args.out);
    if let Some(p) = args.pca_dims {
        m.flag("pca_dims", p);
    }
    m.finish(&manifest_dir_for_file(&args.out))
}

fn write_metrics_csv(
    path: &Path,
    rows: &[(String, u64, &MetricsReport)],
) -> Result<()> {
    let n_classes = rows
        .first()
        .map(|(_, _, r)| r.per_class_ap.len())
        .unwrap_or(0);
    let mut w = csv::Writer::from_path(path)?;
    let mut header = vec![
        "variant".to_string(),
        "seed".to_string(),
        "accuracy".to_string(),
        "map".to_string(),
    ];
    header.extend((0..n_classes).map(|e| format!("ap_{e}")));
    w.write_record(&header)?;
    for (variant, seed, report) in rows {
        let mut rec = vec![
            variant.clone(),
            seed.to_string(),
            report.accuracy.to_string(),
            report.map.to_string(),
        ];
        rec.extend(report.per_class_ap.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let (train_data, test_data) = load_dataset_dir(&args.data)?;
    let mut config = read_model_config(&args.model)?;
    if let Some(seed) = args.seed {
        config.seed = seed;
    }
    let dict = match &args.dict {
        Some(path) => Some(deserialize_dictionary(path)?),
        None => None,
    };
    if config.use_ccim && dict.is_none() {
        return Err(Error::Config(
            "model config uses ccim; pass --dict".into(),
        ));
    }
    let state = train(&config, &train_data, dict.as_ref())?;
    let report = evaluate(&state, &test_data)?;

    std::fs::create_dir_all(&args.out)?;
    std::fs::write(args.out.join("checkpoint.json"), checkpoint_to_json(&state)?)?;
    let label = if config.use_ccim { "ccim" } else { "baseline" };
    write_metrics_csv(
        &args.out.join("metrics.csv"),
        &[(label.to_string(), config.seed, &report)],
    )?;

    let mut m = ManifestBuilder::new("train");
    m.seed = Some(config.seed);
    m.flag("data", args.data.display())
        .flag("model", args.model.display())
        .flag("seed", config.seed)
        .flag("out", args.out.display())
        .input(&args.data)
        .input(&args.model)
        .output(&args.out.join("checkpoint.json"))
        .output(&args.out.join("metrics.csv"));
    if let Some(d) = &args.dict {
        m.flag("dict", d.display());
        m.input(d);
    }
    m.finish(&args.out)
}

fn export_features(state: &TrainState, data: &Dataset, path: &Path) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    let first = data
        .samples
        .first()
        .ok_or_else(|| Error::Validation("dataset is empty".into()))?;
    let (h, _, _) = state.forward(first)?;
    let c = state.encode_context(first)?;
    let mut header = vec!["label".to_string(), "context_id".to_string()];
    header.extend((0..h.len()).map(|i| format!("h_{i}")));
    header.extend((0..c.len()).map(|i| format!("ctx_{i}")));
    w.write_record(&header)?;
    for sample in &data.samples {
        let (h, _, _) = state.forward(sample)?;
        let c = state.encode_context(sample)?;
        let mut rec = vec![sample.label.to_string(), sample.context_id.to_string()];
        rec.extend(h.iter().map(|v| v.to_string()));
        rec.extend(c.iter().map(|v| v.to_string()));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let (_, test_data) = load_dataset_dir(&args.data)?;
    let dict = match &args.dict {
        Some(path) => Some(deserialize_dictionary(path)?),
        None => None,
    };
    let text = std::fs::read_to_string(&args.checkpoint)?;
    let state = checkpoint_from_json(&text, dict.as_ref())?;
    let report = evaluate(&state, &test_data)?;

    std::fs::create_dir_all(&args.out)?;
    let label = if state.config.use_ccim { "ccim" } else { "baseline" };
    write_metrics_csv(
        &args.out.join("metrics.csv"),
        &[(label.to_string(), state.config.seed, &report)],
    )?;
    if args.export_features {
        export_features(&state, &test_data, &args.out.join("features.csv"))?;
    }

    let mut m = ManifestBuilder::new("eval");
    m.seed = Some(state.config.seed);
    m.flag("data", args.data.display())
        .flag("checkpoint", args.checkpoint.display())
        .flag("export_features", args.export_features)
        .flag("out", args.out.display())
        .input(&args.data)
        .input(&args.checkpoint)
        .output(&args.out.join("metrics.csv"));
    if args.export_features {
        m.output(&args.out.join("features.csv"));
    }
    if let Some(d) = &args.dict {
        m.flag("dict", d.display());
        m.input(d);
    }
    m.finish(&args.out)
}

fn cmd_audit(args: AuditArgs) -> Result<()> {
    let (train_data, test_data) = load_dataset_dir(&args.data)?;
    let data = if args.test_split { &test_data } else { &train_data };
    let report = bias_audit(data, args.emotion)?;
    write_audit_report(&report, &args.out)?;

    let mut m = ManifestBuilder::new("audit");
    m.flag("data", args.data.display())
        .flag("emotion", args.emotion)
        .flag("test_split", args.test_split)
        .flag("out", args.out.display())
        .input(&args.data)
        .output(&args.out.join("audit.csv"))
        .output(&args.out.join("audit_summary.json"));
    m.finish(&args.out)
}

fn default_ablation_model() -> ModelConfig {
    ModelConfig {
        ccim: Some(ccim_core::model::CcimSettings::default()),
        ..ModelConfig::default()
    }
}

fn load_model_or_default(path: &Option<PathBuf>) -> Result<ModelConfig> {
    match path {
        Some(p) => {
            let mut config = read_model_config(p)?;
            if config.ccim.is_none() {
                config.ccim = Some(ccim_core::model::CcimSettings::default());
            }
            Ok(config)
        }
        None => Ok(default_ablation_model()),
    }
}

/// Long-format rows (variant_or_n, seed, metric, value).
fn write_long_csv(
    path: &Path,
    rows: &[(String, u64, String, f64)],
    key_name: &str,
) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record([key_name, "seed", "metric", "value"])?;
    for (key, seed, metric, value) in rows {
        w.write_record(&[key.clone(), seed.to_string(), metric.clone(), value.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn seed_range(start: u64, count: u64) -> Vec<u64> {
    (0..count).map(|i| start + i).collect()
}

fn cmd_ablate(args: AblateArgs) -> Result<()> {
    let (train_data, test_data) = load_dataset_dir(&args.data)?;
    let variants: Vec<Variant> = args
        .variants
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(Variant::parse)
        .collect::<Result<_>>()?;
    let base = load_model_or_default(&args.model)?;
    let seeds = seed_range(args.seed, args.seeds);
    let table = run_ablation(
        &base,
        &train_data,
        &test_data,
        &variants,
        &seeds,
        args.n,
        args.pca_dims,
    )?;
    for warning in &table.warnings {
        eprintln!("warning: {warning}");
    }

    std::fs::create_dir_all(&args.out)?;
    let mut long_rows = Vec::new();
    for record in &table.records {
        long_rows.push((
            record.variant.clone(),
            record.seed,
            "accuracy".to_string(),
            record.report.accuracy,
        ));
        long_rows.push((
            record.variant.clone(),
            record.seed,
            "map".to_string(),
            record.report.map,
        ));
        for (e, ap) in record.report.per_class_ap.iter().enumerate() {
            long_rows.push((record.variant.clone(), record.seed, format!("ap_{e}"), *ap));
        }
    }
    write_long_csv(&args.out.join("ablation.csv"), &long_rows, "variant")?;
    let wide: Vec<(String, u64, &MetricsReport)> = table
        .records
        .iter()
        .map(|r| (r.variant.clone(), r.seed, &r.report))
        .collect();
    write_metrics_csv(&args.out.join("metrics_full.csv"), &wide)?;

    let mut m = ManifestBuilder::new("ablate");
    m.seed = Some(args.seed);
    m.flag("data", args.data.display())
        .flag("variants", &args.variants)
        .flag("seeds", args.seeds)
        .flag("seed", args.seed)
        .flag("n", args.n)
        .flag("out", args.out.display())
        .input(&args.data)
        .output(&args.out.join("ablation.csv"))
        .output(&args.out.join("metrics_full.csv"));
    m.finish(&args.out)
}

fn cmd_sweep_n(args: SweepNArgs) -> Result<()> {
    let (train_data, test_data) = load_dataset_dir(&args.data)?;
    let n_list: Vec<usize> = args
        .n_list
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| {
            s.trim()
                .parse::<usize>()
                .map_err(|e| Error::Parameter(format!("bad n `{s}`: {e}")))
        })
        .collect::<Result<_>>()?;
    let base = load_model_or_default(&args.model)?;
    let seeds = seed_range(args.seed, args.seeds);
    let records = sweep_n(&base, &train_data, &test_data, &n_list, &seeds, args.pca_dims)?;

    std::fs::create_dir_all(&args.out)?;
    // one row per run keeps the file directly plottable as metric vs N
    let map_rows: Vec<(String, u64, String, f64)> = records
        .iter()
        .map(|r| (r.n.to_string(), r.seed, "map".to_string(), r.report.map))
        .collect();
    write_long_csv(&args.out.join("sweep.csv"), &map_rows, "n")?;
    let wide: Vec<(String, u64, &MetricsReport)> = records
        .iter()
        .map(|r| (r.n.to_string(), r.seed, &r.report))
        .collect();
    write_metrics_csv(&args.out.join("metrics_full.csv"), &wide)?;

    let mut m = ManifestBuilder::new("sweep-n");
    m.seed = Some(args.seed);
    m.flag("data", args.data.display())
        .flag("n_list", &args.n_list)
        .flag("seeds", args.seeds)
        .flag("seed", args.seed)
        .flag("out", args.out.display())
        .input(&args.data)
        .output(&args.out.join("sweep.csv"))
        .output(&args.out.join("metrics_full.csv"));
    m.finish(&args.out)
}
