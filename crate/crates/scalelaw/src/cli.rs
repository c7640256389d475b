//! Command-line surface: binds the library to fixture files and reports.
//!
//! Human-readable summaries go to stdout; machine artifacts are written only
//! to `--out` paths. Every subcommand is deterministic given identical inputs
//! and seed, and exits nonzero exactly when an error was reported.

use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::contrastive::{infonce_grad, infonce_loss, sharded_loss_grad, ContrastiveBatch, ShardLayout};
use crate::dedup::{self, phash, HashCode, OverlapReport};
use crate::embedding::{EmbeddingMatrix, TruthMap};
use crate::error::{Error, Result};
use crate::evalproto::{
    recall_at_k, train_linear_probe, zero_shot_classify, LabelEmbeddings, ProbeConfig,
};
use crate::records::{parse_records, ArchRegistry, ExperimentRecord, Family, RecordFormat};
use crate::scaling::{
    build_fit_report, predict_error, scaling_efficiency, FitReport, PowerLawFit, PredictionEntry,
    ThroughputSample, DEFAULT_NUM_BINS,
};

#[derive(Debug, Parser)]
#[command(
    name = "scalelaw",
    about = "Scaling-law analysis for contrastive image-text models",
    version
)]
pub struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
enum InputFormat {
    Json,
    Csv,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Fit a power law to the Pareto frontier of one (task, family) selection.
    Fit(FitArgs),
    /// Evaluate a saved fit at a new (architecture, samples-seen) budget.
    Predict(PredictArgs),
    /// Emit plot-ready CSV: every point, frontier flags, and the fitted curve.
    Plotdata(PlotdataArgs),
    /// Zero-shot classification of image embeddings against label embeddings.
    EvalZeroshot(EvalZeroshotArgs),
    /// Recall@K retrieval between query and candidate embeddings.
    EvalRetrieval(EvalRetrievalArgs),
    /// Train a linear probe on cached features over the standard sweep.
    Probe(ProbeArgs),
    /// Check sharded-loss equivalence and report memory accounting.
    LossCheck(LossCheckArgs),
    /// Perceptual-hash duplication check between two image or hash sets.
    Dedup(DedupArgs),
    /// Scaling efficiency of measured data-parallel throughput.
    Efficiency(EfficiencyArgs),
}

#[derive(Debug, Args)]
struct FitArgs {
    /// Experiment records (CSV or JSON).
    #[arg(long)]
    records: PathBuf,
    /// Architecture registry CSV.
    #[arg(long)]
    archs: PathBuf,
    #[arg(long)]
    task: String,
    /// `openclip-laion` or `clip-wit`.
    #[arg(long)]
    family: String,
    /// Number of equal-width log10 compute bins.
    #[arg(long, default_value_t = DEFAULT_NUM_BINS)]
    bins: usize,
    /// Prediction target `ARCH:SAMPLES`, repeatable.
    #[arg(long = "predict")]
    predictions: Vec<String>,
    /// Records input format (default: by file extension).
    #[arg(long, value_enum)]
    format: Option<InputFormat>,
    /// Where to write the fit report JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PredictArgs {
    /// Fit report JSON produced by `fit`.
    #[arg(long)]
    fit: PathBuf,
    /// Architecture registry CSV.
    #[arg(long)]
    archs: PathBuf,
    #[arg(long)]
    arch: String,
    /// Samples seen during pre-training.
    #[arg(long)]
    samples: u64,
    /// Where to write the prediction JSON.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct PlotdataArgs {
    #[arg(long)]
    records: PathBuf,
    #[arg(long)]
    archs: PathBuf,
    #[arg(long)]
    task: String,
    #[arg(long)]
    family: String,
    #[arg(long, default_value_t = DEFAULT_NUM_BINS)]
    bins: usize,
    #[arg(long, value_enum)]
    format: Option<InputFormat>,
    /// Output CSV path.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Debug, Args)]
struct EvalZeroshotArgs {
    /// Image embedding matrix (`rows dim` header format).
    #[arg(long)]
    images: PathBuf,
    /// Label embedding matrix, one row per label.
    #[arg(long)]
    labels: PathBuf,
    /// Ground truth CSV `image_index,label_index`.
    #[arg(long)]
    truth: PathBuf,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EvalRetrievalArgs {
    #[arg(long)]
    queries: PathBuf,
    #[arg(long)]
    candidates: PathBuf,
    /// Ground truth CSV `query_index,candidate_index`.
    #[arg(long)]
    truth: PathBuf,
    #[arg(long, default_value_t = 5)]
    k: usize,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct ProbeArgs {
    /// Cached feature matrix (`rows dim` header format).
    #[arg(long)]
    features: PathBuf,
    /// Labels CSV `index,label` covering every feature row.
    #[arg(long)]
    labels: PathBuf,
    /// Eval-split indices, one per line.
    #[arg(long)]
    eval: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct LossCheckArgs {
    /// Image embeddings file; omit to draw a random batch.
    #[arg(long, requires = "texts")]
    images: Option<PathBuf>,
    /// Text embeddings file.
    #[arg(long, requires = "images")]
    texts: Option<PathBuf>,
    /// Synthetic batch size (used when no files are given).
    #[arg(long, default_value_t = 32)]
    n: usize,
    /// Synthetic embedding dimension.
    #[arg(long, default_value_t = 8)]
    dim: usize,
    /// Softmax temperature.
    #[arg(long, default_value_t = 0.07)]
    tau: f64,
    /// Virtual worker count; must divide the batch size.
    #[arg(long, default_value_t = 4)]
    workers: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct DedupArgs {
    /// Reference set A: directory of .pgm/.ppm images or a hash CSV.
    #[arg(long)]
    a: PathBuf,
    /// Probe set B, same formats.
    #[arg(long)]
    b: PathBuf,
    /// Maximum Hamming distance for a match.
    #[arg(long, default_value_t = dedup::DEFAULT_THRESHOLD)]
    threshold: u32,
    /// Write the computed hashes of set A as CSV `id,hash_hex`.
    #[arg(long)]
    hashes_out_a: Option<PathBuf>,
    /// Write the computed hashes of set B.
    #[arg(long)]
    hashes_out_b: Option<PathBuf>,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Debug, Args)]
struct EfficiencyArgs {
    /// Throughput samples CSV `n_gpus,throughput`.
    #[arg(long)]
    samples: PathBuf,
    /// Baseline GPU count (default: smallest present).
    #[arg(long)]
    baseline: Option<u32>,
    #[arg(long)]
    out: Option<PathBuf>,
}

/// Entry point for the binary: parses arguments, runs, reports errors on
/// stderr, and maps errors to a nonzero exit code.
pub fn run() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}

fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Fit(args) => cmd_fit(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Plotdata(args) => cmd_plotdata(args),
        Command::EvalZeroshot(args) => cmd_eval_zeroshot(args),
        Command::EvalRetrieval(args) => cmd_eval_retrieval(args),
        Command::Probe(args) => cmd_probe(args),
        Command::LossCheck(args) => cmd_loss_check(args),
        Command::Dedup(args) => cmd_dedup(args),
        Command::Efficiency(args) => cmd_efficiency(args),
    }
}

fn load_records(path: &Path, format: Option<InputFormat>) -> Result<Vec<ExperimentRecord>> {
    let format = match format {
        Some(InputFormat::Json) => RecordFormat::Json,
        Some(InputFormat::Csv) => RecordFormat::Csv,
        None => match path.extension().and_then(|e| e.to_str()) {
            Some("json") => RecordFormat::Json,
            _ => RecordFormat::Csv,
        },
    };
    parse_records(BufReader::new(File::open(path)?), format)
}

fn load_registry(path: &Path) -> Result<ArchRegistry> {
    ArchRegistry::from_csv(BufReader::new(File::open(path)?))
}

fn load_embeddings(path: &Path) -> Result<EmbeddingMatrix> {
    EmbeddingMatrix::from_reader(BufReader::new(File::open(path)?))
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    serde_json::to_writer_pretty(&mut out, value)?;
    out.write_all(b"\n")?;
    out.flush()?;
    Ok(())
}

fn parse_prediction_targets(specs: &[String]) -> Result<Vec<(String, u64)>> {
    specs
        .iter()
        .map(|spec| {
            let (arch, samples) = spec.rsplit_once(':').ok_or_else(|| {
                Error::InvalidInput(format!("expected ARCH:SAMPLES, got `{spec}`"))
            })?;
            let samples = samples.parse::<u64>().map_err(|e| {
                Error::InvalidInput(format!("bad samples count in `{spec}`: {e}"))
            })?;
            Ok((arch.to_string(), samples))
        })
        .collect()
}

fn cmd_fit(args: FitArgs) -> Result<()> {
    let records = load_records(&args.records, args.format)?;
    let registry = load_registry(&args.archs)?;
    let family: Family = args.family.parse()?;
    let targets = parse_prediction_targets(&args.predictions)?;
    let report = build_fit_report(&records, &args.task, family, &registry, args.bins, &targets)?;
    println!(
        "fit {task} / {family}: E = {beta:.6} * C^({alpha:.6})",
        task = report.task,
        family = report.family,
        beta = report.beta,
        alpha = report.alpha,
    );
    println!(
        "  {n} frontier points over [{lo:.4e}, {hi:.4e}] GMAC, r^2 = {r2:.6}",
        n = report.n_points,
        lo = report.fit_domain[0],
        hi = report.fit_domain[1],
        r2 = report.r_squared,
    );
    for p in &report.predictions {
        println!(
            "  predict {arch} @ {samples} samples: metric {metric:.2}{flag}",
            arch = p.arch,
            samples = p.samples_seen,
            metric = p.metric,
            flag = if p.extrapolated { " (extrapolated)" } else { "" },
        );
    }
    if let Some(out) = &args.out {
        write_json(out, &report)?;
        println!("report written to {}", out.display());
    }
    Ok(())
}

fn cmd_predict(args: PredictArgs) -> Result<()> {
    let report: FitReport =
        serde_json::from_reader(BufReader::new(File::open(&args.fit)?))?;
    let registry = load_registry(&args.archs)?;
    let spec = registry.lookup(&args.arch)?;
    let fit = PowerLawFit {
        alpha: report.alpha,
        beta: report.beta,
        n_points: report.n_points,
        r_squared: report.r_squared,
        fit_domain: report.fit_domain,
    };
    let compute = spec.gmacs_per_sample * args.samples as f64;
    let p = predict_error(&fit, compute)?;
    let entry = PredictionEntry {
        arch: args.arch.clone(),
        samples_seen: args.samples,
        compute_gmac: compute,
        metric: p.predicted_metric,
        extrapolated: p.extrapolated,
    };
    println!(
        "{arch} @ {samples} samples: C = {compute:.4e} GMAC, predicted metric {metric:.2} (error {err:.2}){flag}",
        arch = entry.arch,
        samples = entry.samples_seen,
        compute = entry.compute_gmac,
        metric = entry.metric,
        err = p.predicted_error,
        flag = if entry.extrapolated { ", extrapolated" } else { "" },
    );
    if let Some(out) = &args.out {
        write_json(out, &entry)?;
        println!("prediction written to {}", out.display());
    }
    Ok(())
}

fn cmd_plotdata(args: PlotdataArgs) -> Result<()> {
    use crate::records::{to_points, ErrorConvention};
    use crate::scaling::{bin_compute, fit_power_law, pareto_frontier, BinSpec};

    let records = load_records(&args.records, args.format)?;
    let registry = load_registry(&args.archs)?;
    let family: Family = args.family.parse()?;
    let points = to_points(
        &records,
        &args.task,
        family,
        &registry,
        ErrorConvention::default(),
    )?;
    if points.is_empty() {
        return Err(Error::Domain(format!(
            "no points for task `{}`, family `{family}`",
            args.task
        )));
    }
    let spec = BinSpec::covering(&points, args.bins)?;
    let frontier = pareto_frontier(&bin_compute(&points, &spec)?)?;
    let fit = fit_power_law(&frontier)?;
    let on_frontier: Vec<bool> = points
        .iter()
        .map(|p| frontier.iter().any(|f| f.source == p.source))
        .collect();

    let mut out = BufWriter::new(File::create(&args.out)?);
    writeln!(out, "log10_compute,error,is_frontier,fitted_error")?;
    for (p, frontier_flag) in points.iter().zip(&on_frontier) {
        let fitted = fit.beta * p.compute_gmac.powf(fit.alpha);
        writeln!(
            out,
            "{},{},{},{}",
            p.compute_gmac.log10(),
            p.error_percent,
            frontier_flag,
            fitted
        )?;
    }
    // Dense sampling of the fitted curve across the fit domain.
    const CURVE_SAMPLES: usize = 64;
    let lo = fit.fit_domain[0].log10();
    let hi = fit.fit_domain[1].log10();
    for i in 0..CURVE_SAMPLES {
        let x = lo + (hi - lo) * i as f64 / (CURVE_SAMPLES - 1) as f64;
        let fitted = fit.beta * 10f64.powf(x).powf(fit.alpha);
        writeln!(out, "{x},,,{fitted}")?;
    }
    out.flush()?;
    println!(
        "wrote {} point rows and {CURVE_SAMPLES} curve rows to {}",
        points.len(),
        args.out.display()
    );
    Ok(())
}

#[derive(Debug, Serialize)]
struct ZeroShotOutput {
    images: usize,
    labels: usize,
    accuracy: f64,
    predictions: Vec<usize>,
}

fn cmd_eval_zeroshot(args: EvalZeroshotArgs) -> Result<()> {
    let images = EmbeddingMatrix::normalize_rows(load_embeddings(&args.images)?.into_inner())?;
    let labels = LabelEmbeddings::new(EmbeddingMatrix::normalize_rows(
        load_embeddings(&args.labels)?.into_inner(),
    )?)?;
    let truth_map = TruthMap::from_reader(BufReader::new(File::open(&args.truth)?))?;
    let mut truth = Vec::with_capacity(images.rows());
    for i in 0..images.rows() {
        let labels_for = truth_map
            .get(i)
            .ok_or_else(|| Error::InvalidInput(format!("image {i} missing from truth file")))?;
        if labels_for.len() != 1 {
            return Err(Error::InvalidInput(format!(
                "image {i} must have exactly one true label, found {}",
                labels_for.len()
            )));
        }
        truth.push(labels_for[0]);
    }
    let result = zero_shot_classify(&images, &labels, &truth)?;
    let output = ZeroShotOutput {
        images: images.rows(),
        labels: labels.count(),
        accuracy: result.accuracy,
        predictions: result.predictions,
    };
    println!(
        "zero-shot top-1 accuracy: {:.2}% over {} images, {} labels",
        output.accuracy, output.images, output.labels
    );
    if let Some(out) = &args.out {
        write_json(out, &output)?;
        println!("result written to {}", out.display());
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct RetrievalOutput {
    queries: usize,
    candidates: usize,
    k: usize,
    recall: f64,
}

fn cmd_eval_retrieval(args: EvalRetrievalArgs) -> Result<()> {
    let queries = load_embeddings(&args.queries)?;
    let candidates = load_embeddings(&args.candidates)?;
    let truth = TruthMap::from_reader(BufReader::new(File::open(&args.truth)?))?;
    let recall = recall_at_k(&queries, &candidates, &truth, args.k)?;
    let output = RetrievalOutput {
        queries: queries.rows(),
        candidates: candidates.rows(),
        k: args.k,
        recall,
    };
    println!(
        "Recall@{}: {:.2}% ({} queries, {} candidates)",
        output.k, output.recall, output.queries, output.candidates
    );
    if let Some(out) = &args.out {
        write_json(out, &output)?;
        println!("result written to {}", out.display());
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct ProbeOutput {
    learning_rate: f64,
    epochs: usize,
    train_accuracy: f64,
    eval_accuracy: f64,
}

fn parse_labels_csv(path: &Path, rows: usize) -> Result<Vec<usize>> {
    let truth = TruthMap::from_reader(BufReader::new(File::open(path)?))?;
    let mut labels = Vec::with_capacity(rows);
    for i in 0..rows {
        let found = truth
            .get(i)
            .ok_or_else(|| Error::InvalidInput(format!("row {i} missing from labels file")))?;
        if found.len() != 1 {
            return Err(Error::InvalidInput(format!(
                "row {i} must have exactly one label, found {}",
                found.len()
            )));
        }
        labels.push(found[0]);
    }
    Ok(labels)
}

fn parse_index_list(path: &Path) -> Result<Vec<usize>> {
    let mut text = String::new();
    File::open(path)?.read_to_string(&mut text)?;
    let mut indices = Vec::new();
    for (lineno, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') || (lineno == 0 && line == "index") {
            continue;
        }
        indices.push(line.parse::<usize>().map_err(|e| Error::Parse {
            line: lineno + 1,
            field: "index".into(),
            message: e.to_string(),
        })?);
    }
    Ok(indices)
}

fn cmd_probe(args: ProbeArgs) -> Result<()> {
    let features = load_embeddings(&args.features)?;
    let labels = parse_labels_csv(&args.labels, features.rows())?;
    let eval_indices = parse_index_list(&args.eval)?;
    let config = ProbeConfig {
        seed: args.seed,
        ..ProbeConfig::default()
    };
    let result = train_linear_probe(&features, &labels, &config, &eval_indices)?;
    let output = ProbeOutput {
        learning_rate: result.learning_rate,
        epochs: result.epochs,
        train_accuracy: result.train_accuracy,
        eval_accuracy: result.eval_accuracy,
    };
    println!(
        "best probe: lr {} for {} epochs -> train {:.2}%, eval {:.2}%",
        output.learning_rate, output.epochs, output.train_accuracy, output.eval_accuracy
    );
    if let Some(out) = &args.out {
        write_json(out, &output)?;
        println!("result written to {}", out.display());
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct LossCheckOutput {
    n: usize,
    dim: usize,
    tau: f64,
    workers: usize,
    loss: f64,
    loss_full: f64,
    loss_abs_diff: f64,
    grad_max_abs_diff: f64,
    per_worker_similarity_entries: u64,
    full_matrix_entries: u64,
    per_worker_bytes_fp32: u64,
    full_matrix_bytes_fp32: u64,
}

fn cmd_loss_check(args: LossCheckArgs) -> Result<()> {
    let batch = match (&args.images, &args.texts) {
        (Some(images), Some(texts)) => ContrastiveBatch::new(
            load_embeddings(images)?.into_inner(),
            load_embeddings(texts)?.into_inner(),
            args.tau,
        )?,
        _ => ContrastiveBatch::random(args.n, args.dim, args.tau, args.seed)?,
    };
    let layout = ShardLayout::contiguous(args.workers)?;
    let report = sharded_loss_grad(&batch, &layout)?;
    let full_loss = infonce_loss(&batch)?;
    let full_grads = infonce_grad(&batch)?;
    let mut grad_diff = 0.0f64;
    for (a, b) in report
        .grads
        .d_image
        .iter()
        .zip(full_grads.d_image.iter())
        .chain(report.grads.d_text.iter().zip(full_grads.d_text.iter()))
    {
        grad_diff = grad_diff.max((a - b).abs());
    }
    let output = LossCheckOutput {
        n: batch.len(),
        dim: batch.dim(),
        tau: batch.tau(),
        workers: args.workers,
        loss: report.loss,
        loss_full: full_loss,
        loss_abs_diff: (report.loss - full_loss).abs(),
        grad_max_abs_diff: grad_diff,
        per_worker_similarity_entries: report.per_worker_similarity_entries,
        full_matrix_entries: report.full_matrix_entries,
        per_worker_bytes_fp32: report.per_worker_bytes(4),
        full_matrix_bytes_fp32: report.full_matrix_bytes(4),
    };
    println!(
        "sharded loss {:.12} over {} workers (full {:.12}, |diff| {:.3e})",
        output.loss, output.workers, output.loss_full, output.loss_abs_diff
    );
    println!("max |grad diff| {:.3e}", output.grad_max_abs_diff);
    println!(
        "memory: {} entries/worker vs {} full ({} vs {} bytes in FP32)",
        output.per_worker_similarity_entries,
        output.full_matrix_entries,
        output.per_worker_bytes_fp32,
        output.full_matrix_bytes_fp32
    );
    if let Some(out) = &args.out {
        write_json(out, &output)?;
        println!("result written to {}", out.display());
    }
    Ok(())
}

/// Loads a hash set from a directory of PNM images (sorted by file name) or
/// from a CSV `id,hash_hex` file.
fn load_hash_set(path: &Path) -> Result<Vec<(String, HashCode)>> {
    if path.is_dir() {
        let mut files: Vec<PathBuf> = std::fs::read_dir(path)?
            .filter_map(|e| e.ok().map(|e| e.path()))
            .filter(|p| {
                matches!(
                    p.extension().and_then(|e| e.to_str()),
                    Some("pgm") | Some("ppm") | Some("pnm")
                )
            })
            .collect();
        files.sort();
        let mut out = Vec::with_capacity(files.len());
        for file in files {
            let image = dedup::pnm::read(BufReader::new(File::open(&file)?))?;
            let id = file
                .file_name()
                .and_then(|n| n.to_str())
                .unwrap_or("?")
                .to_string();
            out.push((id, phash(&image)));
        }
        Ok(out)
    } else {
        dedup::read_hash_csv(BufReader::new(File::open(path)?))
    }
}

fn cmd_dedup(args: DedupArgs) -> Result<()> {
    let set_a = load_hash_set(&args.a)?;
    let set_b = load_hash_set(&args.b)?;
    if let Some(path) = &args.hashes_out_a {
        dedup::write_hash_csv(BufWriter::new(File::create(path)?), &set_a)?;
    }
    if let Some(path) = &args.hashes_out_b {
        dedup::write_hash_csv(BufWriter::new(File::create(path)?), &set_b)?;
    }
    let hashes_a: Vec<HashCode> = set_a.iter().map(|(_, h)| *h).collect();
    let hashes_b: Vec<HashCode> = set_b.iter().map(|(_, h)| *h).collect();
    let report: OverlapReport = dedup::overlap_report(&hashes_a, &hashes_b, args.threshold)?;
    println!(
        "{} of {} B items matched within {} bits: {:.2}% overlap",
        report.matched_b, report.total_b, args.threshold, report.overlap_percent
    );
    for m in &report.matches {
        println!(
            "  {} ~ {} (distance {})",
            set_b[m.b_index].0, set_a[m.a_index].0, m.distance
        );
    }
    if let Some(out) = &args.out {
        write_json(out, &report)?;
        println!("report written to {}", out.display());
    }
    Ok(())
}

#[derive(Debug, Serialize)]
struct EfficiencyRow {
    n_gpus: u32,
    throughput: f64,
    efficiency_percent: f64,
}

fn cmd_efficiency(args: EfficiencyArgs) -> Result<()> {
    let mut csv = csv::ReaderBuilder::new()
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(BufReader::new(File::open(&args.samples)?));
    let mut samples = Vec::new();
    for row in csv.deserialize::<ThroughputSample>() {
        let row = row?;
        samples.push(ThroughputSample::new(row.n_gpus, row.throughput)?);
    }
    let efficiency = scaling_efficiency(&samples, args.baseline)?;
    let rows: Vec<EfficiencyRow> = samples
        .iter()
        .zip(&efficiency)
        .map(|(s, (n, eff))| EfficiencyRow {
            n_gpus: *n,
            throughput: s.throughput,
            efficiency_percent: *eff,
        })
        .collect();
    println!("{:>8} {:>14} {:>12}", "gpus", "images/s", "efficiency");
    for row in &rows {
        println!(
            "{:>8} {:>14.1} {:>11.2}%",
            row.n_gpus, row.throughput, row.efficiency_percent
        );
    }
    if let Some(out) = &args.out {
        write_json(out, &rows)?;
        println!("table written to {}", out.display());
    }
    Ok(())
}
