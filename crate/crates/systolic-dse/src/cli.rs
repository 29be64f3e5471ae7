//! Command-line front end: label-space export, dataset generation,
//! statistics, training, prediction, and evaluation.
//!
//! Every artifact-producing subcommand writes a `<artifact>.manifest.json`
//! with the resolved parameters, seeds, paths, tool version, and duration,
//! enough to reproduce the artifact byte for byte.
//!
//! Exit codes: 0 success, 1 usage or validation problems, 2 I/O failures
//! and corrupt data.

use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use crate::data::{
    self, Case1Params, Case2Params, Case3Params, Dataset, EncoderSpec, GenParams, SamplingRanges,
};
use crate::error::{Error, Result};
use crate::labels::{CaseId, LabelTable, TableParams};
use crate::metrics::{self, QueryBatch};
use crate::model::{
    self, ModelSpec, TrainConfig, DEFAULT_EMBEDDING_DIM, DEFAULT_HIDDEN_UNITS,
};
use crate::stats;
use crate::types::Platform;

#[derive(Parser)]
#[command(
    name = "systolic-dse",
    version,
    about = "Cost models, exhaustive-search oracles, datasets, and a learned \
             recommender for systolic-array design-space exploration"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Export a label table as JSON
    Labels(LabelsArgs),
    /// Generate an oracle-labeled dataset CSV
    Gen(GenArgs),
    /// Class frequency histogram of a dataset
    Stats(StatsArgs),
    /// Two-component PCA projection of two classes
    Pca(PcaArgs),
    /// Train a recommender on a dataset
    Train(TrainArgs),
    /// Predict the optimal configuration for one query
    Predict(PredictArgs),
    /// Evaluate a trained model against oracle labels
    Eval(EvalArgs),
}

/// Label-space parameters shared by `labels`, `gen`, and `train`.
#[derive(Args, Clone)]
struct TableArgs {
    /// Case study: 1 (array/dataflow), 2 (buffer sizing), 3 (scheduling)
    #[arg(long)]
    case: u8,
    /// Case 1: smallest array dimension exponent
    #[arg(long, default_value_t = 4)]
    min_exp: u32,
    /// Case 1: largest total MAC exponent
    #[arg(long, default_value_t = 18)]
    max_mac_exp: u32,
    /// Case 2: smallest buffer size in KB
    #[arg(long, default_value_t = 100)]
    min_kb: u64,
    /// Case 2: largest buffer size in KB
    #[arg(long, default_value_t = 1000)]
    max_kb: u64,
    /// Case 2: buffer size step in KB
    #[arg(long, default_value_t = 100)]
    step_kb: u64,
    /// Case 3: platform JSON file (omit for the built-in 4-unit platform)
    #[arg(long)]
    platform: Option<PathBuf>,
}

impl TableArgs {
    fn case_id(&self) -> Result<CaseId> {
        CaseId::try_from(self.case)
    }

    fn load_platform(&self) -> Result<Platform> {
        match &self.platform {
            Some(path) => Platform::from_json(&std::fs::read_to_string(path)?),
            None => Ok(Platform::default_four_units()),
        }
    }

    fn table_params(&self) -> Result<TableParams> {
        Ok(match self.case_id()? {
            CaseId::Case1 => {
                TableParams::Case1 { min_exp: self.min_exp, max_mac_exp: self.max_mac_exp }
            }
            CaseId::Case2 => TableParams::Case2 {
                min_kb: self.min_kb,
                max_kb: self.max_kb,
                step_kb: self.step_kb,
            },
            CaseId::Case3 => TableParams::Case3 { platform: self.load_platform()? },
        })
    }

    fn build_table(&self, labels_file: Option<&Path>) -> Result<LabelTable> {
        let table = match labels_file {
            Some(path) => LabelTable::from_json(&std::fs::read_to_string(path)?)?,
            None => LabelTable::from_params(&self.table_params()?)?,
        };
        if table.case != self.case_id()? {
            return Err(Error::Param(format!(
                "label table is for case {}, requested case {}",
                table.case, self.case
            )));
        }
        Ok(table)
    }

    fn manifest_params(&self) -> serde_json::Value {
        match self.case {
            1 => json!({"min_exp": self.min_exp, "max_mac_exp": self.max_mac_exp}),
            2 => json!({"min_kb": self.min_kb, "max_kb": self.max_kb, "step_kb": self.step_kb}),
            _ => json!({"platform": self.platform.as_ref().map(|p| p.display().to_string())}),
        }
    }
}

/// Input-space sampling bounds shared by `gen` and `train`.
#[derive(Args, Clone)]
struct SamplingArgs {
    #[arg(long, default_value_t = 100_000)]
    m_max: u64,
    #[arg(long, default_value_t = 10_000)]
    n_max: u64,
    #[arg(long, default_value_t = 1_000)]
    k_max: u64,
    /// Case 1: smallest sampled MAC budget exponent
    #[arg(long, default_value_t = 8)]
    mac_exp_min: u32,
    /// Case 1: largest sampled MAC budget exponent
    #[arg(long, default_value_t = 18)]
    mac_exp_max: u32,
    /// Case 2: bandwidth range in bytes/cycle
    #[arg(long, default_value_t = 1)]
    bw_min: u64,
    #[arg(long, default_value_t = 100)]
    bw_max: u64,
    /// Case 2: capacity budget grid in KB
    #[arg(long, default_value_t = 300)]
    budget_min: u64,
    #[arg(long, default_value_t = 3000)]
    budget_max: u64,
    #[arg(long, default_value_t = 100)]
    budget_step: u64,
}

impl SamplingArgs {
    fn ranges(&self) -> SamplingRanges {
        SamplingRanges { m_max: self.m_max, n_max: self.n_max, k_max: self.k_max }
    }

    fn gen_params(&self, table_args: &TableArgs) -> Result<GenParams> {
        Ok(match table_args.case_id()? {
            CaseId::Case1 => GenParams::Case1(Case1Params {
                ranges: self.ranges(),
                mac_exp_min: self.mac_exp_min,
                mac_exp_max: self.mac_exp_max,
            }),
            CaseId::Case2 => GenParams::Case2(Case2Params {
                ranges: self.ranges(),
                array_table: LabelTable::case1(table_args.min_exp, table_args.max_mac_exp)?,
                bw_min: self.bw_min,
                bw_max: self.bw_max,
                budget_min_kb: self.budget_min,
                budget_max_kb: self.budget_max,
                budget_step_kb: self.budget_step,
            }),
            CaseId::Case3 => GenParams::Case3(Case3Params {
                ranges: self.ranges(),
                platform: table_args.load_platform()?,
            }),
        })
    }

    fn manifest_params(&self) -> serde_json::Value {
        json!({
            "m_max": self.m_max, "n_max": self.n_max, "k_max": self.k_max,
            "mac_exp_min": self.mac_exp_min, "mac_exp_max": self.mac_exp_max,
            "bw_min": self.bw_min, "bw_max": self.bw_max,
            "budget_min": self.budget_min, "budget_max": self.budget_max,
            "budget_step": self.budget_step,
        })
    }
}

#[derive(Args)]
struct LabelsArgs {
    #[command(flatten)]
    table: TableArgs,
    /// Output JSON path
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    table: TableArgs,
    #[command(flatten)]
    sampling: SamplingArgs,
    /// Number of records
    #[arg(long, short)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Load the label table from a file instead of building it inline
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Worker threads (falls back to SYSTOLIC_DSE_THREADS, then all cores)
    #[arg(long)]
    threads: Option<usize>,
    /// Output CSV path
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct StatsArgs {
    /// Dataset CSV
    #[arg(long, short)]
    input: PathBuf,
    /// Output histogram CSV (`label,frequency`)
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct PcaArgs {
    /// Dataset CSV
    #[arg(long, short)]
    input: PathBuf,
    /// The two class ids to project, comma separated (e.g. "3,17")
    #[arg(long, value_parser = parse_class_pair)]
    classes: (usize, usize),
    /// Output projection CSV (`pc1,pc2,class`)
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct TrainArgs {
    #[command(flatten)]
    table: TableArgs,
    #[command(flatten)]
    sampling: SamplingArgs,
    /// Training dataset CSV
    #[arg(long, short)]
    input: PathBuf,
    /// Load the label table from a file instead of building it inline
    #[arg(long)]
    labels: Option<PathBuf>,
    /// Epochs (default: 15 for cases 1 and 3, 22 for case 2)
    #[arg(long)]
    epochs: Option<usize>,
    #[arg(long, default_value_t = 256)]
    batch_size: usize,
    #[arg(long, default_value_t = 1e-3)]
    learning_rate: f64,
    #[arg(long, default_value_t = 0.1)]
    val_fraction: f64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = DEFAULT_EMBEDDING_DIM)]
    embedding_dim: usize,
    #[arg(long, default_value_t = DEFAULT_HIDDEN_UNITS)]
    hidden_units: usize,
    /// Train the plain-MLP baseline on standardized raw features
    #[arg(long)]
    baseline: bool,
    /// Output checkpoint path
    #[arg(long, short)]
    out: PathBuf,
}

#[derive(Args)]
struct PredictArgs {
    /// Model checkpoint
    #[arg(long)]
    model: PathBuf,
    /// Raw feature values, comma separated (e.g. "1024,256,64,14")
    #[arg(long, short)]
    input: String,
}

#[derive(Args)]
struct EvalArgs {
    /// Model checkpoint
    #[arg(long)]
    model: PathBuf,
    /// Evaluation dataset CSV with oracle labels
    #[arg(long, short)]
    input: PathBuf,
    /// Output report JSON
    #[arg(long)]
    report: PathBuf,
    /// Optional per-sample ratio CSV (`index,ratio`)
    #[arg(long)]
    ratios: Option<PathBuf>,
    /// Optional predicted-vs-actual histogram CSV
    #[arg(long)]
    hist: Option<PathBuf>,
}

fn parse_class_pair(s: &str) -> std::result::Result<(usize, usize), String> {
    let parts: Vec<&str> = s.split(',').collect();
    if parts.len() != 2 {
        return Err("expected two comma-separated class ids".into());
    }
    let a = parts[0].trim().parse().map_err(|e| format!("bad class id {:?}: {e}", parts[0]))?;
    let b = parts[1].trim().parse().map_err(|e| format!("bad class id {:?}: {e}", parts[1]))?;
    Ok((a, b))
}

/// Entry point used by the binary: parses, dispatches, maps errors to
/// exit codes.
pub fn main() -> ! {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1,
            };
            let _ = e.print();
            std::process::exit(code);
        }
    };
    match dispatch(cli) {
        Ok(()) => std::process::exit(0),
        Err(e) => {
            eprintln!("error: {e}");
            std::process::exit(e.exit_code());
        }
    }
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Labels(args) => cmd_labels(args),
        Command::Gen(args) => cmd_gen(args),
        Command::Stats(args) => cmd_stats(args),
        Command::Pca(args) => cmd_pca(args),
        Command::Train(args) => cmd_train(args),
        Command::Predict(args) => cmd_predict(args),
        Command::Eval(args) => cmd_eval(args),
    }
}

struct ManifestScope {
    subcommand: &'static str,
    started: Instant,
}

impl ManifestScope {
    fn new(subcommand: &'static str) -> Self {
        Self { subcommand, started: Instant::now() }
    }

    /// Writes `<primary>.manifest.json` describing the finished run.
    fn write(
        &self,
        primary: &Path,
        parameters: serde_json::Value,
        seeds: &[u64],
        inputs: &[&Path],
        outputs: &[&Path],
    ) -> Result<()> {
        let manifest = json!({
            "subcommand": self.subcommand,
            "version": env!("CARGO_PKG_VERSION"),
            "parameters": parameters,
            "seeds": seeds,
            "inputs": inputs.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
            "outputs": outputs.iter().map(|p| p.display().to_string()).collect::<Vec<_>>(),
            "duration_ms": self.started.elapsed().as_millis() as u64,
        });
        let path = manifest_path(primary);
        std::fs::write(&path, serde_json::to_string_pretty(&manifest).unwrap() + "\n")?;
        Ok(())
    }
}

pub fn manifest_path(artifact: &Path) -> PathBuf {
    let mut name = artifact.file_name().unwrap_or_default().to_os_string();
    name.push(".manifest.json");
    artifact.with_file_name(name)
}

fn cmd_labels(args: LabelsArgs) -> Result<()> {
    let scope = ManifestScope::new("labels");
    let table = LabelTable::from_params(&args.table.table_params()?)?;
    std::fs::write(&args.out, table.to_json() + "\n")?;
    println!("wrote {} entries to {}", table.len(), args.out.display());
    scope.write(
        &args.out,
        json!({"case": args.table.case, "table": args.table.manifest_params()}),
        &[],
        &[],
        &[&args.out],
    )
}

fn resolve_threads(flag: Option<usize>) -> usize {
    flag.or_else(|| {
        std::env::var("SYSTOLIC_DSE_THREADS").ok().and_then(|s| s.parse().ok())
    })
    .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1))
}

fn cmd_gen(args: GenArgs) -> Result<()> {
    let scope = ManifestScope::new("gen");
    let table = args.table.build_table(args.labels.as_deref())?;
    let params = args.sampling.gen_params(&args.table)?;
    let threads = resolve_threads(args.threads);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads)
        .build()
        .map_err(|e| Error::Param(format!("cannot build a {threads}-thread pool: {e}")))?;

    // chunked so progress lands every 10k records; per-index seeding keeps
    // the output independent of the chunking
    const CHUNK: usize = 10_000;
    let mut records = Vec::with_capacity(args.n);
    let mut skipped = 0u64;
    let mut done = 0usize;
    while done < args.n {
        let end = (done + CHUNK).min(args.n);
        let (chunk, skips) = pool.install(|| {
            data::generate_records(done as u64..end as u64, args.seed, &params, &table)
        })?;
        records.extend(chunk);
        skipped += skips;
        done = end;
        if args.n >= CHUNK {
            eprintln!("generated {done}/{} records", args.n);
        }
    }
    let ds = Dataset {
        case: params.case(),
        num_features: params.num_features(),
        records,
        skipped,
    };
    data::write_csv(&ds, &args.out)?;
    println!(
        "wrote {} records to {} ({} infeasible draws skipped)",
        ds.len(),
        args.out.display(),
        ds.skipped
    );
    let inputs: Vec<&Path> = args.labels.iter().map(|p| p.as_path()).collect();
    scope.write(
        &args.out,
        json!({
            "case": args.table.case,
            "n": args.n,
            "threads": threads,
            "table": args.table.manifest_params(),
            "sampling": args.sampling.manifest_params(),
            "labels_file": args.labels.as_ref().map(|p| p.display().to_string()),
            "skipped": ds.skipped,
        }),
        &[args.seed],
        &inputs,
        &[&args.out],
    )
}

fn cmd_stats(args: StatsArgs) -> Result<()> {
    let scope = ManifestScope::new("stats");
    let (case, ds) = data::read_csv_auto(&args.input)?;
    let histogram = stats::class_histogram(&ds)?;
    let mut out = String::from("label,frequency\n");
    for (label, freq) in &histogram {
        out.push_str(&format!("{label},{freq}\n"));
    }
    std::fs::write(&args.out, out)?;
    println!(
        "case {case}: {} classes over {} records, head class covers {:.2}%",
        histogram.len(),
        ds.len(),
        histogram[0].1 * 100.0
    );
    scope.write(
        &args.out,
        json!({"input_case": case.number()}),
        &[],
        &[&args.input],
        &[&args.out],
    )
}

fn cmd_pca(args: PcaArgs) -> Result<()> {
    let scope = ManifestScope::new("pca");
    let (case, ds) = data::read_csv_auto(&args.input)?;
    let features: Vec<Vec<f64>> = ds
        .records
        .iter()
        .map(|r| r.features.iter().map(|&v| v as f64).collect())
        .collect();
    let labels = ds.labels();
    let result = stats::top2_pca(&features, &labels, args.classes)?;
    let mut out = String::from("pc1,pc2,class\n");
    for (x, y, class) in &result.projections {
        out.push_str(&format!("{x},{y},{class}\n"));
    }
    std::fs::write(&args.out, out)?;
    println!(
        "case {case}: projected {} points of classes {} and {}",
        result.projections.len(),
        args.classes.0,
        args.classes.1
    );
    scope.write(
        &args.out,
        json!({"classes": [args.classes.0, args.classes.1], "input_case": case.number()}),
        &[],
        &[&args.input],
        &[&args.out],
    )
}

fn cmd_train(args: TrainArgs) -> Result<()> {
    let scope = ManifestScope::new("train");
    let case = args.table.case_id()?;
    let file_case = data::peek_case(&args.input)?;
    if file_case != case {
        return Err(Error::Param(format!(
            "{} holds a case-{file_case} dataset, but --case {case} was requested",
            args.input.display()
        )));
    }
    let table = args.table.build_table(args.labels.as_deref())?;
    let ds = data::read_csv(&args.input, case, Some(table.len()))?;
    let gen_params = args.sampling.gen_params(&args.table)?;
    let encoder = EncoderSpec::default_for(&gen_params)?;
    if encoder.num_features() != ds.num_features {
        return Err(Error::Shape(format!(
            "dataset has {} features but the case-{} encoder expects {}",
            ds.num_features,
            case,
            encoder.num_features()
        )));
    }
    let epochs = args.epochs.unwrap_or(match case {
        CaseId::Case2 => 22,
        _ => 15,
    });
    let spec = ModelSpec {
        encoder,
        embedding_dim: args.embedding_dim,
        hidden_units: args.hidden_units,
        num_classes: table.len(),
        baseline_mode: args.baseline,
        case,
        table_params: table.params.clone(),
    };
    let cfg = TrainConfig {
        epochs,
        batch_size: args.batch_size,
        learning_rate: args.learning_rate,
        validation_fraction: args.val_fraction,
        seed: args.seed,
        ..TrainConfig::default()
    };
    let mut model = model::init_model(&spec, args.seed)?;
    eprintln!(
        "training case-{case} {} on {} records ({} classes, {} epochs)",
        if args.baseline { "baseline MLP" } else { "recommender" },
        ds.len(),
        table.len(),
        epochs
    );
    let report = model.train(&ds, &cfg)?;
    for (e, stats) in report.epochs.iter().enumerate() {
        println!(
            "{},{:.6},{:.6},{:.6}",
            e + 1,
            stats.train_loss,
            stats.train_accuracy,
            stats.validation_accuracy
        );
    }
    model.save_checkpoint(&args.out)?;
    eprintln!("checkpoint written to {}", args.out.display());
    scope.write(
        &args.out,
        json!({
            "case": args.table.case,
            "epochs": epochs,
            "batch_size": args.batch_size,
            "learning_rate": args.learning_rate,
            "val_fraction": args.val_fraction,
            "embedding_dim": args.embedding_dim,
            "hidden_units": args.hidden_units,
            "baseline": args.baseline,
            "num_classes": table.len(),
            "table": args.table.manifest_params(),
            "sampling": args.sampling.manifest_params(),
            "final_validation_accuracy": report.epochs.last().map(|s| s.validation_accuracy),
        }),
        &[args.seed],
        &[&args.input],
        &[&args.out],
    )
}

fn cmd_predict(args: PredictArgs) -> Result<()> {
    let model = model::load_checkpoint(&args.model)?;
    let features: Vec<u64> = args
        .input
        .split(',')
        .map(|f| {
            f.trim()
                .parse()
                .map_err(|_| Error::Param(format!("bad feature value {f:?}")))
        })
        .collect::<Result<_>>()?;
    let id = model.predict(&features)?;
    let table = LabelTable::from_params(&model.spec.table_params)?;
    let entry = table.lookup(id).ok_or_else(|| {
        Error::Checkpoint(format!("predicted id {id} exceeds the {}-entry table", table.len()))
    })?;
    println!("{id}");
    println!("{entry}");
    Ok(())
}

fn cmd_eval(args: EvalArgs) -> Result<()> {
    let scope = ManifestScope::new("eval");
    let model = model::load_checkpoint(&args.model)?;
    let case = model.spec.case;
    let table = LabelTable::from_params(&model.spec.table_params)?;
    if table.len() != model.spec.num_classes {
        return Err(Error::Checkpoint(format!(
            "model has {} classes but its table has {} entries",
            model.spec.num_classes,
            table.len()
        )));
    }
    let file_case = data::peek_case(&args.input)?;
    if file_case != case {
        return Err(Error::Param(format!(
            "{} holds a case-{file_case} dataset, but the model was trained for case {case}",
            args.input.display()
        )));
    }
    let ds = data::read_csv(&args.input, case, Some(table.len()))?;
    let labels = ds.labels();
    let predictions = model.predict_all(&ds)?;
    let report = match case {
        CaseId::Case1 => {
            let queries = ds.case1_queries()?;
            metrics::normalized_performance(
                &QueryBatch::Case1(&queries),
                &predictions,
                &labels,
                &table,
            )?
        }
        CaseId::Case2 => {
            let queries = ds.case2_queries()?;
            metrics::normalized_performance(
                &QueryBatch::Case2(&queries),
                &predictions,
                &labels,
                &table,
            )?
        }
        CaseId::Case3 => {
            let TableParams::Case3 { platform } = &table.params else {
                return Err(Error::Checkpoint("case-3 table params lost their platform".into()));
            };
            let queries = ds.case3_queries()?;
            metrics::normalized_performance(
                &QueryBatch::Case3 { queries: &queries, platform },
                &predictions,
                &labels,
                &table,
            )?
        }
    };
    let report_json = json!({
        "count": report.count,
        "accuracy": report.accuracy,
        "geomean": report.geomean,
        "infeasible_rate": report.infeasible_rate,
    });
    std::fs::write(&args.report, serde_json::to_string_pretty(&report_json).unwrap() + "\n")?;
    println!(
        "count {} accuracy {:.4} geomean {:.5} infeasible {:.4}",
        report.count, report.accuracy, report.geomean, report.infeasible_rate
    );

    let mut outputs: Vec<&Path> = vec![&args.report];
    if let Some(path) = &args.ratios {
        let mut out = String::from("index,ratio\n");
        for (i, r) in report.ratios.iter().enumerate() {
            out.push_str(&format!("{i},{r}\n"));
        }
        std::fs::write(path, out)?;
        outputs.push(path);
    }
    if let Some(path) = &args.hist {
        std::fs::write(path, prediction_histogram_csv(&labels, &predictions))?;
        outputs.push(path);
    }
    scope.write(
        &args.report,
        json!({"model": args.model.display().to_string(), "case": case.number()}),
        &[],
        &[&args.model, &args.input],
        &outputs,
    )
}

/// `label,actual_frequency,predicted_frequency` over the union of labels
/// seen on either side, ascending by label.
fn prediction_histogram_csv(labels: &[usize], predictions: &[usize]) -> String {
    use std::collections::BTreeMap;
    let mut actual: BTreeMap<usize, u64> = BTreeMap::new();
    let mut predicted: BTreeMap<usize, u64> = BTreeMap::new();
    for &l in labels {
        *actual.entry(l).or_insert(0) += 1;
    }
    for &p in predictions {
        *predicted.entry(p).or_insert(0) += 1;
    }
    let n = labels.len() as f64;
    let mut out = String::from("label,actual_frequency,predicted_frequency\n");
    let all: std::collections::BTreeSet<usize> =
        actual.keys().chain(predicted.keys()).cloned().collect();
    for label in all {
        let a = *actual.get(&label).unwrap_or(&0) as f64 / n;
        let p = *predicted.get(&label).unwrap_or(&0) as f64 / n;
        out.push_str(&format!("{label},{a},{p}\n"));
    }
    out
}
