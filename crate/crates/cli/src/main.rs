use std::collections::{BTreeSet, HashMap};
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use log::{info, warn};
use serde::Serialize;

use rfselect::data::write_atomic;
use rfselect::harness::{self, SweepConfig, SweepOptions, SweepPlan};
use rfselect::metrics::{evaluate, stability, EvalRecord};
use rfselect::selection::{boruta_select, vita_select, Decision, DEFAULT_BORUTA_ALPHA, DEFAULT_VITA_ALPHA};
use rfselect::simgen::{
    gen_study1, gen_study2, gen_surrogate_expression, ExpressionMatrix, Study1Config, Study2Config,
};
use rfselect::{Dataset, HyperParams};

#[derive(Parser, Debug)]
#[command(name = "rfselect", version, about = "Random-forest variable selection with Vita and Boruta")]
struct Cli {
    /// Worker threads for forest growing (default: all cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Master seed; overrides seeds in config files.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Only print warnings and errors.
    #[arg(long, global = true)]
    quiet: bool,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Generate one replicate of a simulation study as CSV plus truth file.
    Simulate(SimulateArgs),
    /// Run Vita or Boruta on a dataset and print a JSON report.
    Select(SelectArgs),
    /// Run a one-at-a-time hyperparameter sweep.
    Sweep(SweepArgs),
    /// Summarize the records of a finished sweep.
    Summarize(SummarizeArgs),
    /// FDR, sensitivity and stability of given selections.
    Metrics(MetricsArgs),
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
    study: u8,
    /// JSON study configuration (study 1 or study 2 fields).
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    replicate: u64,
    /// Output CSV; the truth file goes next to it with extension `.truth`.
    #[arg(long)]
    out: PathBuf,
    /// Samples-by-genes expression CSV for study 2.
    #[arg(long, conflicts_with = "surrogate")]
    expression: Option<PathBuf>,
    /// Surrogate expression size for study 2, as SAMPLESxGENES.
    #[arg(long, default_value = "78x4946")]
    surrogate: String,
}

#[derive(Clone, Copy, Debug, ValueEnum)]
enum MethodArg {
    Vita,
    Boruta,
}

#[derive(Args, Debug)]
struct ForestArgs {
    #[arg(long, default_value_t = 500)]
    num_trees: usize,
    #[arg(long, default_value_t = 0.014)]
    mtry_prop: f64,
    #[arg(long, default_value_t = true, action = clap::ArgAction::Set)]
    replace: bool,
    #[arg(long, default_value_t = 0.632)]
    sample_fraction: f64,
    /// Proportion of rows; default 1/n.
    #[arg(long)]
    min_node_size_prop: Option<f64>,
}

#[derive(Args, Debug)]
struct SelectArgs {
    #[arg(long, value_enum)]
    method: MethodArg,
    /// CSV with a 0/1 column `y` and numeric predictors.
    #[arg(long)]
    data: PathBuf,
    /// Truth file (one variable name per line); adds FDR and sensitivity.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Significance level; 0.05 for vita, 0.01 for boruta.
    #[arg(long)]
    alpha: Option<f64>,
    #[command(flatten)]
    forest: ForestArgs,
    /// Boruta rounds.
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
    /// Write the report here instead of standard output.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct SweepArgs {
    #[arg(long, conflicts_with = "profile", required_unless_present = "profile")]
    config: Option<PathBuf>,
    /// Built-in configuration, e.g. desk-study1-k10.
    #[arg(long)]
    profile: Option<String>,
    #[arg(long, default_value_t = 1)]
    workers: usize,
    /// Output directory; defaults to the config's `out`.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Override the number of replicates.
    #[arg(long)]
    replicates: Option<usize>,
}

#[derive(Args, Debug)]
struct SummarizeArgs {
    /// Sweep output directory.
    #[arg(long = "in")]
    input: PathBuf,
    /// Summary CSV; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Per-cell stability CSV (study 1).
    #[arg(long)]
    stability: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct MetricsArgs {
    /// Truth file, one variable name per line.
    #[arg(long)]
    truth: Option<PathBuf>,
    /// Selected variable names, comma separated.
    #[arg(long, value_delimiter = ',', requires = "truth")]
    selected: Option<Vec<String>>,
    /// File with one selection per line (names separated by spaces or commas).
    #[arg(long)]
    selections: Option<PathBuf>,
}

/// Writes `text` to `path` through a temporary file, or to stdout.
fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => write_atomic(p, |f| {
            f.write_all(text.as_bytes())?;
            Ok(())
        })
        .with_context(|| format!("writing {}", p.display())),
        None => {
            let mut out = std::io::stdout().lock();
            out.write_all(text.as_bytes())?;
            out.flush()?;
            Ok(())
        }
    }
}

fn read_json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
}

fn log_config<T: Serialize>(what: &str, value: &T) {
    info!("{what}: {}", serde_json::to_string(value).unwrap_or_default());
}

fn surrogate_size(s: &str) -> Result<(usize, usize)> {
    let (m, p) = s.split_once('x').context("surrogate size must look like 78x4946")?;
    Ok((m.parse().context("surrogate samples")?, p.parse().context("surrogate genes")?))
}

fn simulate(args: &SimulateArgs, seed: Option<u64>) -> Result<()> {
    let rep = if args.study == 1 {
        let mut cfg: Study1Config = match &args.config {
            Some(p) => read_json(p)?,
            None => Study1Config::default(),
        };
        if let Some(s) = seed {
            cfg.seed = s;
        }
        log_config("study 1 config", &cfg);
        gen_study1(&cfg, args.replicate)?
    } else {
        let mut cfg: Study2Config = match &args.config {
            Some(p) => read_json(p)?,
            None => Study2Config::default(),
        };
        if let Some(s) = seed {
            cfg.seed = s;
        }
        log_config("study 2 config", &cfg);
        let base = match &args.expression {
            Some(p) => ExpressionMatrix::read_csv(p)?,
            None => {
                let (m, p) = surrogate_size(&args.surrogate)?;
                gen_surrogate_expression(m, p, cfg.seed)?
            }
        };
        gen_study2(&cfg, &base, args.replicate)?
    };
    if rep.null_replicate {
        warn!("replicate {} has no effect variables", args.replicate);
    }
    rep.data.write_csv(&args.out)?;
    let truth = args.out.with_extension("truth");
    rep.data.write_truth_file(&truth)?;
    info!("wrote {} and {}", args.out.display(), truth.display());
    Ok(())
}

#[derive(Serialize)]
struct VariableReport<'a> {
    name: &'a str,
    importance: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pvalue: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    adjusted: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    decision: Option<Decision>,
    #[serde(skip_serializing_if = "Option::is_none")]
    hits: Option<usize>,
    selected: bool,
}

#[derive(Serialize)]
struct SelectReport<'a> {
    method: &'static str,
    alpha: f64,
    hyperparams: HyperParams,
    #[serde(skip_serializing_if = "Option::is_none")]
    iterations_run: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    trees_grown: Option<usize>,
    selected: Vec<&'a str>,
    #[serde(skip_serializing_if = "Option::is_none")]
    evaluation: Option<EvalRecord>,
    variables: Vec<VariableReport<'a>>,
}

fn select(args: &SelectArgs, seed: Option<u64>) -> Result<()> {
    let mut data = Dataset::read_csv(&args.data)?;
    if let Some(t) = &args.truth {
        data = data.attach_truth_file(t)?;
    }
    let f = &args.forest;
    let hp = HyperParams {
        num_trees: f.num_trees,
        mtry_prop: f.mtry_prop,
        replace: f.replace,
        sample_fraction: f.sample_fraction,
        min_node_size_prop: f.min_node_size_prop.unwrap_or(1.0 / data.n() as f64),
        seed: seed.unwrap_or(0),
    };
    hp.validate()?;
    log_config("hyperparameters", &hp);
    let names = data.names();
    let (alpha, selected, variables, iterations, trees) = match args.method {
        MethodArg::Vita => {
            let alpha = args.alpha.unwrap_or(DEFAULT_VITA_ALPHA);
            let r = vita_select(&data, &hp, alpha)?;
            let vars = (0..data.p())
                .map(|j| VariableReport {
                    name: &names[j],
                    importance: r.importance[j],
                    pvalue: Some(r.pvalues[j]),
                    adjusted: Some(r.adjusted[j]),
                    decision: None,
                    hits: None,
                    selected: r.selected.binary_search(&j).is_ok(),
                })
                .collect();
            (alpha, r.selected, vars, None, None)
        }
        MethodArg::Boruta => {
            let alpha = args.alpha.unwrap_or(DEFAULT_BORUTA_ALPHA);
            let r = boruta_select(&data, &hp, alpha, args.max_iter)?;
            let vars = (0..data.p())
                .map(|j| VariableReport {
                    name: &names[j],
                    importance: r.mean_importance[j],
                    pvalue: None,
                    adjusted: None,
                    decision: Some(r.decision[j]),
                    hits: Some(r.hits[j]),
                    selected: r.decision[j] == Decision::Confirmed,
                })
                .collect();
            (alpha, r.confirmed(), vars, Some(r.iterations_run), Some(r.trees_grown))
        }
    };
    let report = SelectReport {
        method: match args.method {
            MethodArg::Vita => "vita",
            MethodArg::Boruta => "boruta",
        },
        alpha,
        hyperparams: hp,
        iterations_run: iterations,
        trees_grown: trees,
        selected: selected.iter().map(|&j| names[j].as_str()).collect(),
        evaluation: data.truth().map(|t| evaluate(&selected, t)),
        variables,
    };
    info!("{} variables selected", report.selected.len());
    emit(args.out.as_deref(), &(serde_json::to_string_pretty(&report)? + "\n"))
}

fn sweep(args: &SweepArgs, seed: Option<u64>) -> Result<bool> {
    let mut cfg = match (&args.config, &args.profile) {
        (Some(p), _) => read_json::<SweepConfig>(p)?,
        (None, Some(name)) => SweepConfig::profile(name)
            .with_context(|| format!("available profiles: {}", SweepConfig::PROFILES.join(", ")))?,
        (None, None) => unreachable!("clap requires one of them"),
    };
    if let Some(s) = seed {
        cfg.seed = s;
    }
    if let Some(r) = args.replicates {
        cfg.n_replicates = r;
    }
    let out = args.out.clone().or_else(|| cfg.out.clone()).context("no output directory: pass --out")?;
    cfg.out = Some(out.clone());
    log_config("sweep config", &cfg);
    let plan = SweepPlan::new(cfg)?;
    let report = harness::sweep(&plan, &out, SweepOptions { workers: args.workers, job_limit: None })?;
    for s in &report.skipped_cells {
        warn!("skipped illegal cell {s}");
    }
    info!(
        "{} records in {} ({} jobs run, {} resumed)",
        report.records.len(),
        out.display(),
        report.jobs_run,
        report.jobs_resumed
    );
    for e in &report.errors {
        log::error!("{e}");
    }
    Ok(report.errors.is_empty())
}

fn summarize(args: &SummarizeArgs) -> Result<()> {
    let cfg: SweepConfig = read_json(&args.input.join(harness::CONFIG_FILE))?;
    let n = SweepPlan::new(cfg.clone())?.n();
    let records = harness::read_records(&harness::records_path(&args.input))?;
    let summary = harness::summarize(&records, &cfg.defaults, n)?;
    match &args.out {
        Some(p) => harness::write_summary_csv(p, &summary.rows)?,
        None => emit(None, &harness::summary_csv(&summary.rows))?,
    }
    if let Some(p) = &args.stability {
        harness::write_stability_csv(p, &summary.stability)?;
    }
    info!("{} summary rows, {} stability rows", summary.rows.len(), summary.stability.len());
    Ok(())
}

fn read_names(path: &Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    Ok(text.lines().map(str::trim).filter(|l| !l.is_empty()).map(String::from).collect())
}

#[derive(Serialize)]
struct MetricsReport {
    #[serde(skip_serializing_if = "Option::is_none")]
    evaluation: Option<EvalRecord>,
    #[serde(skip_serializing_if = "Option::is_none")]
    stability: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    selections: Option<usize>,
}

fn metrics(args: &MetricsArgs) -> Result<()> {
    if args.selected.is_none() && args.selections.is_none() {
        bail!("nothing to evaluate: pass --selected with --truth, or --selections");
    }
    let mut index: HashMap<String, usize> = HashMap::new();
    let mut id = |name: &str| {
        let next = index.len();
        *index.entry(name.to_string()).or_insert(next)
    };
    let truth_ids: BTreeSet<usize> = match &args.truth {
        Some(p) => read_names(p)?.iter().map(|n| id(n)).collect(),
        None => BTreeSet::new(),
    };
    let selected: Option<Vec<usize>> =
        args.selected.as_ref().map(|s| s.iter().map(|n| n.trim()).filter(|n| !n.is_empty()).map(&mut id).collect());
    let sets: Option<Vec<Vec<usize>>> = match &args.selections {
        Some(p) => {
            let text = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
            Some(
                text.lines()
                    .map(|l| {
                        l.split(|c: char| c == ',' || c.is_whitespace())
                            .filter(|t| !t.is_empty())
                            .map(&mut id)
                            .collect()
                    })
                    .collect(),
            )
        }
        None => None,
    };
    let mask: Vec<bool> = (0..index.len()).map(|j| truth_ids.contains(&j)).collect();
    let report = MetricsReport {
        evaluation: selected.map(|s| evaluate(&s, &mask)),
        stability: sets.as_ref().map(|s| stability(s)).transpose()?,
        selections: sets.as_ref().map(Vec::len),
    };
    emit(None, &(serde_json::to_string_pretty(&report)? + "\n"))
}

fn run(cli: &Cli) -> Result<bool> {
    if let Some(t) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(t).build_global().context("configuring threads")?;
    }
    match &cli.command {
        Command::Simulate(a) => simulate(a, cli.seed).map(|_| true),
        Command::Select(a) => select(a, cli.seed).map(|_| true),
        Command::Sweep(a) => sweep(a, cli.seed),
        Command::Summarize(a) => summarize(a).map(|_| true),
        Command::Metrics(a) => metrics(a).map(|_| true),
    }
}

/// The error chain, skipping causes already spelled out by their parent.
fn describe(e: &anyhow::Error) -> String {
    let mut out = String::new();
    for cause in e.chain() {
        let msg = cause.to_string();
        if !out.contains(&msg) {
            if !out.is_empty() {
                out.push_str(": ");
            }
            out.push_str(&msg);
        }
    }
    out
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let level = if cli.quiet { log::LevelFilter::Warn } else { log::LevelFilter::Info };
    env_logger::Builder::new().filter_level(level).format_timestamp(None).init();
    match run(&cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            log::error!("{}", describe(&e));
            ExitCode::from(1)
        }
    }
}
