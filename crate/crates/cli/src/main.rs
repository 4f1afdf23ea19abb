mod config;

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use logicerr::dataset::aoj::{fetch_statement, ingest_aoj, merge_submissions};
use logicerr::dataset::{Dataset, SubmissionStatus};
use logicerr::evaluate::{
    augmentation_table, evaluate, render_augmentation, render_report, FprMode, ReportFormat,
};
use logicerr::judge::JudgeStatus;
use logicerr::llm::{Client, ExchangeLog, ModelConfig, TransportKind};
use logicerr::pipeline::{
    read_results, unix_now, write_results, ClassificationResult, Pipeline, RunManifest,
};
use logicerr::prompts::{CodeSample, FewShotBank, PromptBuilder, Templates};
use logicerr::taxonomy::{ErrorId, Taxonomy};

use config::RunConfig;

const RESULTS_FILE: &str = "classifications.jsonl";
const AUGMENTED_RESULTS_FILE: &str = "augmented_classifications.jsonl";
const EXCHANGES_FILE: &str = "exchanges.jsonl";
const RUNS_DIR: &str = "runs";

#[derive(Parser)]
#[command(
    name = "logicerr",
    version,
    about = "Classify and synthesize logical errors in novice programs"
)]
struct Cli {
    /// Configuration file (TOML). Defaults to $LOGICERR_CONFIG, then ./logicerr.toml.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Dataset directory, overriding the configuration file.
    #[arg(long, global = true)]
    dataset: Option<PathBuf>,
    /// Samples processed concurrently.
    #[arg(long, global = true)]
    parallelism: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Fetch submissions from the online judge into the dataset.
    Ingest(IngestArgs),
    /// Run the ten per-type prompts on samples and record verdicts.
    Classify(ClassifyArgs),
    /// Generate programs with a requested error type from accepted code.
    Augment(AugmentArgs),
    /// Judge generated programs and categorize their outcomes.
    Judge(JudgeArgs),
    /// Report accuracy, false-positive rates and augmentation outcomes.
    Evaluate(EvaluateArgs),
}

#[derive(Args)]
struct IngestArgs {
    /// Problem ids to fetch.
    problems: Vec<String>,
    /// Fetch every problem of a course listed in the configuration.
    #[arg(long)]
    course: Option<String>,
    /// Keep only submissions with this judge status.
    #[arg(long, value_enum, default_value_t = StatusFilter::All)]
    status: StatusFilter,
    /// Replay responses from the cache directory without network access.
    #[arg(long)]
    offline: bool,
    /// Cache directory for API responses.
    #[arg(long)]
    cache_dir: Option<PathBuf>,
    /// API base URL.
    #[arg(long)]
    api_base: Option<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum StatusFilter {
    All,
    Accepted,
    WrongAnswer,
    CompileError,
    RuntimeError,
    TimeLimit,
}

impl StatusFilter {
    fn status(self) -> Option<SubmissionStatus> {
        let s = match self {
            StatusFilter::All => return None,
            StatusFilter::Accepted => JudgeStatus::Accepted,
            StatusFilter::WrongAnswer => JudgeStatus::WrongAnswer,
            StatusFilter::CompileError => JudgeStatus::CompileError,
            StatusFilter::RuntimeError => JudgeStatus::RuntimeError,
            StatusFilter::TimeLimit => JudgeStatus::TimeLimit,
        };
        Some(SubmissionStatus::Judged(s))
    }
}

#[derive(Args)]
struct ModelArgs {
    /// Replay responses from an exchange log instead of calling the API.
    #[arg(long, value_name = "FIXTURES")]
    mock: Option<PathBuf>,
    /// Model identifier sent to the API.
    #[arg(long)]
    model: Option<String>,
}

#[derive(Args)]
struct ClassifyArgs {
    /// Every labeled sample.
    #[arg(long, conflicts_with = "sample")]
    all: bool,
    /// Sample id; repeatable.
    #[arg(long)]
    sample: Vec<String>,
    /// Results file. Defaults to classifications.jsonl in the dataset.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Args)]
struct AugmentArgs {
    /// Error type to inject. Without it the configured quotas are used.
    #[arg(long, value_parser = parse_error_id)]
    target: Option<ErrorId>,
    /// Attempts for --target.
    #[arg(long, requires = "target", default_value_t = 1)]
    count: u32,
    /// Remarks for every prompt, replacing per-problem remarks.
    #[arg(long)]
    remarks: Option<String>,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Args)]
struct JudgeArgs {
    /// Judge the unresolved augmented samples of the dataset.
    #[arg(long, required = true)]
    augmented: bool,
    /// Toolchain profile name.
    #[arg(long, default_value = "cpp17")]
    profile: String,
    #[command(flatten)]
    model: ModelArgs,
}

#[derive(Args)]
struct EvaluateArgs {
    /// Classification results. Defaults to classifications.jsonl in the dataset.
    #[arg(long)]
    results: Option<PathBuf>,
    /// False-positive rate definition: negatives or paper-rowwise. Defaults to the configured mode
    #[arg(long, value_parser = parse_fpr_mode)]
    fpr_mode: Option<FprMode>,
    /// Report format: text or json
    #[arg(long, value_parser = parse_format, default_value = "text")]
    format: ReportFormat,
    /// Show both FPR definitions and unparseable counts.
    #[arg(long)]
    verbose: bool,
    /// Write the report to a file instead of stdout.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_error_id(s: &str) -> Result<ErrorId, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_fpr_mode(s: &str) -> Result<FprMode, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn parse_format(s: &str) -> Result<ReportFormat, String> {
    s.parse().map_err(|e| format!("{e}"))
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = RunConfig::resolve(cli.config.as_deref())?;
    if let Some(d) = cli.dataset {
        cfg.dataset_dir = d;
    }
    if let Some(p) = cli.parallelism {
        cfg.parallelism = p;
    }
    cfg.validate()?;
    let command_line: Vec<String> = std::env::args().collect();
    match cli.command {
        Command::Ingest(a) => cmd_ingest(cfg, a),
        Command::Classify(a) => cmd_classify(cfg, a, &command_line),
        Command::Augment(a) => cmd_augment(cfg, a, &command_line),
        Command::Judge(a) => cmd_judge(cfg, a, &command_line),
        Command::Evaluate(a) => cmd_evaluate(cfg, a),
    }
}

fn load_dataset(cfg: &RunConfig) -> Result<Dataset> {
    Dataset::load(&cfg.dataset_dir)
        .with_context(|| format!("loading dataset {}", cfg.dataset_dir.display()))
}

fn cmd_ingest(mut cfg: RunConfig, args: IngestArgs) -> Result<()> {
    if args.offline {
        cfg.aoj.offline = true;
    }
    if let Some(d) = args.cache_dir {
        cfg.aoj.cache_dir = Some(d);
    }
    if let Some(b) = args.api_base {
        cfg.aoj.base_url = b;
    }
    let mut problems = args.problems.clone();
    let course = match &args.course {
        Some(c) => {
            problems.extend(cfg.aoj.course(c)?.iter().cloned());
            c.clone()
        }
        None => String::new(),
    };
    if problems.is_empty() {
        bail!("no problems given; pass problem ids or --course");
    }
    let filter = args.status.status();
    let subs = ingest_aoj(&problems, &cfg.aoj, filter.as_ref())?;
    let mut dataset = load_dataset(&cfg)?;
    let mut statements = BTreeMap::new();
    for p in &problems {
        if dataset.problem(p).is_none() && subs.iter().any(|s| &s.problem_id == p) {
            if let Some(text) = fetch_statement(p, &cfg.aoj)? {
                statements.insert(p.clone(), text);
            }
        }
    }
    let added = merge_submissions(&mut dataset, &course, &subs, &statements);
    dataset.store(&cfg.dataset_dir)?;
    println!("fetched {} submissions, {added} new", subs.len());
    let mut by_status: BTreeMap<String, usize> = BTreeMap::new();
    for s in &dataset.samples {
        let key = s
            .status
            .as_ref()
            .map_or("none".to_string(), |st| st.to_string());
        *by_status.entry(key).or_default() += 1;
    }
    for (status, n) in by_status {
        println!("  {status}: {n}");
    }
    Ok(())
}

/// Prompt inputs loaded once per command.
struct Assets {
    taxonomy: Taxonomy,
    templates: Templates,
    bank: FewShotBank,
}

impl Assets {
    fn load(cfg: &RunConfig) -> Result<Self> {
        Ok(Self {
            taxonomy: cfg.taxonomy()?,
            templates: cfg.templates()?,
            bank: cfg.fewshot()?,
        })
    }

    fn builder(&self) -> PromptBuilder<'_> {
        PromptBuilder::new(&self.taxonomy, &self.templates, &self.bank)
    }
}

fn model_config(cfg: &RunConfig, args: &ModelArgs) -> ModelConfig {
    let mut model = cfg.model.clone();
    if let Some(path) = &args.mock {
        model.transport = TransportKind::Mock {
            fixture_path: path.clone(),
        };
    }
    if let Some(m) = &args.model {
        model.model_id = m.clone();
    }
    model
}

fn client(cfg: &RunConfig, model: &ModelConfig) -> Result<Client> {
    let client = Client::from_config(model, cfg.parallelism.max(1) * 4)?;
    if client.transport().records_exchanges() {
        std::fs::create_dir_all(&cfg.dataset_dir)?;
        let log = ExchangeLog::open(cfg.dataset_dir.join(EXCHANGES_FILE))?;
        return Ok(client.with_log(log));
    }
    Ok(client)
}

fn write_manifest(
    cfg: &RunConfig,
    command_line: &[String],
    sample_ids: Vec<String>,
    started_at: u64,
) -> Result<()> {
    let run_id = uuid::Uuid::new_v4().to_string();
    let dir = cfg.dataset_dir.join(RUNS_DIR);
    std::fs::create_dir_all(&dir)?;
    let manifest = RunManifest {
        run_id: run_id.clone(),
        command: command_line.join(" "),
        config_snapshot: cfg.snapshot(),
        sample_ids,
        started_at,
        finished_at: unix_now(),
    };
    manifest.write(dir.join(format!("{run_id}.json")))?;
    Ok(())
}

/// Replaces results with the same sample id and keeps the rest.
fn merge_results(path: &Path, fresh: Vec<ClassificationResult>) -> Result<()> {
    let mut all: BTreeMap<String, ClassificationResult> = read_results(path)?
        .into_iter()
        .map(|r| (r.sample_ref.clone(), r))
        .collect();
    for r in fresh {
        all.insert(r.sample_ref.clone(), r);
    }
    write_results(path, &all.into_values().collect::<Vec<_>>())?;
    Ok(())
}

fn cmd_classify(cfg: RunConfig, args: ClassifyArgs, command_line: &[String]) -> Result<()> {
    let started = unix_now();
    let dataset = load_dataset(&cfg)?;
    let selected: Vec<_> = if args.all {
        dataset.evaluation_set().collect()
    } else if args.sample.is_empty() {
        bail!("choose samples with --all or --sample");
    } else {
        let wanted: BTreeSet<&str> = args.sample.iter().map(String::as_str).collect();
        for id in &wanted {
            if dataset.sample(id).is_none() {
                log::warn!("no sample {id}");
            }
        }
        dataset
            .samples
            .iter()
            .filter(|s| wanted.contains(s.id.as_str()))
            .collect()
    };
    if selected.is_empty() {
        println!("0 samples matched; nothing to classify");
        return Ok(());
    }
    let assets = Assets::load(&cfg)?;
    let model = model_config(&cfg, &args.model);
    let client = client(&cfg, &model)?;
    let pipeline = Pipeline::new(assets.builder(), &client, &model);
    let inputs: Vec<(String, CodeSample)> = selected
        .iter()
        .map(|s| {
            let problem = dataset
                .problem(&s.problem_ref)
                .map(|p| p.statement.as_str())
                .unwrap_or_default();
            (
                s.id.clone(),
                CodeSample {
                    problem,
                    code: &s.source_code,
                },
            )
        })
        .collect();
    let mut results = Vec::new();
    let mut first_error = None;
    for (outcome, (id, _)) in pipeline
        .classify_many(&inputs, cfg.parallelism)
        .into_iter()
        .zip(&inputs)
    {
        match outcome {
            Ok(r) => {
                let mut line = format!(
                    "{}: dominant={}",
                    r.sample_ref,
                    r.dominant.map_or("none".to_string(), |d| d.to_string())
                );
                if r.dominant_set.len() > 1 {
                    let tied: Vec<String> = r.dominant_set.iter().map(ErrorId::to_string).collect();
                    line.push_str(&format!(" tied={}", tied.join(",")));
                }
                if r.is_partial() {
                    line.push_str(&format!(" partial={}", r.failed_types.len()));
                }
                println!("{line}");
                results.push(r);
            }
            Err(e) => {
                eprintln!("{id}: {e}");
                first_error.get_or_insert_with(|| anyhow!("{id}: {e}"));
            }
        }
    }
    let out = args
        .out
        .unwrap_or_else(|| cfg.dataset_dir.join(RESULTS_FILE));
    merge_results(&out, results)?;
    write_manifest(
        &cfg,
        command_line,
        inputs.into_iter().map(|(id, _)| id).collect(),
        started,
    )?;
    match first_error {
        Some(e) => Err(e),
        None => Ok(()),
    }
}

fn cmd_augment(cfg: RunConfig, args: AugmentArgs, command_line: &[String]) -> Result<()> {
    let started = unix_now();
    let mut dataset = load_dataset(&cfg)?;
    let plan: Vec<(ErrorId, u32)> = match args.target {
        Some(t) => vec![(t, args.count)],
        None => cfg.quotas.iter().map(|(t, n)| (*t, *n)).collect(),
    };
    if plan.iter().all(|(_, n)| *n == 0) {
        bail!("nothing to do; pass --target or set [quotas] in the configuration");
    }
    let mut sources: Vec<_> = dataset.accepted_sources().cloned().collect();
    sources.sort_by(|a, b| a.id.cmp(&b.id));
    if sources.is_empty() {
        bail!("the dataset has no Accepted samples to augment");
    }
    let assets = Assets::load(&cfg)?;
    let model = model_config(&cfg, &args.model);
    let client = client(&cfg, &model)?;
    let pipeline = Pipeline::new(assets.builder(), &client, &model);

    let mut touched = Vec::new();
    for (target, count) in plan {
        let prefix = format!("aug-{target}-");
        let first = dataset
            .augmented
            .iter()
            .filter_map(|a| a.id.strip_prefix(&prefix)?.parse::<u32>().ok())
            .max()
            .map_or(0, |m| m + 1);
        for (i, next) in (first..first + count).enumerate() {
            let source = &sources[i % sources.len()];
            let problem = dataset
                .problem(&source.problem_ref)
                .ok_or_else(|| anyhow!("sample {} has no problem", source.id))?;
            let remarks = args
                .remarks
                .clone()
                .or_else(|| problem.remarks.clone())
                .unwrap_or_else(|| cfg.default_remarks.clone());
            let id = format!("{prefix}{next:04}");
            let sample = CodeSample {
                problem: &problem.statement,
                code: &source.source_code,
            };
            let record = pipeline.augment(&id, &source.id, sample, target, &remarks)?;
            match &record.failure {
                Some(f) => println!("{id}: failed ({})", f.message),
                None if record.evidence.identical_to_source => {
                    println!("{id}: identical to source")
                }
                None => println!("{id}: generated from {}", source.id),
            }
            touched.push(id);
            dataset.upsert_augmented(record);
        }
    }
    dataset.store(&cfg.dataset_dir)?;
    write_manifest(&cfg, command_line, touched, started)?;
    Ok(())
}

fn cmd_judge(cfg: RunConfig, args: JudgeArgs, command_line: &[String]) -> Result<()> {
    debug_assert!(args.augmented);
    let started = unix_now();
    let profile = cfg.profile(&args.profile)?;
    let mut dataset = load_dataset(&cfg)?;
    let pending: Vec<_> = dataset
        .augmented
        .iter()
        .filter(|a| !a.is_failed() && a.outcome == logicerr::dataset::Outcome::Unresolved)
        .cloned()
        .collect();
    if pending.is_empty() {
        println!("0 unresolved augmentations");
        return Ok(());
    }
    let assets = Assets::load(&cfg)?;
    let model = model_config(&cfg, &args.model);
    let client = client(&cfg, &model)?;
    let pipeline = Pipeline::new(assets.builder(), &client, &model);

    let mut classifications = Vec::new();
    let mut failures = Vec::new();
    let mut ids = Vec::new();
    for aug in pending {
        let source = dataset.sample(&aug.source_ref).expect("checked on load");
        let problem = dataset
            .problem(&source.problem_ref)
            .expect("checked on load")
            .clone();
        ids.push(aug.id.clone());
        match pipeline.resolve(&aug, &problem, &profile) {
            Ok((resolved, classification)) => {
                let verdict = resolved.evidence.judge_verdict.as_ref().map(|v| v.value);
                println!(
                    "{}: judge={verdict:?} outcome={:?}",
                    resolved.id, resolved.outcome
                );
                classifications.extend(classification);
                dataset.upsert_augmented(resolved);
            }
            Err(e) => {
                eprintln!("{}: {e}", aug.id);
                failures.push(aug.id);
            }
        }
    }
    dataset.store(&cfg.dataset_dir)?;
    merge_results(
        &cfg.dataset_dir.join(AUGMENTED_RESULTS_FILE),
        classifications,
    )?;
    write_manifest(&cfg, command_line, ids, started)?;
    if !failures.is_empty() {
        bail!(
            "{} augmentation(s) could not be resolved: {}",
            failures.len(),
            failures.join(", ")
        );
    }
    Ok(())
}

fn cmd_evaluate(cfg: RunConfig, args: EvaluateArgs) -> Result<()> {
    let dataset = load_dataset(&cfg)?;
    let taxonomy = cfg.taxonomy()?;
    let results_path = args
        .results
        .unwrap_or_else(|| cfg.dataset_dir.join(RESULTS_FILE));
    let results = read_results(&results_path)?;
    let mode = args.fpr_mode.unwrap_or(cfg.fpr_mode);
    let mut out = String::new();
    if !results.is_empty() {
        let report = evaluate(&results, &dataset.samples, mode, cfg.snapshot())?;
        out.push_str(&render_report(
            &report,
            args.format,
            &taxonomy,
            args.verbose,
        ));
    }
    if !dataset.augmented.is_empty() {
        let table = augmentation_table(&dataset.augmented)?;
        if !out.is_empty() {
            out.push('\n');
        }
        out.push_str(&render_augmentation(&table, args.format, &taxonomy));
    }
    if out.is_empty() {
        out.push_str("nothing to evaluate: no classification results and no augmented samples\n");
    }
    match args.out {
        Some(p) => std::fs::write(&p, out).with_context(|| format!("writing {}", p.display()))?,
        None => print!("{out}"),
    }
    Ok(())
}
