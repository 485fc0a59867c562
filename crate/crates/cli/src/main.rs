use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use log::{info, warn};

use kbreason::backends::{BackendError, BackendSpec, FixtureStore, PlannerKind};
use kbreason::data;
use kbreason::datasets::{
    build_clutrr_split, build_countries_tasks, ClutrrConfig, CountriesTaskKind, SplitManifest,
};
use kbreason::eval::{evaluate, evaluate_with, sweep, EvalBackends, EvalError, RunConfig, SweepConfig};
use kbreason::kb::io;
use kbreason::oracle::{find_ground_paths, verify_trace, CompositionTable, RuleLibrary};
use kbreason::prover::{
    ensemble_prove, PromptSpec, PromptVariant, ProofTrace, ProverContext, ProverError,
    RetrievalStrategy, SuccessCriterion,
};
use kbreason::{KnowledgeBase, Triple, VerbalizationSchema};

#[derive(Parser)]
#[command(name = "kbreason", version, about = "Prompt-driven proof search over knowledge bases")]
struct Cli {
    /// More log output (repeatable).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a benchmark split.
    #[command(subcommand)]
    Curate(Curate),
    /// Prove one query and print the trace as JSON.
    Prove(ProveArgs),
    /// Evaluate a run config and emit CSV/JSON reports.
    Evaluate(EvaluateArgs),
    /// Evaluate a grid of run configs.
    Sweep(SweepArgs),
    /// Check a proof trace against a KB and composition table.
    Verify(VerifyArgs),
    /// Run a config with recording backends and save the fixture file.
    RecordFixtures(RecordArgs),
}

#[derive(Subcommand)]
enum Curate {
    /// Kinship chains over generated family trees.
    Clutrr(ClutrrArgs),
    /// Countries S1/S2/S3 tasks.
    Countries(CountriesArgs),
}

#[derive(Args)]
struct ClutrrArgs {
    /// Inclusive range `a..b` or a comma list.
    #[arg(long, default_value = "2..10")]
    lengths: String,
    #[arg(long, default_value_t = 50)]
    per_length: usize,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long, default_value_t = 24)]
    family_size: usize,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct CountriesArgs {
    /// Raw countries KB; the bundled mini KB when absent.
    #[arg(long)]
    kb: Option<PathBuf>,
    #[arg(long, value_delimiter = ',', default_value = "S1,S2,S3")]
    tasks: Vec<String>,
    #[arg(long, default_value_t = 0.2)]
    test_fraction: f64,
    #[arg(long, default_value_t = 7)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct ProveArgs {
    /// KB file (TSV or JSON lines); an instance file may carry the query.
    #[arg(long)]
    kb: PathBuf,
    /// Rule library (JSON lines).
    #[arg(long)]
    rules: Option<PathBuf>,
    /// `subject relation object`, whitespace or tab separated.
    #[arg(long)]
    query: Option<String>,
    /// Verbalization schema; a bundled one covering the KB when absent.
    #[arg(long)]
    schema: Option<PathBuf>,
    #[arg(long)]
    composition: Option<PathBuf>,
    #[arg(long, value_parser = parse_kebab::<RetrievalStrategy>, default_value = "relation-match")]
    strategy: RetrievalStrategy,
    #[arg(long, value_parser = parse_kebab::<PromptVariant>, default_value = "lmlp")]
    variant: PromptVariant,
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Prompts in the ensemble; above 1 the output is the ensemble result.
    #[arg(long, default_value_t = 1)]
    k: usize,
    #[arg(long, default_value_t = 20)]
    max_steps: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long)]
    min_score: Option<f64>,
    /// e.g. `planner=template translator=hash`
    #[arg(long, default_value = "planner=template translator=hash")]
    backend: String,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long)]
    config: PathBuf,
    /// Overrides the config's split manifest.
    #[arg(long)]
    split: Option<PathBuf>,
    #[arg(long)]
    backend: Option<String>,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    timing: bool,
    /// CSV report path; standard output when absent.
    #[arg(long)]
    out_csv: Option<PathBuf>,
    #[arg(long)]
    out_json: Option<PathBuf>,
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    workers: Option<usize>,
    #[arg(long)]
    out_csv: Option<PathBuf>,
    #[arg(long)]
    out_json: Option<PathBuf>,
    #[arg(long)]
    force: bool,
}

#[derive(Args)]
struct VerifyArgs {
    #[arg(long)]
    kb: PathBuf,
    /// Trace JSON as printed by `prove`, or a TSV/JSON-lines file of steps.
    #[arg(long)]
    trace: PathBuf,
    /// Required unless the trace JSON carries its query.
    #[arg(long)]
    query: Option<String>,
    #[arg(long)]
    composition: Option<PathBuf>,
}

#[derive(Args)]
struct RecordArgs {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    backend: Option<String>,
    #[arg(long)]
    workers: Option<usize>,
    /// Fixture file to write.
    #[arg(long)]
    out: PathBuf,
    #[arg(long)]
    force: bool,
}

fn parse_kebab<T: serde::de::DeserializeOwned>(s: &str) -> Result<T, String> {
    serde_json::from_value(serde_json::Value::String(s.to_string())).map_err(|e| e.to_string())
}

fn parse_query(text: &str) -> Result<Triple> {
    let parts: Vec<&str> = text.split_whitespace().collect();
    match parts.as_slice() {
        [s, r, o] => Ok(Triple::from_strs(s, r, o)?),
        _ => bail!("query must be `subject relation object`, got {text:?}"),
    }
}

fn parse_lengths(text: &str) -> Result<Vec<usize>> {
    if let Some((a, b)) = text.split_once("..") {
        let a: usize = a.trim().parse().context("bad length range")?;
        let b = b.trim().trim_start_matches('=');
        let b: usize = b.parse().context("bad length range")?;
        if a > b {
            bail!("empty length range {text:?}");
        }
        return Ok((a..=b).collect());
    }
    text.split(',')
        .map(|p| p.trim().parse::<usize>().context("bad length list"))
        .collect()
}

/// Fails when `path` exists and `force` is off.
fn check_writable(path: &Path, force: bool) -> Result<()> {
    if path.exists() && !force {
        bail!("{} already exists (use --force to overwrite)", path.display());
    }
    Ok(())
}

fn write_output(path: &Path, text: &str) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn bundled_schema_for(kb: &KnowledgeBase) -> (VerbalizationSchema, CompositionTable) {
    let countries = data::countries_schema();
    if kb.relations().iter().all(|r| countries.contains(*r)) {
        (countries, data::countries_composition())
    } else {
        (data::kinship_schema(), data::kinship_composition())
    }
}

fn curate_clutrr(args: ClutrrArgs) -> Result<()> {
    let manifest = args.out.join("manifest.json");
    check_writable(&manifest, args.force)?;
    let cfg = ClutrrConfig {
        lengths: parse_lengths(&args.lengths)?,
        per_length: args.per_length,
        seed: args.seed,
        family_size: args.family_size,
        ..ClutrrConfig::default()
    };
    let schema = data::kinship_schema();
    let table = data::kinship_composition();
    let split = build_clutrr_split(&cfg, &table)?;
    let m = SplitManifest::write_clutrr(&args.out, &cfg, &split, &schema, &table)?;
    info!("wrote {} buckets to {}", m.buckets.len(), args.out.display());
    println!("{}", manifest.display());
    Ok(())
}

fn curate_countries(args: CountriesArgs) -> Result<()> {
    let manifest = args.out.join("manifest.json");
    check_writable(&manifest, args.force)?;
    if !(0.0..=1.0).contains(&args.test_fraction) || args.test_fraction == 0.0 {
        bail!("test fraction must be in (0, 1]");
    }
    let kinds = args
        .tasks
        .iter()
        .map(|t| t.parse::<CountriesTaskKind>().map_err(|e| anyhow!(e)))
        .collect::<Result<Vec<_>>>()?;
    let raw = match &args.kb {
        Some(p) => io::load_facts(p)?,
        None => data::countries_mini(),
    };
    let tasks = kinds
        .into_iter()
        .map(|k| build_countries_tasks(&raw, k, args.test_fraction, args.seed))
        .collect::<Result<Vec<_>, _>>()?;
    SplitManifest::write_countries(
        &args.out,
        &raw,
        &tasks,
        args.seed,
        &data::countries_schema(),
        &data::countries_composition(),
    )?;
    println!("{}", manifest.display());
    Ok(())
}

fn prove_cmd(args: ProveArgs) -> Result<()> {
    let (file_query, kb) = io::load_instance(&args.kb)?;
    let query = match (&args.query, file_query) {
        (Some(q), _) => parse_query(q)?,
        (None, Some(q)) => q,
        (None, None) => bail!("no --query given and the KB file has no query record"),
    };
    let (mut schema, mut table) = bundled_schema_for(&kb);
    if let Some(p) = &args.schema {
        schema = VerbalizationSchema::load(p)?;
    }
    if let Some(p) = &args.composition {
        table = CompositionTable::load(p)?;
    }
    let library = match &args.rules {
        Some(p) => RuleLibrary::load(p)?,
        None => RuleLibrary::new(),
    };
    let backend: BackendSpec = args.backend.parse()?;
    let oracle = (backend.planner == PlannerKind::Oracle).then(|| {
        let gold = find_ground_paths(&kb.without([&query]), query.subject, query.object, kb.len())
            .into_iter()
            .min_by_key(|p| p.len());
        kbreason::backends::OraclePlanner::with_proofs(schema.clone(), gold.map(|g| (query, g)))
    });
    let planner = backend.planner(&schema, oracle)?;
    let translator = backend.translator()?;
    let spec = PromptSpec {
        strategy: args.strategy,
        variant: args.variant,
        n: args.n,
        k: args.k,
        max_steps: args.max_steps,
        seed: args.seed,
        min_score: args.min_score,
        ..PromptSpec::default()
    };
    spec.validate()?;
    let index = kbreason::backends::FactIndex::build(&kb, &schema, translator.as_ref())?;
    let ctx = ProverContext {
        kb: &kb,
        index: &index,
        library: &library,
        schema: &schema,
        table: &table,
        planner: planner.as_ref(),
        translator: translator.as_ref(),
    };
    let result = ensemble_prove(&query, &ctx, &spec, SuccessCriterion::Reach)?;
    let json = if args.k == 1 {
        serde_json::to_string_pretty(&result.per_prompt[0])?
    } else {
        serde_json::to_string_pretty(&result)?
    };
    println!("{json}");
    Ok(())
}

fn apply_overrides(
    cfg: &mut RunConfig,
    backend: Option<&str>,
    workers: Option<usize>,
) -> Result<()> {
    if let Some(b) = backend {
        let fixtures = cfg.backend.fixtures.clone();
        cfg.backend = b.parse()?;
        if cfg.backend.fixtures.is_none() {
            cfg.backend.fixtures = fixtures;
        }
    }
    if workers.is_some() {
        cfg.workers = workers;
    }
    Ok(())
}

fn evaluate_cmd(args: EvaluateArgs) -> Result<()> {
    let mut cfg = RunConfig::load(&args.config)?;
    apply_overrides(&mut cfg, args.backend.as_deref(), args.workers)?;
    if let Some(split) = args.split {
        cfg.split = split;
    }
    cfg.timing |= args.timing;
    for out in [&args.out_csv, &args.out_json].into_iter().flatten() {
        check_writable(out, args.force)?;
    }
    cfg.validate()?;
    let report = evaluate(&cfg)?;
    eprint!("{}", report.pivot());
    let csv = report.to_csv()?;
    match &args.out_csv {
        Some(p) => write_output(p, &csv)?,
        None => std::io::stdout().write_all(csv.as_bytes())?,
    }
    if let Some(p) = &args.out_json {
        write_output(p, &report.to_json()?)?;
    }
    let failed = report.queries.iter().filter(|q| q.error.is_some()).count();
    if failed > 0 {
        warn!("{failed} queries failed with backend errors");
    }
    Ok(())
}

fn sweep_cmd(args: SweepArgs) -> Result<()> {
    let mut cfg = SweepConfig::load(&args.config)?;
    apply_overrides(&mut cfg.base, None, args.workers)?;
    for out in [&args.out_csv, &args.out_json].into_iter().flatten() {
        check_writable(out, args.force)?;
    }
    let cells = cfg.cells()?;
    let report = sweep(&cells)?;
    let csv = report.to_csv()?;
    match &args.out_csv {
        Some(p) => write_output(p, &csv)?,
        None => std::io::stdout().write_all(csv.as_bytes())?,
    }
    if let Some(p) = &args.out_json {
        write_output(p, &report.to_json()?)?;
    }
    if report.failures() > 0 {
        warn!("{} of {} sweep cells failed", report.failures(), cells.len());
    }
    Ok(())
}

fn verify_cmd(args: VerifyArgs) -> Result<()> {
    let kb = io::load_facts(&args.kb)?;
    let text = std::fs::read_to_string(&args.trace)
        .with_context(|| format!("reading {}", args.trace.display()))?;
    let (trace_query, steps) = match serde_json::from_str::<ProofTrace>(&text) {
        Ok(t) => (Some(t.query), t.facts()),
        Err(_) => {
            let (q, facts) = io::read_instance(text.as_bytes())?;
            (q, facts.facts().to_vec())
        }
    };
    let query = match (&args.query, trace_query) {
        (Some(q), _) => parse_query(q)?,
        (None, Some(q)) => q,
        (None, None) => bail!("no --query given and the trace has no query"),
    };
    let table = match &args.composition {
        Some(p) => CompositionTable::load(p)?,
        None => bundled_schema_for(&kb).1,
    };
    let verdict = verify_trace(&steps, &query, &table, &kb);
    println!("{}", serde_json::to_string_pretty(&verdict)?);
    Ok(())
}

fn record_cmd(args: RecordArgs) -> Result<()> {
    let mut cfg = RunConfig::load(&args.config)?;
    apply_overrides(&mut cfg, args.backend.as_deref(), args.workers)?;
    check_writable(&args.out, args.force)?;
    if args.force && args.out.exists() {
        std::fs::remove_file(&args.out)?;
    }
    let store = FixtureStore::open(&args.out)?;
    let report = evaluate_with(&cfg, &EvalBackends::Recording(store.clone()))?;
    store.save()?;
    eprint!("{}", report.pivot());
    info!("recorded {} fixtures", store.len());
    println!("{}", args.out.display());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Curate(Curate::Clutrr(a)) => curate_clutrr(a),
        Command::Curate(Curate::Countries(a)) => curate_countries(a),
        Command::Prove(a) => prove_cmd(a),
        Command::Evaluate(a) => evaluate_cmd(a),
        Command::Sweep(a) => sweep_cmd(a),
        Command::Verify(a) => verify_cmd(a),
        Command::RecordFixtures(a) => record_cmd(a),
    }
}

fn is_backend_failure(err: &anyhow::Error) -> bool {
    err.chain().any(|cause| {
        let backend = |e: &BackendError| !matches!(e, BackendError::Config(_));
        cause.downcast_ref::<BackendError>().is_some_and(backend)
            || matches!(cause.downcast_ref::<ProverError>(), Some(ProverError::Backend(e)) if backend(e))
            || matches!(cause.downcast_ref::<EvalError>(), Some(EvalError::Backend(e)) if backend(e))
            || matches!(
                cause.downcast_ref::<EvalError>(),
                Some(EvalError::Prover(ProverError::Backend(e))) if backend(e)
            )
    })
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { 1 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(if is_backend_failure(&e) { 2 } else { 1 })
        }
    }
}
