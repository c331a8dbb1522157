//! Command-line front end. Every pipeline stage has its own subcommand and
//! writes its result into the output directory, so a campaign can be run in
//! pieces and resumed.

use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;
use std::time::{Duration, Instant};

use clap::{Args, Parser, Subcommand};
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::cache::{sha256_hex, CacheStats, CachingFactory, RunCache};
use crate::model::{CampaignConfig, ConfigSnapshot};
use crate::pipeline::{
    evaluate, mutate, stabilize, CampaignReport, EvaluationReport, MutationReport, StabilizationReport,
};
use crate::protocol::conformance::run_conformance;
use crate::protocol::{serve, AdapterCommand, SessionFactory};
use crate::report::write_artifacts;
use crate::selftest::{run_selftest, SelftestOptions};
use crate::sim::{listings_suite, SimAdapter, SimClassGenerator, SimFactory, SimSuite, LISTINGS_CORPUS};

pub const OUT_ENV: &str = "FLAKER_OUT";
pub const DEFAULT_OUT: &str = "flaker-out";
pub const STABILITY_FILE: &str = "stability.json";
pub const MUTANTS_FILE: &str = "mutants.json";
pub const EVALUATION_FILE: &str = "evaluation.json";
pub const CACHE_DIR: &str = "cache";
pub const CACHE_FILE: &str = "runs.jsonl";

const SIM_SHARED_FIELD_PROXY: &str = "state keys referenced by two or more tests of the class";
const EXEC_SHARED_FIELD_PROXY: &str = "shared_field_count as reported by the adapter";

#[derive(Debug)]
pub enum CliError {
    /// Exit status 2.
    Config(String),
    /// Exit status 1.
    Campaign(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 2,
            CliError::Campaign(_) => 1,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Config(m) => write!(f, "configuration error: {m}"),
            CliError::Campaign(m) => write!(f, "campaign error: {m}"),
        }
    }
}

fn campaign_err(err: impl std::fmt::Display) -> CliError {
    CliError::Campaign(err.to_string())
}

#[derive(Debug, Parser)]
#[command(name = "flaker", version, about = "Inject and classify order-dependent flaky tests")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// All stages, then the report.
    Run(CampaignArgs),
    /// Step 1: keep classes whose tests are stable alone and in every order tried.
    Stabilize(CampaignArgs),
    /// Step 2: enumerate statement-deletion mutants of stable tests.
    Mutate(CampaignArgs),
    /// Step 3: run mutants in shuffled orders and classify order-dependent tests.
    Evaluate(CampaignArgs),
    /// Write report, metrics, dataset and excluded ledger from the stage files.
    Report(CampaignArgs),
    /// Check the pipeline against the brute-force oracle and the statistics against naive definitions.
    Selftest(SelftestArgs),
    /// Run the protocol conformance checks against an adapter.
    Conformance(ConformanceArgs),
    /// Serve a sim corpus over stdin/stdout as an external adapter would.
    #[command(hide = true)]
    ServeSim {
        #[arg(long, default_value = "listings")]
        corpus: String,
    },
}

#[derive(Debug, Clone, Default, Args)]
pub struct CampaignArgs {
    /// TOML (or JSON, by extension) file with the same keys as the flags.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// `sim` or `exec:PATH`.
    #[arg(long)]
    pub adapter: Option<String>,
    /// Sim corpus: `listings`, `random` or a corpus file.
    #[arg(long)]
    pub corpus: Option<String>,
    /// Suite location handed to an external adapter as its first argument.
    #[arg(long)]
    pub suite: Option<PathBuf>,
    #[arg(long)]
    pub seed: Option<u64>,
    /// Orders per class.
    #[arg(long)]
    pub orders: Option<usize>,
    #[arg(long)]
    pub isolation_runs: Option<usize>,
    /// Per-test timeout in seconds.
    #[arg(long)]
    pub timeout: Option<u64>,
    /// Concurrent adapter sessions.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Output directory; falls back to `$FLAKER_OUT`, then `flaker-out`.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Reuse stage files already in the output directory.
    #[arg(long)]
    pub resume: bool,
}

#[derive(Debug, Clone, Args)]
pub struct SelftestArgs {
    /// Generated classes to check against the oracle.
    #[arg(long, default_value_t = 200)]
    pub classes: usize,
    #[arg(long, default_value_t = 2021)]
    pub seed: u64,
    #[arg(long)]
    pub jobs: Option<usize>,
}

#[derive(Debug, Clone, Args)]
pub struct ConformanceArgs {
    #[arg(long, default_value = "sim")]
    pub adapter: String,
    #[arg(long)]
    pub corpus: Option<String>,
    #[arg(long)]
    pub suite: Option<PathBuf>,
    #[arg(long, default_value_t = 10)]
    pub timeout: u64,
}

/// Keys accepted in a config file.
#[derive(Debug, Clone, Default, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    pub adapter: Option<String>,
    pub corpus: Option<String>,
    pub suite: Option<PathBuf>,
    pub seed: Option<u64>,
    pub orders: Option<usize>,
    pub isolation_runs: Option<usize>,
    pub timeout: Option<u64>,
    pub jobs: Option<usize>,
    pub out: Option<PathBuf>,
}

pub fn load_file_config(path: &Path) -> Result<FileConfig, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
    let parsed = if path.extension().is_some_and(|e| e == "json") {
        serde_json::from_str(&text).map_err(|e| e.to_string())
    } else {
        toml::from_str(&text).map_err(|e| e.to_string())
    };
    parsed.map_err(|e| CliError::Config(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Corpus {
    Listings,
    Random,
    File(PathBuf),
}

impl Corpus {
    pub fn parse(spec: &str) -> Self {
        match spec {
            "listings" => Corpus::Listings,
            "random" => Corpus::Random,
            path => Corpus::File(PathBuf::from(path)),
        }
    }

    pub fn load(&self) -> Result<SimSuite, CliError> {
        let suite = match self {
            Corpus::Listings => listings_suite(),
            Corpus::Random => {
                let bundled: SimSuite = serde_json::from_str(LISTINGS_CORPUS).expect("bundled corpus parses");
                let params = bundled.generator.unwrap_or_default();
                SimClassGenerator::new(params).suite("random", "random")
            }
            Corpus::File(path) => {
                let text = fs::read_to_string(path)
                    .map_err(|e| CliError::Config(format!("cannot read corpus {}: {e}", path.display())))?;
                let suite: SimSuite = serde_json::from_str(&text)
                    .map_err(|e| CliError::Config(format!("corpus {}: {e}", path.display())))?;
                suite.expanded()
            }
        };
        suite.validate().map_err(|e| CliError::Config(e.to_string()))?;
        Ok(suite)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum AdapterSpec {
    Sim(Corpus),
    Exec { program: PathBuf, suite: Option<PathBuf> },
}

impl AdapterSpec {
    pub fn parse(spec: &str, corpus: Option<&str>, suite: Option<PathBuf>) -> Result<Self, CliError> {
        if spec == "sim" {
            Ok(AdapterSpec::Sim(Corpus::parse(corpus.unwrap_or("listings"))))
        } else if let Some(program) = spec.strip_prefix("exec:") {
            if program.is_empty() {
                return Err(CliError::Config("`exec:` needs a program path".into()));
            }
            Ok(AdapterSpec::Exec {
                program: PathBuf::from(program),
                suite,
            })
        } else {
            Err(CliError::Config(format!("unknown adapter `{spec}`; use `sim` or `exec:PATH`")))
        }
    }
}

/// A launchable adapter with what the cache needs to know about it.
pub struct ResolvedAdapter {
    pub factory: Box<dyn SessionFactory + Send>,
    pub suite_name: String,
    pub suite_hash: String,
    pub shared_field_proxy: &'static str,
}

impl SessionFactory for Box<dyn SessionFactory + Send> {
    fn connect(&self) -> Result<Box<dyn crate::protocol::Transport>, crate::protocol::SessionError> {
        (**self).connect()
    }
}

fn hash_tree(path: &Path, hasher_input: &mut Vec<u8>) -> io::Result<()> {
    if path.is_dir() {
        let mut children: Vec<PathBuf> = fs::read_dir(path)?.map(|e| e.map(|e| e.path())).collect::<Result<_, _>>()?;
        children.sort();
        for child in children {
            hasher_input.extend_from_slice(child.to_string_lossy().as_bytes());
            hasher_input.push(0);
            hash_tree(&child, hasher_input)?;
        }
    } else {
        hasher_input.extend_from_slice(&fs::read(path)?);
        hasher_input.push(0);
    }
    Ok(())
}

impl ResolvedAdapter {
    pub fn resolve(spec: &AdapterSpec) -> Result<Self, CliError> {
        match spec {
            AdapterSpec::Sim(corpus) => {
                let suite = corpus.load()?;
                Ok(Self {
                    suite_name: suite.name.clone(),
                    suite_hash: sha256_hex(&serde_json::to_vec(&suite).expect("suite serializes")),
                    factory: Box::new(SimFactory::new(suite)),
                    shared_field_proxy: SIM_SHARED_FIELD_PROXY,
                })
            }
            AdapterSpec::Exec { program, suite } => {
                let mut command = AdapterCommand::new(program);
                let mut material = program.to_string_lossy().into_owned().into_bytes();
                material.push(0);
                let suite_name = match suite {
                    Some(path) => {
                        command = command.arg(path.to_string_lossy());
                        hash_tree(path, &mut material)
                            .map_err(|e| CliError::Config(format!("cannot read suite {}: {e}", path.display())))?;
                        path.file_name().map_or_else(|| path.display().to_string(), |n| n.to_string_lossy().into_owned())
                    }
                    None => program.display().to_string(),
                };
                Ok(Self {
                    factory: Box::new(command),
                    suite_name,
                    suite_hash: sha256_hex(&material),
                    shared_field_proxy: EXEC_SHARED_FIELD_PROXY,
                })
            }
        }
    }
}

/// Flags merged over the config file over defaults.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Settings {
    pub adapter: AdapterSpec,
    pub config: CampaignConfig,
    pub out: PathBuf,
    pub resume: bool,
}

impl Settings {
    pub fn resolve(args: &CampaignArgs, env_out: Option<PathBuf>) -> Result<Self, CliError> {
        let file = match &args.config {
            Some(path) => load_file_config(path)?,
            None => FileConfig::default(),
        };
        let adapter_spec = args.adapter.clone().or(file.adapter).unwrap_or_else(|| "sim".into());
        let corpus = args.corpus.clone().or(file.corpus);
        let suite = args.suite.clone().or(file.suite);
        let adapter = AdapterSpec::parse(&adapter_spec, corpus.as_deref(), suite)?;
        let defaults = CampaignConfig::default();
        let config = CampaignConfig {
            seed: args.seed.or(file.seed).unwrap_or(0),
            isolation_runs: args.isolation_runs.or(file.isolation_runs).unwrap_or(defaults.isolation_runs),
            orders_per_class: args.orders.or(file.orders).unwrap_or(defaults.orders_per_class),
            per_test_timeout: args
                .timeout
                .or(file.timeout)
                .map_or(defaults.per_test_timeout, |s| s.saturating_mul(1000)),
            parallelism: args.jobs.or(file.jobs).unwrap_or(defaults.parallelism),
        };
        config.validate().map_err(|e| CliError::Config(e.to_string()))?;
        let out = args
            .out
            .clone()
            .or(file.out)
            .or(env_out)
            .unwrap_or_else(|| PathBuf::from(DEFAULT_OUT));
        Ok(Self {
            adapter,
            config,
            out,
            resume: args.resume,
        })
    }
}

/// A stage result on disk, tagged with what produced it.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StageFile<T> {
    pub suite: String,
    pub suite_hash: String,
    pub config: ConfigSnapshot,
    pub elapsed_ms: u64,
    pub result: T,
}

fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<(), CliError> {
    let mut bytes = serde_json::to_vec_pretty(value).expect("stage file serializes");
    bytes.push(b'\n');
    fs::write(path, bytes).map_err(|e| campaign_err(format!("{}: {e}", path.display())))
}

fn read_stage<T: DeserializeOwned>(path: &Path) -> Result<StageFile<T>, CliError> {
    let text = fs::read_to_string(path).map_err(|e| {
        campaign_err(format!(
            "{}: {e}; run the previous stage first",
            path.display()
        ))
    })?;
    serde_json::from_str(&text).map_err(|e| campaign_err(format!("{}: {e}", path.display())))
}

/// Everything a stage command needs.
pub struct Campaign {
    pub settings: Settings,
    cache: Arc<RunCache>,
    factory: CachingFactory<Box<dyn SessionFactory + Send>>,
    suite_name: String,
    suite_hash: String,
    shared_field_proxy: &'static str,
}

impl Campaign {
    pub fn open(settings: Settings) -> Result<Self, CliError> {
        let ResolvedAdapter {
            factory,
            suite_name,
            suite_hash,
            shared_field_proxy,
        } = ResolvedAdapter::resolve(&settings.adapter)?;
        let cache_dir = settings.out.join(CACHE_DIR);
        fs::create_dir_all(&cache_dir).map_err(|e| campaign_err(format!("{}: {e}", cache_dir.display())))?;
        let cache = Arc::new(RunCache::open(&cache_dir.join(CACHE_FILE)).map_err(campaign_err)?);
        let snapshot = settings.config.snapshot();
        Ok(Self {
            factory: CachingFactory::new(factory, Arc::clone(&cache), suite_hash.clone(), &snapshot),
            cache,
            suite_name,
            suite_hash,
            shared_field_proxy,
            settings,
        })
    }

    pub fn cache_stats(&self) -> CacheStats {
        self.cache.stats()
    }

    fn path(&self, name: &str) -> PathBuf {
        self.settings.out.join(name)
    }

    fn stage<T>(&self, elapsed: Duration, result: T) -> StageFile<T> {
        StageFile {
            suite: self.suite_name.clone(),
            suite_hash: self.suite_hash.clone(),
            config: self.settings.config.snapshot(),
            elapsed_ms: elapsed.as_millis() as u64,
            result,
        }
    }

    /// Loads a stage file and checks it belongs to this suite and config.
    fn load<T: DeserializeOwned>(&self, name: &str) -> Result<StageFile<T>, CliError> {
        let file: StageFile<T> = read_stage(&self.path(name))?;
        if file.suite_hash != self.suite_hash {
            return Err(CliError::Config(format!("{name} was produced for a different suite")));
        }
        if file.config != self.settings.config.snapshot() {
            return Err(CliError::Config(format!(
                "{name} was produced with a different configuration ({:?})",
                file.config
            )));
        }
        Ok(file)
    }

    fn resumable<T: DeserializeOwned>(&self, name: &str) -> Option<StageFile<T>> {
        if !self.settings.resume || !self.path(name).exists() {
            return None;
        }
        match self.load(name) {
            Ok(file) => {
                log::info!("resuming from {name}");
                Some(file)
            }
            Err(err) => {
                log::warn!("not resuming from {name}: {err}");
                None
            }
        }
    }

    pub fn stabilize(&self) -> Result<StageFile<StabilizationReport>, CliError> {
        if let Some(file) = self.resumable(STABILITY_FILE) {
            return Ok(file);
        }
        let started = Instant::now();
        let report = stabilize(&self.factory, &self.settings.config).map_err(campaign_err)?;
        let file = self.stage(started.elapsed(), report);
        write_json(&self.path(STABILITY_FILE), &file)?;
        Ok(file)
    }

    pub fn mutate(&self, stability: &StageFile<StabilizationReport>) -> Result<StageFile<MutationReport>, CliError> {
        if let Some(file) = self.resumable(MUTANTS_FILE) {
            return Ok(file);
        }
        let started = Instant::now();
        let report = mutate(&self.factory, &self.settings.config, &stability.result);
        let file = self.stage(started.elapsed(), report);
        write_json(&self.path(MUTANTS_FILE), &file)?;
        Ok(file)
    }

    pub fn evaluate(&self, mutation: &StageFile<MutationReport>) -> Result<StageFile<EvaluationReport>, CliError> {
        if let Some(file) = self.resumable(EVALUATION_FILE) {
            return Ok(file);
        }
        let started = Instant::now();
        let report = evaluate(&self.factory, &self.settings.config, &mutation.result);
        let file = self.stage(started.elapsed(), report);
        write_json(&self.path(EVALUATION_FILE), &file)?;
        Ok(file)
    }

    pub fn assemble(
        &self,
        stability: StageFile<StabilizationReport>,
        mutation: StageFile<MutationReport>,
        evaluation: StageFile<EvaluationReport>,
    ) -> CampaignReport {
        let total = stability.elapsed_ms + mutation.elapsed_ms + evaluation.elapsed_ms;
        let mut report = CampaignReport::assemble(
            &self.suite_name,
            self.shared_field_proxy,
            stability.result,
            mutation.result,
            evaluation.result,
            total,
        );
        report.config = self.settings.config.clone();
        report
    }

    pub fn write_report(&self, report: &CampaignReport) -> Result<usize, CliError> {
        write_artifacts(report, &self.settings.out)
            .map(|entries| entries.len())
            .map_err(campaign_err)
    }
}

fn summary(out: &mut impl Write, campaign: &Campaign, entries: Option<usize>) {
    let stats = campaign.cache_stats();
    if let Some(n) = entries {
        let _ = writeln!(out, "dataset entries: {n}");
    }
    let _ = writeln!(out, "adapter executions: {}", stats.misses);
    let _ = writeln!(out, "cache hits: {}", stats.hits);
    let _ = writeln!(out, "output: {}", campaign.settings.out.display());
}

fn settings(args: &CampaignArgs) -> Result<Settings, CliError> {
    Settings::resolve(args, std::env::var_os(OUT_ENV).map(PathBuf::from))
}

fn cmd_campaign(command: &Command, args: &CampaignArgs, out: &mut impl Write) -> Result<(), CliError> {
    let campaign = Campaign::open(settings(args)?)?;
    let entries = match command {
        Command::Run(_) => {
            let stability = campaign.stabilize()?;
            let mutation = campaign.mutate(&stability)?;
            let evaluation = campaign.evaluate(&mutation)?;
            let report = campaign.assemble(stability, mutation, evaluation);
            Some(campaign.write_report(&report)?)
        }
        Command::Stabilize(_) => {
            let file = campaign.stabilize()?;
            let excluded = file.result.classes.iter().filter(|c| !c.is_retained()).count();
            let _ = writeln!(out, "classes: {}, excluded: {excluded}", file.result.classes.len());
            None
        }
        Command::Mutate(_) => {
            let stability = campaign.load(STABILITY_FILE)?;
            let file = campaign.mutate(&stability)?;
            let _ = writeln!(out, "mutants: {}", file.result.mutants.len());
            None
        }
        Command::Evaluate(_) => {
            let mutation = campaign.load(MUTANTS_FILE)?;
            let file = campaign.evaluate(&mutation)?;
            let _ = writeln!(out, "evaluated mutants: {}", file.result.evaluations.len());
            None
        }
        Command::Report(_) => {
            let report = campaign.assemble(
                campaign.load(STABILITY_FILE)?,
                campaign.load(MUTANTS_FILE)?,
                campaign.load(EVALUATION_FILE)?,
            );
            Some(campaign.write_report(&report)?)
        }
        _ => unreachable!("not a campaign command"),
    };
    summary(out, &campaign, entries);
    Ok(())
}

fn cmd_selftest(args: &SelftestArgs, out: &mut impl Write) -> Result<(), CliError> {
    let mut options = SelftestOptions::default();
    options.generator.classes = args.classes;
    options.generator.seed = args.seed;
    if let Some(jobs) = args.jobs {
        if jobs == 0 {
            return Err(CliError::Config("`jobs` must be positive".into()));
        }
        options.parallelism = jobs;
    }
    let report = run_selftest(&options);
    for check in &report.checks {
        let _ = writeln!(out, "{} {}: {}", if check.passed { "PASS" } else { "FAIL" }, check.name, check.detail);
    }
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::Campaign("selftest failed".into()))
    }
}

fn cmd_conformance(args: &ConformanceArgs, out: &mut impl Write) -> Result<(), CliError> {
    let spec = AdapterSpec::parse(&args.adapter, args.corpus.as_deref(), args.suite.clone())?;
    let adapter = ResolvedAdapter::resolve(&spec)?;
    let report = run_conformance(&adapter.factory, Duration::from_secs(args.timeout));
    for check in &report.checks {
        let _ = writeln!(out, "{} {}: {}", if check.passed { "PASS" } else { "FAIL" }, check.name, check.detail);
    }
    if report.passed() {
        Ok(())
    } else {
        Err(CliError::Campaign("adapter is not conformant".into()))
    }
}

fn cmd_serve_sim(corpus: &str) -> Result<(), CliError> {
    let suite = Corpus::parse(corpus).load()?;
    let mut adapter = SimAdapter::new(Arc::new(suite));
    let stdin = io::stdin();
    serve(&mut adapter, stdin.lock(), io::stdout().lock()).map_err(campaign_err)
}

pub fn execute(cli: &Cli, out: &mut impl Write) -> Result<(), CliError> {
    match &cli.command {
        command @ (Command::Run(args)
        | Command::Stabilize(args)
        | Command::Mutate(args)
        | Command::Evaluate(args)
        | Command::Report(args)) => cmd_campaign(command, args, out),
        Command::Selftest(args) => cmd_selftest(args, out),
        Command::Conformance(args) => cmd_conformance(args, out),
        Command::ServeSim { corpus } => cmd_serve_sim(corpus),
    }
}

/// Parses `args`, runs the command and maps the outcome to an exit status.
pub fn main_with_args<I, T>(args: I) -> ExitCode
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(err) => {
            let _ = err.print();
            return ExitCode::from(if err.use_stderr() { 2 } else { 0 });
        }
    };
    let stdout = io::stdout();
    let mut out = stdout.lock();
    match execute(&cli, &mut out) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            let _ = out.flush();
            eprintln!("flaker: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
