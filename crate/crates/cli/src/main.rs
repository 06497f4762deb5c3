use std::io::Write as _;
use std::path::{Path, PathBuf};
use std::time::Instant;

use anyhow::{bail, Context, Result};
use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use semcomplete_core::atomic::{parse_phrase_list, AtomModelBuilder};
use semcomplete_core::bundle::DomainBundle;
use semcomplete_core::eval::{disjoint_test, evaluate_system, EvalConfig, LatencyStats, Predicate};
use semcomplete_core::mpc::MpcIndex;
use semcomplete_core::querylog::{load_log, numeric_variants, save_log, synthesize, time_shift, LogCorpus};
use semcomplete_core::snapshot;
use semcomplete_service::{load_system, CompleteResponse, CompletionItem, ServiceConfig, SCHEMA_VERSION};

/// `println!` that reports write errors instead of panicking.
macro_rules! outln {
    ($($t:tt)*) => { writeln!(std::io::stdout().lock(), $($t)*)? };
}

macro_rules! out {
    ($($t:tt)*) => { write!(std::io::stdout().lock(), $($t)*)? };
}

#[derive(Parser)]
#[command(name = "semcomplete", version, about = "Semantic auto-completion for natural-language query interfaces")]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Build the most-popular-completion index snapshot from a query log.
    BuildIndex(BuildArgs),
    /// Build the atom model snapshot from a query log.
    BuildAtomModel(AtomArgs),
    /// Sample a synthetic query log from the domain grammar.
    Synth(SynthArgs),
    /// Move the dates in a query log to a new observation date.
    Timeshift(ShiftArgs),
    /// Measure predictiveness (MRR) and latency on a test log.
    Eval(EvalArgs),
    /// Measure completion latency over a list of prefixes.
    Bench(BenchArgs),
    /// Run the HTTP JSON API.
    Serve(ServeArgs),
    /// Complete one prefix and print the results.
    Complete(CompleteArgs),
}

#[derive(Args)]
struct DomainArg {
    /// Bundled domain name (bonds, news) or a domain directory.
    #[arg(long, alias = "grammar", default_value = "bonds")]
    domain: String,
}

impl DomainArg {
    fn open(&self) -> Result<DomainBundle> {
        DomainBundle::open(&self.domain).with_context(|| format!("loading domain `{}`", self.domain))
    }
}

/// Where the serving indexes come from. Flags override the config file.
#[derive(Args)]
struct SystemArgs {
    /// Service config file (TOML).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Bundled domain name or a domain directory.
    #[arg(long, alias = "grammar")]
    domain: Option<String>,
    /// Training log; defaults to the domain's sample log.
    #[arg(long)]
    log: Option<PathBuf>,
    #[arg(long)]
    mpc_snapshot: Option<PathBuf>,
    #[arg(long)]
    atom_snapshot: Option<PathBuf>,
    /// Per-engine time budget in milliseconds.
    #[arg(long)]
    budget_ms: Option<u64>,
}

impl SystemArgs {
    fn service_config(&self) -> Result<ServiceConfig> {
        let mut cfg = match &self.config {
            Some(p) => ServiceConfig::load(p)?,
            None => ServiceConfig::default(),
        };
        if let Some(d) = &self.domain {
            cfg.domain = d.clone();
        }
        for (slot, v) in [
            (&mut cfg.log, &self.log),
            (&mut cfg.mpc_snapshot, &self.mpc_snapshot),
            (&mut cfg.atom_snapshot, &self.atom_snapshot),
        ] {
            if v.is_some() {
                slot.clone_from(v);
            }
        }
        if let Some(b) = self.budget_ms {
            cfg.coordinator.budget_ms = b;
        }
        cfg.coordinator.validate()?;
        Ok(cfg)
    }
}

#[derive(Args)]
struct BuildArgs {
    #[command(flatten)]
    domain: DomainArg,
    #[arg(long)]
    log: PathBuf,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct AtomArgs {
    #[command(flatten)]
    build: BuildArgs,
    /// Phrase list (`phrase<TAB>count`) added as keyword atoms.
    #[arg(long)]
    phrases: Option<PathBuf>,
    /// Field the phrase atoms constrain.
    #[arg(long, default_value = "KEYWORDS")]
    phrase_field: String,
    /// Also print the model in its readable form.
    #[arg(long)]
    dump: bool,
}

#[derive(Args)]
struct SynthArgs {
    #[command(flatten)]
    domain: DomainArg,
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Append up to this many variants with randomized digits.
    #[arg(long)]
    variants: Option<usize>,
    /// Output file; standard output when absent.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct ShiftArgs {
    #[command(flatten)]
    domain: DomainArg,
    #[arg(long)]
    log: PathBuf,
    /// New observation date, YYYY-MM-DD.
    #[arg(long)]
    now: NaiveDate,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EvalArgs {
    #[command(flatten)]
    domain: DomainArg,
    #[arg(long)]
    train: PathBuf,
    #[arg(long)]
    test: PathBuf,
    /// Comma-separated subset of STR,PSTR,BOW,PBOW,SEM,PSEM.
    #[arg(long, value_delimiter = ',')]
    predicates: Vec<String>,
    #[arg(long, default_value_t = 3)]
    min_prefix: usize,
    #[arg(long, default_value_t = 10)]
    k: usize,
    /// Drop test queries that also occur in the training log.
    #[arg(long)]
    disjoint: bool,
    #[arg(long)]
    budget_ms: Option<u64>,
    /// Write the full report as JSON.
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// One prefix per line. Without it, prefixes are cut from synthetic queries.
    #[arg(long)]
    prefixes: Option<PathBuf>,
    /// Number of synthetic prefixes.
    #[arg(long, default_value_t = 1000)]
    n: usize,
    #[arg(long, default_value_t = 9)]
    seed: u64,
    /// Measure end to end against a running service at this base URL.
    #[arg(long)]
    url: Option<String>,
    #[arg(long)]
    json: bool,
}

#[derive(Args)]
struct ServeArgs {
    #[command(flatten)]
    system: SystemArgs,
    /// Overrides the config file; the SEMCOMPLETE_BIND variable overrides both.
    #[arg(long)]
    bind: Option<String>,
    /// Allowed browser origin; repeatable.
    #[arg(long = "cors-origin")]
    cors_origins: Vec<String>,
}

#[derive(Args)]
struct CompleteArgs {
    #[command(flatten)]
    system: SystemArgs,
    #[arg(long)]
    prefix: String,
    #[arg(long)]
    k: Option<usize>,
    #[arg(long)]
    json: bool,
}

fn main() {
    let cli = Cli::parse();
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new().filter_level(level).parse_default_env().init();
    if let Err(e) = run(cli.cmd) {
        // A closed pipe (as with `| head`) ends the output normally.
        if e.downcast_ref::<std::io::Error>().is_some_and(|e| e.kind() == std::io::ErrorKind::BrokenPipe) {
            return;
        }
        eprintln!("error: {e:#}");
        std::process::exit(1);
    }
}

fn run(cmd: Cmd) -> Result<()> {
    match cmd {
        Cmd::BuildIndex(a) => build_index(a),
        Cmd::BuildAtomModel(a) => build_atom_model(a),
        Cmd::Synth(a) => synth(a),
        Cmd::Timeshift(a) => timeshift(a),
        Cmd::Eval(a) => eval(a),
        Cmd::Bench(a) => bench(a),
        Cmd::Serve(a) => serve(a),
        Cmd::Complete(a) => complete(a),
    }
}

fn read_log(p: &Path) -> Result<LogCorpus> {
    load_log(p).with_context(|| format!("reading log {}", p.display()))
}

fn write_out(out: Option<&Path>, body: &str) -> Result<()> {
    match out {
        Some(p) => std::fs::write(p, body).with_context(|| format!("writing {}", p.display())),
        None => {
            std::io::stdout().lock().write_all(body.as_bytes())?;
            Ok(())
        }
    }
}

fn build_index(a: BuildArgs) -> Result<()> {
    let b = a.domain.open()?;
    let idx = MpcIndex::build(&read_log(&a.log)?, &b.grammar);
    snapshot::save(&idx, &a.out)?;
    outln!("{} distinct queries -> {}", idx.len(), a.out.display());
    Ok(())
}

fn build_atom_model(a: AtomArgs) -> Result<()> {
    let b = a.build.domain.open()?;
    let mut builder = AtomModelBuilder::new();
    builder.add_log(&read_log(&a.build.log)?, &b.grammar);
    if let Some(p) = &a.phrases {
        let body = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        builder.add_phrases(&parse_phrase_list(&p.to_string_lossy(), &body)?, &a.phrase_field);
    }
    let skipped = builder.skipped();
    let model = builder.finish();
    snapshot::save(&model, &a.build.out)?;
    if a.dump {
        out!("{}", model.dump());
    }
    outln!("{} atoms ({skipped} occurrences skipped) -> {}", model.len(), a.build.out.display());
    Ok(())
}

fn synth(a: SynthArgs) -> Result<()> {
    let b = a.domain.open()?;
    let mut log = synthesize(&b.grammar, a.n, a.seed);
    if log.len() < a.n {
        log::warn!("grammar yielded only {} distinct queries", log.len());
    }
    if let Some(v) = a.variants {
        let extra = numeric_variants(&b.grammar, &log, v, a.seed.wrapping_add(1));
        log.queries.extend(extra.queries);
    }
    match &a.out {
        Some(p) => save_log(&log, p)?,
        None => write_out(None, &log.to_tsv())?,
    }
    Ok(())
}

fn timeshift(a: ShiftArgs) -> Result<()> {
    let b = a.domain.open()?;
    let log = read_log(&a.log)?;
    let mut out = LogCorpus::new(&log.domain, Vec::with_capacity(log.len()));
    let mut clamped = 0;
    for q in &log.queries {
        let s = time_shift(&b.grammar, q, a.now);
        if let Some(w) = &s.warning {
            eprintln!("warning: {w}");
        }
        clamped += usize::from(s.clamped);
        out.queries.push(s.query);
    }
    if clamped > 0 {
        eprintln!("{clamped} queries had a day clamped to its month");
    }
    match &a.out {
        Some(p) => save_log(&out, p)?,
        None => write_out(None, &out.to_tsv())?,
    }
    Ok(())
}

fn eval(a: EvalArgs) -> Result<()> {
    let predicates = if a.predicates.is_empty() {
        Predicate::ALL.to_vec()
    } else {
        a.predicates
            .iter()
            .map(|s| Predicate::parse(s).with_context(|| format!("unknown predicate `{s}`")))
            .collect::<Result<_>>()?
    };
    let train = read_log(&a.train)?;
    let test = read_log(&a.test)?;
    let test = if a.disjoint { disjoint_test(&train, &test) } else { test.queries };
    let cfg = ServiceConfig {
        domain: a.domain.domain.clone(),
        log: Some(a.train.clone()),
        coordinator: semcomplete_core::coordinator::CoordinatorConfig {
            budget_ms: a.budget_ms.unwrap_or(50),
            d: a.k,
            ..Default::default()
        },
        ..Default::default()
    };
    cfg.coordinator.validate()?;
    let system = load_system(&cfg)?;
    let report = evaluate_system(&system, &test, &EvalConfig { min_prefix: a.min_prefix, k: a.k, predicates })?;
    if let Some(p) = &a.out {
        std::fs::write(p, serde_json::to_string_pretty(&report)?)
            .with_context(|| format!("writing {}", p.display()))?;
    }
    if a.json {
        outln!("{}", serde_json::to_string_pretty(&report)?);
    } else {
        outln!("{} queries, {} prefixes", report.queries, report.prefixes);
        out!("{}", report.table());
        out!("{}", report.latency.table());
    }
    Ok(())
}

fn bench_prefixes(a: &BenchArgs, domain: &DomainBundle) -> Result<Vec<String>> {
    if let Some(p) = &a.prefixes {
        let body = std::fs::read_to_string(p).with_context(|| format!("reading {}", p.display()))?;
        let v: Vec<String> = body.lines().filter(|l| !l.trim().is_empty()).map(String::from).collect();
        if v.is_empty() {
            bail!("{} has no prefixes", p.display());
        }
        return Ok(v);
    }
    let log = synthesize(&domain.grammar, a.n.max(1), a.seed);
    let mut rng = ChaCha8Rng::seed_from_u64(a.seed);
    let mut out = Vec::with_capacity(a.n);
    while out.len() < a.n {
        let q = &log.queries[rng.gen_range(0..log.len())].text;
        let ends: Vec<usize> = q.char_indices().map(|(i, c)| i + c.len_utf8()).skip(2).collect();
        if ends.is_empty() {
            continue;
        }
        out.push(q[..ends[rng.gen_range(0..ends.len())]].to_string());
    }
    Ok(out)
}

fn bench(a: BenchArgs) -> Result<()> {
    let cfg = a.system.service_config()?;
    let mut samples = Vec::new();
    let mut timeouts = 0usize;
    match &a.url {
        Some(url) => {
            let prefixes = bench_prefixes(&a, &DomainBundle::open(&cfg.domain)?)?;
            let client = reqwest::blocking::Client::new();
            let endpoint = format!("{}/complete", url.trim_end_matches('/'));
            for p in &prefixes {
                let start = Instant::now();
                let r: CompleteResponse =
                    client.get(&endpoint).query(&[("prefix", p)]).send()?.error_for_status()?.json()?;
                samples.push(start.elapsed().as_secs_f64() * 1e3);
                timeouts += r.timed_out.len();
            }
        }
        None => {
            let system = load_system(&cfg)?;
            let prefixes = bench_prefixes(&a, &system.bundle)?;
            for p in &prefixes {
                let start = Instant::now();
                let out = system.complete(p);
                samples.push(start.elapsed().as_secs_f64() * 1e3);
                timeouts += out.timed_out.len();
            }
        }
    }
    let stats = LatencyStats::from_samples(samples);
    if a.json {
        outln!("{}", serde_json::to_string_pretty(&stats)?);
    } else {
        out!("{}", stats.table());
        if timeouts > 0 {
            outln!("{timeouts} engine timeouts");
        }
    }
    Ok(())
}

fn serve(a: ServeArgs) -> Result<()> {
    let mut cfg = a.system.service_config()?;
    if let Some(b) = a.bind {
        cfg.bind = b;
    }
    if !a.cors_origins.is_empty() {
        cfg.cors_origins = a.cors_origins;
    }
    let rt = tokio::runtime::Builder::new_multi_thread().enable_all().build()?;
    rt.block_on(semcomplete_service::serve(cfg))?;
    Ok(())
}

fn complete(a: CompleteArgs) -> Result<()> {
    let cfg = a.system.service_config()?;
    let system = load_system(&cfg)?;
    let out = system.complete(&a.prefix);
    let k = a.k.unwrap_or(cfg.coordinator.d);
    let items: Vec<CompletionItem> = out.completions.iter().take(k).map(CompletionItem::from).collect();
    if a.json {
        let r =
            CompleteResponse { schema: SCHEMA_VERSION, prefix: a.prefix, completions: items, timed_out: out.timed_out };
        outln!("{}", serde_json::to_string_pretty(&r)?);
        return Ok(());
    }
    if items.is_empty() {
        eprintln!("no suggestions");
    }
    for c in items {
        let grade = format!("{:?}", c.grade).to_uppercase();
        outln!("{}\t{}\t{}\t{grade}\t{}", c.completion, c.interpretation, c.dtype, c.source.name());
    }
    Ok(())
}
