//! `wata`: run the word association thematic analysis pipeline, one stage
//! at a time or end to end, and serve the results for coding.

use std::collections::BTreeMap;
use std::fs;
use std::io::{self, Write};
use std::net::IpAddr;
use std::path::PathBuf;

use anyhow::{bail, Context, Result};
use chrono::NaiveDate;
use clap::{Args, Parser, Subcommand, ValueEnum};
use wata_core::codebook::CodingStore;
use wata_core::geomap::assign_authors;
use wata_core::ingest::{write_records, CollectionWindow};
use wata_core::pipeline::{
    filter_summary_text, filter_stage, gender_stage, ingest_stage, read_records, read_term_lists, select_partitions,
    stats_stage, write_authors, write_countries, write_gender_lists, write_record_file, write_term_lists,
    AnalysisCorpus, ComparisonMode, AUTHORS_FILE, COUNTRIES_FILE, DEDUPED_FILE, FILTERED_FILE, FILTER_SUMMARY_FILE,
    GENDER_DIR, INGEST_REPORT_FILE, LIMITED_FILE, PARSED_FILE,
};
use wata_core::report::ReportBundle;
use wata_core::sampler::DEFAULT_SAMPLE_SIZE;
use wata_core::{run_pipeline, sample_tweets, GenderLexicon, Partition, PipelineConfig, SampleRequest};
use wata_server::{ApiConfig, CODING_LOG_FILE};

#[derive(Debug, Parser)]
#[command(name = "wata", version, about = "Word association thematic analysis of tweet corpora")]
struct Cli {
    /// TOML file with pipeline settings; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed for the per-user monthly limit and for tweet samples.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Run directory for all stage outputs.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Parse raw tweet files into the run directory.
    Ingest(InputArgs),
    /// Language, query, window, duplicate and monthly-limit filters.
    Filter(FilterArgs),
    /// Assign authors to countries.
    Geo(GeoArgs),
    /// Rank over-represented terms for each selected country.
    Stats(StatsArgs),
    /// Male versus female term lists within each selected country.
    Gender(GenderArgs),
    /// Print a seeded sample of tweets containing a term.
    Sample(SampleArgs),
    /// Serve the run directory over HTTP for coding.
    Serve(ServeArgs),
    /// Write the coded report bundle.
    Export(ExportArgs),
    /// Run every stage and write a manifest.
    All(AllArgs),
}

#[derive(Debug, Args, Default)]
struct InputArgs {
    /// Newline-delimited JSON tweet file; repeatable.
    #[arg(long = "input")]
    inputs: Vec<PathBuf>,
}

#[derive(Debug, Args, Default)]
struct FilterArgs {
    /// Comma-separated keywords or hashtags.
    #[arg(long, value_delimiter = ',')]
    queries: Option<Vec<String>>,
    #[arg(long)]
    lang: Option<String>,
    /// First day of the collection window (YYYY-MM-DD).
    #[arg(long, requires = "to")]
    from: Option<NaiveDate>,
    /// Last day of the collection window, inclusive.
    #[arg(long, requires = "from")]
    to: Option<NaiveDate>,
    /// Keep every tweet regardless of date.
    #[arg(long, conflicts_with_all = ["from", "to"])]
    no_window: bool,
    /// Compare tweets without case folding when removing duplicates.
    #[arg(long)]
    strict_dedup: bool,
}

#[derive(Debug, Args, Default)]
struct GeoArgs {
    /// CSV gazetteer (`name,iso2,kind`); defaults to the bundled one.
    #[arg(long)]
    gazetteer: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ComparisonArg {
    Rest,
    Selected,
}

#[derive(Debug, Args, Default)]
struct StatsArgs {
    #[arg(long)]
    alpha: Option<f64>,
    #[arg(long)]
    top_k: Option<usize>,
    #[arg(long)]
    min_df: Option<u64>,
    #[arg(long, value_enum)]
    comparison: Option<ComparisonArg>,
    /// Comma-separated country codes to analyse instead of the largest.
    #[arg(long, value_delimiter = ',')]
    countries: Option<Vec<String>>,
}

#[derive(Debug, Args, Default)]
struct GenderArgs {
    /// CSV lexicon (`name,gender,proportion`).
    #[arg(long)]
    gender_lexicon: Option<PathBuf>,
    #[command(flatten)]
    stats: StatsArgs,
}

#[derive(Debug, Args)]
struct SampleArgs {
    #[arg(long)]
    term: String,
    #[arg(long)]
    country: String,
    #[arg(long, default_value_t = DEFAULT_SAMPLE_SIZE)]
    n: usize,
}

#[derive(Debug, Args)]
struct ServeArgs {
    #[arg(long, default_value = "127.0.0.1")]
    bind: IpAddr,
    #[arg(long, default_value_t = 8787)]
    port: u16,
    #[arg(long)]
    read_only: bool,
    /// Shared token required on mutating requests.
    #[arg(long, env = "WATA_TOKEN")]
    token: Option<String>,
}

#[derive(Debug, Args)]
struct ExportArgs {
    /// Destination directory; defaults to `<out>/report`.
    #[arg(long)]
    dir: Option<PathBuf>,
}

#[derive(Debug, Args, Default)]
struct AllArgs {
    #[command(flatten)]
    input: InputArgs,
    #[command(flatten)]
    filter: FilterArgs,
    #[command(flatten)]
    geo: GeoArgs,
    #[command(flatten)]
    gender: GenderArgs,
}

fn load_config(cli: &Cli) -> Result<PipelineConfig> {
    let mut cfg = match &cli.config {
        Some(path) => {
            let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
            toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?
        }
        None => PipelineConfig::default(),
    };
    if cli.seed.is_some() {
        cfg.seed = cli.seed;
    }
    if let Some(out) = &cli.out {
        cfg.out = out.clone();
    }
    Ok(cfg)
}

impl InputArgs {
    fn apply(&self, cfg: &mut PipelineConfig) {
        if !self.inputs.is_empty() {
            cfg.inputs = self.inputs.clone();
        }
    }
}

impl FilterArgs {
    fn apply(&self, cfg: &mut PipelineConfig) -> Result<()> {
        if let Some(q) = &self.queries {
            cfg.queries = q.clone();
        }
        if let Some(lang) = &self.lang {
            cfg.language = lang.clone();
        }
        if let (Some(from), Some(to)) = (self.from, self.to) {
            cfg.window = Some(CollectionWindow::new(from, to)?);
        }
        if self.no_window {
            cfg.window = None;
        }
        cfg.strict_dedup |= self.strict_dedup;
        Ok(())
    }
}

impl GeoArgs {
    fn apply(&self, cfg: &mut PipelineConfig) {
        if self.gazetteer.is_some() {
            cfg.gazetteer = self.gazetteer.clone();
        }
    }
}

impl StatsArgs {
    fn apply(&self, cfg: &mut PipelineConfig) {
        if let Some(a) = self.alpha {
            cfg.alpha = a;
        }
        if let Some(k) = self.top_k {
            cfg.top_k = k;
        }
        if let Some(m) = self.min_df {
            cfg.min_df = m;
        }
        if let Some(c) = self.comparison {
            cfg.comparison = match c {
                ComparisonArg::Rest => ComparisonMode::Rest,
                ComparisonArg::Selected => ComparisonMode::Selected,
            };
        }
        if self.countries.is_some() {
            cfg.countries = self.countries.clone();
        }
    }
}

impl GenderArgs {
    fn apply(&self, cfg: &mut PipelineConfig) {
        if self.gender_lexicon.is_some() {
            cfg.gender_lexicon = self.gender_lexicon.clone();
        }
        self.stats.apply(cfg);
    }
}

fn check_alpha(cfg: &PipelineConfig) -> Result<()> {
    if !(cfg.alpha > 0.0 && cfg.alpha < 1.0) {
        bail!("alpha must be in (0, 1), got {}", cfg.alpha);
    }
    Ok(())
}

fn ingest(cfg: &PipelineConfig) -> Result<()> {
    if cfg.inputs.is_empty() {
        bail!("no input files; pass --input or set inputs in the config");
    }
    fs::create_dir_all(&cfg.out)?;
    let (records, report, lines) = ingest_stage(&cfg.inputs)?;
    write_record_file(&cfg.out.join(PARSED_FILE), &records)?;
    fs::write(cfg.out.join(INGEST_REPORT_FILE), serde_json::to_string_pretty(&report)?)?;
    println!("parsed {} of {lines} lines, skipped {}", records.len(), report.total());
    Ok(())
}

fn filter(cfg: &PipelineConfig) -> Result<()> {
    cfg.query_set()?;
    cfg.require_seed()?;
    let records = read_records(&cfg.out.join(PARSED_FILE))?;
    let outcome = filter_stage(records, cfg)?;
    write_record_file(&cfg.out.join(FILTERED_FILE), &outcome.window)?;
    write_record_file(&cfg.out.join(DEDUPED_FILE), &outcome.deduped)?;
    write_record_file(&cfg.out.join(LIMITED_FILE), &outcome.limited)?;
    let summary = filter_summary_text(&outcome.counts);
    fs::write(cfg.out.join(FILTER_SUMMARY_FILE), &summary)?;
    print!("{summary}");
    Ok(())
}

fn geo(cfg: &PipelineConfig) -> Result<()> {
    let gazetteer = cfg.load_gazetteer()?;
    let records = read_records(&cfg.out.join(LIMITED_FILE))?;
    let authors = assign_authors(&records, &gazetteer);
    write_authors(&cfg.out.join(AUTHORS_FILE), &authors)?;
    let corpus = AnalysisCorpus::new(records, authors);
    let counts = corpus.country_counts();
    write_countries(&cfg.out.join(COUNTRIES_FILE), &counts, corpus.records.len() as u64)?;
    let assigned = corpus.authors.values().filter(|a| a.country.is_some()).count();
    println!("{assigned} of {} authors assigned a country", corpus.authors.len());
    Ok(())
}

fn selected(cfg: &PipelineConfig, corpus: &AnalysisCorpus) -> Vec<Partition> {
    select_partitions(&corpus.country_counts(), cfg)
}

fn stats(cfg: &PipelineConfig) -> Result<()> {
    check_alpha(cfg)?;
    let corpus = AnalysisCorpus::load(&cfg.out)?;
    let partitions = selected(cfg, &corpus);
    let comparison = wata_core::pipeline::comparison_for(cfg.comparison, &partitions);
    let lists = stats_stage(&corpus, &partitions, &comparison, &cfg.rank_params())?;
    write_term_lists(&cfg.out, &lists)?;
    for (p, list) in &lists {
        println!("{p}: {} significant terms", list.len());
    }
    Ok(())
}

fn gender(cfg: &PipelineConfig) -> Result<()> {
    check_alpha(cfg)?;
    let Some(path) = &cfg.gender_lexicon else {
        bail!("no gender lexicon; pass --gender-lexicon or set gender_lexicon in the config");
    };
    let lexicon = GenderLexicon::load(path).with_context(|| format!("loading {}", path.display()))?;
    let corpus = AnalysisCorpus::load(&cfg.out)?;
    let partitions = selected(cfg, &corpus);
    let (lists, summary) = gender_stage(&corpus, &partitions, &lexicon, &cfg.rank_params())?;
    write_gender_lists(&cfg.out, &lists)?;
    fs::write(
        cfg.out.join(GENDER_DIR).join("summary.json"),
        serde_json::to_string_pretty(&summary)?,
    )?;
    for (p, g) in &lists {
        println!("{p}: {} male, {} female terms", g.male.len(), g.female.len());
    }
    Ok(())
}

fn sample(cfg: &PipelineConfig, args: &SampleArgs) -> Result<()> {
    let Some(seed) = cfg.seed else {
        bail!("sampling needs an explicit --seed");
    };
    let corpus = AnalysisCorpus::load(&cfg.out)?;
    let req = SampleRequest {
        term: args.term.clone(),
        partition: Partition::new(args.country.to_uppercase()),
        n: args.n,
        seed,
    };
    let tweets = sample_tweets(&req, &corpus.index, &corpus.records)?;
    let mut stdout = io::stdout().lock();
    write_records(&mut stdout, &tweets)?;
    stdout.flush()?;
    Ok(())
}

fn serve(cfg: &PipelineConfig, args: &ServeArgs) -> Result<()> {
    let config = ApiConfig {
        bind: args.bind,
        port: args.port,
        data_dir: cfg.out.clone(),
        read_only: args.read_only,
        token: args.token.clone(),
    };
    let runtime = tokio::runtime::Runtime::new()?;
    runtime.block_on(wata_server::serve(&config))?;
    Ok(())
}

fn export(cfg: &PipelineConfig, args: &ExportArgs) -> Result<()> {
    let lists = read_term_lists(&cfg.out)?;
    let ranked: BTreeMap<Partition, Vec<String>> = lists
        .iter()
        .map(|(p, s)| (p.clone(), s.iter().map(|x| x.term.clone()).collect()))
        .collect();
    let log = cfg.out.join(CODING_LOG_FILE);
    let store = if log.exists() {
        CodingStore::open(&log, ranked)?
    } else {
        CodingStore::in_memory(ranked)
    };
    let bundle = ReportBundle::from_store(&store, &lists);
    let dir = args.dir.clone().unwrap_or_else(|| cfg.out.join("report"));
    let files = bundle.write(&dir)?;
    if bundle.is_partial() {
        log::warn!("some listed terms are still unthemed; the report is partial");
    }
    for f in files {
        println!("{}", f.display());
    }
    Ok(())
}

fn all(cfg: &PipelineConfig) -> Result<()> {
    if cfg.inputs.is_empty() {
        bail!("no input files; pass --input or set inputs in the config");
    }
    let manifest = run_pipeline(cfg)?;
    for s in &manifest.stages {
        println!("{:<14} {:>10} -> {:>10}  {} ms", s.stage, s.input, s.output, s.millis);
    }
    println!("wrote {}", cfg.out.display());
    Ok(())
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = load_config(&cli)?;
    match &cli.command {
        Command::Ingest(a) => {
            a.apply(&mut cfg);
            ingest(&cfg)
        }
        Command::Filter(a) => {
            a.apply(&mut cfg)?;
            filter(&cfg)
        }
        Command::Geo(a) => {
            a.apply(&mut cfg);
            geo(&cfg)
        }
        Command::Stats(a) => {
            a.apply(&mut cfg);
            stats(&cfg)
        }
        Command::Gender(a) => {
            a.apply(&mut cfg);
            gender(&cfg)
        }
        Command::Sample(a) => sample(&cfg, a),
        Command::Serve(a) => serve(&cfg, a),
        Command::Export(a) => export(&cfg, a),
        Command::All(a) => {
            a.input.apply(&mut cfg);
            a.filter.apply(&mut cfg)?;
            a.geo.apply(&mut cfg);
            a.gender.apply(&mut cfg);
            all(&cfg)
        }
    }
}

fn main() -> std::process::ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    match run(Cli::parse()) {
        Ok(()) => std::process::ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            std::process::ExitCode::FAILURE
        }
    }
}
