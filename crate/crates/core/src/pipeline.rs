//! End-to-end pipeline: ingest → filter → dedup/limit → geomap → termstats
//! (→ gender).
//!
//! Each stage writes its output under the run directory as newline-delimited
//! records or CSV so stages can be rerun and inspected on their own. The run
//! manifest records input digests, parameters, per-stage counts and timings;
//! feeding its parameters back in reproduces the statistical outputs byte for
//! byte.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use thiserror::Error;

use crate::dedup::{limit_user_monthly, remove_duplicates, DedupMode};
use crate::gender::{assign_genders, gender_summary, gendered_terms, GenderLexicon, GenderedTerms};
use crate::geomap::{
    assign_authors, country_shares, tweet_counts_by_country, CountryAssignment, Gazetteer, NONE_DECLARED,
};
use crate::ingest::{
    filter_language, match_query, parse_tweet_stream, write_records, CollectionWindow, IngestReport, QuerySet,
    TweetRecord, DEFAULT_QUERIES,
};
use crate::termstats::{rank_terms, write_term_list, Comparison, Partition, RankParams, TermIndex, TermScore};

pub const PARSED_FILE: &str = "parsed.jsonl";
pub const INGEST_REPORT_FILE: &str = "ingest_report.json";
pub const FILTERED_FILE: &str = "filtered.jsonl";
pub const DEDUPED_FILE: &str = "deduped.jsonl";
pub const LIMITED_FILE: &str = "limited.jsonl";
pub const FILTER_SUMMARY_FILE: &str = "filter_summary.txt";
pub const AUTHORS_FILE: &str = "authors.jsonl";
pub const COUNTRIES_FILE: &str = "countries.csv";
pub const PARTITIONS_FILE: &str = "partitions.json";
pub const TERMS_DIR: &str = "terms";
pub const GENDER_DIR: &str = "gender";
pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("{stage} stage failed: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<dyn std::error::Error + Send + Sync>,
    },
    #[error("invalid configuration: {0}")]
    Config(String),
}

fn at<E>(stage: &'static str) -> impl FnOnce(E) -> PipelineError
where
    E: std::error::Error + Send + Sync + 'static,
{
    move |e| PipelineError::Stage {
        stage,
        source: Box::new(e),
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ComparisonMode {
    /// Everything outside the target country, including unassigned tweets.
    #[default]
    Rest,
    /// Only the other selected countries.
    Selected,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineConfig {
    pub inputs: Vec<PathBuf>,
    pub queries: Vec<String>,
    pub language: String,
    /// Inclusive UTC date window; `None` keeps every date.
    pub window: Option<CollectionWindow>,
    pub seed: Option<u64>,
    pub strict_dedup: bool,
    /// `None` uses the bundled starter gazetteer.
    pub gazetteer: Option<PathBuf>,
    /// Explicit country selection; otherwise the `top_countries` largest.
    pub countries: Option<Vec<String>>,
    pub top_countries: usize,
    pub alpha: f64,
    pub top_k: usize,
    pub min_df: u64,
    pub comparison: ComparisonMode,
    pub gender_lexicon: Option<PathBuf>,
    pub out: PathBuf,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        let rank = RankParams::default();
        PipelineConfig {
            inputs: Vec::new(),
            queries: DEFAULT_QUERIES.iter().map(|s| s.to_string()).collect(),
            language: "en".into(),
            window: Some(CollectionWindow::vaccine_collection()),
            seed: None,
            strict_dedup: false,
            gazetteer: None,
            countries: None,
            top_countries: 8,
            alpha: rank.alpha,
            top_k: rank.top_k,
            min_df: rank.min_df,
            comparison: ComparisonMode::Rest,
            gender_lexicon: None,
            out: PathBuf::from("wata-out"),
        }
    }
}

impl PipelineConfig {
    pub fn rank_params(&self) -> RankParams {
        RankParams {
            alpha: self.alpha,
            top_k: self.top_k,
            min_df: self.min_df,
        }
    }

    pub fn dedup_mode(&self) -> DedupMode {
        if self.strict_dedup {
            DedupMode::Strict
        } else {
            DedupMode::Folded
        }
    }

    pub fn query_set(&self) -> Result<QuerySet, PipelineError> {
        QuerySet::new(&self.queries).map_err(|e| PipelineError::Config(e.to_string()))
    }

    pub fn require_seed(&self) -> Result<u64, PipelineError> {
        self.seed
            .ok_or_else(|| PipelineError::Config("a seed is required for the per-user monthly limit".into()))
    }

    pub fn load_gazetteer(&self) -> Result<Gazetteer, PipelineError> {
        match &self.gazetteer {
            Some(path) => Gazetteer::load(path).map_err(at("geo")),
            None => Ok(Gazetteer::starter()),
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(PipelineError::Config(format!("alpha must be in (0, 1), got {}", self.alpha)));
        }
        self.query_set()?;
        self.require_seed()?;
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageCount {
    pub stage: String,
    pub input: usize,
    pub output: usize,
    pub millis: u128,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
    pub bytes: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub complete: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failed_stage: Option<String>,
    pub inputs: Vec<FileDigest>,
    pub config: PipelineConfig,
    pub seed: Option<u64>,
    pub stages: Vec<StageCount>,
    pub partitions: Vec<Partition>,
    pub outputs: Vec<FileDigest>,
}

impl RunManifest {
    pub fn load(path: impl AsRef<Path>) -> Result<Self, PipelineError> {
        let bytes = fs::read(path).map_err(at("manifest"))?;
        serde_json::from_slice(&bytes).map_err(at("manifest"))
    }

    pub fn stage(&self, name: &str) -> Option<&StageCount> {
        self.stages.iter().find(|s| s.stage == name)
    }
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().fold(String::with_capacity(64), |mut s, b| {
        let _ = write!(s, "{b:02x}");
        s
    })
}

fn digest_file(path: &Path, display: String) -> Result<FileDigest, std::io::Error> {
    let bytes = fs::read(path)?;
    Ok(FileDigest {
        path: display,
        sha256: sha256_hex(&bytes),
        bytes: bytes.len() as u64,
    })
}

fn write_jsonl<T: Serialize>(path: &Path, items: impl IntoIterator<Item = T>) -> std::io::Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for item in items {
        serde_json::to_writer(&mut w, &item)?;
        w.write_all(b"\n")?;
    }
    w.flush()
}

pub fn read_records(path: &Path) -> Result<Vec<TweetRecord>, PipelineError> {
    let file = File::open(path).map_err(at("read"))?;
    let (records, report) = parse_tweet_stream(BufReader::new(file)).map_err(at("read"))?;
    if !report.is_empty() {
        return Err(PipelineError::Config(format!(
            "{} has {} malformed line(s)",
            path.display(),
            report.total()
        )));
    }
    Ok(records)
}

pub fn write_record_file(path: &Path, records: &[TweetRecord]) -> Result<(), PipelineError> {
    let file = File::create(path).map_err(at("write"))?;
    write_records(BufWriter::new(file), records).map_err(at("write"))
}

/// Parses every input file, in order.
pub fn ingest_stage(inputs: &[PathBuf]) -> Result<(Vec<TweetRecord>, IngestReport, usize), PipelineError> {
    let mut records = Vec::new();
    let mut report = IngestReport::default();
    for path in inputs {
        let file = File::open(path).map_err(at("ingest"))?;
        let (mut recs, rep) = parse_tweet_stream(BufReader::new(file)).map_err(at("ingest"))?;
        records.append(&mut recs);
        report = report.merge(rep);
    }
    // Ids must stay unique across files too.
    let mut seen = std::collections::HashSet::new();
    let before = records.len();
    records.retain(|r| seen.insert(r.tweet_id.clone()));
    for _ in records.len()..before {
        report.record(crate::ingest::SkipReason::DuplicateId);
    }
    let lines = records.len() + report.total();
    Ok((records, report, lines))
}

#[derive(Debug, Clone, Default)]
pub struct FilterOutcome {
    pub language: Vec<TweetRecord>,
    pub query: Vec<TweetRecord>,
    pub window: Vec<TweetRecord>,
    pub deduped: Vec<TweetRecord>,
    pub limited: Vec<TweetRecord>,
    pub counts: Vec<StageCount>,
}

/// Language, keyword and date filters, then dedup and the monthly limit.
pub fn filter_stage(records: Vec<TweetRecord>, cfg: &PipelineConfig) -> Result<FilterOutcome, PipelineError> {
    let queries = cfg.query_set()?;
    let seed = cfg.require_seed()?;
    let mut counts = Vec::new();
    let mut step = |name: &str, input: usize, output: usize, started: Instant| {
        counts.push(StageCount {
            stage: name.to_string(),
            input,
            output,
            millis: started.elapsed().as_millis(),
        })
    };

    let t = Instant::now();
    let n = records.len();
    let language: Vec<_> = records.into_iter().filter(|r| filter_language(r, &cfg.language)).collect();
    step("language", n, language.len(), t);

    let t = Instant::now();
    let query: Vec<_> = language.par_iter().filter(|r| match_query(r, &queries)).cloned().collect();
    step("query", language.len(), query.len(), t);

    let t = Instant::now();
    let window: Vec<_> = match &cfg.window {
        Some(w) => query.iter().filter(|r| w.contains(&r.timestamp)).cloned().collect(),
        None => query.clone(),
    };
    step("window", query.len(), window.len(), t);

    let t = Instant::now();
    let deduped = remove_duplicates(window.clone(), cfg.dedup_mode());
    step("dedup", window.len(), deduped.len(), t);

    let t = Instant::now();
    let limited = limit_user_monthly(deduped.clone(), seed);
    step("monthly_limit", deduped.len(), limited.len(), t);

    Ok(FilterOutcome {
        language,
        query,
        window,
        deduped,
        limited,
        counts,
    })
}

pub fn filter_summary_text(counts: &[StageCount]) -> String {
    let mut out = String::from("stage          in         out        removed\n");
    for c in counts {
        let _ = writeln!(
            out,
            "{:<14} {:<10} {:<10} {}",
            c.stage,
            c.input,
            c.output,
            c.input.saturating_sub(c.output)
        );
    }
    out
}

/// Countries to analyse: the explicit list, or the largest by tweet count.
pub fn select_partitions(counts: &[(String, u64)], cfg: &PipelineConfig) -> Vec<Partition> {
    match &cfg.countries {
        Some(list) => list.iter().map(|c| Partition::new(c.trim().to_ascii_uppercase())).collect(),
        None => counts
            .iter()
            .filter(|(label, _)| label != NONE_DECLARED)
            .take(cfg.top_countries)
            .map(|(label, _)| Partition::new(label.clone()))
            .collect(),
    }
}

/// The analysed corpus: rate-limited tweets, their authors' countries, and
/// a term index whose document `i` is `records[i]`, labelled by country.
#[derive(Debug, Clone)]
pub struct AnalysisCorpus {
    pub records: Vec<TweetRecord>,
    pub authors: BTreeMap<String, CountryAssignment>,
    pub index: TermIndex,
}

impl AnalysisCorpus {
    pub fn new(records: Vec<TweetRecord>, authors: BTreeMap<String, CountryAssignment>) -> Self {
        let labels = records
            .iter()
            .map(|r| {
                authors
                    .get(&r.author_id)
                    .and_then(|a| a.country.as_ref())
                    .map(|c| Partition::new(c.as_str()))
            })
            .collect();
        let texts: Vec<&str> = records.iter().map(|r| r.text.as_str()).collect();
        let index = TermIndex::build(&texts, labels);
        AnalysisCorpus { records, authors, index }
    }

    /// Loads `limited.jsonl` and `authors.jsonl` from a run directory.
    pub fn load(dir: &Path) -> Result<Self, PipelineError> {
        let records = read_records(&dir.join(LIMITED_FILE))?;
        let authors = read_authors(&dir.join(AUTHORS_FILE))?;
        Ok(AnalysisCorpus::new(records, authors))
    }

    pub fn author_ids(&self) -> Vec<&str> {
        self.records.iter().map(|r| r.author_id.as_str()).collect()
    }

    pub fn country_counts(&self) -> Vec<(String, u64)> {
        tweet_counts_by_country(&self.records, &self.authors)
    }
}

pub fn read_authors(path: &Path) -> Result<BTreeMap<String, CountryAssignment>, PipelineError> {
    let text = fs::read_to_string(path).map_err(at("read"))?;
    text.lines()
        .filter(|l| !l.trim().is_empty())
        .map(|l| {
            let a: CountryAssignment = serde_json::from_str(l).map_err(at("read"))?;
            Ok((a.author_id.clone(), a))
        })
        .collect()
}

pub fn write_authors(path: &Path, authors: &BTreeMap<String, CountryAssignment>) -> Result<(), PipelineError> {
    write_jsonl(path, authors.values()).map_err(at("geo"))
}

pub fn write_countries(path: &Path, counts: &[(String, u64)], total: u64) -> Result<(), PipelineError> {
    let mut w = csv::Writer::from_path(path).map_err(at("geo"))?;
    w.write_record(["label", "count", "percent"]).map_err(at("geo"))?;
    for share in country_shares(counts, total) {
        w.write_record([share.label, share.count.to_string(), format!("{:.1}", share.percent)])
            .map_err(at("geo"))?;
    }
    w.flush().map_err(at("geo"))
}

pub fn comparison_for(mode: ComparisonMode, selected: &[Partition]) -> Comparison {
    match mode {
        ComparisonMode::Rest => Comparison::Rest,
        ComparisonMode::Selected => Comparison::Partitions(selected.to_vec()),
    }
}

/// Ranks terms for every selected partition, in parallel. Partitions absent
/// from the corpus get an empty list.
pub fn stats_stage(
    corpus: &AnalysisCorpus,
    selected: &[Partition],
    comparison: &Comparison,
    params: &RankParams,
) -> Result<BTreeMap<Partition, Vec<TermScore>>, PipelineError> {
    selected
        .par_iter()
        .map(|p| {
            if corpus.index.partition_size(p).is_none() {
                return Ok((p.clone(), Vec::new()));
            }
            let ranked = rank_terms(p, comparison, &corpus.index, params).map_err(at("stats"))?;
            Ok((p.clone(), ranked))
        })
        .collect()
}

pub fn term_list_path(dir: &Path, partition: &Partition) -> PathBuf {
    dir.join(TERMS_DIR).join(format!("{partition}.csv"))
}

pub fn write_term_lists(dir: &Path, lists: &BTreeMap<Partition, Vec<TermScore>>) -> Result<Vec<PathBuf>, PipelineError> {
    fs::create_dir_all(dir.join(TERMS_DIR)).map_err(at("stats"))?;
    let mut out = Vec::new();
    for (p, scores) in lists {
        let path = term_list_path(dir, p);
        let file = File::create(&path).map_err(at("stats"))?;
        write_term_list(BufWriter::new(file), scores).map_err(at("stats"))?;
        out.push(path);
    }
    fs::write(
        dir.join(PARTITIONS_FILE),
        serde_json::to_string_pretty(&lists.keys().collect::<Vec<_>>()).map_err(at("stats"))?,
    )
    .map_err(at("stats"))?;
    Ok(out)
}

/// Reads the term lists named in `partitions.json`.
pub fn read_term_lists(dir: &Path) -> Result<BTreeMap<Partition, Vec<TermScore>>, PipelineError> {
    let parts: Vec<Partition> =
        serde_json::from_slice(&fs::read(dir.join(PARTITIONS_FILE)).map_err(at("read"))?).map_err(at("read"))?;
    parts
        .into_iter()
        .map(|p| {
            let file = File::open(term_list_path(dir, &p)).map_err(at("read"))?;
            let scores = crate::termstats::read_term_list(BufReader::new(file), &p).map_err(at("read"))?;
            Ok((p, scores))
        })
        .collect()
}

pub fn gender_list_path(dir: &Path, partition: &Partition) -> PathBuf {
    dir.join(GENDER_DIR).join(format!("{partition}.csv"))
}

/// Per-country gender term lists.
pub type GenderLists = BTreeMap<Partition, GenderedTerms>;

pub fn gender_stage(
    corpus: &AnalysisCorpus,
    selected: &[Partition],
    lexicon: &GenderLexicon,
    params: &RankParams,
) -> Result<(GenderLists, BTreeMap<crate::gender::Gender, usize>), PipelineError> {
    let assignments = assign_genders(&corpus.records, lexicon);
    let authors = corpus.author_ids();
    let lists = selected
        .par_iter()
        .map(|p| {
            let terms = gendered_terms(p, &corpus.index, &authors, &assignments, params).map_err(at("gender"))?;
            Ok((p.clone(), terms))
        })
        .collect::<Result<BTreeMap<_, _>, PipelineError>>()?;
    Ok((lists, gender_summary(&assignments)))
}

pub fn write_gender_lists(dir: &Path, lists: &BTreeMap<Partition, GenderedTerms>) -> Result<Vec<PathBuf>, PipelineError> {
    fs::create_dir_all(dir.join(GENDER_DIR)).map_err(at("gender"))?;
    let mut out = Vec::new();
    for (p, terms) in lists {
        let path = gender_list_path(dir, p);
        let mut w = csv::Writer::from_path(&path).map_err(at("gender"))?;
        w.write_record(["direction", "rank", "term", "a", "b", "c", "d", "chi2", "p", "significant"])
            .map_err(at("gender"))?;
        for (direction, scores) in [("male", &terms.male), ("female", &terms.female)] {
            for s in scores {
                w.write_record([
                    direction.to_string(),
                    s.rank.to_string(),
                    s.term.clone(),
                    s.table.a.to_string(),
                    s.table.b.to_string(),
                    s.table.c.to_string(),
                    s.table.d.to_string(),
                    s.chi2.to_string(),
                    s.p_value.to_string(),
                    s.significant.to_string(),
                ])
                .map_err(at("gender"))?;
            }
        }
        w.flush().map_err(at("gender"))?;
        out.push(path);
    }
    Ok(out)
}

/// Reads a gendered term file back into its two directions.
pub fn read_gender_list(dir: &Path, partition: &Partition) -> Result<GenderedTerms, PipelineError> {
    let mut r = csv::Reader::from_path(gender_list_path(dir, partition)).map_err(at("read"))?;
    let mut out = GenderedTerms::default();
    for rec in r.records() {
        let rec = rec.map_err(at("read"))?;
        let field = |i: usize| rec.get(i).unwrap_or_default();
        let num = |i: usize| field(i).parse::<u64>().unwrap_or_default();
        let score = TermScore {
            term: field(2).to_string(),
            partition: Partition::new(field(0)),
            table: crate::termstats::ContingencyTable::new(num(3), num(4), num(5), num(6)),
            chi2: field(7).parse().unwrap_or_default(),
            p_value: field(8).parse().unwrap_or(1.0),
            significant: field(9) == "true",
            rank: num(1) as usize,
        };
        match field(0) {
            "male" => out.male.push(score),
            _ => out.female.push(score),
        }
    }
    Ok(out)
}

fn timed<T>(
    manifest: &mut RunManifest,
    name: &str,
    input: usize,
    f: impl FnOnce() -> Result<T, PipelineError>,
    output: impl Fn(&T) -> usize,
) -> Result<T, PipelineError> {
    let t = Instant::now();
    let value = f()?;
    manifest.stages.push(StageCount {
        stage: name.to_string(),
        input,
        output: output(&value),
        millis: t.elapsed().as_millis(),
    });
    Ok(value)
}

/// Runs every stage and writes the run directory `config.out`.
///
/// On failure the manifest is still written, with `complete: false` and the
/// failing stage, so partial outputs are identifiable.
pub fn run_pipeline(config: &PipelineConfig) -> Result<RunManifest, PipelineError> {
    config.validate()?;
    let out = config.out.clone();
    fs::create_dir_all(&out).map_err(at("setup"))?;
    let mut manifest = RunManifest {
        complete: false,
        failed_stage: None,
        inputs: Vec::new(),
        config: config.clone(),
        seed: config.seed,
        stages: Vec::new(),
        partitions: Vec::new(),
        outputs: Vec::new(),
    };
    let result = run_stages(config, &out, &mut manifest);
    if let Err(PipelineError::Stage { stage, .. }) = &result {
        manifest.failed_stage = Some(stage.to_string());
    }
    manifest.complete = result.is_ok();
    let text = serde_json::to_string_pretty(&manifest).map_err(at("manifest"))?;
    fs::write(out.join(MANIFEST_FILE), text + "\n").map_err(at("manifest"))?;
    result.map(|_| manifest)
}

fn run_stages(config: &PipelineConfig, out: &Path, manifest: &mut RunManifest) -> Result<(), PipelineError> {
    for path in &config.inputs {
        let d = digest_file(path, path.display().to_string()).map_err(at("ingest"))?;
        manifest.inputs.push(d);
    }

    let (records, report, lines) = timed(
        manifest,
        "ingest",
        0,
        || ingest_stage(&config.inputs),
        |(recs, _, _)| recs.len(),
    )?;
    if let Some(s) = manifest.stages.last_mut() {
        s.input = lines;
    }
    write_record_file(&out.join(PARSED_FILE), &records)?;
    fs::write(
        out.join(INGEST_REPORT_FILE),
        serde_json::to_string_pretty(&report).map_err(at("ingest"))?,
    )
    .map_err(at("ingest"))?;

    let filtered = filter_stage(records, config)?;
    manifest.stages.extend(filtered.counts.iter().cloned());
    write_record_file(&out.join(FILTERED_FILE), &filtered.window)?;
    write_record_file(&out.join(DEDUPED_FILE), &filtered.deduped)?;
    write_record_file(&out.join(LIMITED_FILE), &filtered.limited)?;
    fs::write(out.join(FILTER_SUMMARY_FILE), filter_summary_text(&filtered.counts)).map_err(at("filter"))?;

    let gazetteer = config.load_gazetteer()?;
    let limited = filtered.limited;
    let authors = timed(
        manifest,
        "geo",
        limited.len(),
        || Ok(assign_authors(&limited, &gazetteer)),
        |a| a.values().filter(|x| x.country.is_some()).count(),
    )?;
    write_authors(&out.join(AUTHORS_FILE), &authors)?;

    let corpus = AnalysisCorpus::new(limited, authors);
    let counts = corpus.country_counts();
    write_countries(&out.join(COUNTRIES_FILE), &counts, corpus.records.len() as u64)?;
    let selected = select_partitions(&counts, config);
    manifest.partitions = selected.clone();

    let comparison = comparison_for(config.comparison, &selected);
    let params = config.rank_params();
    let lists = timed(
        manifest,
        "stats",
        corpus.records.len(),
        || stats_stage(&corpus, &selected, &comparison, &params),
        |l| l.values().map(Vec::len).sum(),
    )?;
    let mut written = write_term_lists(out, &lists)?;

    if let Some(path) = &config.gender_lexicon {
        let lexicon = GenderLexicon::load(path).map_err(at("gender"))?;
        let (gender_lists, summary) = timed(
            manifest,
            "gender",
            corpus.records.len(),
            || gender_stage(&corpus, &selected, &lexicon, &params),
            |(l, _)| l.values().map(|g| g.male.len() + g.female.len()).sum(),
        )?;
        written.extend(write_gender_lists(out, &gender_lists)?);
        fs::write(
            out.join(GENDER_DIR).join("summary.json"),
            serde_json::to_string_pretty(&summary).map_err(at("gender"))?,
        )
        .map_err(at("gender"))?;
    }

    for path in written {
        let rel = path.strip_prefix(out).unwrap_or(&path).display().to_string();
        manifest.outputs.push(digest_file(&path, rel).map_err(at("manifest"))?);
    }
    Ok(())
}
