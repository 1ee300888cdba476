//! Archived tweet ingestion and the keyword, language and date filters.
//!
//! Input is newline-delimited JSON, one tweet object per line:
//!
//! ```text
//! {"id":"1","text":"...","author_id":"9","author_location":"Lagos","author_bio":"","created_at":"2021-01-04T10:00:00Z","lang":"en"}
//! ```
//!
//! `author_location`, `author_bio` and `author_name` are optional.

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt;
use std::io::{BufRead, Write};

use chrono::{DateTime, NaiveDate, SecondsFormat, Utc};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::text;

/// Keywords used to collect the vaccine corpus.
pub const DEFAULT_QUERIES: [&str; 7] = [
    "vaccine",
    "vaccination",
    "vaccinating",
    "vaccinated",
    "covidvaccination",
    "covidvaccine",
    "covidvaccinefacts",
];

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("failed to read input: {0}")]
    Io(#[from] std::io::Error),
    #[error("failed to serialize record: {0}")]
    Serialize(#[from] serde_json::Error),
    #[error("invalid query keyword {0:?}: keywords are single non-empty tokens")]
    BadQuery(String),
    #[error("query set is empty")]
    EmptyQuerySet,
    #[error("collection window starts after it ends ({from} > {to})")]
    BadWindow { from: NaiveDate, to: NaiveDate },
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TweetRecord {
    #[serde(rename = "id")]
    pub tweet_id: String,
    pub text: String,
    pub author_id: String,
    #[serde(default)]
    pub author_location: String,
    #[serde(default)]
    pub author_bio: String,
    /// Display name; only the gender stage reads it.
    #[serde(default, skip_serializing_if = "String::is_empty")]
    pub author_name: String,
    #[serde(rename = "created_at", with = "timestamp_format")]
    pub timestamp: DateTime<Utc>,
    #[serde(rename = "lang")]
    pub language: String,
}

mod timestamp_format {
    use chrono::{DateTime, SecondsFormat, Utc};
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(ts: &DateTime<Utc>, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&ts.to_rfc3339_opts(SecondsFormat::AutoSi, true))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<DateTime<Utc>, D::Error> {
        let raw = String::deserialize(d)?;
        super::parse_timestamp(&raw).ok_or_else(|| serde::de::Error::custom("bad timestamp"))
    }
}

fn parse_timestamp(raw: &str) -> Option<DateTime<Utc>> {
    DateTime::parse_from_rfc3339(raw.trim())
        .ok()
        .map(|ts| ts.with_timezone(&Utc))
}

impl TweetRecord {
    /// Serializes the record as one input-format line (no trailing newline).
    pub fn to_line(&self) -> String {
        // Every field is a plain string; serialization cannot fail.
        serde_json::to_string(self).expect("tweet record serializes")
    }

    pub fn created_at_string(&self) -> String {
        self.timestamp.to_rfc3339_opts(SecondsFormat::AutoSi, true)
    }
}

/// Why a line was skipped.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SkipReason {
    BlankLine,
    InvalidJson,
    MissingField,
    EmptyId,
    BadTimestamp,
    DuplicateId,
}

impl SkipReason {
    pub fn as_str(self) -> &'static str {
        match self {
            SkipReason::BlankLine => "blank_line",
            SkipReason::InvalidJson => "invalid_json",
            SkipReason::MissingField => "missing_field",
            SkipReason::EmptyId => "empty_id",
            SkipReason::BadTimestamp => "bad_timestamp",
            SkipReason::DuplicateId => "duplicate_id",
        }
    }
}

impl fmt::Display for SkipReason {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Counts of skipped lines by reason. Reports from separate chunks merge
/// associatively.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct IngestReport {
    pub skipped: BTreeMap<SkipReason, usize>,
}

impl IngestReport {
    pub fn record(&mut self, reason: SkipReason) {
        *self.skipped.entry(reason).or_default() += 1;
    }

    pub fn count(&self, reason: SkipReason) -> usize {
        self.skipped.get(&reason).copied().unwrap_or(0)
    }

    pub fn total(&self) -> usize {
        self.skipped.values().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.total() == 0
    }

    pub fn merge(mut self, other: IngestReport) -> IngestReport {
        for (reason, n) in other.skipped {
            *self.skipped.entry(reason).or_default() += n;
        }
        self
    }
}

#[derive(Deserialize)]
struct RawRecord {
    id: Option<RawId>,
    text: Option<String>,
    author_id: Option<RawId>,
    #[serde(default)]
    author_location: Option<String>,
    #[serde(default)]
    author_bio: Option<String>,
    #[serde(default)]
    author_name: Option<String>,
    created_at: Option<String>,
    lang: Option<String>,
}

/// Archives differ on whether ids are strings or integers.
#[derive(Deserialize)]
#[serde(untagged)]
enum RawId {
    Str(String),
    Int(u64),
}

impl RawId {
    fn into_string(self) -> String {
        match self {
            RawId::Str(s) => s,
            RawId::Int(n) => n.to_string(),
        }
    }
}

/// Parses a single input line. Duplicate ids are a corpus-level property and
/// are not checked here.
pub fn parse_line(line: &str) -> Result<TweetRecord, SkipReason> {
    if line.trim().is_empty() {
        return Err(SkipReason::BlankLine);
    }
    let raw: RawRecord = serde_json::from_str(line).map_err(|_| SkipReason::InvalidJson)?;
    let (Some(id), Some(text), Some(author_id), Some(created_at), Some(lang)) =
        (raw.id, raw.text, raw.author_id, raw.created_at, raw.lang)
    else {
        return Err(SkipReason::MissingField);
    };
    let tweet_id = id.into_string();
    if tweet_id.trim().is_empty() {
        return Err(SkipReason::EmptyId);
    }
    let timestamp = parse_timestamp(&created_at).ok_or(SkipReason::BadTimestamp)?;
    Ok(TweetRecord {
        tweet_id,
        text,
        author_id: author_id.into_string(),
        author_location: raw.author_location.unwrap_or_default(),
        author_bio: raw.author_bio.unwrap_or_default(),
        author_name: raw.author_name.unwrap_or_default(),
        timestamp,
        language: lang,
    })
}

/// Parses a newline-delimited tweet stream.
///
/// Malformed lines are skipped and counted; only a read failure is fatal.
/// The first occurrence of a tweet id wins; later repeats are reported as
/// [`SkipReason::DuplicateId`].
pub fn parse_tweet_stream<R: BufRead>(
    reader: R,
) -> Result<(Vec<TweetRecord>, IngestReport), IngestError> {
    let lines = reader.lines().collect::<Result<Vec<_>, _>>()?;
    let parsed: Vec<Result<TweetRecord, SkipReason>> =
        lines.par_iter().map(|line| parse_line(line)).collect();

    let mut report = IngestReport::default();
    let mut seen = HashSet::new();
    let mut records = Vec::with_capacity(parsed.len());
    for outcome in parsed {
        match outcome {
            Ok(rec) if !seen.insert(rec.tweet_id.clone()) => report.record(SkipReason::DuplicateId),
            Ok(rec) => records.push(rec),
            Err(reason) => report.record(reason),
        }
    }
    Ok((records, report))
}

pub fn write_records<W: Write>(mut out: W, records: &[TweetRecord]) -> Result<(), IngestError> {
    for rec in records {
        serde_json::to_writer(&mut out, rec)?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Lowercase single-token collection keywords.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuerySet {
    keywords: BTreeSet<String>,
}

impl QuerySet {
    pub fn new<I, S>(keywords: I) -> Result<Self, IngestError>
    where
        I: IntoIterator<Item = S>,
        S: AsRef<str>,
    {
        let mut set = BTreeSet::new();
        for kw in keywords {
            let kw = kw.as_ref();
            let normalized = kw.trim().trim_start_matches('#').to_lowercase();
            if normalized.is_empty() || normalized.chars().any(char::is_whitespace) {
                return Err(IngestError::BadQuery(kw.to_string()));
            }
            set.insert(normalized);
        }
        if set.is_empty() {
            return Err(IngestError::EmptyQuerySet);
        }
        Ok(QuerySet { keywords: set })
    }

    pub fn keywords(&self) -> impl Iterator<Item = &str> {
        self.keywords.iter().map(String::as_str)
    }

    pub fn contains(&self, term: &str) -> bool {
        self.keywords.contains(term)
    }
}

impl Default for QuerySet {
    fn default() -> Self {
        QuerySet::new(DEFAULT_QUERIES).expect("default queries are valid")
    }
}

/// True when some whole token of the text equals a keyword, ignoring case and
/// a leading `#`.
pub fn match_query(record: &TweetRecord, queries: &QuerySet) -> bool {
    text::terms(&record.text).any(|term| queries.contains(term.strip_prefix('#').unwrap_or(&term)))
}

fn primary_subtag(tag: &str) -> &str {
    tag.trim().split(['-', '_']).next().unwrap_or("")
}

/// Compares primary language subtags, so `en-GB` passes an `en` filter.
pub fn filter_language(record: &TweetRecord, lang: &str) -> bool {
    let want = primary_subtag(lang);
    !want.is_empty() && primary_subtag(&record.language).eq_ignore_ascii_case(want)
}

/// Inclusive pair of UTC calendar dates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct CollectionWindow {
    pub from: NaiveDate,
    pub to: NaiveDate,
}

impl CollectionWindow {
    pub fn new(from: NaiveDate, to: NaiveDate) -> Result<Self, IngestError> {
        if from > to {
            return Err(IngestError::BadWindow { from, to });
        }
        Ok(CollectionWindow { from, to })
    }

    /// 5 December 2020 to 21 March 2021.
    pub fn vaccine_collection() -> Self {
        CollectionWindow {
            from: NaiveDate::from_ymd_opt(2020, 12, 5).unwrap(),
            to: NaiveDate::from_ymd_opt(2021, 3, 21).unwrap(),
        }
    }

    pub fn contains(&self, ts: &DateTime<Utc>) -> bool {
        let day = ts.date_naive();
        self.from <= day && day <= self.to
    }
}
