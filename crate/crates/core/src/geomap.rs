//! Country assignment from free-text profile locations.
//!
//! Locations are split on commas (and `;`, `|`, `/`) into segments, and each
//! segment into whitespace tokens with edge punctuation trimmed. Within a
//! segment, phrases are taken greedily left to right, longest gazetteer entry
//! first, so "New South Wales" is one phrase and never yields "wales". A
//! country phrase anywhere in the location beats any city phrase; otherwise
//! the leftmost phrase wins.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::BufRead;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::TweetRecord;

const STARTER: &str = include_str!("../data/starter_gazetteer.csv");

#[derive(Debug, Error)]
pub enum GazetteerError {
    #[error("failed to read gazetteer: {0}")]
    Io(#[from] std::io::Error),
    #[error("gazetteer line {line}: {reason}")]
    Malformed { line: usize, reason: String },
    #[error("city {name:?} maps to both {first} and {second}")]
    ConflictingCity {
        name: String,
        first: CountryCode,
        second: CountryCode,
    },
    #[error("country name {name:?} maps to both {first} and {second}")]
    ConflictingCountry {
        name: String,
        first: CountryCode,
        second: CountryCode,
    },
}

/// ISO 3166 alpha-2 code, stored uppercase.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub struct CountryCode(String);

impl CountryCode {
    pub fn parse(raw: &str) -> Option<Self> {
        let raw = raw.trim();
        (raw.len() == 2 && raw.bytes().all(|b| b.is_ascii_alphabetic()))
            .then(|| CountryCode(raw.to_ascii_uppercase()))
    }

    pub fn as_str(&self) -> &str {
        &self.0
    }
}

impl TryFrom<String> for CountryCode {
    type Error = String;

    fn try_from(value: String) -> Result<Self, Self::Error> {
        CountryCode::parse(&value).ok_or_else(|| format!("not an ISO 3166 alpha-2 code: {value:?}"))
    }
}

impl From<CountryCode> for String {
    fn from(code: CountryCode) -> String {
        code.0
    }
}

impl fmt::Display for CountryCode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PlaceKind {
    Country,
    City,
}

#[derive(Debug, Clone, Default)]
pub struct Gazetteer {
    country_names: HashMap<String, CountryCode>,
    city_names: HashMap<String, CountryCode>,
    longest_phrase: usize,
}

fn segments(text: &str) -> impl Iterator<Item = Vec<String>> + '_ {
    text.split([',', ';', '|', '/'])
        .map(|seg| {
            seg.split_whitespace()
                .map(|tok| tok.trim_matches(|c: char| !c.is_alphanumeric()).to_lowercase())
                .filter(|tok| !tok.is_empty())
                .collect::<Vec<_>>()
        })
        .filter(|tokens| !tokens.is_empty())
}

fn normalize_name(name: &str) -> Option<String> {
    let mut segs = segments(name);
    let first = segs.next()?;
    segs.next().is_none().then(|| first.join(" "))
}

impl Gazetteer {
    /// Gazetteer bundled with the crate: the eight analysed countries (plus
    /// Germany and Pakistan), common aliases, and large unambiguous places.
    pub fn starter() -> Self {
        Gazetteer::from_reader(STARTER.as_bytes()).expect("bundled gazetteer is valid")
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, GazetteerError> {
        let file = std::fs::File::open(path)?;
        Gazetteer::from_reader(std::io::BufReader::new(file))
    }

    /// Reads `name,ISO2,kind` lines. Blank lines and `#` comments are skipped,
    /// as is a leading `name,iso2,kind` header.
    pub fn from_reader<R: BufRead>(reader: R) -> Result<Self, GazetteerError> {
        let mut g = Gazetteer::default();
        for (i, line) in reader.lines().enumerate() {
            let line = line?;
            let lineno = i + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with('#') {
                continue;
            }
            let fields: Vec<&str> = trimmed.split(',').map(str::trim).collect();
            if lineno == 1 && fields.first().is_some_and(|f| f.eq_ignore_ascii_case("name")) {
                continue;
            }
            let malformed = |reason: String| GazetteerError::Malformed { line: lineno, reason };
            let [name, code, kind] = fields[..] else {
                return Err(malformed(format!("expected 3 fields, found {}", fields.len())));
            };
            let name = normalize_name(name)
                .ok_or_else(|| malformed(format!("unusable place name {name:?}")))?;
            let code = CountryCode::parse(code)
                .ok_or_else(|| malformed(format!("bad country code {code:?}")))?;
            let kind = match kind.to_ascii_lowercase().as_str() {
                "country" => PlaceKind::Country,
                "city" => PlaceKind::City,
                other => return Err(malformed(format!("unknown kind {other:?}"))),
            };
            g.insert(name, code, kind)?;
        }
        if g.is_empty() {
            log::warn!("gazetteer is empty; every location will be unassigned");
        }
        Ok(g)
    }

    fn insert(&mut self, name: String, code: CountryCode, kind: PlaceKind) -> Result<(), GazetteerError> {
        let map = match kind {
            PlaceKind::Country => &mut self.country_names,
            PlaceKind::City => &mut self.city_names,
        };
        if let Some(existing) = map.get(&name) {
            if *existing != code {
                let (first, second) = (existing.clone(), code);
                return Err(match kind {
                    PlaceKind::Country => GazetteerError::ConflictingCountry { name, first, second },
                    PlaceKind::City => GazetteerError::ConflictingCity { name, first, second },
                });
            }
            return Ok(());
        }
        self.longest_phrase = self.longest_phrase.max(name.split(' ').count());
        map.insert(name, code);
        Ok(())
    }

    pub fn is_empty(&self) -> bool {
        self.country_names.is_empty() && self.city_names.is_empty()
    }

    pub fn len(&self) -> usize {
        self.country_names.len() + self.city_names.len()
    }

    pub fn country(&self, name: &str) -> Option<&CountryCode> {
        self.country_names.get(name)
    }

    pub fn city(&self, name: &str) -> Option<&CountryCode> {
        self.city_names.get(name)
    }

    fn phrase_kind(&self, phrase: &str) -> Option<(PlaceKind, &CountryCode)> {
        self.country_names
            .get(phrase)
            .map(|c| (PlaceKind::Country, c))
            .or_else(|| self.city_names.get(phrase).map(|c| (PlaceKind::City, c)))
    }

    /// Resolves a location string to a country and the entry that fired.
    pub fn lookup(&self, location: &str) -> Option<(CountryCode, String)> {
        let mut first_city: Option<(CountryCode, String)> = None;
        for tokens in segments(location) {
            let mut i = 0;
            while i < tokens.len() {
                let max_len = self.longest_phrase.min(tokens.len() - i);
                let hit = (1..=max_len).rev().find_map(|len| {
                    let phrase = tokens[i..i + len].join(" ");
                    self.phrase_kind(&phrase).map(|(kind, code)| (len, kind, code.clone(), phrase))
                });
                match hit {
                    Some((_, PlaceKind::Country, code, phrase)) => return Some((code, phrase)),
                    Some((len, PlaceKind::City, code, phrase)) => {
                        first_city.get_or_insert((code, phrase));
                        i += len;
                    }
                    None => i += 1,
                }
            }
        }
        first_city
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CountryAssignment {
    pub author_id: String,
    pub country: Option<CountryCode>,
    pub matched_token: Option<String>,
}

pub fn assign_country(author_id: &str, location: &str, g: &Gazetteer) -> CountryAssignment {
    let (country, matched_token) = match g.lookup(location) {
        Some((code, phrase)) => (Some(code), Some(phrase)),
        None => (None, None),
    };
    CountryAssignment {
        author_id: author_id.to_string(),
        country,
        matched_token,
    }
}

/// Assigns every author once, from the location on their latest tweet.
pub fn assign_authors(records: &[TweetRecord], g: &Gazetteer) -> BTreeMap<String, CountryAssignment> {
    let mut latest: BTreeMap<&str, &TweetRecord> = BTreeMap::new();
    for rec in records {
        latest
            .entry(rec.author_id.as_str())
            .and_modify(|cur| {
                if (rec.timestamp, &rec.tweet_id) > (cur.timestamp, &cur.tweet_id) {
                    *cur = rec;
                }
            })
            .or_insert(rec);
    }
    latest
        .into_iter()
        .map(|(author, rec)| (author.to_string(), assign_country(author, &rec.author_location, g)))
        .collect()
}

/// One row of a country distribution table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CountryShare {
    pub label: String,
    pub count: u64,
    pub percent: f64,
}

/// Percentages of `total` for each labelled count, in the given order.
pub fn country_shares(counts: &[(String, u64)], total: u64) -> Vec<CountryShare> {
    counts
        .iter()
        .map(|(label, count)| CountryShare {
            label: label.clone(),
            count: *count,
            percent: if total == 0 {
                0.0
            } else {
                100.0 * *count as f64 / total as f64
            },
        })
        .collect()
}

/// Label used for tweets whose author has no assigned country.
pub const NONE_DECLARED: &str = "none";

/// Tweet counts per country (and [`NONE_DECLARED`]), largest first, ties by
/// label.
pub fn tweet_counts_by_country(
    records: &[TweetRecord],
    assignments: &BTreeMap<String, CountryAssignment>,
) -> Vec<(String, u64)> {
    let mut counts: BTreeMap<String, u64> = BTreeMap::new();
    for rec in records {
        let label = assignments
            .get(&rec.author_id)
            .and_then(|a| a.country.as_ref())
            .map_or(NONE_DECLARED.to_string(), |c| c.to_string());
        *counts.entry(label).or_default() += 1;
    }
    let mut rows: Vec<_> = counts.into_iter().collect();
    rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    rows
}
